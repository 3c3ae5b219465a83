"""Borda counts, objective ranks, and their per-step changes.

The Borda count H of a point in one dimension is its total pairwise-victory
score against every other valid point (1 per win, 0.5 per tie). The
objective rank R rebuilds the ranking from the normalized pairwise margins
alpha, scaled onto the Borda range:

    R_A = (N - 1) / 2 + 0.5 * sum_B alpha(A, B)

so that R equals H exactly when every margin saturates to +-1. For a margin
matrix built from a single value channel the cyclic (Condorcet) component is
zero, which makes this row-sum projection the full objective rank.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .exceptions import (
    AlignmentError,
    DegenerateInputError,
    RankUnavailableError,
)
from .frames import Frame
from .normalize import EPS_DENOMINATOR, DatumFit, alpha_matrix, fit_global_datum


def borda_count(values: np.ndarray, valid: np.ndarray | None = None) -> np.ndarray:
    """Pairwise-victory Borda count per point.

    Equivalent to the average-tie competition rank minus one, which gives
    wins 1, ties 0.5, losses 0 against every other valid point. Invalid
    points get NaN. Raises :class:`DegenerateInputError` with fewer than two
    valid points.
    """
    u = np.asarray(values, dtype=float)
    if valid is None:
        valid = np.ones(u.shape, dtype=bool)
    valid = np.asarray(valid, dtype=bool)
    if valid.sum() < 2:
        raise DegenerateInputError("Borda count needs at least two valid points")
    h = np.full(u.shape, np.nan)
    h[valid] = rankdata(u[valid], method="average") - 1.0
    return h


def objective_rank(
    values: np.ndarray,
    valid: np.ndarray | None = None,
    m_bar: float = 0.0,
    eps_den: float = EPS_DENOMINATOR,
) -> np.ndarray:
    """Objective rank per point from normalized pairwise margins.

    Degenerate pairs (denominator within the guard) are skipped in the sum;
    a point whose every pair is degenerate gets NaN and is excluded from the
    downstream stages for this dimension. If that happens to every point,
    :class:`RankUnavailableError` is raised.
    """
    u = np.asarray(values, dtype=float)
    if valid is None:
        valid = np.ones(u.shape, dtype=bool)
    valid = np.asarray(valid, dtype=bool)
    n = int(valid.sum())
    if n < 2:
        raise DegenerateInputError("objective rank needs at least two valid points")
    alpha, ok = alpha_matrix(u[valid], m_bar, eps_den)
    usable = ok.any(axis=1)
    if not usable.any():
        raise RankUnavailableError("every pair of every point is degenerate")
    sums = np.where(ok, alpha, 0.0).sum(axis=1)
    r_valid = (n - 1) / 2.0 + 0.5 * sums
    r_valid[~usable] = np.nan
    r = np.full(u.shape, np.nan)
    r[valid] = r_valid
    return r


def delta_borda(prev_h: np.ndarray, cur_h: np.ndarray) -> np.ndarray:
    """Change of the Borda count across an analyzed pair.

    Both inputs must cover the same point set: NaN patterns (invalid points)
    have to match, otherwise :class:`AlignmentError` is raised.
    """
    prev_h = np.asarray(prev_h, dtype=float)
    cur_h = np.asarray(cur_h, dtype=float)
    if prev_h.shape != cur_h.shape:
        raise AlignmentError("Borda vectors differ in length")
    if not np.array_equal(np.isnan(prev_h), np.isnan(cur_h)):
        raise AlignmentError("frames do not share the same valid-point set")
    return cur_h - prev_h


@dataclass
class RankTable:
    """Per-dimension rank state for one analyzed frame pair.

    All arrays have shape (n_points, n_dims) with NaN at invalid points;
    ``valid`` is the shared validity mask of the pair.
    """

    valid: np.ndarray
    h_prev: np.ndarray
    h_cur: np.ndarray
    r_cur: np.ndarray
    delta_h: np.ndarray
    datum: list[DatumFit]

    @property
    def n_points(self) -> int:
        return self.valid.shape[0]

    @property
    def n_dims(self) -> int:
        return self.h_cur.shape[1]

    @property
    def n_valid(self) -> int:
        return int(self.valid.sum())


def build_rank_table(
    prev: Frame,
    cur: Frame,
    eps_den: float = EPS_DENOMINATOR,
    datum_fallback_zero: bool = False,
) -> RankTable:
    """Datum fit, Borda counts, objective ranks, and deltas for a pair.

    The datum and objective rank are computed on the current frame (the
    later one); the delta spans the pair. Frames must share grid shape and
    validity mask.
    """
    if prev.values.shape != cur.values.shape:
        raise AlignmentError("frames of a pair must share the grid shape")
    if not np.array_equal(prev.mask, cur.mask):
        raise AlignmentError("frames of a pair must share the valid-point set")

    n_dims = cur.n_channels
    n_points = cur.n_points
    valid = cur.flat_mask()
    h_prev = np.empty((n_points, n_dims))
    h_cur = np.empty((n_points, n_dims))
    r_cur = np.empty((n_points, n_dims))
    delta = np.empty((n_points, n_dims))
    datum: list[DatumFit] = []
    for d in range(n_dims):
        fit = fit_global_datum(
            cur, d, eps_den=eps_den, fallback_zero=datum_fallback_zero
        )
        datum.append(fit)
        h_prev[:, d] = borda_count(prev.flat_values(d), valid)
        h_cur[:, d] = borda_count(cur.flat_values(d), valid)
        r_cur[:, d] = objective_rank(cur.flat_values(d), valid, fit.m_bar, eps_den)
        delta[:, d] = delta_borda(h_prev[:, d], h_cur[:, d])
    return RankTable(
        valid=valid,
        h_prev=h_prev,
        h_cur=h_cur,
        r_cur=r_cur,
        delta_h=delta,
        datum=datum,
    )
