"""Zoom-out aggregation pyramid and the critical chain length construction.

The observation window is aggregated into coarser frames: level 0 is the raw
window (aggregation factor 1), each subsequent level merges 2x2 blocks of
the previous level by channel mean (odd edges absorb into the last block),
and a final forced level partitions the raw window into a 3x3 block grid.
The full per-pair analysis is re-run at every level; per (dimension, root)
the levels record the mean |kappa| and the mean magnitudes of the threshold
curvatures 1/L and 1/Ltilde.

The residual curvature is the mean |kappa| of the coarsest level. The
critical chain length mirrors the kappa-vs-log(factor) polyline about
log(factor) = 0, extends the level-0 threshold value leftward as a
horizontal line, and converts the first crossing (scanning leftward) back to
a point count: the crossing position exp(ell) is the fractional point count
relative to the aggregated frame, and scaling by
(total points / coarsest-level points) converts it to raw-frame points.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import ZoomOutUnavailableError
from .frames import Frame

log = logging.getLogger(__name__)

#: baseline guard for residual-drop denominators
EPS_RESIDUAL = 1e-12

#: signature of the per-pair statistics callback injected by the pipeline:
#: (prev, cur) -> (mean_abs_kappa, mean_kappa_short, mean_kappa_long),
#: each of shape (n_dims, n_roots)
PairStats = Callable[[Frame, Frame], tuple[np.ndarray, np.ndarray, np.ndarray]]


def halving_blocks(n: int) -> list[slice]:
    """2-wide blocks along one axis; an odd trailing edge joins the last block."""
    n_blocks = max(1, n // 2)
    return [
        slice(2 * i, 2 * (i + 1) if i < n_blocks - 1 else n) for i in range(n_blocks)
    ]


def thirds_blocks(n: int) -> list[slice]:
    """Exactly three blocks along one axis; the remainder joins the last block."""
    if n < 3:
        raise ZoomOutUnavailableError(f"cannot split {n} rows/cols into 3 blocks")
    base = n // 3
    edges = [0, base, 2 * base, n]
    return [slice(edges[i], edges[i + 1]) for i in range(3)]


def aggregate_frame(frame: Frame, row_blocks: list[slice], col_blocks: list[slice]) -> Frame:
    """Block-mean aggregation of a frame; a block is valid when any member is."""
    n_r, n_c = len(row_blocks), len(col_blocks)
    values = np.full((n_r, n_c, frame.n_channels), np.nan)
    mask = np.zeros((n_r, n_c), dtype=bool)
    for i, rs in enumerate(row_blocks):
        for j, cs in enumerate(col_blocks):
            sub_mask = frame.mask[rs, cs]
            if sub_mask.any():
                sub = frame.values[rs, cs][sub_mask]
                values[i, j] = sub.mean(axis=0)
                mask[i, j] = True
            else:
                values[i, j] = [np.nan] * (frame.n_channels - 1) + [-1.0]
    return Frame(time_index=frame.time_index, values=values, mask=mask)


def pyramid_grids(height: int, width: int) -> list[tuple[int, int]]:
    """Grid shape of every pyramid level, finest first, forced 3x3 last.

    The 2x2 cascade continues while the next level would keep more than 9
    points; the 3x3 partition of the raw window is appended unless the raw
    window already is 3x3. Windows smaller than 3x3 are rejected.
    """
    if height < 3 or width < 3:
        raise ZoomOutUnavailableError(
            f"window {height}x{width} is too small to zoom out (need 3x3)"
        )
    grids = [(height, width)]
    rows, cols = height, width
    while True:
        nxt = (max(1, rows // 2), max(1, cols // 2))
        if nxt[0] * nxt[1] <= 9:
            break
        grids.append(nxt)
        rows, cols = nxt
    if grids != [(3, 3)]:
        grids.append((3, 3))
    return grids


def _pyramid_pairs(prev: Frame, cur: Frame) -> list[tuple[Frame, Frame]]:
    """Aggregated frame pairs for every pyramid level, finest first."""
    grids = pyramid_grids(prev.height, prev.width)
    pairs = [(prev, cur)]
    fp, fc = prev, cur
    for rows, cols in grids[1:-1] if len(grids) > 1 else []:
        rb, cb = halving_blocks(fp.height), halving_blocks(fp.width)
        fp = aggregate_frame(fp, rb, cb)
        fc = aggregate_frame(fc, rb, cb)
        if (fp.height, fp.width) != (rows, cols):
            raise AssertionError("pyramid plan drifted from the aggregation")
        pairs.append((fp, fc))
    if len(grids) > 1:
        rb, cb = thirds_blocks(prev.height), thirds_blocks(prev.width)
        pairs.append(
            (aggregate_frame(prev, rb, cb), aggregate_frame(cur, rb, cb))
        )
    return pairs


@dataclass
class ZoomOutProfile:
    """Per-level curvature statistics and the derived critical quantities.

    Level arrays are stacked (n_levels, n_dims, n_roots); ``factors`` holds
    the aggregation factor of each level (raw points per aggregated point),
    starting at 1.
    """

    factors: np.ndarray
    grids: list[tuple[int, int]]
    mean_abs_kappa: np.ndarray
    mean_kappa_short: np.ndarray
    mean_kappa_long: np.ndarray
    residual: np.ndarray  # (n_dims, n_roots)
    critical_short: np.ndarray  # (n_dims, n_roots)
    critical_long: np.ndarray  # (n_dims, n_roots)
    total_points: int
    level_pairs: list[tuple[Frame, Frame]] | None = field(default=None, repr=False)

    @property
    def n_levels(self) -> int:
        return len(self.factors)


def build_zoom_profiles(
    prev: Frame,
    cur: Frame,
    pair_stats: PairStats,
    keep_frames: bool = False,
) -> ZoomOutProfile:
    """Run the aggregation pyramid and collect per-level statistics."""
    total_points = prev.n_points
    pairs = _pyramid_pairs(prev, cur)
    factors = []
    grids = []
    stats_k, stats_s, stats_l = [], [], []
    for fp, fc in pairs:
        k, s, l = pair_stats(fp, fc)
        stats_k.append(k)
        stats_s.append(s)
        stats_l.append(l)
        grids.append((fp.height, fp.width))
        factors.append(total_points / fp.n_points)
    mean_abs_kappa = np.stack(stats_k)
    mean_kappa_short = np.stack(stats_s)
    mean_kappa_long = np.stack(stats_l)

    n_dims, n_roots = mean_abs_kappa.shape[1:]
    critical_short = np.empty((n_dims, n_roots))
    critical_long = np.empty((n_dims, n_roots))
    fac = np.asarray(factors)
    for d in range(n_dims):
        for k in range(n_roots):
            critical_short[d, k] = polyline_chain_length(
                fac, mean_abs_kappa[:, d, k], mean_kappa_short[0, d, k], total_points
            )
            critical_long[d, k] = polyline_chain_length(
                fac, mean_abs_kappa[:, d, k], mean_kappa_long[0, d, k], total_points
            )
    return ZoomOutProfile(
        factors=fac,
        grids=grids,
        mean_abs_kappa=mean_abs_kappa,
        mean_kappa_short=mean_kappa_short,
        mean_kappa_long=mean_kappa_long,
        residual=mean_abs_kappa[-1].copy(),
        critical_short=critical_short,
        critical_long=critical_long,
        total_points=total_points,
        level_pairs=pairs if keep_frames else None,
    )


def residual_curvature(profile: ZoomOutProfile, dim: int, root: int) -> float:
    """Magnitude of the coarsest-level mean |kappa| for one (dimension, root)."""
    return float(abs(profile.residual[dim, root]))


def polyline_chain_length(
    factors: np.ndarray,
    kappas: np.ndarray,
    threshold: float,
    total_points: int,
) -> float:
    """Critical chain length from the mirrored kappa polyline.

    The level polyline is mirrored about log(factor) = 0 and scanned
    leftward from the raw scale for the first crossing of the horizontal
    threshold line. The crossing position ell gives the fractional point
    count ``exp(ell)`` relative to the aggregated frame; scaling by
    (total points / coarsest-level points) yields raw-frame points, clamped
    to [1, total]. With no crossing: a threshold above the whole curve (or
    a zero threshold, which a non-negative curve can never strictly cross)
    can never trigger and yields the total point count; a positive
    threshold below the whole curve yields 1.
    """
    factors = np.asarray(factors, dtype=float)
    kappas = np.asarray(kappas, dtype=float)
    if factors.size < 2:
        raise ZoomOutUnavailableError("need at least two levels to intersect")
    if not np.isfinite(threshold) or threshold <= 0.0:
        return float(total_points)
    ells = -np.log(factors)
    excess = kappas - threshold
    for i in range(len(ells) - 1):
        fa, fb = excess[i], excess[i + 1]
        if fa == 0.0:
            ell = ells[i]
        elif fa * fb < 0.0 or fb == 0.0:
            t = fa / (fa - fb)
            ell = ells[i] + t * (ells[i + 1] - ells[i])
        else:
            continue
        chain = float(np.exp(ell)) * factors[-1]
        return float(min(max(chain, 1.0), total_points))
    if threshold > np.max(kappas):
        log.debug("threshold above the mirrored curve; chain can never trigger")
        return float(total_points)
    return 1.0


def critical_chain_length(
    profile: ZoomOutProfile, dim: int, root: int, variant: str
) -> float:
    """Critical chain length for one (dimension, root) and variant."""
    if variant == "short":
        threshold = profile.mean_kappa_short[0, dim, root]
    elif variant == "long":
        threshold = profile.mean_kappa_long[0, dim, root]
    else:
        raise ValueError("variant must be 'short' or 'long'")
    return polyline_chain_length(
        profile.factors,
        profile.mean_abs_kappa[:, dim, root],
        float(threshold),
        profile.total_points,
    )


def residual_drop(prev: float, cur: float, eps: float = EPS_RESIDUAL) -> float | None:
    """Fractional drop of the residual curvature; None when undefined.

    Returns (prev - cur) / prev, or None when the previous residual is at or
    below the guard (no trigger possible from a zero baseline).
    """
    if not np.isfinite(prev) or prev <= eps:
        return None
    return float((prev - cur) / prev)
