"""Dimensionless length-scale roots and mode-mixity selection.

Per dimension the conservation relation reduces to one scalar quadratic,

    Ebar(phi) * value / L^2 = deltaH        (time step normalized to 1),

so the root magnitude is |L| = sqrt(|Ebar(phi) * value / deltaH|). The full
multiplicity is realized by stamping that magnitude with every sign pattern
over the D dimensions: root k of dimension d takes the sign of slot d in the
k-th pattern, giving exactly 2^D signed roots per dimension that occur in
+- pairs. The short-term variant L uses the Borda count as the value, the
long-term variant Ltilde uses the objective rank, and both share the same
pattern indexing.

Ebar blends a shear-like factor 1/(2*(1+nu_shear)) and a dilatation-like
factor 1/(3*(1-2*nu_volumetric)) linearly in the mixity phi; phi is chosen
per point as the grid value minimizing the median |kappa| over the point's
roots.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .curvature import composite_curvature, stability_ratios
from .exceptions import RootSolveError
from .rank import RankTable

#: quiescence threshold on |deltaH|
EPS_DELTA_H = 1e-9

DEFAULT_PHI_GRID = tuple(round(0.1 * i, 1) for i in range(11))


@dataclass(frozen=True)
class MixityConfig:
    """Mode-mixity parameters and the quiescence guard."""

    nu_volumetric: float = -1.0
    nu_shear: float = 0.5
    phi_grid: tuple[float, ...] = DEFAULT_PHI_GRID
    eps_delta_h: float = EPS_DELTA_H

    def __post_init__(self):
        if not self.phi_grid:
            raise ValueError("phi grid must be non-empty")
        if any(p < 0.0 or p > 1.0 for p in self.phi_grid):
            raise ValueError("phi values must lie in [0, 1]")
        if self.nu_shear == -1.0 or self.nu_volumetric == 0.5:
            raise ValueError("degenerate Poisson ratio for the modulus blend")


def effective_modulus(phi: float | np.ndarray, cfg: MixityConfig) -> float | np.ndarray:
    """Linear blend of the shear-like and dilatation-like modulus factors."""
    shear = 1.0 / (2.0 * (1.0 + cfg.nu_shear))
    bulk = 1.0 / (3.0 * (1.0 - 2.0 * cfg.nu_volumetric))
    return np.asarray(phi, dtype=float) * shear + (1.0 - np.asarray(phi, dtype=float)) * bulk


def sign_patterns(n_dims: int) -> np.ndarray:
    """All 2^D sign patterns, shape (2^D, n_dims); bit d of k maps to slot d."""
    k = np.arange(2**n_dims)
    bits = (k[:, None] >> np.arange(n_dims)[None, :]) & 1
    return np.where(bits == 0, 1.0, -1.0)


def solve_roots(
    value: float,
    delta_h: float,
    dim: int,
    phi: float,
    cfg: MixityConfig,
    n_dims: int = 4,
) -> np.ndarray | None:
    """Signed roots of the per-dimension scalar reduction for one point.

    Returns the 2^D signed roots for dimension ``dim``, or None when the
    point is quiescent (|deltaH| at or below the guard). Raises
    :class:`RootSolveError` when the value/deltaH ratio is non-finite.
    """
    if abs(delta_h) <= cfg.eps_delta_h:
        return None
    e = float(effective_modulus(phi, cfg))
    ratio = e * value / delta_h
    if not np.isfinite(ratio):
        raise RootSolveError(f"non-finite ratio {ratio!r} for value {value!r}")
    magnitude = float(np.sqrt(abs(ratio)))
    return magnitude * sign_patterns(n_dims)[:, dim]


@dataclass
class LengthScaleRoots:
    """Roots, selected mixity, and per-phi curvature data for one pair.

    Arrays are (n_points, n_dims, n_roots) unless noted; quiescent entries
    hold NaN roots.
    """

    roots_short: np.ndarray
    roots_long: np.ndarray
    kappa: np.ndarray
    ratio_short: np.ndarray
    ratio_long: np.ndarray
    rescue: np.ndarray
    quiescent: np.ndarray  # (n_points, n_dims)
    phi: np.ndarray  # (n_points,)
    phi_index: np.ndarray  # (n_points,), -1 where fully quiescent
    config: MixityConfig = field(repr=False, default_factory=MixityConfig)

    @property
    def n_roots(self) -> int:
        return self.roots_short.shape[2]


def _phi_slice(
    h: np.ndarray,
    r: np.ndarray,
    delta: np.ndarray,
    quiescent: np.ndarray,
    signs: np.ndarray,
    e: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Roots, curvature, and ratios for one mixity candidate."""
    with np.errstate(divide="ignore", invalid="ignore"):
        mag_short = np.sqrt(np.abs(e * h / delta))
        mag_long = np.sqrt(np.abs(e * r / delta))
    mag_short = np.where(quiescent, np.nan, mag_short)
    mag_long = np.where(quiescent, np.nan, mag_long)
    # roots[n, d, k] = magnitude[n, d] * sign of slot d in pattern k
    roots_short = mag_short[:, :, None] * signs.T[None, :, :]
    roots_long = mag_long[:, :, None] * signs.T[None, :, :]
    kappa = composite_curvature(h[:, :, None], r[:, :, None], roots_short, roots_long)
    kappa = np.where(quiescent[:, :, None], np.nan, kappa)
    ratio_short, ratio_long = stability_ratios(kappa, roots_short, roots_long)
    return roots_short, roots_long, kappa, ratio_short, ratio_long


def build_roots(table: RankTable, cfg: MixityConfig) -> LengthScaleRoots:
    """Scan the mixity grid, select phi per point, and build both root sets.

    The selected phi minimizes the median |kappa| over the point's roots
    (all dimensions, all sign patterns), ties resolved toward the smaller
    grid value; the rescue mask records, per root, whether any candidate
    brings both stability ratios below one.
    """
    h, r, delta = table.h_cur, table.r_cur, table.delta_h
    n_points, n_dims = h.shape
    signs = sign_patterns(n_dims)
    n_roots = signs.shape[0]

    quiescent = (
        ~table.valid[:, None]
        | ~np.isfinite(h)
        | ~np.isfinite(r)
        | ~np.isfinite(delta)
        | (np.abs(delta) <= cfg.eps_delta_h)
    )

    best_median = np.full(n_points, np.inf)
    phi_index = np.full(n_points, -1, dtype=int)
    rescue = np.zeros((n_points, n_dims, n_roots), dtype=bool)

    for p, phi in enumerate(cfg.phi_grid):
        e = float(effective_modulus(phi, cfg))
        _, _, kappa, ratio_short, ratio_long = _phi_slice(
            h, r, delta, quiescent, signs, e
        )
        rescue |= (ratio_short < 1.0) & (ratio_long < 1.0) & ~quiescent[:, :, None]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN medians
            med = np.nanmedian(np.abs(kappa).reshape(n_points, -1), axis=1)
        better = np.isfinite(med) & (med < best_median)
        best_median[better] = med[better]
        phi_index[better] = p

    phi = np.array(
        [cfg.phi_grid[i] if i >= 0 else cfg.phi_grid[0] for i in phi_index]
    )

    roots_short = np.full((n_points, n_dims, n_roots), np.nan)
    roots_long = np.full((n_points, n_dims, n_roots), np.nan)
    kappa = np.full((n_points, n_dims, n_roots), np.nan)
    ratio_short = np.full((n_points, n_dims, n_roots), np.nan)
    ratio_long = np.full((n_points, n_dims, n_roots), np.nan)
    for p in np.unique(phi_index):
        if p < 0:
            continue
        rows = phi_index == p
        e = float(effective_modulus(cfg.phi_grid[p], cfg))
        rs, rl, kp, q_s, q_l = _phi_slice(
            h[rows], r[rows], delta[rows], quiescent[rows], signs, e
        )
        roots_short[rows] = rs
        roots_long[rows] = rl
        kappa[rows] = kp
        ratio_short[rows] = q_s
        ratio_long[rows] = q_l

    return LengthScaleRoots(
        roots_short=roots_short,
        roots_long=roots_long,
        kappa=kappa,
        ratio_short=ratio_short,
        ratio_long=ratio_long,
        rescue=rescue,
        quiescent=quiescent,
        phi=phi,
        phi_index=phi_index,
        config=cfg,
    )


def select_mixity(
    abs_kappa_per_phi: np.ndarray, phi_grid: tuple[float, ...]
) -> tuple[float, int]:
    """Grid argmin of the median |kappa| for one point.

    ``abs_kappa_per_phi`` has shape (n_candidates, n_roots_total); rows with
    only NaN entries are skipped. Ties resolve toward the smaller phi.
    """
    from .exceptions import MixityUnavailableError

    if len(phi_grid) != abs_kappa_per_phi.shape[0]:
        raise ValueError("candidate count does not match the phi grid")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        med = np.nanmedian(abs_kappa_per_phi, axis=1)
    if not np.isfinite(med).any():
        raise MixityUnavailableError("no candidate produced a finite curvature")
    idx = int(np.nanargmin(med))
    return float(phi_grid[idx]), idx
