"""Composite curvature and Path Dependency Index categories 1-7.

As the system relaxes, the equilibrium-only gradient H/L transforms toward
the objective gradient R/Ltilde. The composite curvature is the planar
curvature of that gradient change:

    kappa = (R/Ltilde - H/L) / (L * (1 + (H/L)^2)^1.5)

Each root is ratio-tested against its short-term threshold 1/L and long-term
threshold 1/Ltilde (strict inequalities; a ratio of exactly 1 does not count
as exceeding):

    category 1   both ratios below 1 (full stability)
    category 2   short-term ratio above 1 only
    category 3   long-term ratio above 1 only
    category 4   both above 1, but some mode mixity brings both below 1
    category 5   both above 1 under every mixity (single dimension)
    category 6   category-5 condition in more than one dimension at a point
    category 7   category-5 condition in more than two dimensions

Categories 8 and 9 are assigned later from the global transcendation state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def composite_curvature(
    h: np.ndarray | float,
    r: np.ndarray | float,
    root_short: np.ndarray | float,
    root_long: np.ndarray | float,
) -> np.ndarray | float:
    """Composite curvature per root; zero (flagged quiescent) where a root is 0.

    Inputs broadcast together; H and R must be finite where roots are
    nonzero.
    """
    h = np.asarray(h, dtype=float)
    r = np.asarray(r, dtype=float)
    ls = np.asarray(root_short, dtype=float)
    ll = np.asarray(root_long, dtype=float)
    ok = (ls != 0.0) & (ll != 0.0)
    safe_ls = np.where(ok, ls, 1.0)
    safe_ll = np.where(ok, ll, 1.0)
    with np.errstate(invalid="ignore", over="ignore"):
        slope = h / safe_ls
        kappa = (r / safe_ll - slope) / (safe_ls * (1.0 + slope * slope) ** 1.5)
    kappa = np.where(ok, kappa, 0.0)
    if kappa.ndim == 0:
        return float(kappa)
    return kappa


def stability_ratios(
    kappa: np.ndarray, root_short: np.ndarray, root_long: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """|kappa|/|1/L| and |kappa|/|1/Ltilde| without forming the reciprocals."""
    ak = np.abs(kappa)
    return ak * np.abs(root_short), ak * np.abs(root_long)


def categorize_pdi(
    abs_kappa: float,
    kappa_short: float,
    kappa_long: float,
    mixity_rescue: bool,
    cross_dim_count: int,
) -> int:
    """Category 1-7 for one root given its thresholds.

    ``kappa_short`` and ``kappa_long`` are the threshold curvatures 1/L and
    1/Ltilde; ``mixity_rescue`` tells whether some mixity candidate brings
    both ratios below 1; ``cross_dim_count`` is the number of dimensions at
    the point in the category-5 condition.
    """
    ratio_short = abs_kappa / abs(kappa_short)
    ratio_long = abs_kappa / abs(kappa_long)
    exceeds_short = ratio_short > 1.0
    exceeds_long = ratio_long > 1.0
    if not exceeds_short and not exceeds_long:
        return 1
    if exceeds_short and not exceeds_long:
        return 2
    if exceeds_long and not exceeds_short:
        return 3
    if mixity_rescue:
        return 4
    if cross_dim_count > 2:
        return 7
    if cross_dim_count > 1:
        return 6
    return 5


def base_categories(
    ratio_short: np.ndarray, ratio_long: np.ndarray, rescue: np.ndarray
) -> np.ndarray:
    """Vectorized categories 1-5 (before cross-dimension upgrades)."""
    exceeds_short = ratio_short > 1.0
    exceeds_long = ratio_long > 1.0
    cats = np.ones(ratio_short.shape, dtype=np.uint8)
    cats[exceeds_short & ~exceeds_long] = 2
    cats[exceeds_long & ~exceeds_short] = 3
    both = exceeds_short & exceeds_long
    cats[both & rescue] = 4
    cats[both & ~rescue] = 5
    return cats


def apply_cross_dim(cats: np.ndarray, valid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Upgrade category-5 roots to 6/7 from per-point cross-dimension counts.

    A dimension is in the category-5 condition at a point when at least half
    of its roots are category 5. Every category-5 root at a point whose
    count exceeds one (resp. two) dimensions becomes 6 (resp. 7).

    Parameters
    ----------
    cats : ndarray of uint8, shape (n_points, n_dims, n_roots)
    valid : ndarray of bool, shape (n_points,)

    Returns
    -------
    cats : upgraded copy
    dim_unstable : ndarray of bool, shape (n_points, n_dims)
    """
    n_roots = cats.shape[2]
    is5 = cats == 5
    dim_unstable = is5.sum(axis=2) * 2 >= n_roots
    dim_unstable &= valid[:, None]
    count = dim_unstable.sum(axis=1)
    out = cats.copy()
    out[(count > 2)[:, None, None] & is5] = 7
    out[((count == 2))[:, None, None] & is5] = 6
    return out, dim_unstable


@dataclass
class CurvatureField:
    """Curvature, thresholds, and PDI categories for one analyzed pair.

    Arrays are shaped (n_points, n_dims, n_roots); quiescent entries hold
    NaN curvature and category 1.
    """

    kappa: np.ndarray
    kappa_short: np.ndarray
    kappa_long: np.ndarray
    pdi: np.ndarray
    dim_unstable: np.ndarray
    quiescent: np.ndarray

    @property
    def n_roots(self) -> int:
        return self.kappa.shape[2]


def pdi_histogram(pdi: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Fraction of roots per category per dimension, shape (n_dims, 9)."""
    n_dims = pdi.shape[1]
    hist = np.zeros((n_dims, 9))
    v = valid.astype(bool)
    total = v.sum() * pdi.shape[2]
    if total == 0:
        return hist
    for d in range(n_dims):
        cats = pdi[v, d, :]
        for c in range(1, 10):
            hist[d, c - 1] = float((cats == c).sum()) / total
    return hist
