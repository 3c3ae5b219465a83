"""Pairwise value normalization and the global datum fit.

For two points A and B in one value dimension, the normalized contrast is

    alpha(A, B) = (u_A - u_B) / (u_A + u_B + 2*m_bar)

where ``m_bar`` is a per-dimension datum constant shared by all points. It is
fitted so that, as nearly as possible, the sensitivity of alpha to the
anchor value equals one (d alpha / d u_A = 1 with the partner held fixed),
which makes the spatial gradient of the normalized field match the gradient
of the raw observation. With the partner fixed the condition reduces, per
pair, to the quadratic

    4 m^2 + (4 s - 2) m + (s^2 - 2 u_B) = 0,     s = u_A + u_B,

whose real root of smaller magnitude is the pair datum. The global datum is
the least-squares constant over all retained pair data (their mean), and the
RMS of (d alpha / d u_A - 1) over the pair universe measures the resolution
limit the shared datum imposes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DatumUnavailableError,
    DegenerateInputError,
    DegeneratePairError,
    NoRealDatumError,
)
from .frames import Frame

#: default guard on the normalization denominator
EPS_DENOMINATOR = 1e-12


@dataclass
class DatumFit:
    """Fitted datum for one dimension of one frame.

    Attributes
    ----------
    m_bar : float
        Global datum constant (least-squares fit over pair data).
    rms_residual : float
        RMS of (d alpha / d u_A - 1) over all non-degenerate ordered pairs
        when alpha uses ``m_bar``; the resolution limit of the fit.
    retained : int
        Ordered anchor pairs whose quadratic had a real root.
    dropped : int
        Anchor pairs dropped (no real root).
    pair_values : dict, optional
        Map (flat index A, flat index B) -> pair datum, kept only when the
        fit is run with ``collect_pairs=True``.
    """

    m_bar: float
    rms_residual: float
    retained: int
    dropped: int
    pair_values: dict[tuple[int, int], float] | None = field(default=None, repr=False)


def pair_alpha(u_a: float, u_b: float, m_bar: float, eps_den: float = EPS_DENOMINATOR) -> float:
    """Normalized contrast between two scalar observations.

    Antisymmetric in (A, B). Raises :class:`DegeneratePairError` when the
    denominator magnitude is at or below ``eps_den``.
    """
    den = u_a + u_b + 2.0 * m_bar
    if abs(den) <= eps_den:
        raise DegeneratePairError(f"denominator {den!r} within guard {eps_den!r}")
    return (u_a - u_b) / den


def alpha_matrix(
    values: np.ndarray, m_bar: float, eps_den: float = EPS_DENOMINATOR
) -> tuple[np.ndarray, np.ndarray]:
    """All-pairs alpha for a 1-D value vector.

    Returns
    -------
    alpha : ndarray, shape (n, n)
        alpha[i, j] for ordered pair (i, j); zero where not defined.
    ok : ndarray of bool, shape (n, n)
        True for usable ordered pairs (off-diagonal, non-degenerate).
    """
    u = np.asarray(values, dtype=float)
    den = u[:, None] + u[None, :] + 2.0 * m_bar
    ok = np.abs(den) > eps_den
    np.fill_diagonal(ok, False)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(ok, (u[:, None] - u[None, :]) / np.where(ok, den, 1.0), 0.0)
    return alpha, ok


def pair_datum(u_a: float, u_b: float) -> float:
    """Solve the gradient-match quadratic for one ordered pair.

    Returns the real root of smaller magnitude; raises
    :class:`NoRealDatumError` when the discriminant is negative.
    """
    s = u_a + u_b
    disc = 4.0 + 16.0 * (u_b - u_a)
    if disc < 0.0:
        raise NoRealDatumError(f"no real datum for pair ({u_a!r}, {u_b!r})")
    root = np.sqrt(disc)
    m_plus = (2.0 - 4.0 * s + root) / 8.0
    m_minus = (2.0 - 4.0 * s - root) / 8.0
    if not (np.isfinite(m_plus) or np.isfinite(m_minus)):
        raise NoRealDatumError("both roots non-finite")
    return float(m_plus if abs(m_plus) <= abs(m_minus) else m_minus)


def spatial_gradient(frame: Frame, channel: int) -> np.ndarray:
    """Finite-difference gradient of one channel on the grid.

    Central differences where both neighbors are valid, one-sided at edges
    and next to invalid points, NaN where no valid neighbor exists in that
    direction. Returns shape (height, width, 2) as (d/drow, d/dcol).
    """
    vals = frame.values[:, :, channel]
    mask = frame.mask
    grad = np.full((frame.height, frame.width, 2), np.nan)
    for axis in range(2):
        fwd_ok = np.zeros_like(mask)
        bwd_ok = np.zeros_like(mask)
        fwd = np.full_like(vals, np.nan)
        bwd = np.full_like(vals, np.nan)
        if axis == 0:
            fwd_ok[:-1, :] = mask[:-1, :] & mask[1:, :]
            bwd_ok[1:, :] = mask[1:, :] & mask[:-1, :]
            fwd[:-1, :] = vals[1:, :] - vals[:-1, :]
            bwd[1:, :] = vals[1:, :] - vals[:-1, :]
        else:
            fwd_ok[:, :-1] = mask[:, :-1] & mask[:, 1:]
            bwd_ok[:, 1:] = mask[:, 1:] & mask[:, :-1]
            fwd[:, :-1] = vals[:, 1:] - vals[:, :-1]
            bwd[:, 1:] = vals[:, 1:] - vals[:, :-1]
        both = fwd_ok & bwd_ok
        g = grad[:, :, axis]
        g[both] = 0.5 * (fwd[both] + bwd[both])
        only_f = fwd_ok & ~bwd_ok
        g[only_f] = fwd[only_f]
        only_b = bwd_ok & ~fwd_ok
        g[only_b] = bwd[only_b]
    return grad


def eligible_anchors(frame: Frame, channel: int) -> np.ndarray:
    """Valid points usable as datum-fit anchors for one channel.

    An anchor needs at least one valid grid neighbor in every spatial
    direction the grid actually has, and a nonzero local gradient (the
    gradient-match condition is vacuous where the field is locally flat).
    """
    grad = spatial_gradient(frame, channel)
    ok = frame.mask.copy()
    directions = []
    if frame.height > 1:
        directions.append(0)
    if frame.width > 1:
        directions.append(1)
    if not directions:
        return np.zeros_like(ok)
    nonzero = np.zeros_like(ok)
    for axis in directions:
        ok &= np.isfinite(grad[:, :, axis])
        nonzero |= np.nan_to_num(grad[:, :, axis]) != 0.0
    return ok & nonzero


def fit_global_datum(
    frame: Frame,
    channel: int,
    eps_den: float = EPS_DENOMINATOR,
    fallback_zero: bool = False,
    collect_pairs: bool = False,
) -> DatumFit:
    """Fit the global datum constant for one channel of one frame.

    Anchors are the eligible points of :func:`eligible_anchors`; each anchor
    is paired with every other valid point, the pair quadratic is solved,
    and ``m_bar`` is the mean of the retained real roots (the least-squares
    constant). Raises :class:`DatumUnavailableError` when nothing is
    retained, unless ``fallback_zero`` is set, in which case ``m_bar = 0``.
    """
    mask = frame.flat_mask()
    valid_idx = np.flatnonzero(mask)
    if valid_idx.size < 2:
        raise DegenerateInputError("need at least two valid points")
    u = frame.flat_values(channel)
    anchor_idx = np.flatnonzero(eligible_anchors(frame, channel).reshape(-1))

    retained = 0
    dropped = 0
    pair_values: dict[tuple[int, int], float] | None = {} if collect_pairs else None
    total = 0.0
    if anchor_idx.size:
        u_a = u[anchor_idx][:, None]
        u_b = u[valid_idx][None, :]
        off_diag = anchor_idx[:, None] != valid_idx[None, :]
        s = u_a + u_b
        disc = 4.0 + 16.0 * (u_b - u_a)
        real = (disc >= 0.0) & off_diag
        with np.errstate(invalid="ignore"):
            root = np.sqrt(np.where(real, disc, 0.0))
        m_plus = (2.0 - 4.0 * s + root) / 8.0
        m_minus = (2.0 - 4.0 * s - root) / 8.0
        m = np.where(np.abs(m_plus) <= np.abs(m_minus), m_plus, m_minus)
        usable = real & np.isfinite(m)
        retained = int(usable.sum())
        dropped = int(off_diag.sum()) - retained
        # fixed row-major summation order keeps the fit bit-reproducible
        total = float(np.sum(np.where(usable, m, 0.0)))
        if collect_pairs:
            rows, cols = np.nonzero(usable)
            for r, c in zip(rows, cols):
                pair_values[(int(anchor_idx[r]), int(valid_idx[c]))] = float(m[r, c])

    if retained == 0:
        if not fallback_zero:
            raise DatumUnavailableError(
                f"no retained pair datum for channel {channel}"
            )
        m_bar = 0.0
    else:
        m_bar = total / retained

    rms = _gradient_rms(u[valid_idx], m_bar, eps_den)
    return DatumFit(
        m_bar=m_bar,
        rms_residual=rms,
        retained=retained,
        dropped=dropped,
        pair_values=pair_values,
    )


def _gradient_rms(values: np.ndarray, m_bar: float, eps_den: float) -> float:
    """RMS of (d alpha / d u_A - 1) over all non-degenerate ordered pairs."""
    u = np.asarray(values, dtype=float)
    den = u[:, None] + u[None, :] + 2.0 * m_bar
    ok = np.abs(den) > eps_den
    np.fill_diagonal(ok, False)
    if not ok.any():
        return 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        g = (2.0 * u[None, :] + 2.0 * m_bar) / np.where(ok, den, 1.0) ** 2
    res = np.where(ok, g - 1.0, 0.0)
    return float(np.sqrt(np.sum(res * res) / ok.sum()))


def fit_pair_datum(frame: Frame, a: tuple[int, int], b: tuple[int, int], channel: int) -> float:
    """Pair datum for anchor grid point ``a`` against partner ``b``.

    Enforces anchor eligibility (valid neighbors in each direction, locally
    non-constant field) before solving the quadratic.
    """
    eligible = eligible_anchors(frame, channel)
    if not eligible[a]:
        raise DegenerateInputError(f"point {a} is not an eligible anchor")
    if not frame.mask[b]:
        raise DegenerateInputError(f"partner {b} is not a valid point")
    return pair_datum(float(frame.values[a][channel]), float(frame.values[b][channel]))
