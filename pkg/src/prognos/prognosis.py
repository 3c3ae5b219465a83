"""Chain detection, trigger bookkeeping, and the composite failure prediction.

A chain is a rank-contiguous run of points whose root-level PDI is at least
5; proximity is defined by difference in objective rank, so chain members
are consecutive in rank order (equal ranks count as contiguous). A chain
trigger fires when the longest run strictly exceeds the current critical
chain length. The energy trigger fires when the fraction of roots whose
residual curvature dropped by more than the drop threshold within one step
strictly exceeds the vote fraction.

The global transcendation index (GTI) turns positive once both trigger kinds
have fired at or after the system's path-dependency onset; the composite
prediction is the time index by which both have happened.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import PredictionAfterFailureError


@dataclass
class ChainReport:
    """Longest qualifying chain for one (dimension, root)."""

    max_chain_length: int
    members: list[int]
    triggered_short: bool
    triggered_long: bool


def chain_lengths(
    pdi_root: np.ndarray,
    ranks: np.ndarray,
    valid: np.ndarray,
    critical_short: float,
    critical_long: float,
) -> ChainReport:
    """Scan rank order for the longest run of PDI >= 5 points.

    ``pdi_root`` holds the category of this root at every point, ``ranks``
    the objective rank used for proximity. Points that are invalid or have
    no rank are skipped. Triggers compare strictly against the critical
    chain lengths.
    """
    ranks = np.asarray(ranks, dtype=float)
    usable = np.asarray(valid, dtype=bool) & np.isfinite(ranks)
    idx = np.flatnonzero(usable)
    if idx.size == 0:
        return ChainReport(0, [], False, False)
    order = idx[np.argsort(ranks[idx], kind="stable")]
    flags = np.asarray(pdi_root)[order] >= 5

    best_len = 0
    best_members: list[int] = []
    run_start = None
    for i, flag in enumerate(flags):
        if flag and run_start is None:
            run_start = i
        if (not flag or i == len(flags) - 1) and run_start is not None:
            end = i + 1 if flag else i
            if end - run_start > best_len:
                best_len = end - run_start
                best_members = [int(p) for p in order[run_start:end]]
            run_start = None
    return ChainReport(
        max_chain_length=best_len,
        members=best_members,
        triggered_short=best_len > critical_short,
        triggered_long=best_len > critical_long,
    )


def point_path_dependent(
    root_categories: Sequence[int] | np.ndarray, vote_fraction: float = 0.5
) -> bool:
    """True when at least ``vote_fraction`` of the roots have category >= 5."""
    cats = np.asarray(root_categories)
    if cats.size == 0:
        return False
    return int((cats >= 5).sum()) >= vote_fraction * cats.size


def system_path_dependent(
    pdi: np.ndarray, valid: np.ndarray, vote_fraction: float = 0.5
) -> bool:
    """True when any valid point is path dependent in any dimension."""
    v = np.asarray(valid, dtype=bool)
    if not v.any():
        return False
    counts = (np.asarray(pdi)[v] >= 5).sum(axis=2)
    return bool((counts >= vote_fraction * pdi.shape[2]).any())


def energy_trigger(
    drops: Sequence[float | None],
    total_roots: int,
    drop_threshold: float = 0.8,
    vote_fraction: float = 0.2,
) -> bool:
    """True when the share of roots past the drop threshold exceeds the vote.

    ``drops`` holds one residual-drop fraction per (dimension, root), None
    where the drop is undefined (no usable baseline). Both comparisons are
    strict, so 13 of 64 roots past an 0.8 drop fires at the default 20%
    vote and 12 of 64 does not.
    """
    count = sum(1 for d in drops if d is not None and d > drop_threshold)
    return count > vote_fraction * total_roots


@dataclass
class PrognosisState:
    """Running trigger history and the composite prediction."""

    onset_index: int | None = None
    chain_trigger_indices: list[int] = field(default_factory=list)
    energy_trigger_indices: list[int] = field(default_factory=list)
    gti: float = 0.0
    predicted_failure_index: int | None = None
    prev_residuals: np.ndarray | None = None


def record_onset(state: PrognosisState, t: int) -> bool:
    """Record the first system path-dependency; returns True when it fires."""
    if state.onset_index is None:
        state.onset_index = t
        return True
    return False


def composite_prediction(state: PrognosisState) -> int | None:
    """Time index by which the onset, a chain trigger, and an energy trigger
    have all occurred; None while any ingredient is missing.

    Trigger events preceding the onset do not count.
    """
    if state.onset_index is None:
        return None
    chains = [t for t in state.chain_trigger_indices if t >= state.onset_index]
    energies = [t for t in state.energy_trigger_indices if t >= state.onset_index]
    if not chains or not energies:
        return None
    return max(chains[0], energies[0])


def update_gti(
    state: PrognosisState,
    chain_triggered: bool,
    energy_triggered: bool,
    t: int,
) -> PrognosisState:
    """Record this step's triggers and refresh GTI and the prediction.

    Trigger sets only grow; the predicted failure index is set the first
    time both trigger kinds exist at or after the onset and never changes
    afterwards. GTI carries no magnitude information beyond its sign and is
    set to 1.0 when positive.
    """
    if chain_triggered:
        state.chain_trigger_indices.append(t)
    if energy_triggered:
        state.energy_trigger_indices.append(t)
    prediction = composite_prediction(state)
    state.gti = 1.0 if prediction is not None else 0.0
    if state.predicted_failure_index is None and prediction is not None:
        state.predicted_failure_index = prediction
    return state


def transcendent_categories(
    pdi: np.ndarray, gti: float, vote_fraction: float = 0.5
) -> np.ndarray:
    """Upgrade categories to 8/9 once the GTI is positive.

    A point whose path-dependency condition holds in exactly one dimension
    maps its PDI >= 5 roots to category 8; in multiple dimensions, to 9.
    Reporting-only: the upgraded categories never feed back into triggers.
    """
    cats = np.asarray(pdi)
    if gti <= 0.0:
        return cats.copy()
    n_roots = cats.shape[2]
    pd_dims = (cats >= 5).sum(axis=2) >= vote_fraction * n_roots
    n_pd = pd_dims.sum(axis=1)
    out = cats.copy()
    flag = cats >= 5
    out[(n_pd == 1)[:, None, None] & flag] = 8
    out[(n_pd >= 2)[:, None, None] & flag] = 9
    return out


def lead_percentage(predicted_frame: int, actual_frame: int) -> float:
    """How far ahead of the actual failure the prediction fired, in percent."""
    if actual_frame <= 0:
        raise ValueError("actual frame must be positive")
    if predicted_frame > actual_frame:
        raise PredictionAfterFailureError(
            f"prediction at frame {predicted_frame} falls after failure at "
            f"{actual_frame}"
        )
    return (1.0 - predicted_frame / actual_frame) * 100.0
