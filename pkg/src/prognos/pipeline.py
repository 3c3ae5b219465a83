"""Per-pair analysis and the streaming fold over a frame sequence.

One analyzed pair runs: datum fit -> Borda/objective ranks -> length-scale
roots with mixity selection -> composite curvature and PDI categories ->
zoom-out pyramid (residual curvature, critical chain lengths) -> chain scan
-> trigger evaluation. The sequence fold feeds the per-pair triggers into
the prognosis state in time order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import aggregate as agg
from .curvature import (
    CurvatureField,
    apply_cross_dim,
    base_categories,
    pdi_histogram,
)
from .exceptions import InsufficientFramesError
from .frames import Frame, WindowSpec, extract_window, stride_pairs
from .lengthscale import DEFAULT_PHI_GRID, LengthScaleRoots, MixityConfig, build_roots
from .prognosis import (
    ChainReport,
    PrognosisState,
    chain_lengths,
    energy_trigger,
    record_onset,
    system_path_dependent,
    transcendent_categories,
    update_gti,
)
from .rank import RankTable, build_rank_table

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EngineConfig:
    """Every tunable of the analysis pipeline, with the standard defaults."""

    stride: int = 1
    window: WindowSpec | None = None
    n_dims: int = 4
    drop_threshold: float = 0.8
    root_vote_fraction: float = 0.5
    drop_vote_fraction: float = 0.2
    chain_recalc: str = "every"
    phi_grid: tuple[float, ...] = DEFAULT_PHI_GRID
    eps_denominator: float = 1e-12
    eps_delta_h: float = 1e-9
    datum_fallback_zero: bool = False
    nu_volumetric: float = -1.0
    nu_shear: float = 0.5

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        for name in ("drop_threshold", "root_vote_fraction", "drop_vote_fraction"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v!r}")
        if self.chain_recalc not in ("every", "once"):
            raise ValueError("chain_recalc must be 'every' or 'once'")
        if self.n_dims < 2:
            raise ValueError("need at least two value channels")

    def mixity(self) -> MixityConfig:
        return MixityConfig(
            nu_volumetric=self.nu_volumetric,
            nu_shear=self.nu_shear,
            phi_grid=tuple(self.phi_grid),
            eps_delta_h=self.eps_delta_h,
        )

    def as_dict(self) -> dict[str, object]:
        win = self.window
        return {
            "stride": self.stride,
            "window": (
                f"{win.row_start}:{win.row_end},{win.col_start}:{win.col_end}"
                if win
                else "full"
            ),
            "n_dims": self.n_dims,
            "drop_threshold": self.drop_threshold,
            "root_vote_fraction": self.root_vote_fraction,
            "drop_vote_fraction": self.drop_vote_fraction,
            "chain_recalc": self.chain_recalc,
            "phi_grid": ",".join(repr(p) for p in self.phi_grid),
            "eps_denominator": self.eps_denominator,
            "eps_delta_h": self.eps_delta_h,
            "datum_fallback_zero": self.datum_fallback_zero,
            "nu_volumetric": self.nu_volumetric,
            "nu_shear": self.nu_shear,
        }


def build_curvature_field(table: RankTable, roots: LengthScaleRoots) -> CurvatureField:
    """Assemble curvature, thresholds, and PDI categories 1-7."""
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa_short = 1.0 / roots.roots_short
        kappa_long = 1.0 / roots.roots_long
    cats = base_categories(roots.ratio_short, roots.ratio_long, roots.rescue)
    cats[roots.quiescent[:, :, None] & np.ones_like(cats, dtype=bool)] = 1
    cats, dim_unstable = apply_cross_dim(cats, table.valid)
    return CurvatureField(
        kappa=roots.kappa,
        kappa_short=kappa_short,
        kappa_long=kappa_long,
        pdi=cats,
        dim_unstable=dim_unstable,
        quiescent=roots.quiescent,
    )


def _masked_mean(values: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Mean over axis 0 of |values| where kept and finite; 0 when empty."""
    mag = np.abs(values)
    usable = keep & np.isfinite(mag)
    total = np.where(usable, mag, 0.0).sum(axis=0)
    count = usable.sum(axis=0)
    return np.where(count > 0, total / np.maximum(count, 1), 0.0)


def level_statistics(
    prev: Frame, cur: Frame, config: EngineConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean |kappa|, mean |1/L|, mean |1/Ltilde| per (dimension, root).

    Means run over the non-quiescent points of the aggregated pair;
    non-finite threshold entries (zero-magnitude roots) are excluded. An
    all-quiescent level reports zeros.
    """
    table = build_rank_table(
        prev,
        cur,
        eps_den=config.eps_denominator,
        datum_fallback_zero=config.datum_fallback_zero,
    )
    roots = build_roots(table, config.mixity())
    active = ~roots.quiescent[:, :, None] & np.ones_like(roots.kappa, dtype=bool)
    mean_kappa = _masked_mean(roots.kappa, active)
    with np.errstate(divide="ignore", invalid="ignore"):
        mean_short = _masked_mean(1.0 / roots.roots_short, active)
        mean_long = _masked_mean(1.0 / roots.roots_long, active)
    return mean_kappa, mean_short, mean_long


@dataclass
class PairAnalysis:
    """Everything the fold needs from one analyzed pair."""

    frame_prev: int
    frame_cur: int
    table: RankTable
    roots: LengthScaleRoots
    field: CurvatureField
    profile: agg.ZoomOutProfile
    chains: list[list[ChainReport]]
    max_chain: np.ndarray  # (n_dims, n_roots)
    chain_triggered: bool
    system_pd: bool

    @property
    def residual(self) -> np.ndarray:
        return self.profile.residual


def analyze_pair(
    prev: Frame,
    cur: Frame,
    config: EngineConfig,
    frozen_criticals: tuple[np.ndarray, np.ndarray] | None = None,
) -> PairAnalysis:
    """Run the full per-pair pipeline on an (already windowed) frame pair.

    ``frozen_criticals`` replaces the freshly computed critical chain
    lengths when the once-at-start cadence is active.
    """
    table = build_rank_table(
        prev,
        cur,
        eps_den=config.eps_denominator,
        datum_fallback_zero=config.datum_fallback_zero,
    )
    roots = build_roots(table, config.mixity())
    fieldv = build_curvature_field(table, roots)
    profile = agg.build_zoom_profiles(
        prev, cur, lambda a, b: level_statistics(a, b, config)
    )
    if frozen_criticals is not None:
        critical_short, critical_long = frozen_criticals
    else:
        critical_short, critical_long = profile.critical_short, profile.critical_long

    n_dims, n_roots = fieldv.pdi.shape[1], fieldv.pdi.shape[2]
    chains: list[list[ChainReport]] = []
    max_chain = np.zeros((n_dims, n_roots), dtype=int)
    chain_triggered = False
    for d in range(n_dims):
        per_root = []
        for k in range(n_roots):
            report = chain_lengths(
                fieldv.pdi[:, d, k],
                table.r_cur[:, d],
                table.valid,
                float(critical_short[d, k]),
                float(critical_long[d, k]),
            )
            per_root.append(report)
            max_chain[d, k] = report.max_chain_length
            chain_triggered |= report.triggered_short or report.triggered_long
        chains.append(per_root)

    system_pd = system_path_dependent(
        fieldv.pdi, table.valid, config.root_vote_fraction
    )
    return PairAnalysis(
        frame_prev=prev.time_index,
        frame_cur=cur.time_index,
        table=table,
        roots=roots,
        field=fieldv,
        profile=profile,
        chains=chains,
        max_chain=max_chain,
        chain_triggered=chain_triggered,
        system_pd=system_pd,
    )


@dataclass
class PairRecord:
    """Compact per-pair summary kept for reports."""

    t: int
    frame_prev: int
    frame_cur: int
    n_valid: int
    pdi_hist: np.ndarray  # (n_dims, 9)
    system_pd: bool
    chain_triggered: bool
    energy_triggered: bool
    gti: float
    drop_count: int
    max_chain: np.ndarray  # (n_dims, n_roots)
    critical_short: np.ndarray
    critical_long: np.ndarray
    residual: np.ndarray
    mean_abs_kappa: np.ndarray  # (n_levels, n_dims, n_roots)
    mean_kappa_short: np.ndarray
    mean_kappa_long: np.ndarray
    factors: np.ndarray
    datum_m_bar: np.ndarray  # (n_dims,)
    datum_rms: np.ndarray
    datum_retained: np.ndarray
    datum_dropped: np.ndarray
    events: list[tuple[str, int, int, float]] = field(default_factory=list)


@dataclass
class RunResult:
    """Outcome of a full sequence analysis."""

    state: PrognosisState
    records: list[PairRecord]
    config: EngineConfig
    n_pairs: int
    predicted_frame: int | None

    @property
    def prediction_index(self) -> int | None:
        return self.state.predicted_failure_index

    @property
    def onset_index(self) -> int | None:
        return self.state.onset_index


def run_sequence(frames: Iterable[Frame], config: EngineConfig) -> RunResult:
    """Stream strided pairs through the pipeline and fold the trigger state."""
    state = PrognosisState()
    records: list[PairRecord] = []
    frozen: tuple[np.ndarray, np.ndarray] | None = None
    predicted_frame: int | None = None
    total_roots = config.n_dims * 2**config.n_dims

    t = -1
    for t, (prev_raw, cur_raw) in enumerate(stride_pairs(frames, config.stride)):
        if config.window is not None:
            prev = extract_window(prev_raw, config.window)
            cur = extract_window(cur_raw, config.window)
        else:
            prev, cur = prev_raw, cur_raw

        analysis = analyze_pair(prev, cur, config, frozen_criticals=frozen)
        if config.chain_recalc == "once" and frozen is None:
            frozen = (
                analysis.profile.critical_short.copy(),
                analysis.profile.critical_long.copy(),
            )
        criticals = frozen if frozen is not None else (
            analysis.profile.critical_short,
            analysis.profile.critical_long,
        )

        drops: list[float | None] = []
        if state.prev_residuals is None:
            drops = [None] * total_roots
        else:
            for d in range(config.n_dims):
                for k in range(2**config.n_dims):
                    drops.append(
                        agg.residual_drop(
                            float(state.prev_residuals[d, k]),
                            float(analysis.residual[d, k]),
                        )
                    )
        energy = energy_trigger(
            drops,
            total_roots,
            drop_threshold=config.drop_threshold,
            vote_fraction=config.drop_vote_fraction,
        )
        drop_count = sum(
            1 for x in drops if x is not None and x > config.drop_threshold
        )

        events: list[tuple[str, int, int, float]] = []
        if analysis.system_pd and record_onset(state, t):
            events.append(("pdi_onset", -1, -1, 1.0))
        update_gti(state, analysis.chain_triggered, energy, t)
        if analysis.chain_triggered:
            for d in range(config.n_dims):
                lengths = analysis.max_chain[d]
                trig = [
                    k
                    for k in range(lengths.size)
                    if analysis.chains[d][k].triggered_short
                    or analysis.chains[d][k].triggered_long
                ]
                if trig:
                    k_best = max(trig, key=lambda k: lengths[k])
                    events.append(("chain", d, k_best, float(lengths[k_best])))
        if energy:
            events.append(("energy", -1, -1, float(drop_count)))
        if state.predicted_failure_index == t and predicted_frame is None:
            predicted_frame = cur.time_index
            events.append(("prediction", -1, -1, float(predicted_frame)))

        final_pdi = transcendent_categories(
            analysis.field.pdi, state.gti, config.root_vote_fraction
        )
        records.append(
            PairRecord(
                t=t,
                frame_prev=prev.time_index,
                frame_cur=cur.time_index,
                n_valid=analysis.table.n_valid,
                pdi_hist=pdi_histogram(final_pdi, analysis.table.valid),
                system_pd=analysis.system_pd,
                chain_triggered=analysis.chain_triggered,
                energy_triggered=energy,
                gti=state.gti,
                drop_count=drop_count,
                max_chain=analysis.max_chain,
                critical_short=criticals[0].copy(),
                critical_long=criticals[1].copy(),
                residual=analysis.residual.copy(),
                mean_abs_kappa=analysis.profile.mean_abs_kappa,
                mean_kappa_short=analysis.profile.mean_kappa_short,
                mean_kappa_long=analysis.profile.mean_kappa_long,
                factors=analysis.profile.factors,
                datum_m_bar=np.array([f.m_bar for f in analysis.table.datum]),
                datum_rms=np.array([f.rms_residual for f in analysis.table.datum]),
                datum_retained=np.array([f.retained for f in analysis.table.datum]),
                datum_dropped=np.array([f.dropped for f in analysis.table.datum]),
                events=events,
            )
        )
        state.prev_residuals = analysis.residual.copy()

    if t < 0:
        raise InsufficientFramesError(
            f"sequence yields no pairs at stride {config.stride} "
            f"(need at least {config.stride + 1} frames)"
        )
    return RunResult(
        state=state,
        records=records,
        config=config,
        n_pairs=t + 1,
        predicted_frame=predicted_frame,
    )
