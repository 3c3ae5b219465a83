"""Estimator facade over the analysis pipeline.

:class:`InstabilityDetector` follows the scikit-learn convention: all
configuration lives in ``__init__`` parameters (so ``get_params`` /
``set_params`` / ``clone`` compose with the wider ecosystem), ``fit``
consumes a frame sequence, and the outcome is exposed through trailing-
underscore attributes. There is nothing to train: the detector is fully
determined by its configuration plus the sequence it watches.
"""

from __future__ import annotations

import math

from sklearn.base import BaseEstimator

from .pipeline import EngineConfig, RunResult, run_sequence
from .validation import as_frame_source, check_phi_grid, check_window


class InstabilityDetector(BaseEstimator):
    """Detect incipient global instability in a point-grid frame sequence.

    Parameters
    ----------
    stride : int, default=1
        Analyze frames ``stride`` raw frames apart.
    window : WindowSpec, 4-tuple, or None, default=None
        Observation window (row_start, row_end, col_start, col_end),
        inclusive; None analyzes the full frame.
    drop_threshold : float, default=0.8
        Residual-curvature drop fraction that marks an energy-release event.
    root_vote_fraction : float, default=0.5
        Fraction of a point's roots that must be unstable for the point to
        count as path dependent.
    drop_vote_fraction : float, default=0.2
        Fraction of all roots that must pass the drop threshold for the
        energy trigger.
    chain_recalc : {'every', 'once'}, default='every'
        Recompute critical chain lengths per analyzed pair, or freeze the
        values from the first pair.
    phi_grid : tuple of float, default=(0.0, 0.1, ..., 1.0)
        Mode-mixity candidates.
    eps_denominator : float, default=1e-12
        Guard on pair-normalization denominators.
    eps_delta_h : float, default=1e-9
        Quiescence threshold on Borda-count changes.
    n_dims : int, default=4
        Value channels per point.
    datum_fallback_zero : bool, default=False
        Fall back to a zero datum when no pair datum can be fitted.

    Attributes
    ----------
    state_ : PrognosisState
        Full trigger history after ``fit``.
    onset_index_ : int or None
        Time index of the first system path dependency.
    prediction_index_ : int or None
        Time index of the composite failure prediction.
    predicted_frame_ : int or None
        Raw frame number of the prediction (the later frame of the
        triggering pair).
    gti_ : float
        Final global transcendation index (0 or 1).
    records_ : list of PairRecord
        Per-pair summaries in time order.
    n_pairs_ : int
        Number of analyzed pairs.
    """

    def __init__(
        self,
        stride: int = 1,
        window=None,
        drop_threshold: float = 0.8,
        root_vote_fraction: float = 0.5,
        drop_vote_fraction: float = 0.2,
        chain_recalc: str = "every",
        phi_grid: tuple = tuple(round(0.1 * i, 1) for i in range(11)),
        eps_denominator: float = 1e-12,
        eps_delta_h: float = 1e-9,
        n_dims: int = 4,
        datum_fallback_zero: bool = False,
    ):
        self.stride = stride
        self.window = window
        self.drop_threshold = drop_threshold
        self.root_vote_fraction = root_vote_fraction
        self.drop_vote_fraction = drop_vote_fraction
        self.chain_recalc = chain_recalc
        self.phi_grid = phi_grid
        self.eps_denominator = eps_denominator
        self.eps_delta_h = eps_delta_h
        self.n_dims = n_dims
        self.datum_fallback_zero = datum_fallback_zero

    def build_config(self) -> EngineConfig:
        """Validate the parameters into an immutable pipeline configuration."""
        return EngineConfig(
            stride=int(self.stride),
            window=check_window(self.window),
            n_dims=int(self.n_dims),
            drop_threshold=float(self.drop_threshold),
            root_vote_fraction=float(self.root_vote_fraction),
            drop_vote_fraction=float(self.drop_vote_fraction),
            chain_recalc=self.chain_recalc,
            phi_grid=check_phi_grid(self.phi_grid),
            eps_denominator=float(self.eps_denominator),
            eps_delta_h=float(self.eps_delta_h),
            datum_fallback_zero=bool(self.datum_fallback_zero),
        )

    def fit(self, X, y=None):
        """Run the pipeline over a frame sequence.

        Parameters
        ----------
        X : path-like or iterable of Frame
            Frame directory or an ordered frame iterable.
        y : ignored
            Present for API compatibility.
        """
        config = self.build_config()
        result: RunResult = run_sequence(as_frame_source(X, config.stride), config)
        self.result_ = result
        self.state_ = result.state
        self.records_ = result.records
        self.onset_index_ = result.onset_index
        self.prediction_index_ = result.prediction_index
        self.predicted_frame_ = result.predicted_frame
        self.gti_ = result.state.gti
        self.n_pairs_ = result.n_pairs
        return self

    def predict(self, X=None):
        """Predicted failure frame number, NaN when no prediction was issued.

        With ``X`` given, fits first; otherwise requires a previous ``fit``.
        """
        if X is not None:
            self.fit(X)
        if not hasattr(self, "state_"):
            raise RuntimeError("detector is not fitted; call fit(X) first")
        if self.predicted_frame_ is None:
            return math.nan
        return float(self.predicted_frame_)

    def fit_predict(self, X, y=None):
        return self.fit(X, y).predict()

    def decision_path(self) -> dict:
        """Compact summary of the fitted trigger history."""
        if not hasattr(self, "state_"):
            raise RuntimeError("detector is not fitted; call fit(X) first")
        return {
            "onset_index": self.onset_index_,
            "chain_trigger_indices": list(self.state_.chain_trigger_indices),
            "energy_trigger_indices": list(self.state_.energy_trigger_indices),
            "gti": self.gti_,
            "prediction_index": self.prediction_index_,
            "predicted_frame": self.predicted_frame_,
        }
