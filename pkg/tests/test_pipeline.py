"""Per-pair pipeline orchestration and the estimator facade."""

import numpy as np
import pytest
from sklearn.base import clone

from prognos.detector import InstabilityDetector
from prognos.exceptions import InsufficientFramesError
from prognos.frames import Frame, WindowSpec
from prognos.pipeline import EngineConfig, analyze_pair, run_sequence
from prognos.synth import demo_control_scenario, generate


def random_frame(rng, t, shape=(5, 5)):
    vals = rng.uniform(1.0, 9.0, size=shape + (4,))
    return Frame(t, vals, np.ones(shape, dtype=bool))


class TestEngineConfig:
    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            EngineConfig(drop_threshold=0.0)
        with pytest.raises(ValueError):
            EngineConfig(drop_vote_fraction=1.0)
        with pytest.raises(ValueError):
            EngineConfig(chain_recalc="sometimes")
        with pytest.raises(ValueError):
            EngineConfig(stride=0)

    def test_as_dict_round_trips_window(self):
        cfg = EngineConfig(window=WindowSpec(1, 4, 2, 6))
        assert cfg.as_dict()["window"] == "1:4,2:6"


class TestStaticNull:
    def test_identical_frames_are_fully_quiescent(self):
        rng = np.random.default_rng(0)
        vals = rng.uniform(1.0, 9.0, size=(10, 10, 4))
        prev = Frame(0, vals, np.ones((10, 10), dtype=bool))
        cur = Frame(1, vals.copy(), np.ones((10, 10), dtype=bool))
        analysis = analyze_pair(prev, cur, EngineConfig())
        assert np.all(analysis.table.delta_h == 0.0)
        assert analysis.roots.quiescent.all()
        assert (analysis.field.pdi == 1).all()
        assert not analysis.system_pd
        assert not analysis.chain_triggered
        assert analysis.max_chain.max() == 0

    def test_static_sequence_yields_no_prediction(self):
        rng = np.random.default_rng(1)
        vals = rng.uniform(1.0, 9.0, size=(6, 6, 4))
        frames = [Frame(t, vals.copy(), np.ones((6, 6), dtype=bool)) for t in range(4)]
        result = run_sequence(frames, EngineConfig())
        assert result.onset_index is None
        assert result.predicted_frame is None
        assert result.state.gti == 0.0
        assert all(not r.energy_triggered for r in result.records)


class TestRunSequence:
    def test_too_few_frames(self):
        rng = np.random.default_rng(2)
        with pytest.raises(InsufficientFramesError):
            run_sequence([random_frame(rng, 0)], EngineConfig())

    def test_window_is_applied(self):
        rng = np.random.default_rng(3)
        frames = [random_frame(rng, t, shape=(8, 8)) for t in range(3)]
        cfg = EngineConfig(window=WindowSpec(0, 4, 0, 4))
        result = run_sequence(frames, cfg)
        assert result.records[0].n_valid == 25

    def test_records_cover_all_pairs(self):
        rng = np.random.default_rng(4)
        frames = [random_frame(rng, t) for t in range(6)]
        result = run_sequence(frames, EngineConfig(stride=2))
        assert result.n_pairs == 2
        assert [r.t for r in result.records] == [0, 1]
        assert [r.frame_cur for r in result.records] == [2, 4]

    def test_once_cadence_freezes_criticals(self):
        rng = np.random.default_rng(5)
        frames = [random_frame(rng, t) for t in range(8)]
        res = run_sequence(frames, EngineConfig(chain_recalc="once"))
        first = res.records[0].critical_long
        for rec in res.records[1:]:
            assert np.array_equal(rec.critical_long, first)

    def test_every_cadence_recomputes(self):
        from prognos.synth import demo_burst_scenario

        frames = generate(demo_burst_scenario(seed=3))[44:53]
        res = run_sequence(frames, EngineConfig(chain_recalc="every"))
        longs = {rec.critical_long.tobytes() for rec in res.records}
        assert len(longs) > 1


class TestDetector:
    def test_get_set_params_round_trip(self):
        det = InstabilityDetector(stride=2, drop_threshold=0.7)
        params = det.get_params()
        assert params["stride"] == 2
        assert params["drop_threshold"] == 0.7
        det.set_params(stride=3)
        assert det.stride == 3

    def test_clone_preserves_configuration(self):
        det = InstabilityDetector(window=(0, 4, 0, 4), phi_grid=(0.0, 0.5, 1.0))
        twin = clone(det)
        assert twin.get_params() == det.get_params()

    def test_fit_sets_attributes(self):
        frames = generate(demo_control_scenario(seed=6, frames=8))
        det = InstabilityDetector().fit(frames)
        assert det.n_pairs_ == 7
        assert det.onset_index_ is None
        assert det.predicted_frame_ is None
        assert det.gti_ == 0.0
        assert len(det.records_) == 7

    def test_predict_nan_without_prediction(self):
        frames = generate(demo_control_scenario(seed=6, frames=8))
        det = InstabilityDetector().fit(frames)
        assert np.isnan(det.predict())

    def test_predict_requires_fit(self):
        with pytest.raises(RuntimeError):
            InstabilityDetector().predict()

    def test_fit_from_directory(self, tmp_path):
        from prognos.synth import write_sequence

        write_sequence(demo_control_scenario(seed=7, frames=6), tmp_path / "run")
        det = InstabilityDetector().fit(tmp_path / "run")
        assert det.n_pairs_ == 5

    def test_insufficient_directory(self, tmp_path):
        from prognos.frames import write_frame

        d = tmp_path / "short"
        d.mkdir()
        rng = np.random.default_rng(8)
        write_frame(random_frame(rng, 0), d / "frame_000000.xyzm")
        with pytest.raises(InsufficientFramesError, match="insufficient"):
            InstabilityDetector().fit(d)

    def test_invalid_window_parameter(self):
        det = InstabilityDetector(window=(1, 2, 3))
        with pytest.raises(Exception):
            det.build_config()

    def test_bad_phi_grid(self):
        det = InstabilityDetector(phi_grid=(0.5, 0.2))
        with pytest.raises(ValueError):
            det.build_config()
