"""Chain scanning, triggers, GTI state machine, and lead arithmetic."""

import numpy as np
import pytest

from prognos.exceptions import PredictionAfterFailureError
from prognos.prognosis import (
    PrognosisState,
    chain_lengths,
    composite_prediction,
    energy_trigger,
    lead_percentage,
    point_path_dependent,
    record_onset,
    system_path_dependent,
    transcendent_categories,
    update_gti,
)


def ranks(n):
    return np.arange(n, dtype=float)


class TestChains:
    def test_run_scan(self):
        pdi = np.array([1, 5, 5, 5, 1])
        report = chain_lengths(pdi, ranks(5), np.ones(5, dtype=bool), 100.0, 100.0)
        assert report.max_chain_length == 3
        assert report.members == [1, 2, 3]

    def test_no_flagged_points(self):
        report = chain_lengths(np.ones(6), ranks(6), np.ones(6, dtype=bool), 2.0, 2.0)
        assert report.max_chain_length == 0
        assert not report.triggered_short and not report.triggered_long

    def test_thirty_point_run_beats_27_threshold(self):
        pdi = np.full(40, 1)
        pdi[5:35] = 5
        report = chain_lengths(pdi, ranks(40), np.ones(40, dtype=bool), 100.0, 27.0)
        assert report.max_chain_length == 30
        assert report.triggered_long
        assert not report.triggered_short

    def test_chain_not_strictly_longer_does_not_trigger(self):
        pdi = np.full(10, 5)
        report = chain_lengths(pdi, ranks(10), np.ones(10, dtype=bool), 10.0, 3.0)
        assert not report.triggered_short
        assert report.triggered_long

    def test_proximity_is_rank_order_not_index_order(self):
        pdi = np.array([5, 1, 5, 1, 5])
        r = np.array([0.0, 10.0, 1.0, 11.0, 2.0])  # flagged points adjacent in rank
        report = chain_lengths(pdi, r, np.ones(5, dtype=bool), 100.0, 2.0)
        assert report.max_chain_length == 3
        assert report.members == [0, 2, 4]

    def test_members_are_flagged_and_contiguous(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            pdi = rng.choice([1, 5], size=30)
            r = rng.uniform(0, 1, size=30)
            report = chain_lengths(pdi, r, np.ones(30, dtype=bool), 100.0, 100.0)
            assert all(pdi[m] >= 5 for m in report.members)
            if report.members:
                positions = np.argsort(np.argsort(r, kind="stable"), kind="stable")
                member_pos = sorted(positions[m] for m in report.members)
                assert member_pos == list(
                    range(member_pos[0], member_pos[0] + len(member_pos))
                )

    def test_unranked_points_skipped(self):
        pdi = np.array([5, 5, 5])
        r = np.array([0.0, np.nan, 1.0])
        report = chain_lengths(pdi, r, np.ones(3, dtype=bool), 1.0, 1.0)
        assert report.max_chain_length == 2


class TestVotes:
    def test_eight_of_sixteen(self):
        cats = [5] * 8 + [1] * 8
        assert point_path_dependent(cats)

    def test_seven_of_sixteen(self):
        cats = [5] * 7 + [1] * 9
        assert not point_path_dependent(cats)

    def test_all_sixteen(self):
        assert point_path_dependent([5] * 16)

    def test_system_any_point(self):
        pdi = np.ones((4, 2, 16), dtype=np.uint8)
        assert not system_path_dependent(pdi, np.ones(4, dtype=bool))
        pdi[2, 1, :8] = 6
        assert system_path_dependent(pdi, np.ones(4, dtype=bool))
        # the path-dependent point being masked off hides it
        valid = np.ones(4, dtype=bool)
        valid[2] = False
        assert not system_path_dependent(pdi, valid)


class TestEnergyTrigger:
    def test_thirteen_of_sixtyfour_fires(self):
        drops = [0.81] * 13 + [0.1] * 51
        assert energy_trigger(drops, 64)

    def test_twelve_of_sixtyfour_does_not(self):
        drops = [0.81] * 12 + [0.1] * 52
        assert not energy_trigger(drops, 64)

    def test_zero_drops(self):
        assert not energy_trigger([0.0] * 64, 64)

    def test_undefined_drops_do_not_count(self):
        drops = [None] * 13 + [0.81] * 12 + [0.0] * 39
        assert not energy_trigger(drops, 64)

    def test_exactly_eighty_percent_not_a_drop(self):
        drops = [0.8] * 64
        assert not energy_trigger(drops, 64)


class TestStateMachine:
    def replay(self, onset, chain_ts, energy_ts, horizon=30):
        state = PrognosisState()
        for t in range(horizon):
            if t == onset:
                record_onset(state, t)
            update_gti(state, t in chain_ts, t in energy_ts, t)
        return state

    def test_full_replay(self):
        state = self.replay(4, {20, 21, 23, 24, 25}, {2, 17, 22})
        assert state.onset_index == 4
        assert state.gti == 1.0
        assert state.predicted_failure_index == 20

    def test_pre_onset_energy_excluded(self):
        state = self.replay(4, {20}, {2})
        assert state.gti == 0.0
        assert state.predicted_failure_index is None

    def test_no_chain_trigger_keeps_gti_zero(self):
        state = self.replay(4, set(), {2, 17, 22})
        assert state.gti == 0.0
        assert state.predicted_failure_index is None

    def test_late_energy_first_fire(self):
        state = self.replay(4, {10}, {30 - 1})
        assert state.predicted_failure_index == 29

    def test_prediction_never_changes(self):
        state = self.replay(4, {20, 21, 25}, {17, 22, 26})
        assert state.predicted_failure_index == 20
        update_gti(state, True, True, 40)
        assert state.predicted_failure_index == 20

    def test_trigger_sets_only_grow(self):
        state = self.replay(0, {3, 5}, {4})
        assert state.chain_trigger_indices == [3, 5]
        assert state.energy_trigger_indices == [4]

    def test_no_signal_soundness(self):
        state = self.replay(None, {7}, {9})
        # record_onset never called: onset stays None
        assert state.onset_index is None
        assert state.gti == 0.0
        assert composite_prediction(state) is None

    def test_gti_implies_both_triggers_after_onset(self):
        state = self.replay(10, {5}, {6})  # both triggers precede onset
        assert state.gti == 0.0

    def test_prediction_at_least_onset(self):
        state = self.replay(4, {10}, {30 - 2})
        assert state.predicted_failure_index >= state.onset_index


class TestTranscendentCategories:
    def test_upgrade_requires_positive_gti(self):
        pdi = np.full((2, 2, 4), 5, dtype=np.uint8)
        assert (transcendent_categories(pdi, 0.0) == 5).all()

    def test_single_dim_gets_eight(self):
        pdi = np.ones((1, 2, 4), dtype=np.uint8)
        pdi[0, 0, :] = 5
        out = transcendent_categories(pdi, 1.0)
        assert (out[0, 0] == 8).all()
        assert (out[0, 1] == 1).all()

    def test_multi_dim_gets_nine(self):
        pdi = np.full((1, 2, 4), 5, dtype=np.uint8)
        out = transcendent_categories(pdi, 1.0)
        assert (out == 9).all()


class TestLead:
    def test_reference_lead_value(self):
        assert lead_percentage(2099, 2382) == pytest.approx(11.88, abs=0.01)

    def test_zero_lead(self):
        assert lead_percentage(2382, 2382) == 0.0

    def test_set3_consistency(self):
        # inverting the formula from a 5.5835% lead recovers the same
        # failure frame as the 11.88% case
        actual = 2249 / (1 - 0.055835)
        assert actual == pytest.approx(2382, abs=0.5)
        assert lead_percentage(2249, 2382) == pytest.approx(5.5835, abs=0.01)

    def test_prediction_after_failure(self):
        with pytest.raises(PredictionAfterFailureError):
            lead_percentage(2400, 2382)

    def test_requires_positive_actual(self):
        with pytest.raises(ValueError):
            lead_percentage(0, 0)
