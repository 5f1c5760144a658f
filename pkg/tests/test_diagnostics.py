import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from howlguard.diagnostics import (detect_howlround, detect_hyperfixation, detect_overconfidence,
                                   detect_rbse, detect_recursive_entrapment, detect_salience_collapse,
                                   diagnose, diagnosis_frame, normalized_entropy, summarize)
from howlguard.errors import ValidationError
from howlguard.modules import (DetectorThresholds, FailureDiagnosis, FailureKind, SalienceState,
                               StepRecord, Trajectory)
from howlguard.pipeline import run_trajectory
from howlguard.scenarios import BUILTIN_NAMES, builtin
from howlguard.utils import weights_entropy


def make_trajectory(weights, chosen=None, initial=None, **meta):
    """Wrap a fixed (n_steps, k) weight matrix in a Trajectory."""
    weights = np.asarray(weights, dtype=np.float64)
    chosen = np.argmax(weights, axis=1) if chosen is None else chosen
    records = [StepRecord(t, int(chosen[t]), int(chosen[t]), w, np.zeros(w.size), weights_entropy(w))
               for t, w in enumerate(weights)]
    initial = weights[0] if initial is None else initial
    return Trajectory(records, "fixture", 0, initial, meta=meta)


def static(vector, steps):
    return make_trajectory(np.tile(vector, (steps, 1)))


@pytest.fixture(scope="module")
def runaway_off():
    return run_trajectory(builtin("runaway"), attenuator_on=False)


@pytest.fixture(scope="module")
def runaway_on():
    return run_trajectory(builtin("runaway"), attenuator_on=True)


@pytest.fixture(scope="module")
def trajectories():
    return {name: (builtin(name), run_trajectory(builtin(name))) for name in BUILTIN_NAMES}


class TestEntropy:
    def test_examples(self):
        assert normalized_entropy(SalienceState([0.25] * 4)) == pytest.approx(1., abs=1e-12)
        assert normalized_entropy([0., 1., 0., 0.]) == 0.
        assert normalized_entropy([0.5, 0.5, 0., 0.]) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("weights", [[0.5, 0.6], [1.2, -0.2], []])
    def test_not_a_distribution(self, weights):
        with pytest.raises(ValidationError):
            normalized_entropy(weights)

    @given(st.lists(st.floats(min_value=0.01, max_value=1.), min_size=2, max_size=8), st.randoms())
    @settings(max_examples=200, deadline=None)
    def test_permutation_invariant(self, masses, random):
        weights = np.array(masses) / np.sum(masses)
        shuffled = weights.copy()
        random.shuffle(shuffled)
        value = normalized_entropy(weights)
        assert value == pytest.approx(normalized_entropy(shuffled), abs=1e-12)
        assert value <= 1.


def test_diagnosis_invariants():
    with pytest.raises(ValidationError):
        FailureDiagnosis(FailureKind.HOWLROUND)
    with pytest.raises(ValidationError):
        FailureDiagnosis(FailureKind.NONE, 3)
    with pytest.raises(ValidationError):
        FailureDiagnosis("RBSE", -1)
    diagnosis = FailureDiagnosis("RBSE", 4, {"affected_channels": 5})
    assert diagnosis.kind is FailureKind.RBSE
    assert diagnosis.metrics == {"affected_channels": 5.}
    assert not FailureDiagnosis.healthy().detected


class TestHowlround:
    def test_runaway(self, runaway_off):
        diagnosis = detect_howlround(runaway_off)
        assert diagnosis.kind is FailureKind.HOWLROUND
        assert diagnosis.onset_step == 21
        assert diagnosis.metrics["channel"] == 0
        assert diagnosis.metrics["run_length"] == 479
        assert diagnosis.metrics["peak_w_max"] > 0.99

    def test_threshold_override(self, runaway_off):
        diagnosis = detect_howlround(runaway_off, DetectorThresholds(howlround_w=0.995))
        assert diagnosis.onset_step == 39

    def test_uniform(self):
        assert not detect_howlround(static([0.25] * 4, 20)).detected

    def test_attenuated(self, runaway_on):
        assert not detect_howlround(runaway_on).detected

    def test_needs_the_channel_to_be_chosen(self):
        weights = np.tile([0.95, 0.05], (10, 1))
        assert detect_howlround(make_trajectory(weights)).detected
        assert not detect_howlround(make_trajectory(weights, chosen=np.ones(10, dtype=int))).detected

    def test_empty(self, runaway_off):
        traj = Trajectory([], "empty", 0, runaway_off.initial)
        with pytest.raises(ValidationError):
            detect_howlround(traj)


class TestSalienceCollapse:
    def test_uniform(self):
        diagnosis = detect_salience_collapse(static([0.25] * 4, 20))
        assert diagnosis.kind is FailureKind.SALIENCE_COLLAPSE
        assert diagnosis.onset_step == DetectorThresholds().howlround_window
        assert diagnosis.metrics["min_gap"] == 0.

    def test_one_hot(self):
        assert not detect_salience_collapse(static([1., 0., 0., 0.], 20)).detected

    def test_distinct_leader_is_not_collapse(self):
        # entropy is high but channel 0 leads clearly throughout
        assert not detect_salience_collapse(static([0.28, 0.24, 0.24, 0.24], 20)).detected

    def test_equalization(self, trajectories):
        _, traj = trajectories["equalization"]
        diagnosis = detect_salience_collapse(traj)
        assert diagnosis.kind is FailureKind.SALIENCE_COLLAPSE
        assert diagnosis.onset_step == 5

    def test_never_at_low_entropy(self):
        weights = np.vstack([np.tile([1., 0., 0., 0.], (10, 1)), np.tile([0.25] * 4, (20, 1))])
        traj = make_trajectory(weights)
        diagnosis = detect_salience_collapse(traj)
        assert diagnosis.onset_step == 15
        assert traj.entropy()[diagnosis.onset_step] >= 0.5


class TestRecursiveEntrapment:
    def test_ping_pong(self, trajectories):
        _, traj = trajectories["ping_pong"]
        diagnosis = detect_recursive_entrapment(traj)
        assert diagnosis.kind is FailureKind.RECURSIVE_ENTRAPMENT
        assert diagnosis.onset_step == 0
        assert diagnosis.metrics["cycle_length"] == 2

    def test_three_cycle(self):
        block = [[0.6, 0.3, 0.1], [0.1, 0.6, 0.3], [0.3, 0.1, 0.6]]
        diagnosis = detect_recursive_entrapment(make_trajectory(block * 4))
        assert diagnosis.metrics["cycle_length"] == 3
        assert diagnosis.metrics["repeats"] == 4

    def test_monotone_runaway(self, runaway_off):
        assert not detect_recursive_entrapment(runaway_off).detected

    def test_fixed_point(self, trajectories):
        _, traj = trajectories["hyperfixation"]
        assert not detect_recursive_entrapment(traj).detected

    def test_too_few_repeats(self):
        block = [[0.6, 0.4], [0.4, 0.6]]
        assert not detect_recursive_entrapment(make_trajectory(block * 2)).detected


class TestHyperfixation:
    def test_pinned_task(self):
        diagnosis = detect_hyperfixation(static([0.9, 0.1, 0.], 60), 0, 1, 0.5)
        assert diagnosis.kind is FailureKind.ANALYTICAL_HYPERFIXATION
        assert diagnosis.onset_step == 0
        assert diagnosis.metrics["run_length"] == 60

    def test_resolution_found(self):
        weights = np.vstack([np.tile([0.9, 0.1, 0.], (10, 1)), np.tile([0.4, 0.6, 0.], (50, 1))])
        assert not detect_hyperfixation(make_trajectory(weights), 0, 1, 0.5).detected

    def test_empty(self, runaway_off):
        with pytest.raises(ValidationError):
            detect_hyperfixation(Trajectory([], "empty", 0, runaway_off.initial), 0, 1, 0.5)

    @pytest.mark.parametrize("task, resolution", [(0, 0), (0, 3), (-1, 1)])
    def test_invalid_channels(self, task, resolution):
        with pytest.raises(ValidationError):
            detect_hyperfixation(static([0.9, 0.1, 0.], 60), task, resolution, 0.5)


class TestOverconfidence:
    def test_repeated_assertion(self):
        scenario = builtin("adversarial_repetition")
        traj = run_trajectory(scenario, steps=100)
        diagnosis = detect_overconfidence(traj, scenario.reliability)
        assert diagnosis.kind is FailureKind.SALIENTARY_OVERCONFIDENCE
        assert diagnosis.metrics["channel"] == 2
        assert diagnosis.metrics["direction"] == 1.
        assert diagnosis.metrics["final_weight"] > 0.9

    def test_starvation(self, trajectories):
        scenario, traj = trajectories["starvation"]
        diagnosis = detect_overconfidence(traj, scenario.reliability)
        assert diagnosis.metrics["channel"] == 3
        assert diagnosis.metrics["direction"] == -1.
        assert diagnosis.metrics["final_weight"] < 0.1

    def test_calibrated(self):
        assert not detect_overconfidence(static([0.3, 0.3, 0.4], 10), [0.3, 0.3, 0.4]).detected

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            detect_overconfidence(static([0.3, 0.3, 0.4], 10), [0.5, 0.5])


class TestRBSE:
    def test_drift(self, trajectories):
        _, traj = trajectories["drift"]
        diagnosis = detect_rbse(traj)
        assert diagnosis.kind is FailureKind.RBSE
        assert diagnosis.metrics["affected_channels"] >= 4
        assert diagnosis.metrics["localization"] <= 0.9

    def test_single_channel_runaway(self, runaway_off):
        assert not detect_rbse(runaway_off).detected
        assert detect_howlround(runaway_off).detected

    def test_static(self, trajectories):
        _, traj = trajectories["hyperfixation"]
        assert not detect_rbse(traj).detected

    def test_too_short(self):
        with pytest.raises(ValidationError):
            detect_rbse(static([0.5, 0.5], 50))


class TestDiagnose:
    @pytest.mark.parametrize("name", BUILTIN_NAMES)
    def test_builtin_contract(self, trajectories, name):
        scenario, traj = trajectories[name]
        kinds = [d.kind for d in diagnose(traj, scenario)]
        assert kinds == [FailureKind(scenario.expect)]

    def test_separation(self, runaway_off, trajectories):
        kinds = [d.kind for d in diagnose(runaway_off)]
        assert kinds == [FailureKind.HOWLROUND]
        drift_kinds = [d.kind for d in diagnose(trajectories["drift"][1])]
        assert FailureKind.RBSE in drift_kinds
        assert FailureKind.HOWLROUND not in drift_kinds

    def test_healthy(self, runaway_on):
        assert diagnose(runaway_on) == []

    def test_uniform(self):
        assert [d.kind for d in diagnose(static([0.25] * 4, 20))] == [FailureKind.SALIENCE_COLLAPSE]

    def test_meta_falls_back_to_trajectory(self, trajectories):
        _, traj = trajectories["hyperfixation"]
        assert [d.kind for d in diagnose(traj)] == [FailureKind.ANALYTICAL_HYPERFIXATION]

    def test_empty(self, runaway_off):
        with pytest.warns(RuntimeWarning, match="empty"):
            assert diagnose(Trajectory([], "empty", 0, runaway_off.initial)) == []

    def test_deterministic(self, trajectories):
        scenario, traj = trajectories["drift"]
        assert diagnose(traj, scenario) == diagnose(traj, scenario)


class TestReports:
    def test_frame(self, runaway_off):
        frame = diagnosis_frame(diagnose(runaway_off))
        assert list(frame.columns) == ["kind", "onset", "metric", "value"]
        assert set(frame["kind"]) == {"Howlround"}
        assert set(frame["metric"]) == {"channel", "peak_w_max", "run_length"}
        assert (frame["onset"] == 21).all()

    def test_healthy_frame(self):
        frame = diagnosis_frame([])
        assert len(frame) == 1
        assert frame["kind"].iloc[0] == "None"
        assert frame["onset"].isna().all()

    def test_summary(self, runaway_off):
        text = summarize(diagnose(runaway_off), "runaway")
        assert text.startswith("Diagnosis for runaway\n")
        assert "Howlround (onset step 21)" in text
        assert "healthy" in summarize([])
