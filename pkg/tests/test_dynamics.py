import warnings

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings, strategies as st

from howlguard.errors import ValidationError
from howlguard.modules import (AttenuatorParams, ReinforcementModel, SalienceState, Scenario,
                               Schedule, StepRecord, Trajectory)
from howlguard.ops import (Attenuate, MicroPriorityBump, Reinforce, SelectOutput, attenuate,
                           init_state, micro_priority_bump, reinforce, select_output)
from howlguard.pipeline import SalienceLoop, run_trajectory
from howlguard.scenarios import builtin


@pytest.fixture
def params():
    return AttenuatorParams()


@pytest.fixture(scope="module")
def runaway_off():
    return run_trajectory(builtin("runaway"), attenuator_on=False)


@pytest.fixture(scope="module")
def runaway_on():
    return run_trajectory(builtin("runaway"), attenuator_on=True)


def test_init_state():
    assert init_state(4).weights.tolist() == [0.25] * 4
    assert init_state(3, {"one_hot": 1}).weights.tolist() == [0., 1., 0.]
    assert init_state(2, [0.3, 0.7]).step == 0
    with pytest.raises(ValidationError):
        init_state(2, {"explicit": [0.7, 0.4]})
    # raw saturation runs do not need a distribution
    assert init_state(2, {"explicit": [0.7, 0.4]}, normalized=False).weights.tolist() == [0.7, 0.4]


@pytest.mark.parametrize("k, initial", [
    (1, "uniform"),
    (3, {"one_hot": 3}),
    (3, [0.5, 0.5]),
    (2, [1.2, -0.2]),
    (3, {"spread": 1}),
])
def test_init_state_invalid(k, initial):
    with pytest.raises(ValidationError):
        init_state(k, initial)


def test_state_is_immutable():
    values = np.array([0.5, 0.5])
    state = SalienceState(values)
    values[0] = 0.
    assert state.weights[0] == 0.5
    with pytest.raises(ValueError):
        state.weights[0] = 1.
    with pytest.raises(ValidationError):
        SalienceState([0.5, 1.5])


class TestSelectOutput:
    def test_argmax(self):
        model = ReinforcementModel()
        assert select_output(SalienceState([0.2, 0.5, 0.3]), model) == 1
        assert select_output(SalienceState([0.5, 0.5]), model) == 0
        assert select_output(SalienceState([0.25] * 4), model) == 0

    def test_input_bias(self):
        state = SalienceState([0.5, 0.3, 0.2])
        biased = ReinforcementModel(input_bias=0.5)
        assert select_output(state, biased, input_channel=2) == 2
        assert select_output(state, biased) == 0
        # without a bias the input is provenance only
        assert select_output(state, ReinforcementModel(), input_channel=2) == 0
        assert state.weights.tolist() == [0.5, 0.3, 0.2]

    def test_softmax_uniform_frequencies(self):
        state = init_state(4)
        model = ReinforcementModel(selection="softmax")
        rng = np.random.default_rng(7)
        draws = np.array([select_output(state, model, rng) for _ in range(100_000)])
        frequencies = np.bincount(draws, minlength=4) / draws.size
        assert np.all(np.abs(frequencies - 0.25) < 0.01)

    def test_softmax_is_seeded(self):
        state = SalienceState([0.4, 0.3, 0.2, 0.1])
        model = ReinforcementModel(selection="softmax", temperature=0.1)
        rng = np.random.default_rng(3)
        first = [select_output(state, model, rng) for _ in range(50)]
        op = SelectOutput(model, np.random.default_rng(3))
        second = [op(state) for _ in range(50)]
        assert first == second


class TestReinforce:
    def test_alpha_zero_returns_state(self):
        state = SalienceState([0.4, 0.6])
        assert reinforce(state, 0, ReinforcementModel(alpha=0.)) is state

    def test_unnormalized_linear(self):
        model = ReinforcementModel(alpha=0.1, normalized=False)
        out = reinforce(SalienceState([0.5, 0.2]), 0, model)
        assert out.weights == pytest.approx([0.55, 0.2])

    def test_normalized_linear(self):
        out = reinforce(SalienceState([0.5, 0.5]), 0, ReinforcementModel(alpha=0.1))
        assert out.weights == pytest.approx([0.52381, 0.47619], abs=1e-5)
        assert out.weights.sum() == pytest.approx(1., abs=1e-12)

    @pytest.mark.parametrize("accumulation, expected", [
        ("constant", 0.6),
        ("quadratic", 0.525),
        ("linear", 0.55),
    ])
    def test_accumulation_forms(self, accumulation, expected):
        model = ReinforcementModel(alpha=0.1, accumulation=accumulation, normalized=False)
        assert reinforce(SalienceState([0.5, 0.2]), 0, model).weights[0] == pytest.approx(expected)

    def test_unnormalized_clamp(self):
        model = ReinforcementModel(alpha=0.1, normalized=False)
        assert reinforce(SalienceState([0.95, 0.05]), 0, model).weights[0] == 1.

    def test_invalid_channel(self):
        with pytest.raises(ValidationError):
            reinforce(SalienceState([0.5, 0.5]), 2, ReinforcementModel())

    @pytest.mark.parametrize("kwargs", [
        {"alpha": -0.1},
        {"accumulation": "cubic"},
        {"selection": "greedy"},
        {"temperature": 0.},
        {"input_bias": -1.},
    ])
    def test_invalid_model(self, kwargs):
        with pytest.raises(ValidationError):
            ReinforcementModel(**kwargs)


class TestAttenuate:
    def test_global_strength_zero(self, params):
        state = SalienceState([0.995, 0.005])
        out, beta = attenuate(state, params.replace(theta_global=0.))
        assert out is state
        assert beta.tolist() == [0., 0.]

    def test_max_only_lowers_dominant_weight(self, params):
        state = SalienceState([0.995, 0.005])
        out, beta = attenuate(state, params, mode="max_only")
        assert out.weights[0] < 0.995
        assert beta[1] == 0.
        assert beta[0] == pytest.approx(0.571012, abs=1e-4)
        raw, _ = attenuate(state, params, mode="max_only", normalized=False)
        assert raw.weights[0] == pytest.approx(0.995 * (1 - beta[0]))
        assert raw.weights[1] == 0.005

    def test_do_no_harm(self, params):
        state = SalienceState([0.5, 0.3, 0.2])
        out, _ = attenuate(state, params)
        assert np.max(np.abs(out.weights - state.weights)) < 1e-3

    def test_unknown_mode(self, params):
        with pytest.raises(ValidationError):
            attenuate(SalienceState([0.5, 0.5]), params, mode="everything")

    def test_op(self, params):
        op = Attenuate(params, "max_only")
        assert repr(op).startswith("Attenuate(params=AttenuatorParams(")
        assert "mode='max_only'" in repr(op)
        out, _ = op(SalienceState([0.9, 0.1]))
        assert out.weights[0] < 0.9


class TestMicroPriorityBump:
    def test_breaks_tie(self):
        out = micro_priority_bump(init_state(4), 2, 0.01)
        assert out.argmax == 2
        assert np.count_nonzero(out.weights == out.w_max) == 1
        assert out.weights.sum() == pytest.approx(1.)

    def test_zero_magnitude(self):
        state = init_state(4)
        assert micro_priority_bump(state, 2, 0.) is state

    def test_escapes_collapse(self):
        state = MicroPriorityBump(2, 0.01)(init_state(4))
        model = ReinforcementModel(alpha=0.1)
        select, grow = SelectOutput(model), Reinforce(model)
        for _ in range(20):
            state = grow(state, select(state))
        assert state.argmax == 2
        assert state.weights[2] > 0.5

    def test_warns_outside_collapse(self):
        state = SalienceState([0.7, 0.2, 0.1])
        with pytest.warns(RuntimeWarning, match="not collapsed"):
            micro_priority_bump(state, 1, 0.01)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            micro_priority_bump(state, 1, 0.01, force=True)

    @pytest.mark.parametrize("channel, magnitude", [(4, 0.01), (-1, 0.01), (0, -0.01)])
    def test_invalid(self, channel, magnitude):
        with pytest.raises(ValidationError):
            micro_priority_bump(init_state(4), channel, magnitude)


class TestTrajectory:
    def test_zero_steps(self):
        traj = run_trajectory(builtin("runaway"), steps=0)
        assert len(traj) == 0
        assert traj.weights_matrix().shape == (0, 8)
        assert list(traj.to_frame().columns) == ["step", "input", "chosen", "entropy", "beta_max"] + \
            [f"w_{i}" for i in range(8)]

    def test_records_are_consistent(self, runaway_off):
        assert [r.step for r in runaway_off.records] == list(range(500))
        assert runaway_off.scenario_id == "runaway"
        assert runaway_off.seed == 42
        with pytest.raises(ValidationError):
            Trajectory(records=list(reversed(runaway_off.records[:2])), scenario_id="x",
                       seed=0, initial=runaway_off.initial)

    def test_step_record_validation(self):
        with pytest.raises(ValidationError):
            StepRecord(0, 2, 0, np.array([0.5, 0.5]), np.zeros(2), 1.)
        with pytest.raises(ValidationError):
            StepRecord(0, 0, 0, np.array([0.5, 0.5]), np.zeros(3), 1.)

    def test_runaway_reaches_lock_in(self, runaway_off):
        w_max = runaway_off.w_max()
        first = int(np.flatnonzero(w_max >= 0.99)[0])
        assert first == 35
        assert first < 60
        assert int(np.flatnonzero(w_max > 0.875)[0]) == 21
        assert (runaway_off.chosen() == 0).all()

    def test_monotone_runaway(self, runaway_off):
        # renormalization rounding near 1 is allowed
        assert np.all(np.diff(runaway_off.w_max()) >= -1e-12)

    def test_attenuator_prevents_lock_in(self, runaway_on):
        w_max = runaway_on.w_max()
        assert w_max.max() < 0.99
        assert w_max[-1] < 0.875
        assert w_max[-1] == pytest.approx(0.588, abs=0.01)

    def test_global_strength_zero_matches_off(self, runaway_off):
        scenario = builtin("runaway")
        silent = run_trajectory(scenario, params=AttenuatorParams(theta_global=0.), attenuator_on=True)
        pd.testing.assert_frame_equal(silent.to_frame(), runaway_off.to_frame(), check_exact=True)

    def test_quiescent_scenario_untouched(self):
        scenario = Scenario(id="quiet", k=4, schedule=Schedule.round_robin(), steps=50,
                            model=ReinforcementModel(alpha=0.))
        on = run_trajectory(scenario, attenuator_on=True)
        off = run_trajectory(scenario, attenuator_on=False)
        assert np.max(np.abs(on.weights_matrix() - off.weights_matrix())) < 1e-9

    def test_determinism(self):
        scenario = Scenario(id="noisy", k=5, schedule=Schedule.random(seed=11), steps=200,
                            model=ReinforcementModel(alpha=0.2, selection="softmax", temperature=0.05,
                                                     input_bias=0.1),
                            seed=5)
        first = run_trajectory(scenario, attenuator_on=True)
        second = run_trajectory(scenario, attenuator_on=True)
        pd.testing.assert_frame_equal(first.to_frame(), second.to_frame(), check_exact=True)
        assert run_trajectory(scenario, attenuator_on=True, seed=6).seed == 6

    def test_loop_repr(self, params):
        model = ReinforcementModel()
        loop = SalienceLoop(SelectOutput(model), Reinforce(model), Attenuate(params))
        assert [type(op).__name__ for op in loop.ops] == ["SelectOutput", "Reinforce", "Attenuate"]
        assert repr(loop).startswith("SalienceLoop(SelectOutput(")


@given(k=st.integers(min_value=2, max_value=6),
       alpha=st.floats(min_value=0., max_value=1.),
       accumulation=st.sampled_from(["linear", "constant", "quadratic"]),
       selection=st.sampled_from(["argmax", "softmax"]),
       normalized=st.booleans(),
       attenuator_on=st.booleans(),
       mode=st.sampled_from(["per_weight", "max_only"]),
       seed=st.integers(min_value=0, max_value=2 ** 16))
@settings(max_examples=40, deadline=None)
def test_weight_bounds(k, alpha, accumulation, selection, normalized, attenuator_on, mode, seed):
    model = ReinforcementModel(alpha=alpha, accumulation=accumulation, selection=selection,
                               normalized=normalized)
    scenario = Scenario(id="bounds", k=k, schedule=Schedule.random(seed=seed), steps=40,
                        model=model, seed=seed, mode=mode)
    weights = run_trajectory(scenario, attenuator_on=attenuator_on).weights_matrix()
    assert np.all((weights >= 0) & (weights <= 1))
    if normalized:
        assert np.all(np.abs(weights.sum(axis=1) - 1) < 1e-9)
