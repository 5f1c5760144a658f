"""Canned scenarios reproducing each failure mode on default thresholds."""
from typing import Callable, Dict

from .errors import ValidationError
from .modules import FailureKind, InitialSpec, ReinforcementModel, Scenario, Schedule


def runaway() -> Scenario:
    # channel 0 crosses 0.875 at step 21 with the attenuator off
    return Scenario(id="runaway", k=8, schedule=Schedule.constant(0), steps=500, seed=42,
                    model=ReinforcementModel(alpha=0.2),
                    expect=FailureKind.HOWLROUND.value)


def reinjection() -> Scenario:
    """The same instruction is reinjected with every input."""
    return Scenario(id="reinjection", k=6, schedule=Schedule.constant(0), steps=300,
                    model=ReinforcementModel(alpha=0.1, input_bias=0.5),
                    expect=FailureKind.HOWLROUND.value)


def equalization() -> Scenario:
    """Strong attenuation of every weight drives the distribution to uniform."""
    return Scenario(id="equalization", k=4, schedule=Schedule.constant(0), steps=60,
                    initial=InitialSpec("explicit", values=(0.4, 0.2, 0.2, 0.2)),
                    model=ReinforcementModel(alpha=0.),
                    attenuator=True, mode="per_weight",
                    params={"theta_global": 2., "theta_a": 0., "theta_b": 0.,
                            "eps_a": 0.01, "eps_b": 0.02, "eps_c": 0.03, "beta_min": 0.},
                    expect=FailureKind.SALIENCE_COLLAPSE.value)


def adversarial_repetition() -> Scenario:
    """An unreliable claim (channel 2) is asserted over and over."""
    return Scenario(id="adversarial_repetition", k=4, schedule=Schedule.constant(2), steps=40,
                    model=ReinforcementModel(alpha=0.05, input_bias=1.),
                    reliability=(0.3, 0.3, 0.05, 0.35),
                    expect=FailureKind.SALIENTARY_OVERCONFIDENCE.value)


def starvation() -> Scenario:
    """A reliable channel (3) is never stimulated and starves."""
    return Scenario(id="starvation", k=4, schedule=Schedule.round_robin((0, 1, 2)), steps=30,
                    initial=InitialSpec("explicit", values=(0.3, 0.3, 0.3, 0.1)),
                    model=ReinforcementModel(alpha=0.05, input_bias=1.),
                    reliability=(0.3, 0.3, 0.3, 0.9),
                    expect=FailureKind.SALIENTARY_OVERCONFIDENCE.value)


def drift() -> Scenario:
    """Half of the channels are reinforced in rotation, the rest fade."""
    return Scenario(id="drift", k=8, schedule=Schedule.round_robin((0, 1, 2, 3)), steps=120,
                    initial=InitialSpec("explicit", values=(0.2,) * 4 + (0.05,) * 4),
                    model=ReinforcementModel(alpha=0.1, input_bias=1.),
                    expect=FailureKind.RBSE.value)


def ping_pong() -> Scenario:
    # alternates between [0.8148.., 0.1851..] and [0.8, 0.2]
    return Scenario(id="ping_pong", k=2, schedule=Schedule.round_robin(), steps=60,
                    initial=InitialSpec("explicit", values=(0.8, 0.2)),
                    model=ReinforcementModel(alpha=0.1, input_bias=1.),
                    expect=FailureKind.RECURSIVE_ENTRAPMENT.value)


def hyperfixation() -> Scenario:
    """The task channel dominates while the resolution channel stays low."""
    return Scenario(id="hyperfixation", k=3, schedule=Schedule.constant(0), steps=60,
                    initial=InitialSpec("explicit", values=(0.7, 0.1, 0.2)),
                    model=ReinforcementModel(alpha=0.),
                    task_channel=0, resolution_channel=1, decision_threshold=0.5,
                    expect=FailureKind.ANALYTICAL_HYPERFIXATION.value)


BUILTINS: Dict[str, Callable[[], Scenario]] = {
    "runaway": runaway,
    "reinjection": reinjection,
    "equalization": equalization,
    "adversarial_repetition": adversarial_repetition,
    "starvation": starvation,
    "drift": drift,
    "ping_pong": ping_pong,
    "hyperfixation": hyperfixation,
}

BUILTIN_NAMES = tuple(BUILTINS)


def builtin(name: str) -> Scenario:
    """Return the canned scenario called `name`."""
    if name not in BUILTINS:
        raise ValidationError(f"unknown builtin scenario: {name}; expected one of {list(BUILTIN_NAMES)}")
    return BUILTINS[name]()
