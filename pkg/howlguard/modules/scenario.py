from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..errors import ValidationError
from .params import AttenuatorParams, PARAMETER_REGISTRY
from .state import ReinforcementModel, SalienceState


SCHEDULE_KINDS = ("explicit", "constant", "round_robin", "random")
INITIAL_KINDS = ("uniform", "one_hot", "explicit")
ATTENUATION_MODES = ("per_weight", "max_only")
SWEEP_METRICS = ("peak_w_max", "recovery_steps", "final_entropy")


@dataclass(frozen=True)
class InitialSpec:
    """Initial weights: "uniform", "one_hot" (with `index`) or "explicit" (with `values`)."""
    kind: str = "uniform"
    index: Optional[int] = None
    values: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ValidationError(f"initial must be one of {list(INITIAL_KINDS)}, got {self.kind}")
        if self.kind == "one_hot" and self.index is None:
            raise ValidationError("initial: one_hot needs a channel index")
        if self.kind == "explicit":
            if self.values is None:
                raise ValidationError("initial: explicit needs a weight vector")
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))


@dataclass(frozen=True)
class Schedule:
    """Input channel per step.

    `explicit` lists one channel per step. `constant` stimulates `channels[0]`
    on every step. `round_robin` cycles over `channels` and `random` draws
    from them with its own `seed`. An empty `channels` means all channels.
    """
    kind: str
    channels: Tuple[int, ...] = ()
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValidationError(f"schedule kind must be one of {list(SCHEDULE_KINDS)}, got {self.kind}")
        object.__setattr__(self, "channels", tuple(int(c) for c in self.channels))
        if self.kind == "constant" and len(self.channels) != 1:
            raise ValidationError("schedule: constant needs exactly one channel")
        if self.seed is not None and self.seed < 0:
            raise ValidationError(f"schedule.seed must be >= 0, got {self.seed}")

    @classmethod
    def constant(cls, channel: int) -> "Schedule":
        return cls("constant", (channel,))

    @classmethod
    def round_robin(cls, channels=()) -> "Schedule":
        return cls("round_robin", tuple(channels))

    @classmethod
    def random(cls, seed: int, channels=()) -> "Schedule":
        return cls("random", tuple(channels), seed)

    def validate(self, k: int, steps: int):
        for c in self.channels:
            if not 0 <= c < k:
                raise ValidationError(f"schedule entry {c} is outside [0, {k})")
        if self.kind == "explicit" and len(self.channels) < steps:
            raise ValidationError(
                f"schedule lists {len(self.channels)} inputs but the scenario runs {steps} steps")

    def expand(self, steps: int, k: int, seed: Optional[int] = None) -> np.ndarray:
        """Return the input channel for each of `steps` steps.

        A random schedule without its own seed draws from `seed`.
        """
        self.validate(k, steps)
        pool = np.array(self.channels if self.channels else range(k), dtype=np.int64)
        if self.kind == "explicit":
            return pool[:steps].copy()
        if self.kind == "constant":
            return np.full(steps, pool[0], dtype=np.int64)
        if self.kind == "round_robin":
            return pool[np.arange(steps) % pool.size]
        rng = np.random.default_rng(self.seed if self.seed is not None else seed)
        return rng.choice(pool, size=steps)


@dataclass(frozen=True)
class Scenario:
    """A deterministic simulation setup.

    Besides the core fields, a scenario records its attenuator preference
    (`attenuator`, `mode`, `params` overrides) and the facts some detectors
    need (`reliability`, `task_channel`, `resolution_channel`,
    `decision_threshold`). `expect` names the failure kind a canned
    scenario is built to show.
    """
    id: str
    k: int
    schedule: Schedule
    steps: int
    initial: InitialSpec = InitialSpec()
    model: ReinforcementModel = ReinforcementModel()
    reliability: Optional[Tuple[float, ...]] = None
    seed: int = 0
    attenuator: bool = False
    mode: str = "per_weight"
    params: Dict[str, float] = field(default_factory=dict)
    task_channel: Optional[int] = None
    resolution_channel: Optional[int] = None
    decision_threshold: Optional[float] = None
    expect: Optional[str] = None

    def __post_init__(self):
        if not self.id:
            raise ValidationError("id must be a non-empty string")
        if self.k < 2:
            raise ValidationError(f"k must be >= 2, got {self.k}")
        if self.steps < 1:
            raise ValidationError(f"steps must be >= 1, got {self.steps}")
        self.schedule.validate(self.k, self.steps)
        if self.initial.kind == "one_hot" and not 0 <= self.initial.index < self.k:
            raise ValidationError(f"initial: one_hot index {self.initial.index} is outside [0, {self.k})")
        if self.initial.kind == "explicit" and len(self.initial.values) != self.k:
            raise ValidationError(f"initial: explicit vector has {len(self.initial.values)} entries, expected {self.k}")
        if self.initial.kind == "explicit":
            weights = SalienceState(np.asarray(self.initial.values, dtype=np.float64)).weights
            if self.model.normalized and abs(weights.sum() - 1.) > 1e-9:
                raise ValidationError(f"initial: explicit weights must sum to 1, got {weights.sum():.6g}")
        if self.seed < 0:
            raise ValidationError(f"seed must be >= 0, got {self.seed}")
        if self.reliability is not None:
            reliability = tuple(float(r) for r in self.reliability)
            if len(reliability) != self.k:
                raise ValidationError(f"reliability has {len(reliability)} entries, expected {self.k}")
            if any(not 0 <= r <= 1 for r in reliability):
                raise ValidationError(f"reliability values must lie in [0, 1], got {list(reliability)}")
            object.__setattr__(self, "reliability", reliability)
        if self.mode not in ATTENUATION_MODES:
            raise ValidationError(f"mode must be one of {list(ATTENUATION_MODES)}, got {self.mode}")
        self.attenuator_params()
        for name in ("task_channel", "resolution_channel"):
            channel = getattr(self, name)
            if channel is not None and not 0 <= channel < self.k:
                raise ValidationError(f"{name} {channel} is outside [0, {self.k})")
        if self.decision_threshold is not None and not 0 <= self.decision_threshold <= 1:
            raise ValidationError(f"decision_threshold must be in [0, 1], got {self.decision_threshold}")

    def attenuator_params(self, base: Optional[AttenuatorParams] = None) -> AttenuatorParams:
        """`base` (defaults when None) with this scenario's overrides applied."""
        base = AttenuatorParams() if base is None else base
        return base.replace(**self.params)

    def meta(self) -> Dict[str, Any]:
        return {"reliability": self.reliability,
                "task_channel": self.task_channel,
                "resolution_channel": self.resolution_channel,
                "decision_threshold": self.decision_threshold}


@dataclass(frozen=True)
class SweepSpec:
    """One attenuator parameter swept over `numpy.linspace(start, stop, steps)`."""
    param: str
    start: float
    stop: float
    steps: int
    metric: str = "peak_w_max"

    def __post_init__(self):
        if self.param not in PARAMETER_REGISTRY:
            raise ValidationError(f"unknown parameter: {self.param}")
        if self.metric not in SWEEP_METRICS:
            raise ValidationError(f"metric must be one of {list(SWEEP_METRICS)}, got {self.metric}")
        if self.start == self.stop:
            if self.steps != 1:
                raise ValidationError("a degenerate sweep (start == stop) must have steps == 1")
        elif not self.start < self.stop:
            raise ValidationError(f"sweep needs start < stop, got {self.start} and {self.stop}")
        elif self.steps < 2:
            raise ValidationError(f"sweep needs steps >= 2, got {self.steps}")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)
