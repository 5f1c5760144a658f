from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from ..errors import ValidationError


ACCUMULATIONS = ("linear", "constant", "quadratic")
SELECTIONS = ("argmax", "softmax")


def _readonly(values, name="weights") -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SalienceState:
    """Per-channel salience weights at time step `step`.

    The weights are copied into a read-only float64 array.
    """
    weights: np.ndarray
    step: int = 0

    def __post_init__(self):
        weights = _readonly(self.weights)
        if weights.size < 1:
            raise ValidationError("weights must not be empty")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0) or np.any(weights > 1):
            raise ValidationError(f"every weight must lie in [0, 1], got {weights.tolist()}")
        if self.step < 0:
            raise ValidationError(f"step must be non-negative, got {self.step}")
        object.__setattr__(self, "weights", weights)

    @property
    def k(self) -> int:
        return self.weights.size

    @property
    def w_max(self) -> float:
        return float(self.weights.max())

    @property
    def argmax(self) -> int:
        # np.argmax returns the lowest index among ties
        return int(np.argmax(self.weights))

    def with_weights(self, weights, step: Optional[int] = None) -> "SalienceState":
        return SalienceState(weights, self.step if step is None else step)

    def __eq__(self, other):
        if not isinstance(other, SalienceState):
            return NotImplemented
        return self.step == other.step and np.array_equal(self.weights, other.weights)

    def __repr__(self):
        return f"SalienceState(weights={self.weights.tolist()}, step={self.step})"


@dataclass(frozen=True)
class ReinforcementModel:
    """Closed-loop reinforcement rule.

    Parameters
    ----------
    alpha
        Over-reinforcement coefficient, >= 0.
    accumulation
        Form of the accumulation term f(w): "linear" (w), "constant" (1) or
        "quadratic" (w**2).
    selection
        "argmax" (lowest index wins ties) or "softmax".
    temperature
        Softmax temperature, > 0.
    normalized
        Whether weights are renormalized to sum to 1 after every change.
    input_bias
        Added to the current input channel's weight when choosing the output.
        The stored weights are not affected. 0 leaves inputs as provenance only.
    """
    alpha: float = 0.1
    accumulation: str = "linear"
    selection: str = "argmax"
    temperature: float = 1.0
    normalized: bool = True
    input_bias: float = 0.0

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValidationError(f"alpha must be >= 0, got {self.alpha}")
        if self.accumulation not in ACCUMULATIONS:
            raise ValidationError(f"accumulation must be one of {list(ACCUMULATIONS)}, got {self.accumulation}")
        if self.selection not in SELECTIONS:
            raise ValidationError(f"selection must be one of {list(SELECTIONS)}, got {self.selection}")
        if not self.temperature > 0:
            raise ValidationError(f"temperature must be > 0, got {self.temperature}")
        if not isinstance(self.normalized, bool):
            raise ValidationError(f"normalized must be a boolean, got {self.normalized!r}")
        if not self.input_bias >= 0:
            raise ValidationError(f"input_bias must be >= 0, got {self.input_bias}")


@dataclass(frozen=True, eq=False)
class StepRecord:
    step: int
    input_channel: int
    chosen_output: int
    weights_after: np.ndarray
    beta_applied: np.ndarray
    entropy: float

    def __post_init__(self):
        weights = _readonly(self.weights_after, "weights_after")
        beta = _readonly(self.beta_applied, "beta_applied")
        k = weights.size
        if beta.size != k:
            raise ValidationError(f"beta_applied has {beta.size} entries, expected {k}")
        for name in ("input_channel", "chosen_output"):
            if not 0 <= getattr(self, name) < k:
                raise ValidationError(f"{name} must be in [0, {k}), got {getattr(self, name)}")
        object.__setattr__(self, "weights_after", weights)
        object.__setattr__(self, "beta_applied", beta)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Ordered step records of one simulation run.

    `initial` holds the weights before the first step. `meta` carries the
    scenario facts detectors need: `reliability`, `task_channel`,
    `resolution_channel` and `decision_threshold`.
    """
    records: List[StepRecord]
    scenario_id: str
    seed: int
    initial: np.ndarray
    normalized: bool = True
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        initial = _readonly(self.initial, "initial")
        records = list(self.records)
        for i, record in enumerate(records):
            if record.step != i:
                raise ValidationError(f"record {i} has step {record.step}")
            if record.weights_after.size != initial.size:
                raise ValidationError(
                    f"record {i} has {record.weights_after.size} channels, expected {initial.size}")
        object.__setattr__(self, "records", records)
        object.__setattr__(self, "initial", initial)

    def __len__(self):
        return len(self.records)

    @property
    def k(self) -> int:
        return self.initial.size

    def weights_matrix(self) -> np.ndarray:
        """Weights after every step as an (n_steps, k) array."""
        if not self.records:
            return np.empty((0, self.k))
        return np.stack([r.weights_after for r in self.records])

    def beta_matrix(self) -> np.ndarray:
        if not self.records:
            return np.empty((0, self.k))
        return np.stack([r.beta_applied for r in self.records])

    def w_max(self) -> np.ndarray:
        return self.weights_matrix().max(axis=1) if self.records else np.empty(0)

    def entropy(self) -> np.ndarray:
        return np.array([r.entropy for r in self.records], dtype=np.float64)

    def chosen(self) -> np.ndarray:
        return np.array([r.chosen_output for r in self.records], dtype=np.int64)

    def inputs(self) -> np.ndarray:
        return np.array([r.input_channel for r in self.records], dtype=np.int64)

    def to_frame(self) -> pd.DataFrame:
        """One row per step: `step, input, chosen, entropy, beta_max, w_0 .. w_{k-1}`."""
        frame = pd.DataFrame({
            "step": np.arange(len(self), dtype=np.int64),
            "input": self.inputs(),
            "chosen": self.chosen(),
            "entropy": self.entropy(),
            "beta_max": self.beta_matrix().max(axis=1) if self.records else np.empty(0),
        })
        weights = self.weights_matrix()
        for i in range(self.k):
            frame[f"w_{i}"] = weights[:, i]
        return frame

