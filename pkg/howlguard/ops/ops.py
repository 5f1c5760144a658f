from typing import Optional, Tuple

import numpy as np

from ..modules import AttenuatorParams, ReinforcementModel, SalienceState
from .dynamics import attenuate, micro_priority_bump, reinforce, select_output


# Base class

class BaseOp:
    def __call__(self, *args, **kwargs):
        raise NotImplementedError

    def __repr__(self):
        attrs = [(k, v) for k, v in self.__dict__.items()
                 if not k.startswith("_")]
        attrs = [(k, f"'{v}'") if isinstance(v, str) else (k, v) for k, v in attrs]
        args = ", ".join(f"{k}={v}" for k, v in attrs)
        return f"{self.__class__.__name__}({args})"


# Step operations

class SelectOutput(BaseOp):
    """SelectOutput operation class: picks the output channel of a step.

    Parameters
    ----------
    model
        Reinforcement model holding the selection rule.

    rng, optional
        Generator used for softmax sampling. Owned by the op so consecutive
        calls continue one random stream.
    """
    def __init__(self, model: ReinforcementModel, rng: Optional[np.random.Generator] = None):
        self.model = model
        self._rng = rng if rng is not None else np.random.default_rng(0)

    def __call__(self, state: SalienceState, input_channel: Optional[int] = None) -> int:
        return select_output(state, self.model, self._rng, input_channel)


class Reinforce(BaseOp):
    """Reinforce operation class: a callable `reinforce` bound to one model."""
    def __init__(self, model: ReinforcementModel):
        self.model = model

    def __call__(self, state: SalienceState, chosen: int) -> SalienceState:
        return reinforce(state, chosen, self.model)


class Attenuate(BaseOp):
    """Attenuate operation class: corrects a state with the attenuator.

    Parameters
    ----------
    params
        Attenuator parameters.

    mode
        "per_weight" or "max_only".

    normalized
        Whether to renormalize after the correction.
    """
    def __init__(self, params: AttenuatorParams, mode: str = "per_weight", normalized: bool = True):
        self.params = params
        self.mode = mode
        self.normalized = normalized

    def __call__(self, state: SalienceState) -> Tuple[SalienceState, np.ndarray]:
        return attenuate(state, self.params, self.mode, self.normalized)


class MicroPriorityBump(BaseOp):
    def __init__(self, channel: int, magnitude: float, normalized: bool = True, force: bool = False):
        self.channel = channel
        self.magnitude = magnitude
        self.normalized = normalized
        self.force = force

    def __call__(self, state: SalienceState) -> SalienceState:
        return micro_priority_bump(state, self.channel, self.magnitude,
                                   normalized=self.normalized, force=self.force)
