import warnings
from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import softmax

from ..errors import ValidationError
from ..modules import AttenuatorParams, InitialSpec, ReinforcementModel, SalienceState
from ..utils import clamp_unit, renormalize, weights_entropy
from .functional import apply_correction, beta_final


ACCUMULATORS = {
    "linear": lambda w: w,
    "constant": lambda w: 1.,
    "quadratic": lambda w: w * w,
}

InitialLike = Union[str, InitialSpec, Mapping, Sequence[float]]


def _as_initial_spec(initial: InitialLike) -> InitialSpec:
    if isinstance(initial, InitialSpec):
        return initial
    if isinstance(initial, str):
        return InitialSpec(initial)
    if isinstance(initial, Mapping):
        if set(initial) == {"one_hot"}:
            return InitialSpec("one_hot", index=initial["one_hot"])
        if set(initial) == {"explicit"}:
            return InitialSpec("explicit", values=initial["explicit"])
        raise ValidationError(f"initial must be 'uniform', {{'one_hot': i}} or {{'explicit': [...]}}, got {initial}")
    return InitialSpec("explicit", values=initial)


def init_state(k: int, initial: InitialLike = "uniform", normalized: bool = True) -> SalienceState:
    """Build the step-0 state.

    Parameters
    ----------
    k
        Number of channels, at least 2.

    initial
        "uniform", `{"one_hot": i}`, `{"explicit": [...]}`, an `InitialSpec`
        or a plain weight vector.

    normalized
        Whether the weights must sum to 1 (within 1e-9).
    """
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 2:
        raise ValidationError(f"k must be an integer >= 2, got {k}")
    spec = _as_initial_spec(initial)
    if spec.kind == "uniform":
        weights = np.full(k, 1. / k)
    elif spec.kind == "one_hot":
        if not 0 <= spec.index < k:
            raise ValidationError(f"one_hot index {spec.index} is outside [0, {k})")
        weights = np.zeros(k)
        weights[spec.index] = 1.
    else:
        weights = np.asarray(spec.values, dtype=np.float64)
        if weights.shape != (k,):
            raise ValidationError(f"explicit initial weights must have {k} entries, got {len(weights)}")
    state = SalienceState(weights, step=0)
    if normalized and abs(state.weights.sum() - 1.) > 1e-9:
        raise ValidationError(f"initial weights must sum to 1 in normalized mode, got {state.weights.sum()}")
    return state


def select_output(state: SalienceState,
                  model: ReinforcementModel,
                  rng: Optional[np.random.Generator] = None,
                  input_channel: Optional[int] = None) -> int:
    """Choose the output channel for this step.

    `model.input_bias` is added to the score of `input_channel` (if given)
    before choosing. Argmax returns the lowest index among ties; softmax
    samples with probabilities proportional to exp(score / temperature).
    """
    scores = np.array(state.weights)
    if input_channel is not None and model.input_bias > 0:
        scores[input_channel] += model.input_bias
    if model.selection == "argmax":
        return int(np.argmax(scores))
    if rng is None:
        rng = np.random.default_rng(0)
    probabilities = softmax(scores / model.temperature)
    return int(rng.choice(scores.size, p=probabilities))


def reinforce(state: SalienceState, chosen: int, model: ReinforcementModel) -> SalienceState:
    """Reinforce the chosen channel by `alpha * f(w)`.

    In normalized mode the result is renormalized, which keeps every weight
    in [0, 1]; otherwise the reinforced weight is clamped to [0, 1].
    """
    if not 0 <= chosen < state.k:
        raise ValidationError(f"chosen channel {chosen} is outside [0, {state.k})")
    if model.alpha == 0:
        return state
    weights = np.array(state.weights)
    weights[chosen] += model.alpha * ACCUMULATORS[model.accumulation](weights[chosen])
    weights = renormalize(weights) if model.normalized else clamp_unit(weights)
    return state.with_weights(weights)


def attenuate(state: SalienceState,
              params: AttenuatorParams,
              mode: str = "per_weight",
              normalized: bool = True) -> Tuple[SalienceState, np.ndarray]:
    """Apply the attenuator correction.

    Parameters
    ----------
    state
        State to correct.

    params
        Attenuator parameters.

    mode, optional
        "per_weight" corrects each weight by the factor evaluated at its own
        value. "max_only" corrects only the (lowest-index) maximal weight.

    normalized, optional
        Whether to renormalize after the correction.

    Returns
    -------
    tuple
        The corrected state and the factor used for each channel. A state
        whose factors are all zero is returned unchanged.
    """
    weights = state.weights
    if mode == "per_weight":
        # + 0. turns -0. into 0.
        beta = np.asarray(beta_final(weights, params), dtype=np.float64) + 0.
    elif mode == "max_only":
        beta = np.zeros_like(weights)
        beta[state.argmax] = beta_final(state.w_max, params)
    else:
        raise ValidationError(f"mode must be one of ['per_weight', 'max_only'], got {mode}")
    if not np.any(beta):
        return state, beta
    corrected = apply_correction(weights, beta)
    if normalized:
        corrected = renormalize(corrected)
    return state.with_weights(corrected), beta


def micro_priority_bump(state: SalienceState,
                        channel: int,
                        magnitude: float,
                        normalized: bool = True,
                        force: bool = False,
                        collapse_entropy: float = 0.99) -> SalienceState:
    """Add a small priority to one channel to break a salience tie.

    The bump is meant for near-uniform (collapsed) states. On any other state
    it still applies but warns, unless `force` is set.
    """
    if not 0 <= channel < state.k:
        raise ValidationError(f"channel {channel} is outside [0, {state.k})")
    if magnitude < 0:
        raise ValidationError(f"magnitude must be >= 0, got {magnitude}")
    if magnitude == 0:
        return state
    if not force and weights_entropy(state.weights) < collapse_entropy:
        warnings.warn(
            f"micro-priority bump applied to a state that is not collapsed "
            f"(normalized entropy {weights_entropy(state.weights):.4f} < {collapse_entropy})",
            category=RuntimeWarning)
    weights = np.array(state.weights)
    weights[channel] += magnitude
    weights = clamp_unit(weights)
    if normalized:
        weights = renormalize(weights)
    return state.with_weights(weights)
