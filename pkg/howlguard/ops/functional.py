from typing import Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import expit

from ..errors import DomainError, ValidationError
from ..modules import AttenuatorParams

ArrayLike = Union[float, np.ndarray]


def _scalar_or_array(x, result):
    if np.ndim(x) == 0:
        return float(result)
    return result


def _as_float_array(x, name="x"):
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {x}")
    return arr


def logistic(z: ArrayLike) -> ArrayLike:
    """Standard logistic function 1 / (1 + exp(-z))."""
    return _scalar_or_array(z, expit(np.asarray(z, dtype=np.float64)))


def arsech(x: ArrayLike) -> ArrayLike:
    """Inverse hyperbolic secant, ln(1/x + sqrt(1/x^2 - 1)).

    Parameters
    ----------
    x
        Scalar or array with every element in (0, 1].

    Returns
    -------
    float or np.ndarray
        Non-negative values; arsech(1) is exactly 0.
    """
    arr = _as_float_array(x)
    if np.any(arr <= 0) or np.any(arr > 1):
        raise DomainError(f"arsech is defined on (0, 1], got {x}")
    return _scalar_or_array(x, np.arccosh(1. / arr))


def phi(x: ArrayLike) -> ArrayLike:
    """Modified inverse hyperbolic secant ln(1/x + sqrt(1/x^2) - 2).

    For x > 0 this is ln(2(1 - x)/x), which is the form evaluated here. It is
    strictly decreasing and crosses zero at x = 2/3.

    Parameters
    ----------
    x
        Scalar or array with every element in (0, 1). Callers are expected to
        clamp weights with `clamp_weight` first.
    """
    arr = _as_float_array(x)
    if np.any(arr <= 0) or np.any(arr >= 1):
        raise DomainError(f"phi is defined on (0, 1), got {x}")
    return _scalar_or_array(x, np.log(2. * (1. - arr) / arr))


def gate(w_max: ArrayLike, rho: float, eps: float) -> ArrayLike:
    """Sigmoid activation gate, exactly 0.5 at `w_max == eps`.

    Parameters
    ----------
    w_max
        Weight (or array of weights) the gate is evaluated at.

    rho
        Steepness of the activation, must be positive.

    eps
        Activation threshold in (0, 1).
    """
    if not rho > 0:
        raise ValidationError(f"rho must be > 0, got {rho}")
    if not 0 < eps < 1:
        raise ValidationError(f"eps must be in (0, 1), got {eps}")
    w = np.asarray(w_max, dtype=np.float64)
    return _scalar_or_array(w_max, expit(rho * (w - eps)))


def gates(w_max: ArrayLike, params: AttenuatorParams) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
    """Return the three component gates (tau_a, tau_b, tau_c)."""
    return (gate(w_max, params.rho_a, params.eps_a),
            gate(w_max, params.rho_b, params.eps_b),
            gate(w_max, params.rho_c, params.eps_c))


def clamp_weight(w: ArrayLike, params: AttenuatorParams) -> ArrayLike:
    """Clamp a weight in [0, 1] into [delta, 1 - delta]."""
    arr = _as_float_array(w, name="w")
    if np.any(arr < 0) or np.any(arr > 1):
        raise DomainError(f"weights must lie in [0, 1], got {w}")
    delta = params.w_clamp_delta
    return _scalar_or_array(w, np.clip(arr, delta, 1. - delta))


def _components(w, params):
    wc = np.asarray(clamp_weight(w, params))
    tau_a, tau_b, tau_c = gates(wc, params)
    return (tau_a * np.exp(-params.gamma * wc),
            tau_b * np.asarray(phi(wc)),
            tau_c * np.log1p(wc))


def beta_basic(w_max: ArrayLike, params: AttenuatorParams, clip: bool = True) -> ArrayLike:
    """Basic attenuation factor: the sum of the three gated components.

    Parameters
    ----------
    w_max
        Weight(s) in [0, 1]; clamped into [delta, 1 - delta] before evaluation.

    params
        Attenuator parameters. Only gates, `gamma`, the clamp and the beta
        bounds are used here.

    clip, optional
        Whether to clamp the result into [beta_min, beta_max]. The raw sum can
        exceed 1, which would drive weights negative.
    """
    exp_term, phi_term, log_term = _components(w_max, params)
    beta = exp_term + phi_term + log_term
    if clip:
        beta = np.clip(beta, params.beta_min, params.beta_max)
    return _scalar_or_array(w_max, beta)


def beta_final(w_max: ArrayLike, params: AttenuatorParams, clip: bool = True) -> ArrayLike:
    """Tunable attenuation factor, the basic components weighted by theta.

    With `theta_global == theta_a == theta_b == theta_c == 1` the unclipped
    value equals `beta_basic(w_max, params, clip=False)`.

    Parameters
    ----------
    w_max
        Weight(s) in [0, 1]; clamped into [delta, 1 - delta] before evaluation.

    params
        Attenuator parameters.

    clip, optional
        Whether to clamp the result into [beta_min, beta_max].
    """
    exp_term, phi_term, log_term = _components(w_max, params)
    beta = params.theta_global * (params.theta_a * exp_term
                                  + params.theta_b * phi_term
                                  + params.theta_c * log_term)
    if clip:
        beta = np.clip(beta, params.beta_min, params.beta_max)
    return _scalar_or_array(w_max, beta)


def apply_correction(w: ArrayLike, beta: ArrayLike) -> ArrayLike:
    """Correct weight(s) by a factor (1 - beta), clamped to [0, 1].

    Negative `beta` amplifies the weight.
    """
    corrected = np.clip(np.asarray(w, dtype=np.float64) * (1. - np.asarray(beta, dtype=np.float64)), 0., 1.)
    if np.ndim(w) == 0 and np.ndim(beta) == 0:
        return float(corrected)
    return corrected


def _grid(grid_size, params):
    if isinstance(grid_size, bool) or not isinstance(grid_size, (int, np.integer)) or grid_size < 2:
        raise ValidationError(f"grid_size must be an integer >= 2, got {grid_size}")
    delta = params.w_clamp_delta
    return np.linspace(delta, 1. - delta, grid_size)


def component_curves(grid_size: int, params: AttenuatorParams) -> pd.DataFrame:
    """Tabulate the weighted attenuator components on an even grid over [delta, 1 - delta].

    Returns
    -------
    pd.DataFrame
        Columns `w, exp_term, phi_term, log_term, sum`, where `sum` is the
        clamped attenuation factor.
    """
    w = _grid(grid_size, params)
    exp_term, phi_term, log_term = _components(w, params)
    scale = params.theta_global
    exp_term = scale * params.theta_a * exp_term
    phi_term = scale * params.theta_b * phi_term
    log_term = scale * params.theta_c * log_term
    total = np.clip(exp_term + phi_term + log_term, params.beta_min, params.beta_max)
    return pd.DataFrame({"w": w,
                         "exp_term": exp_term,
                         "phi_term": phi_term,
                         "log_term": log_term,
                         "sum": total})


def arsech_phi_curves(grid_size: int, params: AttenuatorParams) -> pd.DataFrame:
    """Tabulate `arsech` and `phi` side by side on [delta, 1 - delta]."""
    x = _grid(grid_size, params)
    return pd.DataFrame({"x": x, "arsech": arsech(x), "phi": phi(x)})


def operation_curve(w0: float, steps: int, params: AttenuatorParams) -> pd.DataFrame:
    """Repeatedly attenuate a single weight with no reinforcement.

    Row n holds the weight after n corrections and the attenuation factor
    evaluated at that weight.

    Parameters
    ----------
    w0
        Starting weight in [0, 1].

    steps
        Number of corrections to apply, at least 1.

    params
        Attenuator parameters.
    """
    if isinstance(steps, bool) or not isinstance(steps, (int, np.integer)) or steps < 1:
        raise ValidationError(f"steps must be an integer >= 1, got {steps}")
    if not 0 <= w0 <= 1:
        raise ValidationError(f"w0 must be in [0, 1], got {w0}")
    ws, betas = [], []
    w = float(w0)
    for _ in range(steps + 1):
        beta = beta_final(w, params)
        ws.append(w)
        betas.append(beta)
        w = apply_correction(w, beta)
    return pd.DataFrame({"step": np.arange(steps + 1), "w": ws, "beta": betas})
