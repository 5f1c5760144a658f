import math
from dataclasses import dataclass, fields, replace
from numbers import Real
from typing import Any, Dict, NamedTuple

from ..errors import ValidationError


class FieldInfo(NamedTuple):
    type: type
    default: Any


@dataclass(frozen=True)
class AttenuatorParams:
    """Tuning constants of the attenuator function.

    Parameters
    ----------
    theta_global
        Global strength; 0 disables attenuation entirely.
    theta_a, theta_b, theta_c
        Magnitudes of the exponential, phi and logarithmic components.
    gamma
        Fade rate of the exponential component.
    rho_a, rho_b, rho_c
        Steepness of each component's activation gate.
    eps_a, eps_b, eps_c
        Activation thresholds of the gates, strictly increasing in (0, 1).
    w_clamp_delta
        Weights are clamped into [delta, 1 - delta] before evaluation.
    beta_min, beta_max
        Output clamp for the attenuation factor.
    """
    theta_global: float = 1.0
    theta_a: float = 1.0
    theta_b: float = 0.05
    theta_c: float = 1.0
    gamma: float = 2.0
    rho_a: float = 60.0
    rho_b: float = 20.0
    rho_c: float = 20.0
    eps_a: float = 0.625
    eps_b: float = 0.775
    eps_c: float = 0.875
    w_clamp_delta: float = 0.01
    beta_min: float = -0.5
    beta_max: float = 0.95

    def __post_init__(self):
        _coerce(self)
        for name in ("theta_global", "theta_a", "theta_b", "theta_c"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("gamma", "rho_a", "rho_b", "rho_c"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("eps_a", "eps_b", "eps_c"):
            if not 0 < getattr(self, name) < 1:
                raise ValidationError(f"{name} must be in (0, 1), got {getattr(self, name)}")
        if not self.eps_a < self.eps_b < self.eps_c:
            raise ValidationError(
                f"gate thresholds must satisfy eps_a < eps_b < eps_c, "
                f"got {self.eps_a}, {self.eps_b}, {self.eps_c}")
        if not 0 < self.w_clamp_delta <= 0.01:
            raise ValidationError(f"w_clamp_delta must be in (0, 0.01], got {self.w_clamp_delta}")
        if not self.beta_min <= 0 <= self.beta_max:
            raise ValidationError(
                f"beta_min <= 0 <= beta_max must hold, got beta_min={self.beta_min}, beta_max={self.beta_max}")

    def replace(self, **patch) -> "AttenuatorParams":
        _check_names(type(self), patch, "parameter")
        return replace(self, **patch)

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class DetectorThresholds:
    """Thresholds of the failure-mode detectors in `howlguard.diagnostics`."""
    howlround_w: float = 0.875
    howlround_window: int = 5
    collapse_entropy: float = 0.99
    cycle_quantization: float = 1e-3
    confidence_gap: float = 0.3
    drift_window: int = 50
    tie_tolerance: float = 1e-3
    drift_min_growth: float = 0.05
    drift_channel_tolerance: float = 1e-3
    localization_ratio: float = 0.9
    max_cycle_length: int = 64
    cycle_repeats: int = 3

    def __post_init__(self):
        _coerce(self)
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValidationError(f"{f.name} must be > 0, got {getattr(self, f.name)}")
        if self.collapse_entropy > 1:
            raise ValidationError(f"collapse_entropy must be in (0, 1], got {self.collapse_entropy}")
        if self.localization_ratio > 1:
            raise ValidationError(f"localization_ratio must be in (0, 1], got {self.localization_ratio}")
        if self.max_cycle_length < 2:
            raise ValidationError(f"max_cycle_length must be >= 2, got {self.max_cycle_length}")
        if self.cycle_repeats < 2:
            raise ValidationError(f"cycle_repeats must be >= 2, got {self.cycle_repeats}")

    def replace(self, **patch) -> "DetectorThresholds":
        _check_names(type(self), patch, "threshold")
        return replace(self, **patch)

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _coerce(obj):
    # frozen dataclasses need object.__setattr__
    for f in fields(obj):
        value = getattr(obj, f.name)
        if isinstance(value, bool) or not isinstance(value, Real):
            raise ValidationError(f"{f.name} must be a number, got {value!r}")
        if not math.isfinite(value):
            raise ValidationError(f"{f.name} must be finite, got {value!r}")
        if f.type is int:
            if value != int(value):
                raise ValidationError(f"{f.name} must be an integer, got {value!r}")
            object.__setattr__(obj, f.name, int(value))
        else:
            object.__setattr__(obj, f.name, float(value))


def _check_names(cls, patch, what):
    known = {f.name for f in fields(cls)}
    for name in patch:
        if name not in known:
            raise ValidationError(f"unknown {what}: {name}")


def registry(cls) -> Dict[str, FieldInfo]:
    """Map every field of a parameter dataclass to its type and default."""
    return {f.name: FieldInfo(f.type, f.default) for f in fields(cls)}


PARAMETER_REGISTRY = registry(AttenuatorParams)
THRESHOLD_REGISTRY = registry(DetectorThresholds)
