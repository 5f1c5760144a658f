from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional

from ..errors import ValidationError


class FailureKind(str, Enum):
    HOWLROUND = "Howlround"
    SALIENCE_COLLAPSE = "SalienceCollapse"
    RECURSIVE_ENTRAPMENT = "RecursiveEntrapment"
    ANALYTICAL_HYPERFIXATION = "AnalyticalHyperfixation"
    SALIENTARY_OVERCONFIDENCE = "SalientaryOverconfidence"
    RBSE = "RBSE"
    NONE = "None"

    def __str__(self):
        return self.value


# tie-break order for diagnoses sharing an onset step
KIND_ORDER = [kind for kind in FailureKind if kind is not FailureKind.NONE]


@dataclass(frozen=True)
class FailureDiagnosis:
    """Outcome of one failure-mode detector.

    `onset_step` is set exactly when `kind` is not `FailureKind.NONE`.
    """
    kind: FailureKind
    onset_step: Optional[int] = None
    metrics: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", FailureKind(self.kind))
        if (self.kind is FailureKind.NONE) != (self.onset_step is None):
            raise ValidationError(
                f"onset_step must be given exactly when a failure is detected, "
                f"got kind={self.kind} onset_step={self.onset_step}")
        if self.onset_step is not None and self.onset_step < 0:
            raise ValidationError(f"onset_step must be non-negative, got {self.onset_step}")
        object.__setattr__(self, "metrics", {k: float(v) for k, v in self.metrics.items()})

    @classmethod
    def healthy(cls) -> "FailureDiagnosis":
        return cls(FailureKind.NONE)

    @property
    def detected(self) -> bool:
        return self.kind is not FailureKind.NONE
