"""Climate-degradation transform of the suitability field.

Degradation scales the target use's suitability plane by (1 - delta_a),
uniformly over the grid. Other planes are passed through bit-identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import LandUse, SuitabilityField


@dataclass
class DegradationSpec:
    """Fractional degradation of one use's suitability: 0 = none, 1 = total."""

    delta_a: float
    target_use: LandUse = LandUse.AGRICULTURE

    def __post_init__(self):
        if not 0.0 <= self.delta_a <= 1.0:
            raise ValidationError(f"delta_a must be in [0, 1], got {self.delta_a}")
        self.target_use = LandUse(self.target_use)


def apply_degradation(field: SuitabilityField, spec: DegradationSpec) -> SuitabilityField:
    """Return a new field with the target plane scaled by (1 - delta_a).

    The input field is not modified; non-target planes are copied unchanged.
    """
    scores = field.scores.copy()
    scores[:, :, int(spec.target_use)] *= 1.0 - spec.delta_a
    return SuitabilityField(scores)


def scale_plane(
    field: SuitabilityField, use: LandUse, factors: np.ndarray
) -> SuitabilityField:
    """Spatially varying hook: multiply one plane by a per-cell factor grid.

    factors must be non-negative with shape (rows, cols). Uniform degradation
    is the special case factors == (1 - delta_a) everywhere.
    """
    factors = np.asarray(factors, dtype=np.float64)
    if factors.shape != (field.rows, field.cols):
        raise ValidationError(
            f"factor grid {factors.shape} does not match field {field.rows}x{field.cols}"
        )
    if (factors < 0).any() or not np.isfinite(factors).all():
        raise ValidationError("per-cell factors must be finite and >= 0")
    scores = field.scores.copy()
    scores[:, :, int(use)] *= factors
    return SuitabilityField(scores)
