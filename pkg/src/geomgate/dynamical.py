"""Dynamical x-y plane rotations and composite pulse sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import IDENTITY_2, su2_exp
from .schedules import DEFAULT_RABI, PulseSegment, Schedule, concatenate

TWO_PI = 2 * math.pi

# axis phases for +x, -x, +y, -y
X_AXIS, MINUS_X, Y_AXIS, MINUS_Y = 0.0, math.pi, math.pi / 2, 3 * math.pi / 2


@dataclass(frozen=True)
class RotationSpec:
    """Rotation by ``angle`` about the in-plane axis at ``axis_phase``.

    Negative angles are folded onto the antipodal axis so the pulse area is
    always non-negative.
    """

    axis_phase: float
    angle: float

    def __post_init__(self):
        if not (math.isfinite(self.angle) and math.isfinite(self.axis_phase)):
            raise ValueError("rotation angle and axis phase must be finite")
        phase, angle = self.axis_phase, self.angle
        if angle < 0:
            phase, angle = phase + math.pi, -angle
        object.__setattr__(self, "axis_phase", phase % TWO_PI)
        object.__setattr__(self, "angle", angle)

    def unitary(self) -> np.ndarray:
        half = 0.5 * self.angle
        return su2_exp(half * math.cos(self.axis_phase), half * math.sin(self.axis_phase), 0.0)


def dynamical_rotation(spec: RotationSpec, rabi: float = DEFAULT_RABI) -> tuple[Schedule, np.ndarray]:
    if not rabi > 0:
        raise ValueError(f"rabi must be > 0, got {rabi}")
    schedule = Schedule((PulseSegment.from_area(spec.angle, spec.axis_phase, rabi),))
    return schedule, spec.unitary()


def compose_sequence(specs: Sequence[RotationSpec], rabi: float = DEFAULT_RABI) -> tuple[Schedule, np.ndarray]:
    """Composite pulse for a printed product ``R_1 R_2 ... R_k``.

    The rightmost factor acts first, so the schedule plays the specs in
    reverse printed order.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("compose_sequence needs at least one rotation")
    pieces = [dynamical_rotation(s, rabi) for s in reversed(specs)]
    schedule = concatenate(p[0] for p in pieces)
    u = IDENTITY_2.copy()
    for spec in specs:
        u = u @ spec.unitary()
    return schedule, u
