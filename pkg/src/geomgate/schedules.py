"""Piecewise-constant pulse schedules and their (noisy) time evolution.

Within a segment the control Hamiltonian is ``rabi/2 (cos(phase) X + sin(phase) Y)``
(single qubit) or the same form on the effective Pauli operators of the
two-qubit odd subspace span{|01>, |10>}. Noise enters as

    H_noisy = (1 + epsilon) H_control + delta * rabi_ref * Z

with ``rabi_ref`` the schedule's reference Rabi frequency.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import IDENTITY_2, embed_odd_subspace, su2_exp
from .noise import NoiseTrace

# time unit t0 = 2 us; a 500 kHz Rabi frequency is then one full cycle per t0
DEFAULT_RABI = 2 * math.pi
DEFAULT_STEPS_PER_SEGMENT = 32


class Frame(enum.Enum):
    SINGLE_QUBIT = "single-qubit"
    TWO_QUBIT_ODD = "two-qubit-odd-subspace"


@dataclass(frozen=True)
class PulseSegment:
    rabi: float
    phase: float
    duration: float

    def __post_init__(self):
        if not (math.isfinite(self.rabi) and math.isfinite(self.phase) and math.isfinite(self.duration)):
            raise ValueError(f"non-finite pulse segment {self}")
        if self.rabi < 0:
            raise ValueError(f"rabi frequency must be >= 0, got {self.rabi}")
        # zero-length segments are kept as explicit no-ops (degenerate loops)
        if self.duration < 0:
            raise ValueError(f"segment duration must be >= 0, got {self.duration}")

    @property
    def area(self) -> float:
        return self.rabi * self.duration

    @classmethod
    def from_area(cls, area: float, phase: float, rabi: float) -> "PulseSegment":
        if rabi <= 0:
            raise ValueError("rabi must be > 0")
        if area < 0:
            raise ValueError("pulse area must be >= 0")
        return cls(rabi, phase, area / rabi)

    def unitary(self) -> np.ndarray:
        half = 0.5 * self.rabi * self.duration
        return su2_exp(half * math.cos(self.phase), half * math.sin(self.phase), 0.0)


@dataclass(frozen=True)
class Schedule:
    segments: tuple[PulseSegment, ...]
    frame: Frame = Frame.SINGLE_QUBIT

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("a schedule needs at least one segment")

    @property
    def duration(self) -> float:
        return math.fsum(s.duration for s in self.segments)

    @property
    def boundaries(self) -> list[float]:
        """Cumulative segment end times ``[T1, T2, ..., T]``."""
        out, t = [], 0.0
        for s in self.segments:
            t += s.duration
            out.append(t)
        return out

    @property
    def reference_rabi(self) -> float:
        return max(s.rabi for s in self.segments)

    @property
    def dim(self) -> int:
        return 2 if self.frame is Frame.SINGLE_QUBIT else 4

    def __add__(self, other: "Schedule") -> "Schedule":
        if other.frame is not self.frame:
            raise ValueError("cannot concatenate schedules in different frames")
        return Schedule(self.segments + other.segments, self.frame)

    def inverse(self) -> "Schedule":
        """Reversed order with every phase flipped by pi; undoes the ideal evolution."""
        return Schedule(
            tuple(PulseSegment(s.rabi, s.phase + math.pi, s.duration) for s in reversed(self.segments)),
            self.frame,
        )


def concatenate(schedules: Iterable[Schedule]) -> Schedule:
    schedules = list(schedules)
    if not schedules:
        raise ValueError("nothing to concatenate")
    out = schedules[0]
    for s in schedules[1:]:
        out = out + s
    return out


def _lift(block: np.ndarray, frame: Frame) -> np.ndarray:
    return block if frame is Frame.SINGLE_QUBIT else embed_odd_subspace(block)


def ideal_unitary(s: Schedule) -> np.ndarray:
    """Noise-free evolution operator at the end of the schedule."""
    if not isinstance(s, Schedule) or not s.segments:
        raise ValueError("ideal_unitary needs a non-empty Schedule")
    u = IDENTITY_2.copy()
    for seg in s.segments:
        u = seg.unitary() @ u
    return _lift(u, s.frame)


def evolve_noisy(
    s: Schedule,
    noise: NoiseTrace,
    steps_per_segment: int = DEFAULT_STEPS_PER_SEGMENT,
    rabi_ref: float | None = None,
) -> np.ndarray:
    """Time-ordered evolution under a sampled noise trace.

    Each segment is cut into ``steps_per_segment`` equal sub-steps; the noise
    value of a sub-step is the trace sample covering its midpoint. Sub-steps
    are exact exponentials, so the result is unitary to rounding.
    """
    if steps_per_segment < 1:
        raise ValueError("steps_per_segment must be >= 1")
    total = s.duration
    if noise.duration < total * (1 - 1e-9):
        raise ValueError(
            f"noise trace covers {noise.duration} but the schedule lasts {total}"
        )
    ref = s.reference_rabi if rabi_ref is None else rabi_ref
    n = len(noise)
    u = IDENTITY_2.copy()
    t_start = 0.0
    for seg in s.segments:
        if seg.duration == 0.0:
            continue
        h = seg.duration / steps_per_segment
        cx, cy = 0.5 * seg.rabi * math.cos(seg.phase), 0.5 * seg.rabi * math.sin(seg.phase)
        for k in range(steps_per_segment):
            idx = min(int((t_start + (k + 0.5) * h) / noise.dt), n - 1)
            scale = 1.0 + noise.epsilon[idx]
            u = su2_exp(scale * cx * h, scale * cy * h, noise.delta[idx] * ref * h) @ u
        t_start += seg.duration
    return _lift(u, s.frame)
