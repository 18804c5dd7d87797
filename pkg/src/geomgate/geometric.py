"""Nonadiabatic geometric single-qubit gates built from orange-slice loops.

A gate ``U(gamma, theta, phi) = exp(i gamma n.sigma)`` with
``n = (sin theta cos phi, sin theta sin phi, cos theta)`` is produced by three
geodesic segments of areas ``theta``, ``pi`` and ``pi - theta``. Path 2 tilts
the middle geodesic by ``pi`` which flips the overall sign of the gate but
changes how the loop responds to noise.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import su2_exp
from .schedules import Frame, PulseSegment, Schedule

TWO_PI = 2 * math.pi


class Path(enum.Enum):
    PATH1 = 1
    PATH2 = 2

    @classmethod
    def parse(cls, value) -> "Path":
        if isinstance(value, Path):
            return value
        text = str(value).lower().removeprefix("path")
        try:
            return cls(int(text))
        except ValueError:
            raise ValueError(f"unknown path {value!r}; expected 1 or 2") from None

    @property
    def middle_offset(self) -> float:
        return 0.0 if self is Path.PATH1 else math.pi


def wrap_phase(x: float) -> float:
    """Map an angle into (-pi, pi]."""
    y = math.remainder(x, TWO_PI)
    return math.pi if y == -math.pi else y


@dataclass(frozen=True)
class GeometricParams:
    gamma: float
    theta: float
    phi: float
    path: Path = Path.PATH1

    def __post_init__(self):
        object.__setattr__(self, "path", Path.parse(self.path))
        object.__setattr__(self, "phi", self.phi % TWO_PI)
        tol = 1e-12
        if not -math.pi - tol <= self.gamma <= math.pi + tol:
            raise ValueError(f"gamma must lie in [-pi, pi], got {self.gamma}")
        if not -tol <= self.theta <= math.pi + tol:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")

    @property
    def axis(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


def loop_phases(gamma: float, phi: float, path: Path) -> tuple[float, float, float]:
    """Drive phases of the three segments (shared by one- and two-qubit loops)."""
    outer = (phi - math.pi / 2) % TWO_PI
    middle = (phi + gamma + math.pi / 2 - path.middle_offset) % TWO_PI
    return outer, middle, outer


def loop_schedule(gamma: float, theta: float, phi: float, path: Path, rabi: float, frame: Frame) -> Schedule:
    if not rabi > 0:
        raise ValueError(f"rabi must be > 0, got {rabi}")
    p1, p2, p3 = loop_phases(gamma, phi, path)
    theta = min(max(theta, 0.0), math.pi)
    return Schedule(
        (
            PulseSegment.from_area(theta, p1, rabi),
            PulseSegment.from_area(math.pi, p2, rabi),
            PulseSegment.from_area(math.pi - theta, p3, rabi),
        ),
        frame,
    )


def geometric_schedule(p: GeometricParams, rabi: float) -> Schedule:
    """Three-segment loop; total duration is always ``2 pi / rabi``."""
    return loop_schedule(p.gamma, p.theta, p.phi, p.path, rabi, Frame.SINGLE_QUBIT)


def geometric_unitary(p: GeometricParams) -> np.ndarray:
    """Closed form ``exp(i (gamma - gamma') n.sigma)`` with ``gamma' = 0`` or ``pi``."""
    g = p.gamma - p.path.middle_offset
    n = p.axis
    return su2_exp(-g * n[0], -g * n[1], -g * n[2])


def bloch_state(theta: float, phi: float, sign: int = +1) -> np.ndarray:
    """``|psi_+>`` (sign=+1) or the orthogonal ``|psi_->`` at polar angles ``(theta, phi)``."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if sign > 0:
        return np.array([c, s * cmath.exp(1j * phi)])
    return np.array([s * cmath.exp(-1j * phi), -c])


def _acquired_phase(psi0: np.ndarray, psi1: np.ndarray) -> tuple[float, float]:
    k = int(np.argmax(np.abs(psi0)))
    overlap = abs(np.vdot(psi0, psi1))
    return cmath.phase(psi1[k] / psi0[k]), overlap


def cyclic_phase_check(p: GeometricParams, rabi: float = 1.0) -> tuple[float, float]:
    """Global phases picked up by ``|psi_+->`` after one loop, wrapped to (-pi, pi]."""
    from .schedules import ideal_unitary

    u = ideal_unitary(geometric_schedule(p, rabi))
    phases = []
    for sign in (+1, -1):
        psi0 = bloch_state(p.theta, p.phi, sign)
        phase, overlap = _acquired_phase(psi0, u @ psi0)
        if abs(overlap - 1.0) > 1e-10:
            raise RuntimeError(f"loop is not cyclic for {p}: overlap {overlap}")
        phases.append(wrap_phase(phase))
    return phases[0], phases[1]


def _energy_grid(s: Schedule, theta0: float, phi0: float, points_per_segment: int):
    """Yield ``(segment, times, energies)`` with ``<psi(t)|H(t)|psi(t)>`` sampled per segment."""
    psi = bloch_state(theta0, phi0, +1)
    for seg in s.segments:
        h = 0.5 * seg.rabi * np.array(
            [[0, cmath.exp(-1j * seg.phase)], [cmath.exp(1j * seg.phase), 0]]
        )
        ts = np.linspace(0.0, seg.duration, points_per_segment)
        energies = np.empty(ts.size)
        for i, t in enumerate(ts):
            half = 0.5 * seg.rabi * t
            psi_t = su2_exp(half * math.cos(seg.phase), half * math.sin(seg.phase), 0.0) @ psi
            energies[i] = np.vdot(psi_t, h @ psi_t).real
        yield seg, ts, energies
        psi = seg.unitary() @ psi


def dynamical_phase_integral(s: Schedule, theta0: float, phi0: float, points_per_segment: int = 257) -> float:
    """``-int <psi(t)|H(t)|psi(t)> dt`` starting from ``|psi_+(theta0, phi0)>``."""
    if s.frame is not Frame.SINGLE_QUBIT:
        raise ValueError("dynamical phase is defined here for single-qubit schedules only")
    total = 0.0
    for seg, ts, energies in _energy_grid(s, theta0, phi0, points_per_segment):
        if seg.duration > 0:
            total -= np.trapezoid(energies, ts)
    return float(total)


def geodesic_condition_check(s: Schedule, theta0: float, phi0: float, points_per_segment: int = 257) -> float:
    """Largest ``|<psi|H|psi>| / rabi`` along the path; zero for parallel transport."""
    if s.frame is not Frame.SINGLE_QUBIT:
        raise ValueError("geodesic check is defined here for single-qubit schedules only")
    worst = 0.0
    for seg, _, energies in _energy_grid(s, theta0, phi0, points_per_segment):
        if seg.rabi > 0 and seg.duration > 0:
            worst = max(worst, float(np.abs(energies).max()) / seg.rabi)
    return worst


@dataclass(frozen=True)
class TwoLevelField:
    """General two-level drive ``hbar/2 [[D, W e^{-i eta}], [W e^{i eta}, -D]]`` with hbar = 1."""

    delta_z: float
    rabi: float
    drive_phase: float

    def hamiltonian(self) -> np.ndarray:
        off = self.rabi * cmath.exp(-1j * self.drive_phase)
        return 0.5 * np.array([[self.delta_z, off], [off.conjugate(), -self.delta_z]])

    def bloch_velocity(self, theta: float, phi: float) -> tuple[float, float]:
        """``(d theta/dt, d phi/dt)`` of ``|psi_+(theta, phi)>`` under this field."""
        return (
            self.rabi * math.sin(self.drive_phase - phi),
            self.delta_z - self.rabi * math.cos(self.drive_phase - phi) / math.tan(theta),
        )
