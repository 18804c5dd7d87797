"""Exchange-coupled spin pair: lab Hamiltonian, RWA loops, iSWAP and CNOT.

In the odd-parity subspace span{|01>, |10>} a resonantly oscillating exchange
``J(t) = j0 + j1 cos(w_j t + psi)`` acts (after the rotating-wave
approximation) like a single-qubit drive of Rabi frequency ``j = j1 / 2`` and
phase ``psi``, so the single-qubit loop construction carries over unchanged.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .clifford import build_clifford_table, flavor_path, parse_flavor
from .core import CNOT, IDENTITY_4, embed_odd_subspace, gate_fidelity, on_qubit, su2_exp
from .geometric import GeometricParams, Path, TWO_PI, geometric_unitary, loop_schedule
from .noise import NoiseTrace
from .schedules import DEFAULT_RABI, Frame, PulseSegment, Schedule, evolve_noisy, ideal_unitary

RWA_RATIO_LIMIT = 0.1


@dataclass(frozen=True)
class TwoQubitLabParams:
    ez: float
    dez: float
    j0: float
    j1: float
    omega_j: float
    psi: float = 0.0

    def __post_init__(self):
        if self.dez != 0 and max(abs(self.j0), abs(self.j1)) / abs(self.dez) >= RWA_RATIO_LIMIT:
            warnings.warn(
                f"exchange amplitude is not small against dEz ({self.j0}, {self.j1} vs {self.dez}); "
                "the rotating-wave approximation will be poor",
                stacklevel=2,
            )


@dataclass(frozen=True)
class TwoQubitGeometricParams:
    xi: float
    vartheta: float
    psi: float
    path: Path = Path.PATH1

    def __post_init__(self):
        object.__setattr__(self, "path", Path.parse(self.path))
        object.__setattr__(self, "psi", self.psi % TWO_PI)
        if not -1e-12 <= self.vartheta <= math.pi + 1e-12:
            raise ValueError(f"vartheta must lie in [0, pi], got {self.vartheta}")
        if not math.isfinite(self.xi):
            raise ValueError("xi must be finite")

    def as_single(self) -> GeometricParams:
        return GeometricParams(math.remainder(self.xi, TWO_PI), self.vartheta, self.psi, self.path)


def lab_hamiltonian(p: TwoQubitLabParams, j_now: float) -> np.ndarray:
    """4x4 Hamiltonian in the |00>, |01>, |10>, |11> basis for exchange ``j_now``."""
    h = np.diag([p.ez + j_now / 2, p.dez / 2, -p.dez / 2, -p.ez + j_now / 2]).astype(complex)
    h[1, 2] = h[2, 1] = j_now / 2
    return h


def rwa_schedule(p: TwoQubitGeometricParams, j_rabi: float) -> Schedule:
    return loop_schedule(p.xi, p.vartheta, p.psi, p.path, j_rabi, Frame.TWO_QUBIT_ODD)


def two_qubit_geometric_unitary(p: TwoQubitGeometricParams) -> np.ndarray:
    """Identity on |00>, |11>; ``exp(i xi n.sigma)`` (times -1 on path 2) on the odd block."""
    g = p.xi - p.path.middle_offset
    st = math.sin(p.vartheta)
    n = (st * math.cos(p.psi), st * math.sin(p.psi), math.cos(p.vartheta))
    return embed_odd_subspace(su2_exp(-g * n[0], -g * n[1], -g * n[2]))


def iswap_dynamical(j_rabi: float = DEFAULT_RABI) -> tuple[Schedule, np.ndarray]:
    """One pi-area exchange pulse.

    The drive phase is pi: ``exp(-i pi/2 (-X))`` gives the ``+i`` off-diagonal
    block of iSWAP, whereas phase 0 would give its inverse.
    """
    if not j_rabi > 0:
        raise ValueError("j_rabi must be > 0")
    s = Schedule((PulseSegment.from_area(math.pi, math.pi, j_rabi),), Frame.TWO_QUBIT_ODD)
    return s, ideal_unitary(s)


def verify_rwa(
    p: TwoQubitLabParams,
    target: TwoQubitGeometricParams,
    steps_per_period: int = 200,
) -> float:
    """Infidelity of the full interaction-picture evolution against the RWA gate.

    The exchange drive runs the three loop segments of ``target`` with
    ``J(t) = j0 + j1 cos(w_j t + psi_k)``, keeping the counter-rotating terms,
    and is compared with the closed-form gate. The segment drive phases come
    from the loop, so ``p.psi`` is not used.
    """
    if p.dez == 0:
        raise ValueError("dEz must be non-zero")
    if abs(p.omega_j - p.dez) > 1e-9 * abs(p.dez):
        raise ValueError(f"drive frequency {p.omega_j} is off resonance with dEz={p.dez}")
    if max(abs(p.j0), abs(p.j1)) / abs(p.dez) > RWA_RATIO_LIMIT:
        raise ValueError("exchange amplitude outside the RWA regime (j/dEz > 0.1)")
    if p.j1 == 0:
        # no oscillating drive: nothing is applied and the RWA prediction is the identity
        return 0.0
    j_eff = abs(p.j1) / 2
    schedule = rwa_schedule(target, j_eff)
    phase_shift = 0.0 if p.j1 > 0 else math.pi
    dt_max = TWO_PI / abs(p.dez) / steps_per_period
    u = np.eye(2, dtype=complex)
    t0 = 0.0
    for seg in schedule.segments:
        if seg.duration == 0:
            continue
        n = max(1, math.ceil(seg.duration / dt_max))
        h = seg.duration / n
        t_mid = t0 + (np.arange(n) + 0.5) * h
        jt = p.j0 + p.j1 * np.cos(p.omega_j * t_mid + seg.phase + phase_shift)
        a = 0.5 * jt * h
        ax = a * np.cos(p.dez * t_mid)
        ay = -a * np.sin(p.dez * t_mid)
        for k in range(n):
            u = su2_exp(ax[k], ay[k], 0.0) @ u
        t0 += seg.duration
    full = embed_odd_subspace(u)
    return 1.0 - gate_fidelity(two_qubit_geometric_unitary(target), full)


@dataclass(frozen=True)
class GateStep:
    """One element of a composite: a single-qubit pulse on ``qubit`` or a two-qubit pulse."""

    schedule: Schedule
    qubit: int | None = None

    @property
    def is_two_qubit(self) -> bool:
        return self.qubit is None

    def lift(self, u: np.ndarray) -> np.ndarray:
        return u if self.qubit is None else on_qubit(u, self.qubit)


# CNOT = (A0 x A1) G (B0 x B1) G with Clifford indices from the single-qubit table;
# G = iSWAP for dynamical/path 1, G = iSWAP^dagger for path 2 (the loop's sign flip).
# Constants come from an exhaustive search and are checked at every composition.
_CNOT_LAYERS = {
    "iswap": ((7, 15), (4, 0)),
    "iswap_dagger": ((8, 14), (4, 0)),
}


def _two_qubit_step(flavor: str, j_rabi: float) -> tuple[Schedule, str]:
    path = flavor_path(flavor)
    if path is None:
        return iswap_dynamical(j_rabi)[0], "iswap"
    params = TwoQubitGeometricParams(math.pi / 2, math.pi / 2, 0.0, path)
    return rwa_schedule(params, j_rabi), "iswap" if path is Path.PATH1 else "iswap_dagger"


def cnot_compose(
    flavor: str, rabi: float = DEFAULT_RABI, j_rabi: float = DEFAULT_RABI
) -> tuple[list[GateStep], np.ndarray]:
    """Two-exchange-pulse CNOT (control = qubit 0) in time order, plus its ideal unitary."""
    flavor = parse_flavor(flavor)
    if not (rabi > 0 and j_rabi > 0):
        raise ValueError("frequencies must be positive")
    table = build_clifford_table()
    two, kind = _two_qubit_step(flavor, j_rabi)
    outer, inner = _CNOT_LAYERS[kind]

    def layer(indices):
        return [
            GateStep(table[c].schedule(flavor, rabi), q) for q, c in enumerate(indices) if c != 0
        ]

    steps = [GateStep(two)] + layer(inner) + [GateStep(two)] + layer(outer)
    u = IDENTITY_4.copy()
    for step in steps:
        u = step.lift(ideal_unitary(step.schedule)) @ u
    f = gate_fidelity(CNOT, u)
    if f < 1 - 1e-10:
        raise RuntimeError(f"CNOT decomposition for {flavor} is wrong (F={f})")
    return steps, u


def noisy_composite(
    steps: Sequence[GateStep],
    delta: float,
    epsilon: float,
    noisy_single: bool = True,
    noisy_two: bool = True,
) -> np.ndarray:
    """Evolve a composite under one constant ``(delta, epsilon)`` realization."""
    u = IDENTITY_4.copy()
    for step in steps:
        on = noisy_two if step.is_two_qubit else noisy_single
        trace = NoiseTrace.constant(delta if on else 0.0, epsilon if on else 0.0, step.schedule.duration)
        u = step.lift(evolve_noisy(step.schedule, trace, steps_per_segment=1)) @ u
    return u


def cnot_fidelity_sweep(
    flavor: str,
    noise_kind: str,
    amplitudes: Sequence[float],
    rabi: float = DEFAULT_RABI,
    j_rabi: float = DEFAULT_RABI,
    noisy_single: bool = True,
    noisy_two: bool = True,
) -> list[tuple[float, float]]:
    """CNOT fidelity against constant systematic (epsilon) or detuning (delta) noise."""
    if noise_kind not in ("systematic", "detuning"):
        raise ValueError(f"noise_kind must be 'systematic' or 'detuning', got {noise_kind!r}")
    steps, ideal = cnot_compose(flavor, rabi, j_rabi)
    out = []
    for x in amplitudes:
        if abs(x) > 0.1:
            raise ValueError(f"noise amplitude {x} outside |x| <= 0.1")
        d, e = (0.0, x) if noise_kind == "systematic" else (x, 0.0)
        u = noisy_composite(steps, d, e, noisy_single, noisy_two)
        out.append((float(x), gate_fidelity(ideal, u)))
    return out
