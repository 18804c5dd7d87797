"""The 24-element single-qubit Clifford group with dynamical and geometric compilations.

Compilations are written as printed operator products: the leftmost factor
acts last in time. Each dynamical x/y rotation has a geometric replacement
``U(-angle/2, pi/2, axis_phase)``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .core import IDENTITY_2, gate_fidelity, rotation
from .dynamical import MINUS_X, MINUS_Y, X_AXIS, Y_AXIS, RotationSpec, compose_sequence
from .geometric import GeometricParams, Path, geometric_schedule, geometric_unitary
from .schedules import DEFAULT_RABI, Schedule, concatenate

PI = math.pi
HALF = PI / 2

# (target axis, target angle, dynamical product as (axis_phase, angle), geometric product as (gamma, phi))
_TABLE = [
    ((1, 0, 0), 0.0, [(X_AXIS, 2 * PI)], [(-PI, 0)]),
    ((1, 0, 0), -HALF, [(MINUS_X, HALF)], [(-PI / 4, PI)]),
    ((1, 0, 0), HALF, [(X_AXIS, HALF)], [(-PI / 4, 0)]),
    ((1, 0, 0), PI, [(X_AXIS, PI)], [(-HALF, 0)]),
    ((0, 1, 0), -HALF, [(MINUS_Y, HALF)], [(-PI / 4, -HALF)]),
    ((0, 1, 0), HALF, [(Y_AXIS, HALF)], [(-PI / 4, HALF)]),
    ((0, 1, 0), PI, [(Y_AXIS, PI)], [(-HALF, HALF)]),
    ((0, 0, 1), -HALF, [(X_AXIS, HALF), (MINUS_Y, HALF), (MINUS_X, HALF)], [(-PI / 4, 0), (-PI / 4, -HALF), (-PI / 4, PI)]),
    ((0, 0, 1), HALF, [(X_AXIS, HALF), (Y_AXIS, HALF), (MINUS_X, HALF)], [(-PI / 4, 0), (-PI / 4, HALF), (-PI / 4, PI)]),
    ((0, 0, 1), PI, [(X_AXIS, PI), (Y_AXIS, PI)], [(-HALF, 0), (-HALF, HALF)]),
    ((1, 0, 1), PI, [(MINUS_Y, HALF), (X_AXIS, PI)], [(-PI / 4, -HALF), (-HALF, 0)]),
    ((1, 0, -1), PI, [(Y_AXIS, HALF), (X_AXIS, PI)], [(-PI / 4, HALF), (-HALF, 0)]),
    ((1, 1, 0), PI, [(X_AXIS, HALF), (Y_AXIS, HALF), (X_AXIS, HALF)], [(-PI / 4, 0), (-PI / 4, HALF), (-PI / 4, 0)]),
    ((1, -1, 0), PI, [(X_AXIS, HALF), (MINUS_Y, HALF), (X_AXIS, HALF)], [(-PI / 4, 0), (-PI / 4, -HALF), (-PI / 4, 0)]),
    ((0, 1, 1), PI, [(X_AXIS, HALF), (Y_AXIS, PI)], [(-PI / 4, 0), (-HALF, HALF)]),
    ((0, 1, -1), PI, [(MINUS_X, HALF), (Y_AXIS, PI)], [(-PI / 4, PI), (-HALF, HALF)]),
    ((1, 1, 1), 2 * PI / 3, [(X_AXIS, HALF), (Y_AXIS, HALF)], [(-PI / 4, 0), (-PI / 4, HALF)]),
    ((1, 1, 1), 4 * PI / 3, [(MINUS_Y, HALF), (MINUS_X, HALF)], [(-PI / 4, -HALF), (-PI / 4, PI)]),
    ((1, 1, -1), 2 * PI / 3, [(Y_AXIS, HALF), (X_AXIS, HALF)], [(-PI / 4, HALF), (-PI / 4, 0)]),
    ((1, 1, -1), 4 * PI / 3, [(MINUS_X, HALF), (MINUS_Y, HALF)], [(-PI / 4, PI), (-PI / 4, -HALF)]),
    ((1, -1, 1), 2 * PI / 3, [(MINUS_Y, HALF), (X_AXIS, HALF)], [(-PI / 4, -HALF), (-PI / 4, 0)]),
    ((1, -1, 1), 4 * PI / 3, [(MINUS_X, HALF), (Y_AXIS, HALF)], [(-PI / 4, PI), (-PI / 4, HALF)]),
    ((-1, 1, 1), 2 * PI / 3, [(Y_AXIS, HALF), (MINUS_X, HALF)], [(-PI / 4, HALF), (-PI / 4, PI)]),
    ((-1, 1, 1), 4 * PI / 3, [(X_AXIS, HALF), (MINUS_Y, HALF)], [(-PI / 4, 0), (-PI / 4, -HALF)]),
]

FLAVORS = ("dynamical", "geometric-path1", "geometric-path2")


def parse_flavor(flavor: str) -> str:
    aliases = {"dyn": "dynamical", "geo1": "geometric-path1", "geo2": "geometric-path2",
               "path1": "geometric-path1", "path2": "geometric-path2"}
    flavor = aliases.get(flavor, flavor)
    if flavor not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")
    return flavor


def flavor_path(flavor: str) -> Path | None:
    flavor = parse_flavor(flavor)
    return None if flavor == "dynamical" else Path.parse(flavor[-1])


class CliffordTableError(RuntimeError):
    pass


@dataclass(frozen=True)
class CliffordCompilation:
    index: int
    target: np.ndarray
    dynamical_seq: tuple[RotationSpec, ...]
    geometric_seq: tuple[GeometricParams, ...]

    def dynamical_unitary(self) -> np.ndarray:
        return compose_sequence(self.dynamical_seq)[1]

    def geometric_unitary(self, path=Path.PATH1) -> np.ndarray:
        u = IDENTITY_2.copy()
        for p in self.geometric_seq:
            u = u @ geometric_unitary(GeometricParams(p.gamma, p.theta, p.phi, path))
        return u

    def schedule(self, flavor: str, rabi: float = DEFAULT_RABI) -> Schedule:
        """Physical pulse schedule of this element for one flavor."""
        path = flavor_path(flavor)
        if path is None:
            return compose_sequence(self.dynamical_seq, rabi)[0]
        loops = [
            geometric_schedule(GeometricParams(p.gamma, p.theta, p.phi, path), rabi)
            for p in reversed(self.geometric_seq)
        ]
        return concatenate(loops)

    def unitary(self, flavor: str) -> np.ndarray:
        path = flavor_path(flavor)
        return self.dynamical_unitary() if path is None else self.geometric_unitary(path)

    @property
    def rotation_count(self) -> int:
        return len(self.dynamical_seq)


@functools.lru_cache(maxsize=1)
def build_clifford_table() -> tuple[CliffordCompilation, ...]:
    """Build and verify all 24 rows; raises ``CliffordTableError`` naming a bad row."""
    rows = []
    for i, (axis, angle, dyn, geo) in enumerate(_TABLE):
        target = rotation(axis, angle) if angle else IDENTITY_2.copy()
        row = CliffordCompilation(
            index=i,
            target=target,
            dynamical_seq=tuple(RotationSpec(phase, a) for phase, a in dyn),
            geometric_seq=tuple(GeometricParams(g, HALF, phi) for g, phi in geo),
        )
        for flavor in FLAVORS:
            f = gate_fidelity(target, row.unitary(flavor))
            if f < 1 - 1e-10:
                raise CliffordTableError(f"C{i} {flavor} compilation misses its target (F={f})")
        rows.append(row)
    return tuple(rows)


def mean_rotation_count(table=None) -> float:
    table = build_clifford_table() if table is None else table
    return sum(r.rotation_count for r in table) / len(table)


def find_clifford(u: np.ndarray, table=None, atol: float = 1e-8) -> int:
    """Index of the element equal to ``u`` up to global phase."""
    table = build_clifford_table() if table is None else table
    for row in table:
        if gate_fidelity(row.target, u) > 1 - atol:
            return row.index
    raise ValueError("matrix is not a single-qubit Clifford element")


@functools.lru_cache(maxsize=1)
def multiplication_table() -> tuple[np.ndarray, np.ndarray]:
    """``(mult, inv)`` with ``C[mult[a, b]] ~ C[a] C[b]`` and ``C[inv[a]] ~ C[a]^-1``."""
    table = build_clifford_table()
    n = len(table)
    mult = np.empty((n, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            mult[a, b] = find_clifford(table[a].target @ table[b].target, table)
    inv = np.array([int(np.nonzero(mult[a] == 0)[0][0]) for a in range(n)], dtype=np.int64)
    mult.setflags(write=False)
    inv.setflags(write=False)
    return mult, inv
