"""Nonadiabatic geometric and dynamical gates for silicon spin qubits under quasi-static and 1/f noise."""

__version__ = "0.1.0"

from .core import gate_fidelity, rotation, su2_exp
from .clifford import FLAVORS, build_clifford_table
from .geometric import GeometricParams, Path, geometric_schedule, geometric_unitary
from .noise import NoiseTrace, OneOverFNoise, StaticNoise
from .rb import RBConfig, RBResult, fit_decay, improvement_ratio, run_rb, run_rb_flavors
from .schedules import DEFAULT_RABI, PulseSegment, Schedule, evolve_noisy, ideal_unitary

__all__ = [
    "DEFAULT_RABI",
    "FLAVORS",
    "GeometricParams",
    "NoiseTrace",
    "OneOverFNoise",
    "Path",
    "PulseSegment",
    "RBConfig",
    "RBResult",
    "Schedule",
    "StaticNoise",
    "build_clifford_table",
    "evolve_noisy",
    "fit_decay",
    "gate_fidelity",
    "geometric_schedule",
    "geometric_unitary",
    "ideal_unitary",
    "improvement_ratio",
    "rotation",
    "run_rb",
    "run_rb_flavors",
    "su2_exp",
]
