"""Second-order noise sensitivity of x rotations and the kappa-vs-alpha study.

Fidelity of a gate under small constant noise behaves as
``F = 1 + c_eps * eps**2 + c_delta * delta**2``. The coefficients are
extracted numerically from :func:`evolve_noisy` by central second differences
with one Richardson step, and compared against closed forms:

==============  ========================  ======================
flavor          c_eps                     c_delta
==============  ========================  ======================
dynamical       -gamma**2 / 8             cos(gamma) - 1
path 1          -(pi**2/2) sin(gamma/4)^4  -8 cos(gamma/4)^4
path 2          -(pi**2/2) cos(gamma/4)^4  -8 sin(gamma/4)^4
==============  ========================  ======================
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .clifford import FLAVORS, flavor_path, parse_flavor
from .core import gate_fidelity
from .dynamical import X_AXIS, RotationSpec, dynamical_rotation
from .geometric import GeometricParams, Path, geometric_schedule, geometric_unitary
from .noise import NoiseTrace, OneOverFNoise
from .rb import RBConfig, improvement_ratio, run_rb_flavors
from .schedules import DEFAULT_RABI, Schedule, evolve_noisy

FD_STEP = 1e-3
NOISE_KINDS = {"detuning": "delta", "systematic": "epsilon"}
KAPPA_AMPLITUDES = (1e-9, 1e-8, 1e-7, 1e-6, 1e-5)
KAPPA_ALPHAS = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)


@dataclass(frozen=True)
class ExpansionReport:
    flavor: str
    gamma: float
    c_epsilon: float
    c_delta: float

    def predicted(self) -> tuple[float, float]:
        return predicted_coefficients(self.flavor, self.gamma)


def predicted_coefficients(flavor: str, gamma: float) -> tuple[float, float]:
    """Closed-form ``(c_eps, c_delta)`` for an x rotation by ``gamma``."""
    flavor = parse_flavor(flavor)
    q = gamma / 4
    if flavor == "dynamical":
        return -gamma**2 / 8, math.cos(gamma) - 1
    if flavor == "geometric-path1":
        return -(math.pi**2 / 2) * math.sin(q) ** 4, -8 * math.cos(q) ** 4
    return -(math.pi**2 / 2) * math.cos(q) ** 4, -8 * math.sin(q) ** 4


def x_rotation(flavor: str, gamma: float, rabi: float = DEFAULT_RABI) -> tuple[Schedule | None, np.ndarray]:
    """Schedule and ideal unitary of the x rotation by ``gamma``.

    The dynamical schedule is ``None`` for ``gamma == 0`` (nothing to play).
    """
    flavor = parse_flavor(flavor)
    if flavor == "dynamical":
        spec = RotationSpec(X_AXIS, gamma)
        if spec.angle == 0.0:
            return None, np.eye(2, dtype=complex)
        return dynamical_rotation(spec, rabi)
    p = GeometricParams(-gamma / 2, math.pi / 2, 0.0, flavor_path(flavor))
    return geometric_schedule(p, rabi), geometric_unitary(p)


def _fidelity(schedule: Schedule | None, target: np.ndarray, delta: float, epsilon: float) -> float:
    if schedule is None:
        return 1.0
    trace = NoiseTrace.constant(delta, epsilon, schedule.duration)
    # constant noise: one exact step per segment suffices
    return gate_fidelity(target, evolve_noisy(schedule, trace, steps_per_segment=1))


def _second_difference(f, h: float) -> float:
    return (f(h) + f(-h) - 2 * f(0.0)) / (2 * h * h)


def _richardson(f, h: float) -> float:
    coarse, fine = _second_difference(f, h), _second_difference(f, h / 2)
    return (4 * fine - coarse) / 3


def extract_coefficients(flavor: str, gamma: float, h: float = FD_STEP, rabi: float = DEFAULT_RABI) -> ExpansionReport:
    if not abs(gamma) <= math.pi:
        raise ValueError(f"gamma must lie in [-pi, pi], got {gamma}")
    flavor = parse_flavor(flavor)
    schedule, target = x_rotation(flavor, gamma, rabi)
    c_eps = _richardson(lambda e: _fidelity(schedule, target, 0.0, e), h)
    c_delta = _richardson(lambda d: _fidelity(schedule, target, d, 0.0), h)
    return ExpansionReport(flavor, float(gamma), c_eps, c_delta)


def delta_f_curves(path, gammas: Iterable[float], h: float = FD_STEP) -> list[tuple[float, float, float]]:
    """Rows ``(gamma, dF_eps/eps^2, dF_delta/delta^2)``, geometric minus dynamical."""
    flavor = f"geometric-path{Path.parse(path).value}"
    rows = []
    for g in gammas:
        geo = extract_coefficients(flavor, g, h)
        dyn = extract_coefficients("dynamical", g, h)
        rows.append((float(g), geo.c_epsilon - dyn.c_epsilon, geo.c_delta - dyn.c_delta))
    return rows


def expansion_table(gammas: Sequence[float], flavors: Sequence[str] = FLAVORS) -> list[ExpansionReport]:
    return [extract_coefficients(f, g) for f in flavors for g in gammas]


# ---------------------------------------------------------------------------
# kappa study


@dataclass(frozen=True)
class KappaCell:
    alpha: float
    amplitude: float
    d_dyn: float
    d_g1: float
    d_g2: float

    @property
    def dyn_over_g1(self) -> float:
        return improvement_ratio(self.d_dyn, self.d_g1)[1]

    @property
    def dyn_over_g2(self) -> float:
        return improvement_ratio(self.d_dyn, self.d_g2)[1]


def noise_channel(noise_kind: str) -> str:
    try:
        return NOISE_KINDS[noise_kind]
    except KeyError:
        raise ValueError(f"noise kind must be one of {sorted(NOISE_KINDS)}, got {noise_kind!r}") from None


def kappa_study(
    noise_kind: str,
    alphas: Sequence[float] = KAPPA_ALPHAS,
    amplitudes: Sequence[float] = KAPPA_AMPLITUDES,
    rb_defaults: RBConfig | None = None,
) -> list[KappaCell]:
    """RB error per gate of all three flavors on an (alpha, amplitude) grid.

    Every cell reuses the root seed of ``rb_defaults``, so all flavors and
    all cells see the same Clifford sequences and noise phases; only the
    spectrum changes.
    """
    channel = noise_channel(noise_kind)
    for a in alphas:
        if not 0 <= a <= 3:
            raise ValueError(f"alpha must lie in [0, 3], got {a}")
    base = rb_defaults or RBConfig("dynamical", OneOverFNoise(0.0, 1.0))
    cells = []
    for alpha in alphas:
        for amp in amplitudes:
            model = replace(base.noise, amplitude_a=amp, alpha=alpha, channel=channel) if isinstance(
                base.noise, OneOverFNoise
            ) else OneOverFNoise(amp, alpha, channel=channel)
            res = run_rb_flavors(replace(base, noise=model), FLAVORS)
            d = [res[f].fitted_d for f in FLAVORS]
            cells.append(KappaCell(float(alpha), float(amp), *d))
    return cells


def ratios_by_alpha(cells: Iterable[KappaCell], d_max: float = 1e-3) -> list[tuple[float, float, float]]:
    """Rows ``(alpha, dyn/g1, dyn/g2)`` from the perturbative part of each error curve.

    The ratio is the geometric mean over amplitudes whose dynamical error is
    below ``d_max``, where the log-log error curves run parallel. When no
    cell qualifies, the smallest amplitude is used.
    """
    by_alpha: dict[float, list[KappaCell]] = {}
    for c in cells:
        by_alpha.setdefault(c.alpha, []).append(c)
    rows = []
    for alpha in sorted(by_alpha):
        group = sorted(by_alpha[alpha], key=lambda c: c.amplitude)
        usable = [c for c in group if 0 < c.d_dyn <= d_max and c.d_g1 > 0 and c.d_g2 > 0] or group[:1]
        r1 = math.exp(np.mean([math.log(c.dyn_over_g1) for c in usable]))
        r2 = math.exp(np.mean([math.log(c.dyn_over_g2) for c in usable]))
        rows.append((alpha, r1, r2))
    return rows


def crossing_alpha(alphas: Sequence[float], ratios: Sequence[float], level: float = 1.0) -> float:
    """First alpha where ``ratios`` rises through ``level``, interpolating log-ratio linearly.

    Returns ``nan`` when there is no upward crossing.
    """
    a = np.asarray(alphas, dtype=float)
    r = np.log(np.asarray(ratios, dtype=float) / level)
    for i in range(len(a) - 1):
        if r[i] < 0 <= r[i + 1]:
            return float(a[i] + (a[i + 1] - a[i]) * (-r[i]) / (r[i + 1] - r[i]))
    return math.nan


def error_slopes(cells: Iterable[KappaCell]) -> dict[float, tuple[float, float, float]]:
    """Log-log slope of d vs amplitude per alpha for (dyn, g1, g2)."""
    by_alpha: dict[float, list[KappaCell]] = {}
    for c in cells:
        by_alpha.setdefault(c.alpha, []).append(c)
    out = {}
    for alpha, group in sorted(by_alpha.items()):
        x = np.log([c.amplitude for c in group])
        slopes = []
        for attr in ("d_dyn", "d_g1", "d_g2"):
            y = np.log([max(getattr(c, attr), 1e-300) for c in group])
            slopes.append(float(np.polyfit(x, y, 1)[0]) if len(group) > 1 else math.nan)
        out[alpha] = tuple(slopes)
    return out


def kappa_csv(cells: Iterable[KappaCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "amplitude", "d_dyn", "d_g1", "d_g2"])
    for c in cells:
        w.writerow([f"{c.alpha:.17g}", f"{c.amplitude:.17g}", f"{c.d_dyn:.17g}", f"{c.d_g1:.17g}", f"{c.d_g2:.17g}"])
    return buf.getvalue()


def ratio_csv(rows: Iterable[tuple[float, float, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "dyn_over_g1", "dyn_over_g2"])
    for a, r1, r2 in rows:
        w.writerow([f"{a:.17g}", f"{r1:.17g}", f"{r2:.17g}"])
    return buf.getvalue()
