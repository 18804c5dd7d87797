"""Single-qubit randomized benchmarking under quasi-static and 1/f noise.

Protocol: start in |0>, apply ``n`` uniformly random Clifford elements and
the element that inverts their ideal product, then record the survival
probability ``|<0|psi>|^2``. Survival averaged over sequences and noise
realizations is fitted to ``(1 + exp(-d n)) / 2``.

Every (length, sequence, realization) cell draws its randomness from
``SeedSequence(root_seed, spawn_key=(stream, length_index, sequence_index[, realization]))``
with stream 0 for Clifford draws and stream 1 for noise, so results do not
depend on flavor, worker count or execution order. Flavors run with the same
root seed therefore see the same sequences and the same noise.
"""

from __future__ import annotations

import csv
import functools
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares

from ._kernels import survival_probabilities
from .clifford import FLAVORS, build_clifford_table, multiplication_table, parse_flavor
from .noise import NoiseModel, OneOverFNoise, StaticNoise, one_over_f_trace, sample_static, seed_sequence, synthesis_grid
from .schedules import DEFAULT_RABI

DEFAULT_LENGTHS = (1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024)
SEQUENCE_STREAM = 0
NOISE_STREAM = 1


@dataclass(frozen=True)
class RBConfig:
    flavor: str
    noise: NoiseModel
    lengths: tuple[int, ...] = DEFAULT_LENGTHS
    sequences_per_length: int = 20
    realizations_per_sequence: int = 50
    root_seed: int = 0
    rabi: float = DEFAULT_RABI
    # sub-steps per pi/2 of pulse area when the noise is time dependent
    steps_per_quarter: int = 8
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "flavor", parse_flavor(self.flavor))
        object.__setattr__(self, "lengths", tuple(int(n) for n in self.lengths))
        if not self.lengths or any(n < 1 for n in self.lengths):
            raise ValueError("RB lengths must be >= 1")
        if any(b <= a for a, b in zip(self.lengths, self.lengths[1:])):
            raise ValueError("RB lengths must be strictly increasing")
        if self.sequences_per_length < 1 or self.realizations_per_sequence < 1:
            raise ValueError("sequence and realization counts must be >= 1")
        if self.steps_per_quarter < 1:
            raise ValueError("steps_per_quarter must be >= 1")
        if not self.rabi > 0:
            raise ValueError("rabi must be > 0")
        if self.workers < 0:
            raise ValueError("workers must be >= 0 (0 = automatic)")

    @property
    def time_step(self) -> float:
        return (math.pi / 2) / self.rabi / self.steps_per_quarter


@dataclass(frozen=True)
class RBResult:
    flavor: str
    points: tuple[tuple[int, float, float], ...]
    fitted_d: float
    fit_residual: float
    config: RBConfig | None = field(default=None, compare=False)

    @property
    def average_fidelity(self) -> float:
        return 1.0 - self.fitted_d

    def curve_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "mean_fidelity", "stderr"])
        for n, mean, err in self.points:
            writer.writerow([n, f"{mean:.17g}", f"{err:.17g}"])
        return buf.getvalue()


def resolve_workers(workers: int | None = None) -> int:
    """Worker count; 0 or None falls back to ``GEOMGATE_THREADS`` then the CPU count."""
    if workers:
        return int(workers)
    env = os.environ.get("GEOMGATE_THREADS", "0").strip() or "0"
    n = int(env)
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True)
class _StepTable:
    """Sub-step coefficients of one Clifford element in one flavor."""

    cx: np.ndarray
    cy: np.ndarray
    cz: np.ndarray
    t_mid: np.ndarray
    duration: float


@functools.lru_cache(maxsize=64)
def _step_tables(flavor: str, rabi: float, dt: float | None) -> tuple[_StepTable, ...]:
    """Per-element sub-steps; ``dt=None`` means one step per segment (constant noise)."""
    out = []
    for row in build_clifford_table():
        cx, cy, cz, t_mid = [], [], [], []
        t = 0.0
        for seg in row.schedule(flavor, rabi).segments:
            if seg.duration == 0.0:
                continue
            n = 1 if dt is None else max(1, math.ceil(seg.duration / dt - 1e-9))
            h = seg.duration / n
            for k in range(n):
                cx.append(0.5 * seg.rabi * math.cos(seg.phase) * h)
                cy.append(0.5 * seg.rabi * math.sin(seg.phase) * h)
                cz.append(rabi * h)
                t_mid.append(t + (k + 0.5) * h)
            t += seg.duration
        out.append(_StepTable(np.array(cx), np.array(cy), np.array(cz), np.array(t_mid), t))
    return tuple(out)


def draw_sequence(root_seed: int, length_index: int, sequence_index: int, n: int) -> np.ndarray:
    """``n`` random Clifford indices followed by the recovery element."""
    rng = np.random.default_rng(seed_sequence(root_seed, SEQUENCE_STREAM, length_index, sequence_index))
    seq = rng.integers(0, 24, size=n)
    mult, inv = multiplication_table()
    total = 0
    for c in seq:
        total = mult[c, total]
    return np.append(seq, inv[total])


def _sequence_steps(tables, seq, dt):
    parts = [tables[c] for c in seq]
    cx = np.concatenate([p.cx for p in parts])
    cy = np.concatenate([p.cy for p in parts])
    cz = np.concatenate([p.cz for p in parts])
    durations = np.array([p.duration for p in parts])
    total = float(durations.sum())
    if dt is None:
        return cx, cy, cz, np.zeros(cx.size, dtype=np.int64), total
    offsets = np.concatenate([[0.0], np.cumsum(durations)[:-1]])
    t_mid = np.concatenate([p.t_mid + off for p, off in zip(parts, offsets)])
    sample = np.floor(t_mid / dt).astype(np.int64)
    return cx, cy, cz, sample, total


def mean_clifford_duration(flavor: str, rabi: float = DEFAULT_RABI) -> float:
    table = build_clifford_table()
    return sum(row.schedule(flavor, rabi).duration for row in table) / len(table)


def environment_ir_cutoff(lengths, rabi: float = DEFAULT_RABI) -> float:
    """Default infrared cutoff shared by every flavor of an experiment.

    ``2 pi / T`` with ``T`` the mean duration of the longest geometric
    sequence (``max(lengths) + 1`` Cliffords), so that all gate sets face the
    same noise band however long their pulses are.
    """
    longest = (max(lengths) + 1) * mean_clifford_duration("geometric-path1", rabi)
    return 2 * math.pi / longest


def _effective_model(config: RBConfig) -> NoiseModel:
    model = config.noise
    if isinstance(model, OneOverFNoise) and model.omega_ir is None:
        return replace(model, omega_ir=environment_ir_cutoff(config.lengths, config.rabi))
    return model


def _noise_block(config: RBConfig, model: NoiseModel, li: int, si: int, n_samples: int):
    m = config.realizations_per_sequence
    if isinstance(model, StaticNoise):
        delta = np.empty((m, 1))
        epsilon = np.empty((m, 1))
        for r in range(m):
            delta[r, 0], epsilon[r, 0] = sample_static(
                model, seed_sequence(config.root_seed, NOISE_STREAM, li, si, r)
            )
        return delta, epsilon
    if isinstance(model, OneOverFNoise):
        delta = np.empty((m, n_samples))
        epsilon = np.empty((m, n_samples))
        for r in range(m):
            trace = one_over_f_trace(
                model, n_samples, config.time_step, seed_sequence(config.root_seed, NOISE_STREAM, li, si, r)
            )
            delta[r], epsilon[r] = trace.delta, trace.epsilon
        return delta, epsilon
    raise ValueError(f"unsupported noise model {model!r}")


def _run_cell(config: RBConfig, flavors: tuple[str, ...], li: int, si: int) -> list[np.ndarray]:
    """Survival for one (length, sequence) cell, for several flavors at once.

    Flavors whose traces come from the same synthesis grid share one noise
    block; shorter sequences read a prefix of it, which is exactly what
    separate generation would produce.
    """
    model = _effective_model(config)
    static = isinstance(model, StaticNoise)
    dt = None if static else config.time_step
    seq = draw_sequence(config.root_seed, li, si, config.lengths[li])
    prepared = []
    for flavor in flavors:
        tables = _step_tables(flavor, config.rabi, dt)
        cx, cy, cz, sample, _ = _sequence_steps(tables, seq, dt)
        n_samples = 1 if static else max(2, int(sample.max()) + 1)
        grid_key = None if static else synthesis_grid(model, n_samples, dt)
        prepared.append((cx, cy, cz, sample, n_samples, grid_key))
    blocks = {}
    for *_, n_samples, key in prepared:
        blocks[key] = max(blocks.get(key, 0), n_samples)
    noise = {key: _noise_block(config, model, li, si, n) for key, n in blocks.items()}
    out = []
    for cx, cy, cz, sample, n_samples, key in prepared:
        delta, epsilon = noise[key]
        out.append(survival_probabilities(cx, cy, cz, sample, delta[:, :n_samples], epsilon[:, :n_samples]))
    return out


def survival_grid(config: RBConfig, flavors=None) -> dict[str, np.ndarray]:
    """Survival probabilities per flavor, each shaped (lengths, sequences, realizations)."""
    flavors = tuple(parse_flavor(f) for f in (flavors or (config.flavor,)))
    cells = [(li, si) for li in range(len(config.lengths)) for si in range(config.sequences_per_length)]
    shape = (len(config.lengths), config.sequences_per_length, config.realizations_per_sequence)
    out = {f: np.empty(shape) for f in flavors}
    workers = resolve_workers(config.workers)
    if workers == 1:
        results = [_run_cell(config, flavors, li, si) for li, si in cells]
    else:
        # the compiled kernel releases the GIL; each cell writes its own slot
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: _run_cell(config, flavors, *c), cells))
    for (li, si), res in zip(cells, results):
        for f, surv in zip(flavors, res):
            out[f][li, si] = surv
    return out


def _summarise(config: RBConfig, flavor: str, grid: np.ndarray) -> RBResult:
    points = []
    for li, n in enumerate(config.lengths):
        per_sequence = grid[li].mean(axis=1)
        k = per_sequence.size
        err = float(per_sequence.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0
        points.append((n, float(grid[li].mean()), err))
    d, residual = fit_decay([(n, f) for n, f, _ in points])
    return RBResult(flavor, tuple(points), d, residual, replace(config, flavor=flavor))


def run_rb(config: RBConfig) -> RBResult:
    return _summarise(config, config.flavor, survival_grid(config)[config.flavor])


def run_rb_flavors(config: RBConfig, flavors=None) -> dict[str, RBResult]:
    """Run several flavors on identical sequences and noise; ``config.flavor`` is ignored."""
    flavors = tuple(parse_flavor(f) for f in (flavors or FLAVORS))
    grids = survival_grid(config, flavors)
    return {f: _summarise(config, f, grids[f]) for f in flavors}


def _decay_model(d, n):
    return 0.5 * (1.0 + np.exp(-d * n))


def fit_decay(points) -> tuple[float, float]:
    """Least-squares ``d`` for ``F(n) = (1 + exp(-d n)) / 2``; returns ``(d, rms residual)``.

    A failed fit returns ``d = nan`` with the residual of the starting guess.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (n, fidelity) pairs")
    n, f = pts[:, 0], pts[:, 1]
    if np.unique(n).size < 3:
        raise ValueError("fit_decay needs at least three distinct lengths")
    if not (np.all(np.isfinite(pts)) and np.all(n > 0)):
        raise ValueError("lengths must be positive and fidelities finite")

    def residuals(x):
        return _decay_model(x[0], n) - f

    # initial guess from the linearised model, robust to points at or below 1/2
    y = np.clip(2 * f - 1, 1e-12, 1.0)
    guess = float(np.clip(np.median(-np.log(y) / n), 0.0, 10.0))
    try:
        sol = least_squares(
            residuals, x0=[guess], bounds=([0.0], [np.inf]), method="trf",
            ftol=1e-15, xtol=1e-15, gtol=1e-15, x_scale=[max(guess, 1e-8)], max_nfev=1000,
        )
    except (ValueError, FloatingPointError):
        return math.nan, float(np.sqrt(np.mean(residuals([guess]) ** 2)))
    if not sol.success:
        return math.nan, float(np.sqrt(np.mean(residuals([guess]) ** 2)))
    d = float(sol.x[0])
    rms = float(np.sqrt(np.mean(sol.fun ** 2)))
    # the optimum may sit on the d = 0 boundary, which TRF only approaches
    rms_zero = float(np.sqrt(np.mean(residuals([0.0]) ** 2)))
    if rms_zero <= rms:
        return 0.0, rms_zero
    return d, rms


def improvement_ratio(d_dynamical: float, d_geometric: float) -> tuple[float, float]:
    """``(kappa, dyn_over_geo)`` where ``kappa = d_geometric / d_dynamical``.

    ``kappa < 1`` (equivalently ``dyn_over_geo > 1``) means the geometric gate
    has the smaller error.
    """
    if not (d_dynamical > 0 and d_geometric > 0):
        raise ValueError("improvement ratio needs positive error rates")
    return d_geometric / d_dynamical, d_dynamical / d_geometric
