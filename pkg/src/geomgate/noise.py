"""Noise models: quasi-static Gaussian draws and 1/f^alpha trace synthesis.

Noise values are dimensionless. The detuning ``delta`` is measured in units
of the reference Rabi frequency and the systematic error ``epsilon`` is a
relative amplitude error. Time is measured in units of ``t0``.

Seeding rule: every random stream is a ``numpy.random.SeedSequence`` built
from the caller's root entropy plus a tuple ``spawn_key``. A realization
identified by keys ``(k1, k2, ...)`` uses ``spawn_key=(k1, k2, ..., 0)`` for
delta and ``(..., 1)`` for epsilon, so the two channels never share draws.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from scipy import signal

DELTA_STREAM = 0
EPSILON_STREAM = 1


@dataclass(frozen=True)
class StaticNoise:
    """Quasi-static noise: one Gaussian (delta, epsilon) pair per realization."""

    sigma_delta: float = 0.0
    sigma_epsilon: float = 0.0

    def __post_init__(self):
        if not (self.sigma_delta >= 0 and self.sigma_epsilon >= 0):
            raise ValueError("static noise standard deviations must be >= 0")

    @property
    def kind(self) -> str:
        return "static"


@dataclass(frozen=True)
class OneOverFNoise:
    """Time-dependent noise with one-sided PSD ``S(w) = A / (w t0)^alpha``.

    ``w`` is an angular frequency in units of ``1/t0``. ``channel`` selects
    which noise term the trace drives (``delta``, ``epsilon`` or ``both``;
    with ``both`` the two channels get independent traces of equal
    amplitude). ``omega_ir``/``omega_uv`` of ``None`` mean "derive from the
    trace": ``2 pi / (n dt)`` and the Nyquist frequency ``pi / dt``.
    """

    amplitude_a: float
    alpha: float
    t0: float = 1.0
    omega_ir: float | None = None
    omega_uv: float | None = None
    channel: str = "delta"

    def __post_init__(self):
        if self.amplitude_a < 0:
            raise ValueError("1/f amplitude must be >= 0")
        if not 0.0 <= self.alpha <= 3.0:
            raise ValueError(f"alpha must lie in [0, 3], got {self.alpha}")
        if self.t0 <= 0:
            raise ValueError("t0 must be > 0")
        if self.omega_ir is not None and self.omega_ir <= 0:
            raise ValueError("omega_ir must be > 0")
        if (
            self.omega_ir is not None
            and self.omega_uv is not None
            and not self.omega_uv > self.omega_ir
        ):
            raise ValueError("need omega_ir < omega_uv")
        if self.channel not in ("delta", "epsilon", "both"):
            raise ValueError(f"unknown noise channel {self.channel!r}")

    @property
    def kind(self) -> str:
        return "one_over_f"

    def psd(self, omega):
        omega = np.asarray(omega, dtype=float)
        return self.amplitude_a / (omega * self.t0) ** self.alpha


NoiseModel = Union[StaticNoise, OneOverFNoise]


@dataclass(frozen=True)
class NoiseTrace:
    """Sampled noise, held constant over each interval of length ``dt``."""

    dt: float
    delta: np.ndarray
    epsilon: np.ndarray

    def __post_init__(self):
        delta = np.asarray(self.delta, dtype=float)
        epsilon = np.asarray(self.epsilon, dtype=float)
        if self.dt <= 0:
            raise ValueError("trace dt must be > 0")
        if delta.shape != epsilon.shape or delta.ndim != 1 or delta.size == 0:
            raise ValueError("delta and epsilon samples must be equal-length 1D arrays")
        if not (np.all(np.isfinite(delta)) and np.all(np.isfinite(epsilon))):
            raise ValueError("noise samples must be finite")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "epsilon", epsilon)

    def __len__(self) -> int:
        return self.delta.size

    @property
    def duration(self) -> float:
        return self.dt * self.delta.size

    @classmethod
    def constant(cls, delta: float, epsilon: float, duration: float) -> "NoiseTrace":
        """A single-sample trace covering ``duration`` (any positive value works)."""
        return cls(max(duration, 1e-300), np.array([delta]), np.array([epsilon]))

    @classmethod
    def zeros(cls, duration: float) -> "NoiseTrace":
        return cls.constant(0.0, 0.0, duration)


def seed_sequence(seed, *keys: int) -> np.random.SeedSequence:
    """Child ``SeedSequence`` of ``seed`` (int or SeedSequence) at ``keys``."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key + tuple(keys))
    if isinstance(seed, (int, np.integer)) and seed >= 0:
        return np.random.SeedSequence(int(seed), spawn_key=tuple(keys))
    raise ValueError(f"seed must be a non-negative integer, got {seed!r}")


def sample_static(model: StaticNoise, seed) -> tuple[float, float]:
    """Draw one ``(delta, epsilon)`` pair, deterministic in ``seed``."""
    if not isinstance(model, StaticNoise):
        raise ValueError("sample_static needs a StaticNoise model")
    rng_d = np.random.default_rng(seed_sequence(seed, DELTA_STREAM))
    rng_e = np.random.default_rng(seed_sequence(seed, EPSILON_STREAM))
    delta = model.sigma_delta * rng_d.standard_normal()
    epsilon = model.sigma_epsilon * rng_e.standard_normal()
    return float(delta), float(epsilon)


def synthesis_grid(model: OneOverFNoise, n_samples: int, dt: float) -> tuple[int, float, float]:
    """FFT length and the resolved band ``(n_fft, omega_ir, omega_uv)``.

    The FFT grid is stretched beyond ``n_samples`` when the requested infrared
    cutoff is below the trace's own frequency resolution; in that case the
    grid's fundamental is the grid line nearest to ``omega_ir`` and is always
    part of the band.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    if dt <= 0:
        raise ValueError("dt must be > 0")
    nyquist = math.pi / dt
    omega_ir = model.omega_ir if model.omega_ir is not None else 2 * math.pi / (n_samples * dt)
    omega_uv = model.omega_uv if model.omega_uv is not None else nyquist
    if omega_uv > nyquist * (1 + 1e-12):
        raise ValueError(f"omega_uv={omega_uv} exceeds the Nyquist frequency {nyquist} for dt={dt}")
    if not omega_ir < omega_uv:
        raise ValueError(f"band [{omega_ir}, {omega_uv}] is empty")
    n_fft = max(n_samples, round(2 * math.pi / (omega_ir * dt)))
    n_fft += n_fft % 2
    d_omega = 2 * math.pi / (n_fft * dt)
    # snap the cutoff onto the grid line nearest to it
    omega_ir = max(1, round(omega_ir / d_omega)) * d_omega
    return n_fft, omega_ir, omega_uv


def generate_one_over_f(model: OneOverFNoise, n_samples: int, dt: float, seed) -> np.ndarray:
    """Random-phase spectral synthesis of a 1/f^alpha trace.

    The trace is ``sum_k sqrt(2 S(w_k) dw) cos(w_k t + phi_k)`` over the FFT
    frequencies ``w_k`` inside ``[omega_ir, omega_uv]``, with independent
    uniform phases. Its variance is therefore ``int S(w) dw`` over the band.
    """
    n_fft, omega_ir, omega_uv = synthesis_grid(model, n_samples, dt)
    if model.amplitude_a == 0:
        return np.zeros(n_samples)
    d_omega = 2 * math.pi / (n_fft * dt)
    k = np.arange(n_fft // 2 + 1)
    omega = k * d_omega
    # small slack so that cutoffs placed exactly on a grid line are included
    in_band = (omega >= omega_ir * (1 - 1e-9)) & (omega <= omega_uv * (1 + 1e-9)) & (k > 0)
    amp = np.zeros(k.size)
    amp[in_band] = np.sqrt(2.0 * model.psd(omega[in_band]) * d_omega)

    rng = np.random.default_rng(seed_sequence(seed))
    phases = rng.uniform(0.0, 2 * math.pi, size=k.size)
    coeffs = amp * np.exp(1j * phases) * (n_fft / 2)
    # irfft keeps only the real part of the Nyquist bin, which has no 1/2 weight
    coeffs[-1] = n_fft * amp[-1] * math.cos(phases[-1])
    trace = np.fft.irfft(coeffs, n=n_fft)
    return trace[:n_samples]


def one_over_f_trace(model: OneOverFNoise, n_samples: int, dt: float, seed) -> NoiseTrace:
    """Full ``NoiseTrace`` for a model, filling the channel(s) it drives."""
    zero = np.zeros(n_samples)
    delta = epsilon = zero
    if model.channel in ("delta", "both"):
        delta = generate_one_over_f(model, n_samples, dt, seed_sequence(seed, DELTA_STREAM))
    if model.channel in ("epsilon", "both"):
        epsilon = generate_one_over_f(model, n_samples, dt, seed_sequence(seed, EPSILON_STREAM))
    return NoiseTrace(dt, delta, epsilon)


def psd_estimate(trace, dt: float, segments: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Welch-averaged one-sided PSD in angular frequency.

    Returns ``(omega, power)`` with the DC bin dropped, normalised so that
    ``sum(power) * d_omega`` approximates the variance of ``trace``.
    """
    x = np.asarray(trace, dtype=float)
    if x.size < 64:
        raise ValueError("psd_estimate needs at least 64 samples")
    if segments < 1:
        raise ValueError("segments must be >= 1")
    nperseg = x.size // segments
    freq, power = signal.welch(x, fs=1.0 / dt, window="hann", nperseg=nperseg, detrend="linear")
    omega = 2 * math.pi * freq[1:]
    return omega, power[1:] / (2 * math.pi)


def loglog_slope(omega, power, band: tuple[float, float] | None = None) -> float:
    """Least-squares slope of ``log(power)`` against ``log(omega)``."""
    omega = np.asarray(omega, dtype=float)
    power = np.asarray(power, dtype=float)
    mask = (omega > 0) & (power > 0)
    if band is not None:
        mask &= (omega >= band[0]) & (omega <= band[1])
    if mask.sum() < 2:
        raise ValueError("not enough positive bins in band for a slope fit")
    slope, _ = np.polyfit(np.log(omega[mask]), np.log(power[mask]), 1)
    return float(slope)


def trace_csv(trace: NoiseTrace) -> str:
    """``t,delta,epsilon`` CSV text, 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "delta", "epsilon"])
    for i, (d, e) in enumerate(zip(trace.delta, trace.epsilon)):
        writer.writerow([f"{i * trace.dt:.17g}", f"{d:.17g}", f"{e:.17g}"])
    return buf.getvalue()


def write_trace_csv(path, trace: NoiseTrace) -> None:
    Path(path).write_text(trace_csv(trace))


def read_trace_csv(path) -> NoiseTrace:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["t", "delta", "epsilon"]:
            raise ValueError(f"unexpected trace header {header}")
        rows = np.array([[float(v) for v in row] for row in reader])
    if rows.shape[0] < 2:
        raise ValueError("trace CSV needs at least two rows to recover dt")
    return NoiseTrace(float(rows[1, 0] - rows[0, 0]), rows[:, 1], rows[:, 2])
