"""Command-line front end.

Exit codes: 0 success, 1 numeric or fit failure, 2 usage error.
``GEOMGATE_THREADS`` caps the worker count (0 means one per CPU).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path as FsPath

import numpy as np

from . import __version__
from .analysis import (
    FLAVORS,
    KAPPA_ALPHAS,
    KAPPA_AMPLITUDES,
    crossing_alpha,
    expansion_table,
    kappa_csv,
    kappa_study,
    ratio_csv,
    ratios_by_alpha,
)
from .clifford import CliffordTableError, build_clifford_table, mean_rotation_count, parse_flavor
from .core import gate_fidelity
from .dynamical import RotationSpec, dynamical_rotation
from .geometric import GeometricParams, Path, geometric_schedule, geometric_unitary
from .noise import OneOverFNoise, StaticNoise, loglog_slope, one_over_f_trace, psd_estimate, trace_csv
from .rb import DEFAULT_LENGTHS, RBConfig, run_rb
from .schedules import DEFAULT_RABI, Schedule
from .two_qubit import TwoQubitGeometricParams, cnot_fidelity_sweep, iswap_dynamical, rwa_schedule, two_qubit_geometric_unitary


class UsageError(Exception):
    pass


class NumericFailure(Exception):
    pass


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_hash: str
    root_seed: int
    tool_version: str
    wall_time_seconds: float


def config_hash(config: dict) -> str:
    """sha256 of the config as sorted, compact JSON."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_atomic(path, text: str) -> None:
    path = FsPath(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def format_matrix(u: np.ndarray) -> str:
    def cell(z: complex) -> str:
        re, im = round(z.real, 6) + 0.0, round(z.imag, 6) + 0.0
        return f"{re:+.6f}{im:+.6f}j"

    return "\n".join("[" + "  ".join(cell(z) for z in row) + "]" for row in u)


def format_segments(s: Schedule) -> str:
    lines = ["segment  rabi        phase       duration"]
    for i, seg in enumerate(s.segments):
        lines.append(f"{i:<8d} {seg.rabi:<11.6f} {seg.phase:<11.6f} {seg.duration:.6f}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# rb config files

_RB_KEYS = {
    "flavor",
    "noise.kind",
    "noise.sigma_delta",
    "noise.sigma_epsilon",
    "noise.amplitude_a",
    "noise.alpha",
    "noise.channel",
    "lengths",
    "sequences_per_length",
    "realizations",
    "seed",
}
_RB_REQUIRED = ("flavor", "noise.kind", "lengths", "sequences_per_length", "realizations", "seed")
_NOISE_REQUIRED = {
    "static": ("noise.sigma_delta", "noise.sigma_epsilon"),
    "one_over_f": ("noise.amplitude_a", "noise.alpha"),
}


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise UsageError(f"line {lineno}: empty key")
        if key in out:
            raise UsageError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _number(raw: dict, key: str, kind=float):
    try:
        value = kind(raw[key])
    except ValueError:
        raise UsageError(f"{key}: cannot parse {raw[key]!r} as {kind.__name__}") from None
    if kind is float and not math.isfinite(value):
        raise UsageError(f"{key}: must be finite")
    return value


def rb_config_from_text(text: str) -> tuple[RBConfig, dict]:
    """Parse an rb config; returns the run config and its canonical dict for hashing."""
    raw = parse_config_text(text)
    unknown = sorted(set(raw) - _RB_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    kind = raw.get("noise.kind", "").replace("1/f", "one_over_f")
    missing = [k for k in _RB_REQUIRED if k not in raw]
    missing += [k for k in _NOISE_REQUIRED.get(kind, ()) if k not in raw]
    if missing:
        raise UsageError(f"missing config keys: {', '.join(missing)}")
    if kind not in _NOISE_REQUIRED:
        raise UsageError(f"noise.kind must be 'static' or 'one_over_f', got {raw['noise.kind']!r}")
    try:
        flavor = parse_flavor(raw["flavor"])
        if kind == "static":
            noise = StaticNoise(_number(raw, "noise.sigma_delta"), _number(raw, "noise.sigma_epsilon"))
            noise_dict = {"kind": kind, "sigma_delta": noise.sigma_delta, "sigma_epsilon": noise.sigma_epsilon}
        else:
            noise = OneOverFNoise(
                _number(raw, "noise.amplitude_a"), _number(raw, "noise.alpha"), channel=raw.get("noise.channel", "delta")
            )
            noise_dict = {"kind": kind, "amplitude_a": noise.amplitude_a, "alpha": noise.alpha, "channel": noise.channel}
        try:
            lengths = tuple(int(x) for x in raw["lengths"].replace(",", " ").split())
        except ValueError:
            raise UsageError(f"lengths: expected integers, got {raw['lengths']!r}") from None
        config = RBConfig(
            flavor=flavor,
            noise=noise,
            lengths=lengths,
            sequences_per_length=_number(raw, "sequences_per_length", int),
            realizations_per_sequence=_number(raw, "realizations", int),
            root_seed=_number(raw, "seed", int),
            workers=0,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    canonical = {
        "flavor": config.flavor,
        "noise": noise_dict,
        "lengths": list(config.lengths),
        "sequences_per_length": config.sequences_per_length,
        "realizations": config.realizations_per_sequence,
        "seed": config.root_seed,
    }
    return config, canonical


# ---------------------------------------------------------------------------
# commands


def cmd_gate(args) -> int:
    if args.kind == "geo":
        p = GeometricParams(args.gamma, args.theta, args.phi, Path.parse(args.path or 1))
        schedule, u = geometric_schedule(p, args.rabi), geometric_unitary(p)
    elif args.kind == "dyn":
        schedule, u = dynamical_rotation(RotationSpec(args.axis_phase, args.angle), args.rabi)
    else:
        if args.path is None:
            schedule, u = iswap_dynamical(args.rabi)
        else:
            p = TwoQubitGeometricParams(math.pi / 2, math.pi / 2, 0.0, Path.parse(args.path))
            schedule, u = rwa_schedule(p, args.rabi), two_qubit_geometric_unitary(p)
    print(format_matrix(u))
    print()
    print(format_segments(schedule))
    return 0


def cmd_rb(args) -> int:
    try:
        text = FsPath(args.config).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    config, canonical = rb_config_from_text(text)
    if args.workers is not None:
        config = replace(config, workers=args.workers)
    start = time.perf_counter()
    result = run_rb(config)
    elapsed = time.perf_counter() - start
    if not math.isfinite(result.fitted_d):
        print(f"fit failed: residual {result.fit_residual:.3e}", file=sys.stderr)
        for n, mean, err in result.points:
            print(f"  n={n:<6d} mean={mean:.10f} stderr={err:.2e}", file=sys.stderr)
        return 1
    out = FsPath(args.out)
    fit = {
        "flavor": result.flavor,
        "d": result.fitted_d,
        "average_fidelity": result.average_fidelity,
        "residual": result.fit_residual,
    }
    manifest = RunManifest("rb", config_hash(canonical), config.root_seed, __version__, elapsed)
    write_atomic(out / "curve.csv", result.curve_csv())
    write_atomic(out / "fit.json", json.dumps(fit, indent=2, sort_keys=True) + "\n")
    write_atomic(out / "manifest.json", json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")
    print(f"{result.flavor}: d = {result.fitted_d:.6e}, average fidelity = {result.average_fidelity:.6f}")
    return 0


def cmd_sweep(args) -> int:
    grid = np.linspace(-args.max, args.max, args.points)
    columns = [cnot_fidelity_sweep(f, args.noise, grid) for f in FLAVORS]
    lines = ["noise," + ",".join(FLAVORS)]
    for i, x in enumerate(grid):
        lines.append(",".join([f"{x:.17g}"] + [f"{col[i][1]:.17g}" for col in columns]))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_kappa(args) -> int:
    base = RBConfig(
        "dynamical",
        OneOverFNoise(0.0, 1.0),
        lengths=tuple(2**k for k in range(args.max_power + 1)),
        sequences_per_length=args.sequences,
        realizations_per_sequence=args.realizations,
        root_seed=args.seed,
        workers=args.workers or 0,
    )
    start = time.perf_counter()
    cells = kappa_study(args.noise, args.alphas, args.amplitudes, base)
    rows = ratios_by_alpha(cells)
    elapsed = time.perf_counter() - start
    out = FsPath(args.out)
    write_atomic(out / "kappa.csv", kappa_csv(cells))
    write_atomic(out / "ratios.csv", ratio_csv(rows))
    canonical = {
        "noise": args.noise,
        "alphas": list(args.alphas),
        "amplitudes": list(args.amplitudes),
        "lengths": list(base.lengths),
        "sequences_per_length": base.sequences_per_length,
        "realizations": base.realizations_per_sequence,
        "seed": base.root_seed,
    }
    manifest = RunManifest("kappa", config_hash(canonical), base.root_seed, __version__, elapsed)
    write_atomic(out / "manifest.json", json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")
    print("alpha  dyn/g1     dyn/g2")
    for a, r1, r2 in rows:
        print(f"{a:<6g} {r1:<10.4f} {r2:.4f}")
    alphas = [r[0] for r in rows]
    print(f"path-2 crossing: alpha = {crossing_alpha(alphas, [r[2] for r in rows]):.3f}")
    return 0


def cmd_noise(args) -> int:
    model = OneOverFNoise(args.amplitude, args.alpha, channel=args.channel)
    trace = one_over_f_trace(model, args.n, args.dt, args.seed)
    series = trace.epsilon if args.channel == "epsilon" else trace.delta
    _emit(trace_csv(trace), args.out)
    if args.n >= 64 and args.amplitude > 0:
        omega, power = psd_estimate(series, args.dt)
        print(f"psd slope: {loglog_slope(omega, power):.4f}", file=sys.stderr)
    return 0


def cmd_expand(args) -> int:
    gammas = args.gammas or [k * math.pi / 4 for k in range(-4, 5)]
    gammas = [max(-math.pi, min(math.pi, g)) for g in gammas]
    reports = expansion_table(gammas)
    lines = ["flavor,gamma,c_epsilon,c_epsilon_closed,c_delta,c_delta_closed"]
    for r in reports:
        pe, pd = r.predicted()
        lines.append(f"{r.flavor},{r.gamma:.17g},{r.c_epsilon:.17g},{pe:.17g},{r.c_delta:.17g},{pd:.17g}")
    _emit("\n".join(lines) + "\n", args.out)
    print(
        "note: path-1 c_delta follows -8 cos^4(gamma/4); the variant with the noise "
        "strength delta in place of gamma inside the cosine does not match the numerics.",
        file=sys.stderr,
    )
    return 0


def cmd_clifford_verify(args) -> int:
    try:
        table = build_clifford_table()
    except CliffordTableError as exc:
        print(f"FAIL: {exc}", file=sys.stderr)
        return 1
    worst = 1.0
    print("index  " + "  ".join(f"{f:>16s}" for f in FLAVORS))
    for row in table:
        fids = [gate_fidelity(row.target, row.unitary(f)) for f in FLAVORS]
        worst = min(worst, *fids)
        print(f"C{row.index:<5d} " + "  ".join(f"{1 - x:16.3e}" for x in fids))
    print(f"worst infidelity {1 - worst:.3e}; mean dynamical rotations {mean_rotation_count(table):.6f}")
    return 0 if worst > 1 - 1e-10 else 1


# ---------------------------------------------------------------------------


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geomgate", description="Geometric vs dynamical spin-qubit gate simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gate", help="print a gate unitary and its pulse segments")
    g.add_argument("kind", choices=["geo", "dyn", "iswap"])
    g.add_argument("--gamma", type=float, default=0.0)
    g.add_argument("--theta", type=float, default=math.pi / 2)
    g.add_argument("--phi", type=float, default=0.0)
    g.add_argument("--path", default=None, help="geometric path 1 or 2 (iswap: omit for the dynamical pulse)")
    g.add_argument("--axis-phase", type=float, default=0.0)
    g.add_argument("--angle", type=float, default=0.0)
    g.add_argument("--rabi", type=float, default=DEFAULT_RABI)
    g.set_defaults(func=cmd_gate)

    r = sub.add_parser("rb", help="run randomized benchmarking from a key=value config")
    r.add_argument("config")
    r.add_argument("--out", default=".")
    r.add_argument("--workers", type=int, default=None)
    r.set_defaults(func=cmd_rb)

    s = sub.add_parser("sweep", help="CNOT fidelity under constant noise")
    s.add_argument("target", choices=["cnot"])
    s.add_argument("--noise", choices=["detuning", "systematic"], required=True)
    s.add_argument("--max", type=float, default=0.05)
    s.add_argument("--points", type=int, default=21)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_sweep)

    k = sub.add_parser("kappa", help="error ratio vs 1/f exponent")
    k.add_argument("--noise", choices=["detuning", "systematic"], required=True)
    k.add_argument("--alphas", type=_floats, default=list(KAPPA_ALPHAS))
    k.add_argument("--amplitudes", type=_floats, default=list(KAPPA_AMPLITUDES))
    k.add_argument("--sequences", type=int, default=20)
    k.add_argument("--realizations", type=int, default=50)
    k.add_argument("--max-power", type=int, default=int(math.log2(DEFAULT_LENGTHS[-1])))
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--workers", type=int, default=None)
    k.add_argument("--out", default=".")
    k.set_defaults(func=cmd_kappa)

    n = sub.add_parser("noise", help="write a 1/f noise trace as CSV")
    n.add_argument("--alpha", type=float, required=True)
    n.add_argument("--n", type=int, default=65536)
    n.add_argument("--dt", type=float, default=1.0)
    n.add_argument("--amplitude", type=float, default=1e-7)
    n.add_argument("--channel", choices=["delta", "epsilon", "both"], default="delta")
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--out", default=None)
    n.set_defaults(func=cmd_noise)

    e = sub.add_parser("expand", help="second-order noise coefficients of x rotations")
    e.add_argument("--gammas", type=_floats, default=None)
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_expand)

    c = sub.add_parser("clifford-verify", help="check all Clifford compilations")
    c.set_defaults(func=cmd_clifford_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError) as exc:
        # bad parameter values surfacing from the library
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericFailure, RuntimeError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
