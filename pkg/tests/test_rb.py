import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geomgate.clifford import FLAVORS, build_clifford_table
from geomgate.core import equal_up_to_phase
from geomgate.noise import NoiseTrace, OneOverFNoise, StaticNoise, one_over_f_trace, sample_static, seed_sequence
from geomgate.rb import (
    NOISE_STREAM,
    RBConfig,
    _effective_model,
    draw_sequence,
    environment_ir_cutoff,
    fit_decay,
    improvement_ratio,
    mean_clifford_duration,
    resolve_workers,
    run_rb,
    run_rb_flavors,
    survival_grid,
)
from geomgate.schedules import PulseSegment, Schedule, concatenate, evolve_noisy

SHORT = (1, 2, 4, 8, 16)


def small(noise, **kw):
    base = dict(lengths=SHORT, sequences_per_length=3, realizations_per_sequence=4, root_seed=5)
    base.update(kw)
    return RBConfig("dynamical", noise, **base)


def test_config_validation():
    with pytest.raises(ValueError):
        small(StaticNoise(), lengths=(2, 1))
    with pytest.raises(ValueError):
        small(StaticNoise(), lengths=(0, 1))
    with pytest.raises(ValueError):
        small(StaticNoise(), sequences_per_length=0)
    with pytest.raises(ValueError):
        small(StaticNoise(), rabi=0.0)
    with pytest.raises(ValueError):
        small(StaticNoise(), workers=-1)
    with pytest.raises(ValueError):
        RBConfig("bogus", StaticNoise())
    assert small(StaticNoise()).time_step == pytest.approx(0.25 / 8)


def test_resolve_workers(monkeypatch):
    monkeypatch.setenv("GEOMGATE_THREADS", "3")
    assert resolve_workers(0) == 3
    assert resolve_workers(2) == 2
    monkeypatch.setenv("GEOMGATE_THREADS", "0")
    assert resolve_workers(None) >= 1


@given(st.integers(0, 1000), st.integers(0, 5), st.integers(0, 30), st.integers(1, 40))
def test_sequences_invert_to_identity(seed, li, si, n):
    table = build_clifford_table()
    seq = draw_sequence(seed, li, si, n)
    assert seq.size == n + 1
    u = np.eye(2)
    for c in seq:
        u = table[c].target @ u
    assert equal_up_to_phase(u, np.eye(2))
    assert np.array_equal(seq, draw_sequence(seed, li, si, n))


def test_zero_noise_is_perfect():
    res = run_rb_flavors(small(StaticNoise()))
    for r in res.values():
        assert r.fitted_d == 0.0
        assert all(abs(f - 1) < 1e-12 for _, f, _ in r.points)


@pytest.mark.parametrize("d", [1e-5, 3e-4, 2e-3, 0.05])
def test_fit_recovers_exact_decay(d):
    n = np.array([1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024])
    got, rms = fit_decay(np.column_stack([n, 0.5 * (1 + np.exp(-d * n))]))
    assert got == pytest.approx(d, rel=1e-8)
    assert rms < 1e-12


def test_fit_recovers_decay_from_noisy_monte_carlo():
    """Binomial sampling of a known decay; the estimate lands within a few standard errors."""
    rng = np.random.default_rng(8)
    n = np.array([1, 2, 4, 8, 16, 32, 64, 128, 256])
    d_true = 4e-3
    p = 0.5 * (1 + np.exp(-d_true * n))
    estimates = []
    for _ in range(200):
        f = rng.binomial(20000, p) / 20000
        estimates.append(fit_decay(np.column_stack([n, f]))[0])
    estimates = np.array(estimates)
    assert abs(estimates.mean() - d_true) < 4 * estimates.std() / math.sqrt(estimates.size)
    assert estimates.std() < 0.1 * d_true


def test_fit_edge_cases():
    n = [1, 2, 4, 8]
    assert fit_decay([(k, 1.0) for k in n]) == (0.0, 0.0)
    with pytest.raises(ValueError):
        fit_decay([(1, 0.9), (2, 0.8)])
    with pytest.raises(ValueError):
        fit_decay([(1, 0.9), (2, math.nan), (4, 0.7)])
    d, _ = fit_decay([(k, 0.5) for k in n])
    assert d > 1 or math.isnan(d)


def test_improvement_ratio():
    assert improvement_ratio(1e-3, 1e-3) == (1.0, 1.0)
    kappa, inv = improvement_ratio(2e-3, 5e-4)
    assert kappa == pytest.approx(0.25) and inv == pytest.approx(4.0)
    with pytest.raises(ValueError):
        improvement_ratio(0.0, 1e-3)


def test_environment_cutoff():
    t = mean_clifford_duration("geometric-path1")
    assert t == pytest.approx(1.875)
    assert environment_ir_cutoff((1, 1024)) == pytest.approx(2 * math.pi / (1025 * t))
    model = _effective_model(small(OneOverFNoise(1e-7, 1.0)))
    assert model.omega_ir == pytest.approx(environment_ir_cutoff(SHORT))
    assert _effective_model(small(OneOverFNoise(1e-7, 1.0, omega_ir=0.5))).omega_ir == 0.5


def _quarter_pieces(s: Schedule, quarter: float) -> Schedule:
    """Split every segment into pieces of one quarter-turn so fixed sub-stepping aligns."""
    pieces = []
    for seg in s.segments:
        m = round(seg.duration / quarter)
        assert abs(m * quarter - seg.duration) < 1e-12
        pieces += [PulseSegment(seg.rabi, seg.phase, quarter)] * m
    return Schedule(tuple(pieces))


@pytest.mark.parametrize("flavor", FLAVORS)
@pytest.mark.parametrize("kind", ["static", "one_over_f"])
def test_kernel_agrees_with_direct_propagation(flavor, kind):
    noise = StaticNoise(0.05, 0.04) if kind == "static" else OneOverFNoise(1e-3, 1.5, omega_ir=0.01, channel="both")
    config = replace(small(noise, lengths=(3, 7), sequences_per_length=2, realizations_per_sequence=3), flavor=flavor)
    grid = survival_grid(config)[flavor]
    table = build_clifford_table()
    model = _effective_model(config)
    quarter = (math.pi / 2) / config.rabi
    for li, n in enumerate(config.lengths):
        for si in range(config.sequences_per_length):
            seq = draw_sequence(config.root_seed, li, si, n)
            schedule = concatenate(table[c].schedule(flavor, config.rabi) for c in seq)
            for r in range(config.realizations_per_sequence):
                seed = seed_sequence(config.root_seed, NOISE_STREAM, li, si, r)
                if kind == "static":
                    trace = NoiseTrace.constant(*sample_static(model, seed), schedule.duration)
                    u = evolve_noisy(schedule, trace, steps_per_segment=1, rabi_ref=config.rabi)
                else:
                    n_samples = math.ceil(schedule.duration / config.time_step) + 1
                    trace = one_over_f_trace(model, n_samples, config.time_step, seed)
                    u = evolve_noisy(
                        _quarter_pieces(schedule, quarter), trace,
                        steps_per_segment=config.steps_per_quarter, rabi_ref=config.rabi,
                    )
                assert grid[li, si, r] == pytest.approx(abs(u[0, 0]) ** 2, abs=1e-11)


def test_shared_noise_blocks_match_single_flavor_runs():
    config = small(OneOverFNoise(1e-5, 2.0), lengths=(2, 16, 64))
    together = run_rb_flavors(config)
    for f in FLAVORS:
        alone = run_rb(replace(config, flavor=f))
        assert alone.curve_csv() == together[f].curve_csv()


@pytest.mark.parametrize("noise", [StaticNoise(0.02, 0.01), OneOverFNoise(1e-6, 2.5, channel="both")])
def test_determinism_across_runs_and_workers(noise):
    config = small(noise, lengths=(1, 4, 16, 32))
    a = run_rb_flavors(replace(config, workers=1))
    b = run_rb_flavors(replace(config, workers=1))
    c = run_rb_flavors(replace(config, workers=3))
    for f in FLAVORS:
        assert a[f].curve_csv() == b[f].curve_csv() == c[f].curve_csv()
        assert a[f].fitted_d == c[f].fitted_d


def test_seed_changes_results():
    a = run_rb(small(StaticNoise(0.05, 0.0)))
    b = run_rb(replace(small(StaticNoise(0.05, 0.0)), root_seed=6))
    assert a.curve_csv() != b.curve_csv()


def test_curve_csv_format():
    res = run_rb(small(StaticNoise(0.03, 0.0)))
    lines = res.curve_csv().splitlines()
    assert lines[0] == "n,mean_fidelity,stderr"
    assert [int(l.split(",")[0]) for l in lines[1:]] == list(SHORT)
    assert res.average_fidelity == 1 - res.fitted_d
    assert 0 < res.fitted_d < 0.05
