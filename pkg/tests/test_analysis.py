import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geomgate.analysis import (
    FLAVORS,
    KappaCell,
    crossing_alpha,
    delta_f_curves,
    error_slopes,
    extract_coefficients,
    kappa_csv,
    kappa_study,
    noise_channel,
    predicted_coefficients,
    ratio_csv,
    ratios_by_alpha,
    x_rotation,
)
from geomgate.core import gate_fidelity, rotation
from geomgate.rb import RBConfig
from geomgate.noise import OneOverFNoise

GAMMAS = [s * g for g in (math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi - 0.01) for s in (1, -1)]


@pytest.mark.parametrize("flavor", FLAVORS)
def test_x_rotations_hit_target(flavor):
    for g in GAMMAS + [0.0]:
        s, u = x_rotation(flavor, g)
        assert gate_fidelity(rotation([1, 0, 0], g), u) > 1 - 1e-12


@pytest.mark.parametrize("flavor", FLAVORS)
@pytest.mark.parametrize("gamma", GAMMAS)
def test_coefficients_match_closed_forms(flavor, gamma):
    r = extract_coefficients(flavor, gamma)
    ce, cd = predicted_coefficients(flavor, gamma)
    assert r.c_epsilon == pytest.approx(ce, rel=1e-3)
    assert r.c_delta == pytest.approx(cd, rel=1e-3)


def test_known_values_at_quarter_turn():
    g = math.pi / 2
    assert extract_coefficients("dynamical", g).c_epsilon == pytest.approx(-0.30843, rel=1e-4)
    assert extract_coefficients("dynamical", g).c_delta == pytest.approx(-1.0, rel=1e-4)
    assert extract_coefficients("geometric-path1", g).c_epsilon == pytest.approx(-0.105835, rel=1e-4)
    assert extract_coefficients("geometric-path1", g).c_delta == pytest.approx(-8 * math.cos(math.pi / 8) ** 4, rel=1e-4)


def test_path1_detuning_coefficient_is_not_the_delta_variant():
    # a cos^4(delta/4) form would be -8 for any small delta, independent of gamma
    r = extract_coefficients("geometric-path1", 3 * math.pi / 4)
    assert abs(r.c_delta + 8) > 1.0


@given(st.sampled_from(FLAVORS), st.floats(-math.pi, math.pi))
def test_coefficients_nonpositive_and_step_stable(flavor, gamma):
    a = extract_coefficients(flavor, gamma)
    b = extract_coefficients(flavor, gamma, h=5e-4)
    assert a.c_epsilon <= 1e-6 and a.c_delta <= 1e-6
    for x, y in ((a.c_epsilon, b.c_epsilon), (a.c_delta, b.c_delta)):
        assert abs(x - y) <= 1e-4 * max(abs(x), 1e-2)


def test_gamma_range_enforced():
    with pytest.raises(ValueError):
        extract_coefficients("dynamical", 4.0)


def test_delta_f_sign_structure():
    grid = np.linspace(-math.pi, math.pi, 65)
    p1 = np.array(delta_f_curves(1, grid))
    p2 = np.array(delta_f_curves("path2", grid))
    assert np.all(p1[:, 1] >= -1e-6) and np.all(p1[:, 2] <= 1e-6)
    assert np.all(p2[:, 1] <= 1e-6) and np.all(p2[:, 2] >= -1e-6)
    # path-1 closed form for the systematic difference
    expected = (grid**2 - 4 * math.pi**2 * np.sin(grid / 4) ** 4) / 8
    assert np.allclose(p1[:, 1], expected, atol=1e-5)


def test_path2_difference_closed_forms():
    g = np.array([-2.0, -0.5, 1.0, 2.5])
    rows = np.array(delta_f_curves(2, g))
    eps = (g**2 - 4 * math.pi**2 * np.cos(g / 4) ** 4) / 8
    det = 4 * np.cos(g / 2) - 2 * (1 + np.cos(g))
    assert np.allclose(rows[:, 1], eps, atol=1e-5)
    assert np.allclose(rows[:, 2], det, atol=1e-5)


def test_crossing_alpha_interpolation():
    assert crossing_alpha([1.0, 2.0], [0.5, 2.0]) == pytest.approx(1.5)
    assert math.isnan(crossing_alpha([1.0, 2.0, 3.0], [0.5, 0.6, 0.7]))
    assert crossing_alpha([0, 1, 2, 3], [0.5, 0.8, 1.6, 3.2]) == pytest.approx(1 + math.log(1.25) / math.log(2))


def test_ratios_use_perturbative_cells():
    cells = [
        KappaCell(2.0, 1e-9, 1e-6, 4e-6, 5e-7),
        KappaCell(2.0, 1e-8, 1e-5, 4e-5, 5e-6),
        KappaCell(2.0, 1e-5, 0.2, 0.3, 0.15),  # saturated, ignored
        KappaCell(3.0, 1e-5, 0.4, 0.5, 0.3),  # nothing perturbative: smallest amplitude used
    ]
    rows = ratios_by_alpha(cells)
    assert rows[0] == pytest.approx((2.0, 0.25, 2.0))
    assert rows[1] == pytest.approx((3.0, 0.8, 4 / 3))
    slopes = error_slopes(cells[:2])
    assert slopes[2.0] == pytest.approx((1.0, 1.0, 1.0))


def test_noise_channel():
    assert noise_channel("detuning") == "delta"
    assert noise_channel("systematic") == "epsilon"
    with pytest.raises(ValueError):
        noise_channel("thermal")


def test_small_kappa_study_and_csv():
    base = RBConfig("dynamical", OneOverFNoise(0.0, 1.0), lengths=(1, 4, 16, 64), sequences_per_length=3,
                    realizations_per_sequence=4)
    cells = kappa_study("detuning", [2.5], [1e-9, 1e-8], base)
    assert len(cells) == 2
    # perturbative regime: error grows linearly with the spectral amplitude
    for attr in ("d_dyn", "d_g1", "d_g2"):
        assert getattr(cells[1], attr) / getattr(cells[0], attr) == pytest.approx(10.0, rel=0.01)
    text = kappa_csv(cells)
    assert text.splitlines()[0] == "alpha,amplitude,d_dyn,d_g1,d_g2"
    assert len(text.splitlines()) == 3
    assert ratio_csv(ratios_by_alpha(cells)).splitlines()[0] == "alpha,dyn_over_g1,dyn_over_g2"
    with pytest.raises(ValueError):
        kappa_study("detuning", [3.5], [1e-9], base)
