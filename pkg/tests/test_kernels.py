import math

import mpmath
import numpy as np
import pytest

from hardylab import (HarmonicProfile, HeatKernel, OutsideDomain, bessel_i,
                      harmonic_profile, heat_kernel, lp_kernel)

mpmath.mp.dps = 30


def test_half_line_closed_form_value(half_line):
    want = (4 * math.pi) ** -0.5 * (1 - math.exp(-1))
    assert heat_kernel(half_line, 1.0, 1.0, 1.0) == pytest.approx(want, rel=1e-12)


def test_half_line_vanishes_at_wall(half_line):
    assert heat_kernel(half_line, 1.0, 0.0, 2.0) == 0.0
    assert heat_kernel(half_line, 0.3, 1e-12, 1.0) == pytest.approx(0.0, abs=1e-11)


def test_half_space_product_value():
    k = HeatKernel.half_space_dirichlet(2)
    want = (4 * math.pi) ** -1 * (1 - math.exp(-1))
    assert heat_kernel(k, 1.0, (0.0, 1.0), (0.0, 1.0)) == pytest.approx(want, rel=1e-12)


def test_kernel_symmetry_and_sign():
    rng = np.random.default_rng(3)
    kernels = [HeatKernel.half_line_dirichlet(), HeatKernel.bessel_neumann(2.0)]
    for k in kernels:
        for _ in range(40):
            t = float(rng.uniform(0.05, 20.0))
            x, y = rng.uniform(0.05, 12.0, size=2)
            a = heat_kernel(k, t, float(x), float(y))
            b = heat_kernel(k, t, float(y), float(x))
            assert a >= 0.0
            assert abs(a - b) < 1e-12 * max(1.0, a)


def test_semigroup_property(half_line):
    # int T_s(x,z) T_t(z,y) dz = T_{s+t}(x,y)
    s, t, x, y = 0.4, 0.7, 0.8, 1.3
    zs = np.linspace(1e-9, 40.0, 300001)
    prod = heat_kernel(half_line, s, x, zs) * heat_kernel(half_line, t, zs, y)
    got = np.trapezoid(prod, zs)
    want = heat_kernel(half_line, s + t, x, y)
    assert got == pytest.approx(want, rel=1e-6)


def test_sub_markov_mass(half_line):
    ys = np.linspace(1e-9, 80.0, 400001)
    for t, x in [(0.5, 1.0), (2.0, 0.3), (10.0, 4.0)]:
        mass = np.trapezoid(heat_kernel(half_line, t, x, ys), ys)
        assert mass <= 1.0 + 1e-9
        assert mass < 1.0  # Dirichlet loses mass


def test_bessel_neumann_conservative():
    k = HeatKernel.bessel_neumann(2.0)
    ys = np.linspace(1e-9, 100.0, 400001)
    for t, x in [(0.5, 1.0), (2.0, 3.0)]:
        mass = np.trapezoid(heat_kernel(k, t, x, ys) * ys ** 2, ys)
        assert mass == pytest.approx(1.0, abs=1e-6)


# -- modified Bessel ---------------------------------------------------------

def test_bessel_i_half_order_closed_form():
    for z in (1e-3, 0.5, 1.0, 5.0, 19.99, 20.01, 30.0, 100.0):
        want = math.sqrt(2.0 / (math.pi * z)) * math.sinh(z)
        assert bessel_i(0.5, z) == pytest.approx(want, rel=1e-10)


def test_bessel_i_at_zero():
    assert bessel_i(0.0, 0.0) == 1.0
    assert bessel_i(1.5, 0.0) == 0.0


def test_bessel_i_against_mpmath():
    # unscaled values overflow past z ~ 700; larger z goes through the
    # scaled variant below
    for nu in (-0.4, 0.0, 0.5, 1.0, 2.5, 7.0):
        for z in (1e-4, 0.1, 1.0, 5.0, 19.5, 20.5, 50.0, 200.0, 600.0):
            want = float(mpmath.besseli(nu, z))
            assert bessel_i(nu, z) == pytest.approx(want, rel=1e-10), (nu, z)


def test_bessel_i_scaled_against_mpmath():
    for nu in (0.0, 0.5, 2.5):
        for z in (0.5, 20.0, 300.0, 5e3):
            want = float(mpmath.besseli(nu, z) * mpmath.exp(-z))
            assert bessel_i(nu, z, scaled=True) == pytest.approx(want, rel=1e-10)


def test_bessel_i_branch_crossover_smooth():
    # both sides of the series/asymptotic switchover against the oracle;
    # the function itself grows like e^z, so the two values differ
    for z in (20.0 * (1 - 1e-9), 20.0 * (1 + 1e-9)):
        want = float(mpmath.besseli(1.0, z))
        assert bessel_i(1.0, z) == pytest.approx(want, rel=1e-12)
    # the order-dependent cutoff: large orders stay on the series branch
    for z in (195.0, 197.0):
        want = float(mpmath.besseli(7.0, z))
        assert bessel_i(7.0, z) == pytest.approx(want, rel=1e-10)


# -- harmonic profiles --------------------------------------------------------

def test_profile_values():
    assert harmonic_profile(HarmonicProfile.exterior_power(3), 2.0) == 0.5
    inv = HarmonicProfile.inverse_square_power(3, 2.0)  # tau = 1
    assert harmonic_profile(inv, 2.0) == pytest.approx(2.0, rel=1e-14)
    assert harmonic_profile(HarmonicProfile.identity(), 0.7) == 0.7
    assert harmonic_profile(HarmonicProfile.exterior_log(), math.e) == \
        pytest.approx(1.0, rel=1e-14)
    assert harmonic_profile(HarmonicProfile.half_space_normal(2), (3.0, 0.25)) == 0.25
    bp = HarmonicProfile.bessel_power(0.5)
    assert harmonic_profile(bp, 4.0) == pytest.approx(2.0, rel=1e-14)


def test_profile_outside_domain():
    with pytest.raises(OutsideDomain):
        harmonic_profile(HarmonicProfile.identity(), -1.0)
    with pytest.raises(OutsideDomain):
        harmonic_profile(HarmonicProfile.exterior_power(3), 0.5)


# -- derivative kernel --------------------------------------------------------

def test_lp_kernel_matches_finite_difference(half_line):
    t, x, y = 1.0, 1.0, 1.0
    eps = 1e-5
    fd = -(heat_kernel(half_line, t * (1 + eps), x, y)
           - heat_kernel(half_line, t * (1 - eps), x, y)) / (2 * eps)
    assert lp_kernel(half_line, t, x, y) == pytest.approx(fd, rel=1e-8)


def test_lp_kernel_annihilates_harmonic(half_line):
    ys = np.linspace(1e-9, 60.0, 400001)
    for t, x in [(0.5, 1.0), (3.0, 2.0)]:
        val = np.trapezoid(lp_kernel(half_line, t, x, ys) * ys, ys)
        assert abs(val) < 1e-8


def test_lp_kernel_small_time_off_diagonal(half_line):
    assert abs(lp_kernel(half_line, 1e-4, 1.0, 2.0)) < 1e-30


def test_bessel_lp_matches_finite_difference():
    k = HeatKernel.bessel_neumann(2.0)
    t, x, y = 0.7, 1.2, 2.1
    eps = 1e-6
    fd = -t * (heat_kernel(k, t + eps * t, x, y)
               - heat_kernel(k, t - eps * t, x, y)) / (2 * eps * t)
    assert lp_kernel(k, t, x, y) == pytest.approx(fd, rel=1e-5)
