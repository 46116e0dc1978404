import math

import numpy as np
import pytest

from hardylab import (Ball, HarmonicProfile, ModelSpace, NonFiniteMass,
                      OutsideDomain, WeightedMeasure, ball_mass,
                      distance_to_boundary, doubling_constant)
from hardylab.spaces import Monomial

HL = ModelSpace.half_line(0.0)


def test_ball_mass_linear_density_unit_ball():
    m = WeightedMeasure(HL, Monomial(1.0, 1.0))
    assert ball_mass(m, Ball(1.0, 1.0)) == pytest.approx(2.0, abs=1e-12)


def test_ball_mass_lebesgue_interval():
    m = WeightedMeasure(HL)
    assert ball_mass(m, Ball(2.0, 1.0)) == pytest.approx(2.0, abs=1e-12)


def test_ball_mass_cubic_density_scaling():
    m = WeightedMeasure(HL, Monomial(1.0, 3.0))
    for r in (0.5, 1.0, 10.0):
        got = ball_mass(m, Ball(r, r))
        assert got == pytest.approx(4.0 * r ** 4, rel=1e-10)


def test_ball_mass_clips_at_origin():
    m = WeightedMeasure(HL)
    # B(0.5, 2) meets (0, inf) in (0, 2.5)
    assert ball_mass(m, Ball(0.5, 2.0)) == pytest.approx(2.5, abs=1e-12)


def test_ball_mass_monotone_in_radius():
    rng = np.random.default_rng(42)
    m = WeightedMeasure(HL, Monomial(1.0, 2.0))
    for _ in range(25):
        c = float(rng.uniform(0.1, 20.0))
        r1, r2 = sorted(rng.uniform(0.01, 10.0, size=2))
        assert ball_mass(m, Ball(c, float(r1))) <= \
            ball_mass(m, Ball(c, float(r2))) + 1e-12


def test_quadrature_path_matches_closed_form():
    exact = WeightedMeasure(HL, Monomial(1.0, 2.0))
    quad = WeightedMeasure(HL, lambda r: r ** 2)
    for ball in (Ball(1.0, 0.5), Ball(3.0, 2.5), Ball(0.2, 0.2)):
        a = ball_mass(exact, ball)
        b = ball_mass(quad, ball)
        assert b == pytest.approx(a, rel=1e-8)


def test_half_space_ball_mass():
    hs = ModelSpace.half_space(2)
    lebesgue = WeightedMeasure(hs)
    # disk of radius 1 fully inside the upper half-plane
    assert lebesgue.mass(Ball((0.0, 3.0), 1.0)) == pytest.approx(math.pi, rel=1e-8)
    # x_n^2 density, small ball far from the wall: density nearly constant
    nu = HarmonicProfile.half_space_normal(2).weighted_measure(2.0)
    got = nu.mass(Ball((0.0, 10.0), 0.1))
    assert got == pytest.approx(math.pi * 0.01 * 100.0, rel=1e-3)


def test_doubling_lebesgue_half_line():
    m = WeightedMeasure(HL)
    interior = doubling_constant(m, [5.0], [1.0])
    assert interior == pytest.approx(2.0, abs=1e-12)
    mixed = doubling_constant(m, [0.5, 1.0, 5.0], [0.25, 1.0, 4.0])
    assert mixed <= 2.0 + 1e-12


def test_doubling_square_density_exact():
    m = WeightedMeasure(HL, Monomial(1.0, 2.0))
    # B(1,1) clips to (0,2), B(1,2) to (0,3): 9 / (8/3)
    assert doubling_constant(m, [1.0], [1.0]) == pytest.approx(27.0 / 8.0, rel=1e-12)


def test_doubling_far_from_boundary_is_two():
    m = WeightedMeasure(HL, Monomial(1.0, 2.0))
    assert doubling_constant(m, [10.0], [0.1]) == pytest.approx(2.0, rel=0.05)


def test_doubling_of_weighted_measures_bounded():
    # nu = h^2 dmu stays doubling on every model, bound 2^(n+2)
    cases = [
        (HarmonicProfile.identity(), 1, [0.25, 1.0, 4.0], [0.25, 1.0, 4.0]),
        (HarmonicProfile.exterior_power(3), 3, [1.5, 2.0, 8.0], [0.25, 1.0, 4.0]),
        (HarmonicProfile.bessel_exterior(2.0), 3, [1.5, 2.0, 8.0], [0.25, 1.0, 4.0]),
        (HarmonicProfile.half_space_normal(2), 2,
         [(0.0, 0.5), (0.0, 2.0), (0.0, 8.0)], [0.25, 1.0, 4.0]),
    ]
    for profile, n, centers, radii in cases:
        nu = profile.weighted_measure(2.0)
        worst = doubling_constant(nu, centers, radii)
        assert worst <= 2.0 ** (n + 2) * (1 + 1e-6), profile.kind


def test_doubling_divergent_mass_raises():
    m = WeightedMeasure(HL, Monomial(1.0, -1.5))
    with pytest.raises(NonFiniteMass):
        doubling_constant(m, [0.5], [1.0])


def test_ball_center_outside_domain():
    m = WeightedMeasure(HL)
    with pytest.raises(OutsideDomain):
        m.mass(Ball(-1.0, 0.5))


def test_distance_to_boundary():
    assert distance_to_boundary(ModelSpace.half_space(2), (3.0, 0.5)) == 0.5
    assert distance_to_boundary(ModelSpace.exterior_ball(3), 2.0) == 1.0
    assert distance_to_boundary(HL, 0.25) == 0.25


def test_model_space_json_round_trip():
    for space in (HL, ModelSpace.half_space(3), ModelSpace.exterior_ball(2),
                  ModelSpace.inverse_square(3, 2.0), ModelSpace.exterior_bessel(2.0)):
        assert ModelSpace.from_json(space.to_json()) == space
