import math
from fractions import Fraction as F

import numpy as np
import pytest

from hardylab import (Atom, Ball, ConfigError, GridFunction, InvalidAtom,
                      NotDecomposable, UnsupportedGeometry, decompose_beta,
                      decompose_classical, decompose_local, moment,
                      random_beta_atom, validate)
from hardylab.atoms import _LADDER_RATIO, atomic_norm_upper


# -- validation ----------------------------------------------------------------

def test_validate_linear_example(identity):
    # a = x on (0,1) minus x/7 on (1,2): weighted cancellation is exact
    # but the size bound misses by a few percent
    pieces = [(F(0), F(1), (F(0), F(1))), (F(1), F(2), (F(0), F(-1, 7)))]
    a = Atom.beta(pieces, Ball(1.0, 1.0))
    rep = validate(a, identity)
    assert rep.cancellation_ok and rep.cancellation_abs == 0.0
    assert not rep.size_ok and not rep.ok
    # size^2 = int x dx on (0,1) + int x/49 dx on (1,2); bound = mass^{-1/2}
    assert rep.size == pytest.approx(math.sqrt(0.5 + 3.0 / 98.0), rel=1e-12)
    assert rep.size_bound == pytest.approx(math.sqrt(0.5), rel=1e-12)
    fixed = a.scale(F(9, 10))
    assert validate(fixed, identity).ok


def test_validate_zero_atom_vacuous(identity):
    z = Atom.beta([], Ball(1.5, 0.5))
    rep = validate(z, identity)
    assert rep.ok and z.is_zero()
    assert rep.size_ratio == 0.0 and rep.l1_mass == 0.0


def test_validate_alpha2_structural(identity):
    rep = validate(Atom.alpha2(-2), identity)
    assert rep.ok and rep.flavor == "local_alpha2" and rep.exact
    fake = Atom("local_alpha2", Ball(0.375, 0.125),
                [(F(1, 4), F(1, 2), F(5))], m=-2)
    assert not validate(fake, identity).ok


def test_validate_classical_haar_ratio_one(identity):
    a = Atom.classical([(F(1), F(3, 2), F(1)), (F(3, 2), F(2), F(-1))],
                       Ball(1.5, 0.5))
    rep = validate(a, identity)
    assert rep.ok and rep.size_ratio == 1.0 and rep.exact


def test_validate_flags_support_outside_ball(identity):
    a = Atom.classical([(F(1), F(3), F(1)), (F(3), F(5), F(-1))],
                       Ball(2.0, 1.0))
    rep = validate(a, identity)
    assert not rep.support_ok and not rep.ok
    assert any("support" in msg for msg in rep.failures)


# -- dyadic ladder -------------------------------------------------------------

def test_decompose_local_exact_identities(identity):
    dec = decompose_local(0, K=40)
    assert len(dec.atoms) == 41
    assert dec.sum_abs() == 2 - F(1, 2 ** 40)
    assert dec.residual == F(1, 2 ** 40)
    assert dec.atoms[-1].flavor == "local_alpha2" and dec.atoms[-1].m == 40
    # exact reconstruction of the unit indicator atom on (1, 2)
    for y, want in [(F(3, 2), F(1)), (F(5, 4), F(1)), (F(5, 2), F(0)),
                    (F(2 ** 10 + 1), F(0)), (F(1, 2), F(0))]:
        assert dec.value_at(y) == want
    for atom in dec.atoms[:5]:
        assert moment(atom, 1) == 0
    assert moment(dec.atoms[-1], 1) == 3 * F(2) ** 39


def test_decompose_local_block_normalization(identity):
    dec = decompose_local(0, K=3)
    assert dec.normalization == pytest.approx(_LADDER_RATIO, abs=0.0)
    for atom in dec.atoms[:-1]:
        rep = validate(atom, identity)
        assert rep.size_ratio == pytest.approx(_LADDER_RATIO, abs=1e-12)
        assert not rep.ok
        scaled = atom.scale(F(1, 3))
        assert validate(scaled, identity).ok


def test_decompose_local_negative_m(identity):
    dec = decompose_local(-3, K=10)
    assert dec.sum_abs() == 2 - F(1, 2 ** 10)
    assert dec.value_at(F(3, 16)) == F(8)
    assert dec.value_at(F(3, 8)) == F(0)
    total = sum(lam * moment(a, 1) for lam, a in
                zip(dec.coefficients, dec.atoms))
    assert total == moment(Atom.alpha2(-3), 1) == F(3, 16)


def test_decompose_local_rejects_bad_depth():
    with pytest.raises(ConfigError):
        decompose_local(0, K=0)


# -- classical to weighted -----------------------------------------------------

def test_decompose_classical_haar_quarter(identity):
    a = Atom.classical([(F(1), F(9, 8), F(4)), (F(9, 8), F(5, 4), F(-4))],
                       Ball(1.125, 0.125))
    assert validate(a, identity).size_ratio == 1.0
    dec = decompose_classical(a)
    assert dec.coefficients == [F(1, 4), F(1, 2), F(1), F(2), F(-1, 24)]
    assert dec.taus == [F(-2, 9), F(-8, 57), F(-8, 105), F(-1, 24)]
    assert dec.chain == [(F(1), F(5, 4)), (F(1), F(11, 8)),
                         (F(1), F(13, 8)), (F(1), F(2))]
    assert [at.flavor for at in dec.atoms] == ["mu_h_beta"] * 4 + ["local_alpha2"]
    assert dec.sum_abs() == F(91, 24)
    assert dec.residual == 0
    assert dec.normalization == pytest.approx(4.026822979776882, rel=1e-12)
    # tau magnitudes decay along the chain
    mags = [abs(t) for t in dec.taus]
    assert all(m1 > m2 for m1, m2 in zip(mags, mags[1:]))
    # exact pointwise reconstruction, inside and outside the support
    for y in (F(17, 16), F(7, 6), F(4, 3), F(3, 2), F(15, 8), F(3)):
        assert dec.value_at(y) == a.value_at(y)
    # emitted blocks carry exact weighted cancellation; size needs the
    # reported normalization
    for atom in dec.atoms[:-1]:
        rep = validate(atom, identity)
        assert rep.cancellation_abs == 0.0
        scaled = atom.scale(F(1, 5))
        assert validate(scaled, identity).ok


def test_decompose_classical_degenerate_chain(identity):
    a = Atom.classical([(F(1), F(3, 2), F(1)), (F(3, 2), F(2), F(-1))],
                       Ball(1.5, 0.5))
    dec = decompose_classical(a)
    assert dec.coefficients == [F(1), F(-1, 6)]
    assert dec.taus == [F(-1, 6)]
    assert [at.flavor for at in dec.atoms] == ["mu_h_beta", "local_alpha2"]
    assert dec.normalization == pytest.approx(1.0618349312352842, rel=1e-12)
    assert dec.value_at(F(5, 4)) == F(1)


def test_decompose_classical_rejects_oversized(identity):
    a = Atom.classical([(F(1), F(3, 2), F(7)), (F(3, 2), F(2), F(-7))],
                       Ball(1.5, 0.5))
    with pytest.raises(InvalidAtom):
        decompose_classical(a)


def test_decompose_classical_unsupported_geometry():
    wide = Atom.classical([(F(2), F(5), F(3, 1000)), (F(5), F(9), F(-9, 4000))],
                          Ball(5.5, 3.5))
    with pytest.raises(UnsupportedGeometry):
        decompose_classical(wide)
    at_origin = Atom.classical([(F(0), F(1, 2), F(1)), (F(1, 2), F(1), F(-1))],
                               Ball(0.5, 0.5))
    with pytest.raises(UnsupportedGeometry):
        decompose_classical(at_origin)


# -- weighted to classical -----------------------------------------------------

def test_decompose_beta_ladder_example(identity):
    cf = 0.5 / math.sqrt(math.log(2.0) + 0.36 * math.log(1.5)) * (1 - 1e-12)
    c = F(cf)
    b = Atom.beta([(F(1), F(2), c), (F(2), F(3), -c * F(3, 5))], Ball(2.0, 1.0))
    rep = validate(b, identity)
    assert rep.ok and rep.size_ratio == pytest.approx(1.0, abs=1e-11)
    dec = decompose_beta(b)
    assert [at.flavor for at in dec.atoms] == \
        ["classical_alpha1", "classical_alpha1", "local_alpha2", "local_alpha2"]
    assert dec.residual == 0
    assert dec.sum_abs() == pytest.approx(1.2460496578165536, rel=1e-12)
    # classical atoms come out valid without renormalization
    for atom in dec.atoms:
        assert validate(atom, identity).ok
    ys = np.linspace(0.5, 4.5, 1001)
    assert np.max(np.abs(dec.reconstruct(ys) - b(ys))) < 1e-15


def test_decompose_beta_emits_itself(identity):
    c = F(1, 10)
    b = Atom.beta([(F(1), F(4, 3), c), (F(4, 3), F(5, 3), -2 * c),
                   (F(5, 3), F(2), c)], Ball(1.5, 0.5))
    dec = decompose_beta(b)
    assert dec.coefficients == [F(1)]
    assert len(dec.atoms) == 1
    assert dec.atoms[0].flavor == "classical_alpha1"
    assert dec.atoms[0].pieces == b.pieces


def test_decompose_beta_zero(identity):
    dec = decompose_beta(Atom.beta([], Ball(1.5, 0.5)))
    assert dec.coefficients == [] and dec.atoms == []
    assert dec.residual == 0


def test_decompose_roundtrip_composite(identity):
    ladder = decompose_local(0, K=6)
    assert F(5, 2) >= F(_LADDER_RATIO)
    blk = ladder.atoms[2].scale(F(2, 5))
    assert validate(blk, identity).ok
    dec = decompose_beta(blk)
    assert [at.flavor for at in dec.atoms] == \
        ["classical_alpha1", "local_alpha2", "local_alpha2"]
    ys = np.linspace(3.5, 17.0, 801)
    assert np.max(np.abs(dec.reconstruct(ys) - blk(ys))) < 1e-15
    # float pieces follow the same route to matching values
    fblk = Atom.beta([(float(lo), float(hi), float(v))
                      for lo, hi, v in blk.pieces], blk.ball)
    fdec = decompose_beta(fblk)
    assert len(fdec.atoms) == len(dec.atoms)
    assert np.max(np.abs(fdec.reconstruct(ys) - dec.reconstruct(ys))) < 1e-12


# -- moments -------------------------------------------------------------------

@pytest.mark.parametrize("m", [0, 5, -7])
def test_moment_of_unit_indicator_atom(m):
    assert moment(Atom.alpha2(m), 1) == 3 * F(2) ** (m - 1)


def test_moment_exact_transport():
    dec = decompose_local(0, K=12)
    total = sum(lam * moment(a, 1) for lam, a in
                zip(dec.coefficients, dec.atoms))
    assert total == moment(Atom.alpha2(0), 1) == F(3, 2)
    # the tail atom alone carries the full first moment
    assert dec.coefficients[-1] * moment(dec.atoms[-1], 1) == F(3, 2)


def test_moment_zeroth_power():
    a = Atom.classical([(F(1), F(3, 2), F(2)), (F(3, 2), F(2), F(-2))],
                       Ball(1.5, 0.5))
    assert moment(a, 0) == 0
    assert moment(a, 1) == -F(1, 2)


# -- greedy norm bound ---------------------------------------------------------

def test_atomic_norm_single_atom(identity):
    rng = np.random.default_rng(7)
    atom = random_beta_atom(rng)
    assert validate(atom, identity).ok
    val = atomic_norm_upper(atom.to_grid(), identity)
    assert val == pytest.approx(1.0, abs=1e-9)
    assert val <= 1.0 + 1e-9


def test_atomic_norm_triangle_on_shared_ball(identity):
    rng = np.random.default_rng(11)
    ball = Ball(3.0, 0.75)
    b1 = random_beta_atom(rng, ball=ball)
    b2 = random_beta_atom(rng, ball=ball)
    g1, g2 = b1.to_grid(), b2.to_grid()
    combo = GridFunction(g1.xs, 3.0 * g1.values - 2.0 * g2.values, ball)
    val = atomic_norm_upper(combo, identity)
    assert 0.0 < val <= 5.0 * (1 + 1e-9)
    assert val == pytest.approx(2.879104687549508, rel=1e-10)


def test_atomic_norm_dyadic_fast_path(identity):
    f = GridFunction(np.array([1.0, 2.0]), np.array([1.0, 1.0]), Ball(1.5, 0.5))
    assert atomic_norm_upper(f, identity) == 2.0 - 2.0 ** -40


def test_atomic_norm_shallow_ladder_fails(identity):
    f = GridFunction(np.array([1.0, 2.0]), np.array([1.0, 1.0]), Ball(1.5, 0.5))
    with pytest.raises(NotDecomposable):
        atomic_norm_upper(f, identity, K=5)


def test_atomic_norm_zero(identity):
    f = GridFunction(np.array([1.0, 2.0]), np.zeros(2))
    assert atomic_norm_upper(f, identity) == 0.0


# -- serialization -------------------------------------------------------------

def test_atom_json_roundtrip():
    a = Atom.classical([(F(1), F(9, 8), F(4)), (F(9, 8), F(5, 4), F(-4))],
                       Ball(1.125, 0.125))
    obj = a.to_json()
    assert obj["flavor"] == "classical_alpha1"
    assert obj["pieces"][0]["value"] == "4"
    assert obj["pieces"][1]["from"] == "9/8"
    back = Atom.from_json(obj)
    assert back.pieces == a.pieces and back.exact
    assert back.ball.center == a.ball.center


def test_atom_json_rejects_linear_payload():
    a = Atom.beta([(F(0), F(1), (F(0), F(1)))], Ball(0.5, 0.5))
    with pytest.raises(ConfigError):
        a.to_json()


def test_atom_scale_keeps_exactness():
    a = Atom.alpha2(0)
    assert a.exact
    assert a.scale(F(1, 3)).exact
    assert not a.scale(1.0 / 3.0).exact
    assert a.scale(F(1, 3)).value_at(F(3, 2)) == F(1, 3)
