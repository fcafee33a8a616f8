from fractions import Fraction as F

import pytest

from fracw.brst import (AffineQuotient, BrstAlgebra, brst_checks, closed_lift, current_J, d0, d_on_J_formula,
                        energy_momentum, exact_preimage, generator_map_i, monomials, twist_check,
                        virasoro_check)
from fracw.liealg import make_sl
from fracw.pva import LambdaPoly, master_bracket


@pytest.fixture(scope="module")
def B2():
    return BrstAlgebra(make_sl(2), "k")


@pytest.fixture(scope="module")
def B3():
    return BrstAlgebra(make_sl(3, "minimal"), "k")


def test_sl2_generators(B2):
    assert B2.alg.generators == ("e", "x", "f", "phi_e", "psi_e")


def test_sl3_neutral_sector(B3):
    assert [g for g in B3.alg.generators if g.startswith("Phi_")] == ["Phi_e12", "Phi_e23"]


def test_charged_pairing(B2):
    alg = B2.alg
    assert B2.P.stored("phi_e", "psi_e") == LambdaPoly.const(alg.one())


def test_sl2_d(B2):
    assert B2.d == B2.alg.parse("psi_e*(e + 1)")
    assert B2.d.parity() == 1


@pytest.mark.parametrize("which", ["B2", "B3"])
def test_structural_identities(which, request):
    B = request.getfixturevalue(which)
    bad = [(r.check, r.arguments) for r in brst_checks(B) if not r.passed]
    assert bad == []


def test_d0_of_one(B3):
    assert d0(B3, B3.alg.one()).is_zero()


def test_J_on_fermions(B3):
    lie = B3.lie
    alg = B3.alg
    for i in range(lie.dim):
        a = lie.basis_vec(i)
        J = current_J(B3, a)
        for n in B3.n_idx:
            got = master_bracket(B3.P, J, alg.var("phi_" + lie.labels[n]))
            assert got == LambdaPoly.const(B3.phi(lie.bracket(a, lie.basis_vec(n))))
        for n in B3.half_idx:
            assert not master_bracket(B3.P, J, alg.var("Phi_" + lie.labels[n]))


def test_J_brackets_same_side(B2):
    lie = B2.lie
    h, f = lie.h, lie.f
    got = master_bracket(B2.P, current_J(B2, h), current_J(B2, f))
    assert got == LambdaPoly.const(current_J(B2, f).scale(-2))


def test_d_on_J_matches_closed_form(B3):
    lie = B3.lie
    for i in range(lie.dim):
        v = lie.basis_vec(i)
        assert master_bracket(B3.P, B3.d, current_J(B3, v)) == d_on_J_formula(B3, v)


def test_odd_neutral_fermions_break_homogeneity():
    B = BrstAlgebra(make_sl(3, "minimal"), "k", neutral_parity=1)
    with pytest.raises(ValueError):
        B.d.parity()


def test_energy_momentum(B2):
    L = energy_momentum(B2, scaled=True)
    assert L.parity() == 0
    assert L == B2.alg.parse("k*x' + e*f + x^2 + k*phi_e'*psi_e")


def test_energy_momentum_needs_nonzero_k():
    with pytest.raises(ValueError):
        energy_momentum(BrstAlgebra(make_sl(2), 0))


@pytest.mark.parametrize("k", ["k", 1, F(7, 3)])
@pytest.mark.parametrize("n,nil", [(2, "principal"), (3, "minimal")])
def test_virasoro(k, n, nil):
    assert virasoro_check(BrstAlgebra(make_sl(n, nil), k)).passed


def test_exact_preimage_solves(B3):
    ms = monomials(B3, 2, charge=-1, degree=3)
    A = ms[0] + ms[3].scale(2) - ms[7]
    T = d0(B3, A)
    pre = exact_preimage(B3, T, 2)
    assert pre is not None and d0(B3, pre) == T


def test_non_exact_detected(B3):
    # d0(x psi) != 0, so it cannot be exact
    target = B3.alg.parse("x*psi_e13")
    assert exact_preimage(B3, target, 1) is None


def test_monomial_weights(B3):
    for m in monomials(B3, F(3, 2), degree=3):
        (mono,) = m.terms
        assert B3.mono_weight(mono) == F(3, 2)


def test_generator_map_sl2(B2):
    R, A = closed_lift(B2, "f")
    assert A == R.alg.parse("J_f - J_x^2 - k*J_x'")
    assert d0(B2, R.to_complex(A)).is_zero()
    Q = AffineQuotient(B2.lie, "k")
    img = generator_map_i(R, Q, A)
    assert img == Q.alg.parse("f - x^2 - k*x'")
    assert Q.check_gauge_invariant(img)[0]


def test_generator_map_kills_psi(B2):
    from fracw.brst import ReducedAlgebra
    R = ReducedAlgebra(B2)
    Q = AffineQuotient(B2.lie, "k")
    assert generator_map_i(R, Q, R.alg.parse("psi_e*J_x + psi_e'")).is_zero()
    assert generator_map_i(R, Q, R.alg.var("J_f")) == Q.alg.var("f")


def test_quotient_sign_matters(B2):
    R, A = closed_lift(B2, "f")
    Q = AffineQuotient(B2.lie, "k", sign=1)
    assert not Q.check_gauge_invariant(generator_map_i(R, Q, A))[0]


@pytest.mark.parametrize("label", ["y", "e21", "e32", "e31"])
def test_generator_map_sl3_minimal(B3, label):
    R, A = closed_lift(B3, label)
    assert A is not None
    Q = AffineQuotient(B3.lie, "k")
    assert Q.check_gauge_invariant(generator_map_i(R, Q, A))[0]


def test_twist_isomorphism():
    lie = make_sl(3, "minimal")
    assert twist_check(lie) == []
    assert twist_check(lie, literal=True) != []


def test_p_must_commute_with_n():
    lie = make_sl(3, "minimal")
    with pytest.raises(ValueError):
        BrstAlgebra(lie, "k", "c", lie.vec("x"))
