from fractions import Fraction as F

import pytest

from fracw.diffalg import is_total_derivative, total_derivative_order
from fracw.hamflow import (LocalFunctional, double_hamiltonian_check, evolution, flows, involution_check,
                           kdv_hierarchy, kdv_presentations, kernel_element, lenard_step, reduce_to_kdv,
                           variational_identity_check)

from conftest import H_Z, K_Z, LAMBDA_Z, ds_cached, loop_coefficient, sl2_hamiltonians


@pytest.fixture(scope="module")
def kdv():
    H, K = kdv_presentations("c")
    return H, K, kdv_hierarchy("c", 3)


def test_lenard_first_densities(kdv):
    H, K, hs = kdv
    alg = H.alg
    assert LocalFunctional(hs[1]) == LocalFunctional(alg.parse("1/2*u^2"))
    assert LocalFunctional(hs[2]) == LocalFunctional(alg.parse("1/2*u^3 + 1/2*c*u*u''"))


def test_lenard_recursion_holds(kdv):
    H, K, hs = kdv
    for a, b in zip(hs, hs[1:]):
        assert flows(K, b) == flows(H, a)


def test_kdv_flow(kdv):
    H, K, hs = kdv
    assert evolution(K, hs[2], H.alg.var("u")) == H.alg.parse("3*u*u' + c*u'''")


def test_lenard_numeric_c():
    H, K = kdv_presentations(F(2))
    h2 = lenard_step(lenard_step(H.alg.var("u"), H, K), H, K)
    assert is_total_derivative(h2 - H.alg.parse("1/2*u^3 + u*u''"))[0]


def test_involution_fails_for_non_conserved(kdv):
    H, K, hs = kdv
    u = H.alg.var("u")
    assert not involution_check(u * u * u.derivative(2), hs[2], H).passed


# ----------------------------------------------------------- sl2, m = 1

@pytest.fixture(scope="module")
def sl2_hams():
    return sl2_hamiltonians(4)


def test_hamiltonian_is_pairing_with_kernel_element(sl2_hams):
    Hs, D = sl2_hams
    W = D.alg
    assert Hs[1] == W.parse("1/2*g_x^2 + (g_e - g_fz)*(1/16*g_fz^2 - 1/16*g_e^2 + 1/4*g_f)")


def test_diagonalization_low_levels(sl2_hams):
    _, D = sl2_hams
    lie, W = D.lie, D.alg
    assert loop_coefficient(lie, D.h, LAMBDA_Z(1)) == W.parse("-1/2*(g_fz + g_e)")
    assert loop_coefficient(lie, D.S, H_Z(1)) == W.parse("1/4*(g_fz - g_e)")
    assert loop_coefficient(lie, D.h, LAMBDA_Z(1), level=0) == "zero"
    assert loop_coefficient(lie, D.S, K_Z(1)) == W.parse("-1/2*g_x")


def test_diagonalization_h1_value(sl2_hams):
    # hand computation: the quadratic part carries 1/8
    _, D = sl2_hams
    got = loop_coefficient(D.lie, D.h, LAMBDA_Z(2))
    assert got == D.alg.parse("-1/2*g_f - 1/8*(g_fz - g_e)^2")


def test_diagonalization_S4_value(sl2_hams):
    _, D = sl2_hams
    got = loop_coefficient(D.lie, D.S, H_Z(2))
    assert got == D.alg.parse("1/4*g_f - 1/8*g_e^2 + 1/8*g_fz^2")


def test_double_hamiltonian(sl2_hams, sl2_W1):
    Hs, _ = sl2_hams
    P1, P2 = sl2_W1.presentations()
    for n in range(3):
        assert double_hamiltonian_check(Hs[n + 1], Hs[n], P1, P2).passed


def test_involution_both_structures(sl2_hams, sl2_W1):
    Hs, _ = sl2_hams
    P1, P2 = sl2_W1.presentations()
    for i in range(3):
        assert involution_check(Hs[1], Hs[i], P1).passed
        assert involution_check(Hs[0], Hs[i], P2).passed


def test_hamiltonian_orders(sl2_hams):
    Hs, _ = sl2_hams
    assert [total_derivative_order(h) for h in Hs[:3]] == [0, 0, 1]


@pytest.mark.parametrize("n", [0, 1])
def test_variational_identity(n):
    ds = ds_cached(2, "principal", 1, "k")
    rep, H = variational_identity_check(ds, kernel_element(ds.lie, 1, n))
    assert rep.passed


def test_reduction_to_kdv(sl2_hams, sl2_W1):
    Hs, _ = sl2_hams
    P1, P2 = sl2_W1.presentations()
    eq, Fq, rep = reduce_to_kdv(sl2_W1, Hs[0], [P2, P1])
    assert rep.passed
    assert eq == eq.alg.parse("1/2*k*e' + 3*e*et")
    A = sl2_W1.alg
    assert Fq["g_x"] == A.parse("g_e^2 - 1/2*g_f")
