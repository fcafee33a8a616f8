"""Randomized identities over generated differential polynomials."""

from functools import reduce

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from fracw.brst import BrstAlgebra
from fracw.diffalg import DiffAlgebra, homotopy_density, is_total_derivative, variational_derivative
from fracw.hamflow import kdv_presentations
from fracw.liealg import make_sl
from fracw.pva import (check_jacobi, check_sesquilinearity, check_skewsymmetry, format_lambda,
                       master_bracket, parity_split, parse_lambda)

FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
SLOW = settings(max_examples=12, deadline=None, suppress_health_check=[HealthCheck.too_slow])

UV = DiffAlgebra(["u", "v"], ["c"])
VIR, _ = kdv_presentations("c")
HKDV, KKDV = kdv_presentations(3)
BRST = BrstAlgebra(make_sl(2), "k")


def polys(alg, names, max_order=2, max_terms=3, max_deg=3, with_params=True):
    factor = st.tuples(st.sampled_from(names), st.integers(0, max_order))
    coef = st.fractions(min_value=-3, max_value=3, max_denominator=4)
    params = st.sampled_from(alg.params) if (with_params and alg.params) else st.none()

    def build(terms):
        out = alg.zero()
        for c, fs, par in terms:
            mono = reduce(lambda x, y: x * y, (alg.var(g, n) for g, n in fs), alg.one())
            if par is not None:
                mono = mono * alg.var(par)
            out = out + mono.scale(c)
        return out

    term = st.tuples(coef, st.lists(factor, min_size=1, max_size=max_deg), st.one_of(st.none(), params))
    return st.lists(term, min_size=1, max_size=max_terms).map(build)


uv = polys(UV, ["u", "v"])
vir = polys(VIR.alg, ["u"], max_deg=2)

def _homogeneous(parity):
    def pick(p):
        return parity_split(p).get(parity, p.alg.zero())
    return pick


brst = st.integers(0, 1).flatmap(lambda par: polys(BRST.alg, list(BRST.alg.generators), max_order=1, max_terms=2,
                                                   max_deg=2).map(_homogeneous(par)))


# -------------------------------------------------------- variational calculus

@FAST
@given(uv)
def test_euler_operator_kills_total_derivatives(p):
    dp = p.derivative()
    assert all(variational_derivative(dp, g).is_zero() for g in ("u", "v"))


@FAST
@given(uv)
def test_total_derivative_witness(p):
    ok, w = is_total_derivative(p.derivative())
    assert ok
    assert w.derivative() == p.derivative()


@FAST
@given(uv)
def test_nonzero_gradient_is_not_exact(p):
    ok, _ = is_total_derivative(p)
    grads = [variational_derivative(p, g) for g in ("u", "v")]
    if any(grads):
        assert not ok


@FAST
@given(uv)
def test_homotopy_recovers_gradient(p):
    grads = {g: variational_derivative(p, g) for g in ("u", "v")}
    if not any(grads.values()):
        return
    h = homotopy_density(grads)
    assert {g: variational_derivative(h, g) for g in grads} == grads


@FAST
@given(uv)
def test_text_round_trip(p):
    assert UV.parse(str(p)) == p


# ------------------------------------------------------------ lambda brackets

@FAST
@given(vir, vir)
def test_lambda_text_round_trip(a, b):
    lp = master_bracket(VIR, a, b)
    assert parse_lambda(VIR.alg, format_lambda(lp)) == lp


@FAST
@given(vir, vir)
def test_virasoro_sesquilinear_and_skew(a, b):
    assert check_sesquilinearity(VIR, a, b).passed
    assert check_skewsymmetry(VIR, a, b).passed


@FAST
@given(vir, vir, vir)
def test_left_leibniz(a, b, c):
    lhs = master_bracket(VIR, a, b * c)
    rhs = master_bracket(VIR, a, b).rmul(c) + master_bracket(VIR, a, c).rmul(b)
    assert lhs == rhs


@SLOW
@given(polys(VIR.alg, ["u"], max_order=1, max_terms=2, max_deg=2),
       polys(VIR.alg, ["u"], max_order=1, max_terms=2, max_deg=2),
       polys(VIR.alg, ["u"], max_order=1, max_terms=2, max_deg=2))
def test_virasoro_jacobi(a, b, c):
    assert check_jacobi(VIR, a, b, c).passed


@FAST
@given(polys(HKDV.alg, ["u"], max_deg=2), polys(HKDV.alg, ["u"], max_deg=2))
def test_kdv_pencil_skew(a, b):
    pencil = HKDV.scaled_sum(KKDV)
    assert check_skewsymmetry(pencil, a.embed(pencil.alg), b.embed(pencil.alg)).passed


@SLOW
@given(brst, brst)
def test_super_sesquilinear_and_skew(a, b):
    assert check_sesquilinearity(BRST.P, a, b).passed
    assert check_skewsymmetry(BRST.P, a, b).passed


@SLOW
@given(brst, brst, brst)
def test_super_jacobi(a, b, c):
    assert check_jacobi(BRST.P, a, b, c).passed


def test_broken_bracket_is_caught():
    # a deliberately non-skew table must not pass the random check
    from fracw.pva import BracketPresentation
    P = BracketPresentation(UV, {("u", "v"): parse_lambda(UV, "u"), ("v", "u"): parse_lambda(UV, "u")})
    assert not check_skewsymmetry(P, UV.var("u"), UV.var("v")).passed
