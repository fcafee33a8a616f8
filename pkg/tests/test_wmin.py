import random

import pytest

from fracw.liealg import make_sl
from fracw.pva import master_bracket
from fracw.wmin import (EtaGenerators, LoopPoisson, binomial_identity_residual, frame_duals, full_frame,
                        invert_triangular, sl2_bracket_tables, sl2_generators, sln_fast_generators)

from conftest import ds_cached, w_cached


@pytest.mark.parametrize("m", [1, 2])
def test_sl2_closed_form_matches_engine(m):
    ds = ds_cached(2, "principal", m, "k")
    assert sl2_generators(ds) == ds.extract_generators()


@pytest.mark.parametrize("m", [1, 2])
def test_sl2_closed_tables_match_engine(m):
    W = w_cached(2, "principal", m, "k")
    C1, C2 = sl2_bracket_tables(W)
    E1, E2 = W.presentations()
    for a in W.alg.generators:
        for b in W.alg.generators:
            assert C1.stored(a, b) == E1.stored(a, b), (a, b)
            assert C2.stored(a, b) == E2.stored(a, b), (a, b)


@pytest.mark.parametrize("n,m", [(3, 1), (3, 2), (4, 1)])
def test_fast_gauge_path(n, m):
    ds = ds_cached(n, "minimal", m, "k")
    fast, _ = sln_fast_generators(ds)
    slow = ds.extract_generators()
    assert all(fast[nm] == slow[nm] for nm in slow)


def test_fast_path_needs_corner_nilpotent():
    ds = ds_cached(3, "principal", 1, "k")
    with pytest.raises(ValueError):
        sln_fast_generators(ds)


def test_full_frame_pairs():
    lie = make_sl(3, "minimal")
    for i, (z, _) in enumerate(full_frame(lie)):
        for j, (_, zs) in enumerate(full_frame(lie)):
            assert lie.bracket(z, zs) == (lie.e if i == j else lie.zero())


@pytest.fixture(scope="module")
def eta3():
    ds = ds_cached(3, "minimal", 1, "k")
    return ds, EtaGenerators(ds)


def test_eta_gauge_invariant(eta3):
    ds, E = eta3
    gens = E.generators()
    assert len(gens) == 12
    for nm, g in gens.items():
        assert ds.check_gauge_invariant(g)[0], nm


def test_eta_restated_form(eta3):
    ds, E = eta3
    gens = E.generators()
    for info in ds.generator_infos():
        assert E.restated(info.vec, info.zdeg) == gens["eta_" + info.label]


def test_eta_bracket_rules(eta3):
    ds, E = eta3
    gens = E.generators()
    P1, P2 = ds.fractional_bracket_presentations()
    r1, r2 = E.bracket_rules()
    for P, rules in ((P1, r1), (P2, r2)):
        for (a, b), want in rules.items():
            assert master_bracket(P, gens[a], gens[b]) == want, (a, b)


def test_eta_at_s0_is_gamma():
    ds = ds_cached(2, "principal", 1, 1)
    E = EtaGenerators(ds)
    gam = ds.extract_generators()
    eta = E.generators()
    for nm, g in gam.items():
        assert eta["eta_" + nm[2:]] == g


def test_triangular_inverse(eta3):
    ds, E = eta3
    W = ds.w_algebra()
    new = {nm: W.to_w(g) for nm, g in
           ((i.name, E.generators()["eta_" + i.label]) for i in W.infos)}
    names = {i.name: "eta_" + i.label for i in W.infos}
    alg, inv = invert_triangular(W, new, names)
    for nm, poly in new.items():
        back = poly.subs(inv, alg)
        assert back == alg.var(names[nm])


def test_binomial_identity_untruncated():
    lie = make_sl(3, "minimal")
    P = LoopPoisson(lie, 4)
    names = [n for n in P.alg.generators if not n.endswith(("z2", "z3", "z4"))]
    rng = random.Random(2)
    zs = frame_duals(lie)

    def rnd():
        p = P.alg.zero()
        for _ in range(2):
            q = P.alg.const(rng.randint(-3, 3))
            for _ in range(rng.randint(1, 2)):
                q = q * P.alg.var(rng.choice(names))
            p = p + q
        return p

    for _ in range(6):
        v, w = rnd(), rnd()
        for r in range(4):
            assert not binomial_identity_residual(P, v, w, r, zs)
            assert not binomial_identity_residual(P, v, w, r, zs, leibniz=True)
