import pytest

from fracw.pva import check_all_generators, master_bracket

from conftest import ds_cached, w_cached


@pytest.mark.parametrize("m", [1, 2])
def test_sl2_generators_gauge_invariant(m):
    ds = ds_cached(2, "principal", m, "k")
    for nm, g in ds.extract_generators().items():
        assert ds.check_gauge_invariant(g)[0], nm
    assert ds.check_triangular() == []


def test_window_variable_is_not_invariant():
    ds = ds_cached(2, "principal", 1, "k")
    ok, why = ds.check_gauge_invariant(ds.V.var("x"))
    assert not ok and why[0] == "e"


def test_generator_counts():
    assert len(ds_cached(2, "principal", 1, "k").generator_infos()) == 4
    assert len(ds_cached(2, "principal", 2, "k").generator_infos()) == 7
    # dim g z^0 plus dim g_f at z^m: 8 + 4
    assert len(ds_cached(3, "minimal", 1, "k").generator_infos()) == 12


def test_slice_roundtrip(sl2_W1):
    assert sl2_W1.check_slice() == []


def test_fractional_presentations_are_pva():
    P1, P2 = ds_cached(2, "principal", 1, "k").fractional_bracket_presentations()
    assert all(r.passed for r in check_all_generators(P1, jacobi=False))
    assert all(r.passed for r in check_all_generators(P2, jacobi=False))


def test_w_brackets_close(sl2_W1):
    """Brackets of invariants are invariant again."""
    ds = sl2_W1.ds
    P1, P2 = ds.fractional_bracket_presentations()
    g = sl2_W1.gammas
    for P in (P1, P2):
        val = master_bracket(P, g["g_f"], g["g_x"])
        for c in val.coeffs.values():
            assert ds.check_gauge_invariant(c)[0]


def test_w_presentations_pass_checks():
    W = w_cached(2, "principal", 1, "k")
    for P in W.presentations():
        assert all(r.passed for r in check_all_generators(P))


def test_m_zero_rejected(sl2):
    from fracw.dsred import FractionalDS
    with pytest.raises(ValueError):
        FractionalDS(sl2, 0)
