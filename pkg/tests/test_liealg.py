from fractions import Fraction as F

import pytest

from fracw.liealg import LoopWindow, loop_bracket, loop_form, make_sl


@pytest.mark.parametrize("n,nil", [(2, "principal"), (3, "principal"), (3, "minimal"), (4, "minimal")])
def test_triple_and_form(n, nil):
    lie = make_sl(n, nil)
    assert lie.dim == n * n - 1
    assert lie.form(lie.e, lie.f) == 1
    assert lie.form(lie.h, lie.h) == 2
    # invariance ([a,b],c) = (a,[b,c]) on all basis triples
    for i in range(lie.dim):
        for j in range(lie.dim):
            for k in range(lie.dim):
                a, b, c = lie.basis_vec(i), lie.basis_vec(j), lie.basis_vec(k)
                assert lie.form(lie.bracket(a, b), c) == lie.form(a, lie.bracket(b, c))


def test_minimal_grading_dimensions():
    lie = make_sl(3, "minimal")
    dims = {g: len(ix) for g, ix in lie.grading_decomposition().items()}
    assert dims == {F(-1): 1, F(-1, 2): 2, F(0): 2, F(1, 2): 2, F(1): 1}
    assert len(lie.g_f_basis()) == 4


def test_principal_sl3_centralizer():
    lie = make_sl(3)
    assert len(lie.g_f_basis()) == 2
    assert lie.d == 2


def test_dual_basis():
    lie = make_sl(3, "minimal")
    dual = lie.dual_basis()
    for i in range(lie.dim):
        for j in range(lie.dim):
            assert lie.form(lie.basis_vec(i), dual[j]) == (1 if i == j else 0)


def test_jacobi_structure_constants():
    lie = make_sl(3)
    for i in range(lie.dim):
        for j in range(lie.dim):
            for k in range(lie.dim):
                a, b, c = lie.basis_vec(i), lie.basis_vec(j), lie.basis_vec(k)
                s = [x + y + z for x, y, z in zip(lie.bracket(a, lie.bracket(b, c)),
                                                  lie.bracket(b, lie.bracket(c, a)),
                                                  lie.bracket(c, lie.bracket(a, b)))]
                assert not any(s)


def test_window_sl2():
    w = LoopWindow(make_sl(2), 1)
    assert list(w.names) == ["e", "x", "f", "xz", "fz"]
    assert w.N == 3


def test_loop_bracket_and_form():
    lie = make_sl(2)
    e, f = lie.index["e"], lie.index["f"]
    br = loop_bracket(lie, {(e, 1): F(1)}, {(f, 2): F(1)})
    assert {k: v for k, v in br.items() if v} == {(lie.index["x"], 3): F(2)}
    assert loop_form(lie, {(e, 1): F(1)}, {(f, -1): F(1)}) == 1
    assert not loop_form(lie, {(e, 1): F(1)}, {(f, 0): F(1)})


def test_unknown_nilpotent():
    with pytest.raises(ValueError):
        make_sl(3, "subregular")
