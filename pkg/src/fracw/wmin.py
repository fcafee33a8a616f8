"""Closed-form generators and bracket tables.

* the sl2 family of generators γ and their two bracket tables;
* the sl_n gauge by a single upper-triangular group element;
* the η generators for a minimal nilpotent, from nested brackets, with the
  case rules for their two brackets.

Everything here is written from explicit formulas; the test-suite compares
it against the generic reduction in ``dsred``.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from math import factorial

from . import linalg
from .diffalg import DiffAlgebra
from .liealg import zsuffix
from .pva import BracketPresentation, LambdaPoly

__all__ = [
    "sl2_generators",
    "sl2_gamma_ext",
    "sl2_bracket_tables",
    "sln_gauge_fast_path",
    "sln_fast_generators",
    "full_frame",
    "frame_duals",
    "EtaGenerators",
    "LoopPoisson",
    "binomial_identity_residual",
    "invert_triangular",
]


# ---------------------------------------------------------------- sl2 family

def sl2_generators(ds):
    """γ table of the sl2 family at level k, in the coefficient algebra of ``ds``."""
    V, m, k = ds.V, ds.m, ds.k
    v = lambda lab, j: V.var(lab + zsuffix(j))
    xm = v("x", m)
    out = {}
    for j in range(m):
        out["g_e" + zsuffix(j)] = v("e", j)
        out["g_x" + zsuffix(j)] = v("x", j) + xm * v("e", j)
        if j == 0:
            out["g_f"] = v("f", 0) - xm * v("x", 0) * 2 - xm * xm * v("e", 0) - k * xm.derivative()
    for i in range(1, m):
        out["g_f" + zsuffix(i)] = v("f", i) - xm * v("x", i) * 2 - xm * xm * v("e", i)
    out["g_f" + zsuffix(m)] = v("f", m) - xm * xm
    return out


def sl2_gamma_ext(W, label, j):
    """γ_{a z^j} in the generators of W for a in {e, x, f}, including the constant values."""
    m = W.ds.m
    if j < 0:
        raise ValueError("negative loop degree")
    if j < m or (label == "f" and j == m):
        return W.alg.var("g_" + label + zsuffix(j))
    if (label == "e" and j == m) or (label == "f" and j == m + 1):
        return W.alg.const(-1)
    return W.alg.zero()


def _sl2_lin(W, vec, j):
    lie = W.ds.lie
    out = W.alg.zero()
    for i, c in enumerate(vec):
        if c:
            out = out + sl2_gamma_ext(W, lie.labels[i], j).scale(c)
    return out


def sl2_bracket_tables(W):
    """The two closed-form bracket tables among the sl2 γ generators.

    Entries are stored only for the orientations the rules cover; the rest
    follow by skewsymmetry inside BracketPresentation.
    """
    ds = W.ds
    lie = ds.lie
    k = W.alg.var("k") if "k" in W.alg.params else W.alg.const(Fraction(ds.k_value))
    gens = [(_base(info.label), info.zdeg, info.name) for info in W.infos]
    vec = lie.vec
    br = lambda a, b: lie.bracket(vec(a), vec(b))
    t1, t2 = {}, {}
    for (a, i, na) in gens:
        for (b, j, nb) in gens:
            # first bracket
            if a == "f" and i == 0:
                if b == "f" and j == 0:
                    t1[(na, nb)] = LambdaPoly(W.alg, {1: k.scale(-2)})
                elif b == "f":
                    t1[(na, nb)] = _lp(W, sl2_gamma_ext(W, "x", j).scale(-2))
                elif b == "x":
                    t1[(na, nb)] = _lp(W, sl2_gamma_ext(W, "e", j) - sl2_gamma_ext(W, "f", j + 1))
                else:
                    t1[(na, nb)] = _lp(W, sl2_gamma_ext(W, "x", j + 1).scale(2))
            elif not (b == "f" and j == 0):
                t1[(na, nb)] = _lp(W, -_sl2_lin(W, br(a, b), i + j + 1))
            # second bracket
            if i == 0 and j == 0:
                t2[(na, nb)] = LambdaPoly(W.alg, {0: _sl2_lin(W, br(a, b), 0),
                                                  1: k.scale(lie.form(vec(a), vec(b)))})
            elif a == "f" and i == 1:
                if b == "f" and j == 0:
                    val = LambdaPoly(W.alg, {0: sl2_gamma_ext(W, "x", 0).scale(-2), 1: -k})
                elif j == 0 and b == "x":
                    val = _lp(W, sl2_gamma_ext(W, "e", 0))
                elif j == 0 and b == "e":
                    val = _lp(W, W.alg.zero())
                elif b == "f" and j == 1:
                    val = _lp(W, W.alg.zero())
                elif b == "f":
                    val = _lp(W, sl2_gamma_ext(W, "x", j).scale(-2))
                elif b == "x":
                    val = _lp(W, sl2_gamma_ext(W, "e", j) - sl2_gamma_ext(W, "f", j + 1))
                else:
                    val = _lp(W, sl2_gamma_ext(W, "x", j + 1).scale(2))
                t2[(na, nb)] = val
            elif i >= 1 and j >= 1 and not (b == "f" and j == 1):
                t2[(na, nb)] = _lp(W, -_sl2_lin(W, br(a, b), i + j))
            elif (i == 0) != (j == 0) and not (b == "f" and j == 1) and not (a == "f" and i == 1):
                t2[(na, nb)] = _lp(W, W.alg.zero())
    return (BracketPresentation(W.alg, t1, "sl2-closed-1"),
            BracketPresentation(W.alg, t2, "sl2-closed-2"))


def _base(label):
    return label.split("z")[0]


def _lp(W, p):
    return LambdaPoly(W.alg, {0: p})


# -------------------------------------------------------- sl_n fast path

def _mat_zero(n, V):
    return [[V.zero() for _ in range(n)] for _ in range(n)]


def _mat_mul(a, b):
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            s = None
            for t in range(n):
                if a[i][t] and b[t][j]:
                    p = a[i][t] * b[t][j]
                    s = p if s is None else s + p
            row.append(s if s is not None else a[0][0].alg.zero())
        out.append(row)
    return out


def lax_matrices(ds, lax):
    """Loop element over V as {zdeg: n×n matrix of DiffPoly}."""
    lie = ds.lie
    n = lie.n
    out = {}
    for (i, j), c in lax.items():
        M = out.setdefault(j, _mat_zero(n, ds.V))
        B = lie.mats[i]
        for r in range(n):
            for s in range(n):
                if B[r][s]:
                    M[r][s] = M[r][s] + c * B[r][s]
    return out


def sln_gauge_fast_path(ds, s1n=None):
    """Gauge the universal Lax operator by the single group element
    S = I + Σ_j s_1j e_1j + Σ_i s_in e_in with s_in = -E^m_i1/E^m_n1,
    s_1j = E^m_nj/E^m_n1 and E^m_n1 = -1.

    The corner entry s_1n is not fixed by those rules; by default it is
    chosen so the z^{-m} trace-free diagonal part lands in g^e, which is
    what the generic canonical form does.  Returns (matrices of q̄ + Λ by
    z-degree, S matrix).
    """
    lie, V, m = ds.lie, ds.V, ds.m
    n = lie.n
    fm = lie.matrix(lie.f)
    if any(fm[r][c] for r in range(n) for c in range(n) if (r, c) != (n - 1, 0)):
        raise ValueError("the single-element gauge needs f proportional to e_n1")
    lax = ds.universal_lax()
    mats = lax_matrices(ds, lax.total())
    top = mats[-m]
    # E^m_ij is the (i, j) matrix entry at z^{-m}
    En1 = top[n - 1][0]
    assert En1 == V.const(-1), "E^m_n1 must be -1 after the χ substitution"
    S = [[V.const(int(i == j)) for j in range(n)] for i in range(n)]
    for i in range(1, n - 1):
        S[i][n - 1] = top[i][0]        # -E_i1 / E_n1
    for j in range(1, n - 1):
        S[0][j] = -top[n - 1][j]       # E_nj / E_n1
    if s1n is None:
        s1n = _solve_corner(ds, mats, S)
    S[0][n - 1] = s1n
    return _conjugate(ds, mats, S), S


def _conjugate(ds, mats, S):
    """S (q + Λ) S^{-1} + k S ∂(S^{-1}) for unipotent S."""
    V = ds.V
    n = len(S)
    N = [[S[i][j] - V.const(int(i == j)) for j in range(n)] for i in range(n)]
    # S^{-1} = Σ (-N)^r
    inv = [[V.const(int(i == j)) for j in range(n)] for i in range(n)]
    P = [[V.const(int(i == j)) for j in range(n)] for i in range(n)]
    for _ in range(n):
        P = _mat_mul(P, [[-x for x in row] for row in N])
        inv = [[inv[i][j] + P[i][j] for j in range(n)] for i in range(n)]
    out = {}
    for zdeg, M in mats.items():
        out[zdeg] = _mat_mul(_mat_mul(S, M), inv)
    dinv = [[x.derivative() for x in row] for row in inv]
    corr = _mat_mul(S, dinv)
    Z = out.setdefault(0, _mat_zero(n, V))
    for i in range(n):
        for j in range(n):
            Z[i][j] = Z[i][j] + ds.k * corr[i][j]
    return out


def _solve_corner(ds, mats, S):
    """s_1n such that the x-direction of the z^{-m} diagonal vanishes.

    The diagonal is affine in s_1n; sample it at 0 and 1.
    """
    lie, V, m = ds.lie, ds.V, ds.m
    n = lie.n
    xdiag = [lie.mats[lie.index["x"]][i][i] for i in range(n)]

    def xcomp(s):
        S2 = [row[:] for row in S]
        S2[0][n - 1] = s
        top = _conjugate(ds, mats, S2)[-m]
        acc = V.zero()
        for i in range(n):
            acc = acc + top[i][i] * xdiag[i]
        return acc

    c0 = xcomp(V.zero())
    c1 = xcomp(V.one())
    slope = c1 - c0
    if not slope.is_constant() or slope.is_zero():
        raise ValueError("corner entry not determined")
    return -c0 * (Fraction(1) / slope.constant_term())


def sln_fast_generators(ds):
    """γ values from the fast path, keyed like ``extract_generators``."""
    lie = ds.lie
    mats, S = sln_gauge_fast_path(ds)
    loop = {}
    n = lie.n
    for zdeg, M in mats.items():
        for r in range(n):
            for s in range(n):
                if M[r][s]:
                    # matrix unit e_rs pairs with coordinates via the form
                    loop[(r, s, zdeg)] = M[r][s]
    out = {}
    for info in ds.generator_infos():
        # (v z^j, X) = tr(v X_{-j}) / tr(e f)
        val = ds.V.zero()
        vm = lie.matrix(info.vec)
        for r in range(n):
            for s in range(n):
                if vm[s][r] and (r, s, -info.zdeg) in loop:
                    val = val + loop[(r, s, -info.zdeg)] * (vm[s][r] * lie._scale)
        out[info.name] = val
    return out, S


# ------------------------------------------------------ minimal nilpotent

def full_frame(lie):
    """Basis z_i of g(1/2) with z_i* such that [z_i, z_j*] = δ_ij e."""
    lie.minimal_frame()  # raises unless f is minimal
    half = [lie.basis_vec(i) for i, g in enumerate(lie.grades) if g == Fraction(1, 2)]
    om = [[lie.form(lie.f, lie.bracket(a, b)) for b in half] for a in half]
    C = linalg.inverse(om)
    out = []
    for j, zi in enumerate(half):
        zs = [sum((C[t][j] * half[t][r] for t in range(len(half))), Fraction(0)) for r in range(lie.dim)]
        out.append((zi, zs))
    for i, (a, _) in enumerate(out):
        for j, (_, b) in enumerate(out):
            assert lie.bracket(a, b) == (lie.e if i == j else lie.zero())
    return out


class EtaGenerators:
    """η generators for a minimal nilpotent from nested brackets with the frame."""

    def __init__(self, ds):
        self.ds = ds
        self.lie = ds.lie
        self.m = m = ds.m
        self.pairs = full_frame(self.lie) + [(self.lie.x, self.lie.e)]
        self.zvars = [self._img(zi, m) for zi, _ in self.pairs]

    def _img(self, vec, j):
        return self.ds.loop_to_V({(i, j): c for i, c in enumerate(vec) if c})

    def nested(self, vec, idxs):
        lie = self.lie
        cur = vec
        for t in idxs:
            cur = lie.bracket(cur, self.pairs[t][1])
            if not any(cur):
                break
        return cur

    def eta_tilde(self, vec, j, depth=4):
        V = self.ds.V
        out = V.zero()
        npair = len(self.pairs)
        for l in range(depth + 1):
            w = Fraction(1, factorial(l))
            for idxs in product(range(npair), repeat=l):
                nb = self.nested(vec, idxs)
                if not any(nb):
                    continue
                term = self._img(nb, j)
                if not term:
                    continue
                for t in idxs:
                    term = term * self.zvars[t]
                out = out + term.scale(w)
        for idxs in product(range(npair), repeat=depth + 1):
            assert not any(self.nested(vec, idxs)), "nested brackets beyond depth 4 must vanish"
        return out

    def eta(self, vec, j):
        """η on an element v z^j of the generator space."""
        lie, ds = self.lie, self.ds
        k, m = ds.k, self.m
        out = self.eta_tilde(vec, j)
        if j == 0:
            grades = {lie.grades[i] for i, c in enumerate(vec) if c}
            if grades == {Fraction(-1, 2)}:
                for zi, zs in self.pairs[:-1]:
                    c = lie.form(zs, vec)
                    if c:
                        out = out - (k * self._img(zi, m).derivative()).scale(c)
            elif grades == {Fraction(-1)}:
                c = lie.form(vec, lie.e)   # multiple of f
                corr = (k * self._img(lie.x, m).derivative())
                for zi, zs in self.pairs[:-1]:
                    corr = corr + (k * self._img(zs, m).derivative() * self._img(zi, m)).scale(Fraction(1, 2))
                out = out - corr.scale(c)
            elif Fraction(-1) in grades or Fraction(-1, 2) in grades:
                raise ValueError("η needs a graded argument at z^0")
        return out

    def restated(self, vec, j):
        """The explicit case-by-case formulas, as a second route to η."""
        lie, ds = self.lie, self.ds
        V, k, m = ds.V, ds.k, self.m
        zs_pairs = self.pairs[:-1]
        Z = [self._img(zi, m) for zi, _ in zs_pairs]
        X = self._img(lie.x, m)
        im = lambda v: self._img(v, j)
        br = lie.bracket
        e = lie.e
        grades = {lie.grades[i] for i, c in enumerate(vec) if c}
        if len(grades) != 1:
            raise ValueError("graded argument required")
        g = grades.pop()
        two_s = range(len(zs_pairs))

        def s1(v, coef=1):
            acc = V.zero()
            for i in two_s:
                acc = acc + Z[i] * im(br(v, zs_pairs[i][1]))
            return acc.scale(coef)

        def s2(v, coef):
            acc = V.zero()
            for i in two_s:
                for jj in two_s:
                    acc = acc + Z[jj] * Z[i] * im(br(br(v, zs_pairs[i][1]), zs_pairs[jj][1]))
            return acc.scale(coef)

        def s3(v, coef):
            acc = V.zero()
            for i, jj, kk in product(two_s, repeat=3):
                acc = acc + Z[i] * Z[jj] * Z[kk] * im(br(br(br(v, zs_pairs[i][1]), zs_pairs[jj][1]), zs_pairs[kk][1]))
            return acc.scale(coef)

        def s4(v, coef):
            acc = V.zero()
            for idx in product(two_s, repeat=4):
                w = v
                for t in idx:
                    w = br(w, zs_pairs[t][1])
                term = im(w)
                for t in idx:
                    term = term * Z[t]
                acc = acc + term
            return acc.scale(coef)

        if j < m:
            if g == 1:
                return im(vec)
            if g == Fraction(1, 2):
                return im(vec) + s1(vec)
            if g == 0:
                return im(vec) + s1(vec) + X * im(br(vec, e)) + s2(vec, Fraction(1, 2))
            if g == Fraction(-1, 2):
                out = im(vec) + s1(vec) + X * im(br(vec, e)) + s2(vec, Fraction(1, 2))
                for i in two_s:
                    out = out + X * Z[i] * im(br(br(vec, e), zs_pairs[i][1]))
                out = out + s3(vec, Fraction(1, 6))
                if j == 0:
                    for i in two_s:
                        c = lie.form(zs_pairs[i][1], vec)
                        if c:
                            out = out - (k * Z[i].derivative()).scale(c)
                return out
            if g == -1:
                c = lie.form(vec, e)
                f = lie.f
                xv = lie.x
                out = im(f) + s1(f) - (X * im(xv)).scale(2) + s2(f, Fraction(1, 2))
                for i in two_s:
                    out = out - (X * Z[i] * im(br(xv, zs_pairs[i][1]))).scale(2)
                out = out - X * X * im(e) + s3(f, Fraction(1, 6))
                for i in two_s:
                    for jj in two_s:
                        out = out - X * Z[i] * Z[jj] * im(br(br(xv, zs_pairs[i][1]), zs_pairs[jj][1]))
                out = out + s4(f, Fraction(1, 24))
                if j == 0:
                    corr = k * X.derivative()
                    for i in two_s:
                        corr = corr + (k * self._img(zs_pairs[i][1], m).derivative() * Z[i]).scale(Fraction(1, 2))
                    out = out - corr
                return out.scale(c)
        if j == m:
            if g == 0:
                return im(vec) + s1(vec, Fraction(1, 2))
            if g == Fraction(-1, 2):
                return im(vec) + s1(vec) + s2(vec, Fraction(1, 3))
            if g == -1:
                c = lie.form(vec, e)
                f = lie.f
                out = im(f) + s1(f) - X * X + s2(f, Fraction(1, 2)) + s3(f, Fraction(1, 6)) + s4(f, Fraction(1, 24))
                return out.scale(c)
        raise ValueError("argument outside the generator space")

    # generators -----------------------------------------------------------
    def generators(self):
        """Ordered dict name -> η value in V, named like the γ generators."""
        out = {}
        for info in self.ds.generator_infos():
            out["eta_" + info.label] = self.eta(info.vec, info.zdeg)
        return out

    def eta_ext(self, vec, j):
        """η extended to any window element via its value on the canonical form.

        For j < m this is η itself; at z^m a vector is split along the g_f
        basis through the g^e dual basis, plus its χ-part; z^{m+1} gives
        the χ-constant and higher degrees vanish.
        """
        lie, ds = self.lie, self.ds
        V, m = ds.V, self.m
        if j < m:
            out = V.zero()
            by_grade = {}
            for i, c in enumerate(vec):
                if c:
                    by_grade.setdefault(lie.grades[i], [Fraction(0)] * lie.dim)[i] = c
            for g, v in by_grade.items():
                out = out + self.eta(v, j)
            return out
        if j == m:
            out = V.const(-lie.form(vec, lie.f))
            for l, w in enumerate(ds.gf):
                c = lie.form(vec, ds.ge_dual[l])
                if c:
                    out = out + self.eta(w, m).scale(c)
            return out
        if j == m + 1:
            return V.const(-lie.form(vec, lie.p) if lie.p is not None else 0)
        return V.zero()

    def bracket_rules(self):
        """Closed-form predictions for the two brackets on the covered pairs.

        Returns two dicts (name_a, name_b) -> LambdaPoly over V.
        """
        lie, ds = self.lie, self.ds
        V, k = ds.V, ds.k
        infos = ds.generator_infos()
        br = lie.bracket
        e, f = lie.e, lie.f
        is_f = lambda info: info.zdeg == 0 and info.vec == list(f)
        is_fz = lambda info: info.zdeg == 1 and info.vec == list(f)
        lp0 = lambda p: LambdaPoly(V, {0: p})
        r1, r2 = {}, {}
        for A in infos:
            for B in infos:
                key = ("eta_" + A.label, "eta_" + B.label)
                a, i, b, j = A.vec, A.zdeg, B.vec, B.zdeg
                if is_f(A) and is_f(B):
                    r1[key] = LambdaPoly(V, {1: k.scale(-2)})
                elif is_f(A):
                    r1[key] = lp0(-self.eta_ext(br(f, b), j + 1) + self.eta_ext(br(b, e), j))
                elif not is_f(B):
                    r1[key] = lp0(-self.eta_ext(br(a, b), i + j + 1))
                if i == 0 and j == 0:
                    r2[key] = LambdaPoly(V, {0: self.eta_ext(br(a, b), 0), 1: k.scale(lie.form(a, b))})
                elif is_fz(A) and is_f(B):
                    r2[key] = LambdaPoly(V, {0: self.eta_ext(lie.x, 0).scale(-2), 1: -k})
                elif is_fz(A) and j == 0:
                    gb = {lie.grades[t] for t, c in enumerate(b) if c}
                    if gb <= {Fraction(-1, 2), Fraction(0), Fraction(1, 2), Fraction(1)}:
                        r2[key] = lp0(self.eta_ext(br(b, e), 0))
                elif is_fz(A) and j > 0:
                    r2[key] = lp0(-self.eta_ext(br(f, b), 1 + j) + self.eta_ext(br(b, e), j))
                elif i > 0 and j > 0:
                    r2[key] = lp0(-self.eta_ext(br(a, b), i + j))
        return r1, r2


# ------------------------------------------------- nested-bracket identity

class LoopPoisson:
    """Polynomials in the loop basis u_a z^j (0 <= j <= jmax) with the
    Poisson bracket of the loop algebra, no window truncation."""

    def __init__(self, lie, jmax):
        self.lie = lie
        self.jmax = jmax
        self.keys = [(a, j) for j in range(jmax + 1) for a in range(lie.dim)]
        self.alg = DiffAlgebra([lie.labels[a] + zsuffix(j) for a, j in self.keys])
        self.key_of = {self.alg.index[self.alg.names[t]]: key for t, key in enumerate(self.keys)}

    def elt(self, vec, j):
        out = self.alg.zero()
        for a, c in enumerate(vec):
            if c:
                if j > self.jmax:
                    raise ValueError("loop degree beyond jmax")
                out = out + self.alg.var(self.lie.labels[a] + zsuffix(j)).scale(c)
        return out

    def bracket(self, v, w):
        lie = self.lie
        out = self.alg.zero()
        if any(n for (_, n) in v.jets()) or any(n for (_, n) in w.jets()):
            raise ValueError("Poisson bracket needs undifferentiated arguments")
        for (g, _) in v.jets():
            a, i = self.key_of[g]
            pv = v.partial(g, 0)
            for (h, _) in w.jets():
                b, j = self.key_of[h]
                val = self.elt(lie.bracket(lie.basis_vec(a), lie.basis_vec(b)), i + j)
                if val:
                    out = out + pv * w.partial(h, 0) * val
        return out

    def nested_sum(self, v, zstars, r):
        """(1/r!) Σ over index tuples of {v, z*_{i1}, ..., z*_{ir}}."""
        Z = [self.elt(zs, 0) for zs in zstars]
        layer = [v]
        for _ in range(r):
            layer = [q for p in layer for z in Z for q in [self.bracket(p, z)] if q]
        out = self.alg.zero()
        for p in layer:
            out = out + p
        return out.scale(Fraction(1, factorial(r)))

    def to_window(self, ds, p):
        """Window image in the coefficient algebra of ``ds``."""
        mapping = {}
        for g, (a, j) in self.key_of.items():
            mapping[self.alg.names[g]] = ds.image(a, j)
        return p.subs(mapping, ds.V)


def binomial_identity_residual(P, v, w, r, zstars, leibniz=False):
    """LHS - RHS of the binomial expansion of nested brackets.

    With ``leibniz=False`` the identity is for {v, w} with the Poisson
    bracket joining the two sides; with ``leibniz=True`` it is the Leibniz
    form for v*w.  The index sums factor over the split, so each side is
    built from the averaged nested sums.
    """
    join = (lambda a, b: a * b) if leibniz else P.bracket
    lhs = P.nested_sum(join(v, w), zstars, r)
    rhs = P.alg.zero()
    for l in range(r + 1):
        rhs = rhs + join(P.nested_sum(v, zstars, l), P.nested_sum(w, zstars, r - l))
    return lhs - rhs


def frame_duals(lie):
    """z_1*, ..., z_2s*, e: the elements the nested brackets run over."""
    return [zs for _, zs in full_frame(lie)] + [lie.e]


# ------------------------------------------------- generator replacement

def invert_triangular(W, new_in_w, new_names):
    """Express each γ generator through a second triangular generating set.

    ``new_in_w`` maps γ names to the matching new generator written in the
    γ's; its lead term must be that γ.  Returns (algebra of the new
    generators, γ name -> polynomial in the new generators).
    """
    alg = DiffAlgebra([new_names[nm] for nm in new_in_w], list(W.alg.params))
    order = sorted(W.infos, key=lambda i: -i.gr2)
    inv = {p: alg.var(p) for p in W.alg.params}
    done = set()
    for info in order:
        rem = new_in_w[info.name] - W.alg.var(info.name)
        for (g, _) in rem.jets():
            nm = W.alg.names[g]
            if nm not in done and nm not in W.alg.params:
                raise ValueError(f"{info.name} is not triangular: tail uses {nm}")
        inv[info.name] = alg.var(new_names[info.name]) - rem.subs(inv, alg)
        done.add(info.name)
    return alg, inv
