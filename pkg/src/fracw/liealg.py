"""sl_n data, sl2-triples, gradings and the loop algebra.

Elements of g are coordinate lists (Fractions) in a fixed basis of
ad(x)-eigenvectors, x = h/2.  Elements of the loop algebra over a
coefficient ring are dicts ``(basis_index, z_degree) -> coefficient`` where
coefficients may be Fractions or DiffPoly values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import linalg

__all__ = ["LieAlgebra", "make_sl", "MinimalFrame", "LoopWindow"]

F0 = Fraction(0)


def _matmul(a, b):
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n) if a[i][k] and b[k][j]), F0)
             for j in range(n)] for i in range(n)]


def _unit(n, i, j):
    m = [[F0] * n for _ in range(n)]
    m[i][j] = Fraction(1)
    return m


def _trace(a):
    return sum((a[i][i] for i in range(len(a))), F0)


class LieAlgebra:
    """Finite-dimensional Lie algebra given by matrices of a basis.

    ``basis`` are square Fraction matrices, ``labels`` their names.  The
    invariant form is the trace form normalised so that (e, f) = 1.
    """

    def __init__(self, labels, basis, e, f, h, p=None, name=""):
        self.labels = list(labels)
        self.mats = basis
        self.dim = len(basis)
        self.name = name
        self.n = len(basis[0])
        self.index = {l: i for i, l in enumerate(self.labels)}
        flat = [[m[i][j] for i in range(self.n) for j in range(self.n)] for m in basis]
        self._flat = flat
        # coordinates solve: columns of flat^T
        self._coord_rows = [[flat[b][r] for b in range(self.dim)] for r in range(self.n * self.n)]
        self.e = self.coords(e)
        self.f = self.coords(f)
        self.h = self.coords(h)
        self.x = [c / 2 for c in self.h]
        tr_ef = _trace(_matmul(e, f))
        self._scale = Fraction(1) / tr_ef
        self.form_matrix = [[_trace(_matmul(a, b)) * self._scale for b in basis] for a in basis]
        self.struct = {}
        for i in range(self.dim):
            for j in range(self.dim):
                a, b = basis[i], basis[j]
                c = [[u - v for u, v in zip(r1, r2)] for r1, r2 in zip(_matmul(a, b), _matmul(b, a))]
                v = self.coords(c)
                nz = tuple((k, v[k]) for k in range(self.dim) if v[k])
                if nz:
                    self.struct[(i, j)] = nz
        self.grades = []
        for i in range(self.dim):
            v = self.bracket(self.x, self.basis_vec(i))
            ev = None
            for k in range(self.dim):
                if v[k]:
                    ev = v[k]
                    break
            if ev is None:
                ev = F0
            if [c for c in v] != [ev * int(k == i) for k in range(self.dim)]:
                raise ValueError("basis is not ad(x)-graded")
            self.grades.append(ev)
        self.d = max(self.grades)
        self.p = self.coords(p) if p is not None else None
        self.check_triple()

    # coordinates
    def coords(self, mat):
        flat = [mat[i][j] for i in range(self.n) for j in range(self.n)]
        sol = linalg.solve(self._coord_rows, flat, self.dim)
        if sol is None:
            raise ValueError("matrix not in the algebra")
        return sol

    def matrix(self, v):
        out = [[F0] * self.n for _ in range(self.n)]
        for k, c in enumerate(v):
            if c:
                m = self.mats[k]
                for i in range(self.n):
                    for j in range(self.n):
                        if m[i][j]:
                            out[i][j] += c * m[i][j]
        return out

    def basis_vec(self, i):
        return [Fraction(int(k == i)) for k in range(self.dim)]

    def vec(self, label):
        return self.basis_vec(self.index[label])

    def zero(self):
        return [F0] * self.dim

    def bracket(self, u, v):
        out = [F0] * self.dim
        for i, a in enumerate(u):
            if not a:
                continue
            for j, b in enumerate(v):
                if not b:
                    continue
                for k, c in self.struct.get((i, j), ()):
                    out[k] += a * b * c
        return out

    def form(self, u, v):
        s = F0
        for i, a in enumerate(u):
            if a:
                row = self.form_matrix[i]
                for j, b in enumerate(v):
                    if b and row[j]:
                        s += a * b * row[j]
        return s

    def ad_matrix(self, u):
        """Matrix M with M[k][j] = coefficient of basis k in [u, b_j]."""
        cols = [self.bracket(u, self.basis_vec(j)) for j in range(self.dim)]
        return [[cols[j][k] for j in range(self.dim)] for k in range(self.dim)]

    def check_triple(self):
        e, f, h = self.e, self.f, self.h
        ok = (self.bracket(h, e) == [2 * c for c in e]
              and self.bracket(h, f) == [-2 * c for c in f]
              and self.bracket(e, f) == h
              and self.form(e, f) == 1 and self.form(h, h) == 2)
        if not ok:
            raise ValueError("not an sl2-triple with the normalised form")

    # gradings
    def grading_decomposition(self):
        out = {}
        for i, g in enumerate(self.grades):
            out.setdefault(g, []).append(i)
        return dict(sorted(out.items()))

    def dual_basis(self):
        """Vectors ũ_j with (u_i, ũ_j) = δ_ij."""
        inv = linalg.inverse(self.form_matrix)
        # (u_i, sum_k c_k u_k) = (G c)_i; c = G^{-1} e_j
        return [[inv[k][j] for k in range(self.dim)] for j in range(self.dim)]

    def dual_index(self):
        """For the graded basis, the dual of u_i is a multiple of some u_j.

        Returns list of (j, c) with ũ_i = c * u_j when this is the case,
        else None.
        """
        out = []
        for v in self.dual_basis():
            nz = [(k, c) for k, c in enumerate(v) if c]
            out.append(nz[0] if len(nz) == 1 else None)
        return out

    def centralizer(self, u):
        """Basis of ker(ad u)."""
        return linalg.nullspace(self.ad_matrix(u), self.dim)

    def g_f_basis(self):
        return self.centralizer(self.f)

    def g_e_basis(self):
        return self.centralizer(self.e)

    def n_indices(self):
        return [i for i, g in enumerate(self.grades) if g > 0]

    def label_of(self, v):
        nz = [(k, c) for k, c in enumerate(v) if c]
        if len(nz) == 1 and nz[0][1] == 1:
            return self.labels[nz[0][0]]
        return None

    def format_vec(self, v):
        parts = []
        for k, c in enumerate(v):
            if not c:
                continue
            lab = self.labels[k]
            if c == 1:
                parts.append(lab)
            elif c == -1:
                parts.append("-" + lab)
            else:
                parts.append(f"{c}*{lab}")
        return " + ".join(parts).replace("+ -", "- ") or "0"

    def minimal_frame(self):
        return MinimalFrame.build(self)


def make_sl(n, nilpotent="principal", p="default"):
    """sl_n with a graded basis adapted to the chosen nilpotent f."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if nilpotent == "principal":
        e = [[F0] * n for _ in range(n)]
        f = [[F0] * n for _ in range(n)]
        for i in range(n - 1):
            e[i][i + 1] = Fraction(1)
            f[i + 1][i] = Fraction((i + 1) * (n - 1 - i))
        h = [[F0] * n for _ in range(n)]
        for i in range(n):
            h[i][i] = Fraction(n - 1 - 2 * i)
    elif nilpotent == "minimal":
        if n < 2:
            raise ValueError("minimal nilpotent needs n >= 2")
        e = _unit(n, 0, n - 1)
        f = _unit(n, n - 1, 0)
        h = [[F0] * n for _ in range(n)]
        h[0][0] = Fraction(1)
        h[n - 1][n - 1] = Fraction(-1)
    else:
        raise ValueError(f"unknown nilpotent {nilpotent!r}")
    labels, basis = [], []
    if n == 2:
        labels = ["e", "x", "f"]
        basis = [_unit(2, 0, 1), [[Fraction(1, 2), F0], [F0, Fraction(-1, 2)]], _unit(2, 1, 0)]
    else:
        for i in range(n):
            for j in range(n):
                if i < j:
                    labels.append(f"e{i + 1}{j + 1}")
                    basis.append(_unit(n, i, j))
        x = [[h[i][j] / 2 for j in range(n)] for i in range(n)]
        labels.append("x")
        basis.append(x)
        # trace-orthogonal complement of x inside the Cartan, integer scaled
        rows = [[Fraction(1)] * n, [x[i][i] for i in range(n)]]
        comp = linalg.nullspace(rows, n)
        # Gram-Schmidt w.r.t. the trace form to keep the Cartan part orthogonal
        ortho = []
        for v in comp:
            w = list(v)
            for o in ortho:
                c = sum(a * b for a, b in zip(w, o)) / sum(a * a for a in o)
                w = [a - c * b for a, b in zip(w, o)]
            ortho.append(w)
        for t, w in enumerate(ortho):
            den = 1
            for c in w:
                den = den * c.denominator // _gcd(den, c.denominator)
            w = [c * den for c in w]
            g = 0
            for c in w:
                g = _gcd(g, int(c))
            w = [c / g for c in w] if g else w
            if w[0] < 0 or (w[0] == 0 and next(c for c in w if c) < 0):
                w = [-c for c in w]
            labels.append("y" if len(ortho) == 1 else f"y{t + 1}")
            basis.append([[w[i] if i == j else F0 for j in range(n)] for i in range(n)])
        for i in range(n):
            for j in range(n):
                if i > j:
                    labels.append(f"e{i + 1}{j + 1}")
                    basis.append(_unit(n, i, j))
    if p == "default":
        pm = _unit(n, 0, n - 1)
    elif p is None:
        pm = None
    else:
        pm = p
    name = f"sl{n}" + ("" if nilpotent == "principal" else "-minimal")
    return LieAlgebra(labels, basis, e, f, h, p=pm, name=name)


def _gcd(a, b):
    from math import gcd
    return gcd(int(a), int(b))


@dataclass
class MinimalFrame:
    """Symplectic basis z_i, z_i* of g(1/2) with [z_i, z_j*] = δ_ij e."""

    lie: LieAlgebra
    z: list
    zstar: list

    @property
    def s(self):
        return len(self.z)

    def extended(self):
        """Pairs (z_i, z_i*) for i = 1..2s+1 including (x, e)."""
        return list(zip(self.z, self.zstar)) + [(self.lie.x, self.lie.e)]

    @classmethod
    def build(cls, lie):
        grades = lie.grading_decomposition()
        if len(grades.get(Fraction(1), [])) != 1 or lie.d != 1:
            raise ValueError("f is not a minimal nilpotent")
        half = [lie.basis_vec(i) for i in grades.get(Fraction(1, 2), [])]

        def omega(a, b):
            return lie.form(lie.f, lie.bracket(a, b))

        z, zs = [], []
        rest = list(half)
        while rest:
            a = rest.pop(0)
            j = next((t for t, b in enumerate(rest) if omega(a, b)), None)
            if j is None:
                raise ValueError("degenerate form on g(1/2)")
            b = rest.pop(j)
            w = omega(a, b)
            b = [c / w for c in b]
            new = []
            for c in rest:
                # remove components along a and b
                c = [ci - omega(c, b) * ai + omega(c, a) * bi for ci, ai, bi in zip(c, a, b)]
                new.append(c)
            rest = [c for c in new if any(c)]
            z.append(a)
            zs.append(b)
        for i, a in enumerate(z):
            for j, b in enumerate(zs):
                want = lie.e if i == j else lie.zero()
                if lie.bracket(a, b) != want:
                    raise ValueError("frame check failed")
        return cls(lie, z, zs)


def zsuffix(j):
    if j == 0:
        return ""
    if j == 1:
        return "z"
    return f"z{j}"


class LoopWindow:
    """The gr2-window of the loop algebra for given m and Λ_m = -f z^-m - p z^-m-1."""

    def __init__(self, lie, m):
        if m < 0:
            raise ValueError("m must be non-negative")
        self.lie = lie
        self.m = m
        self.N = (lie.d + 1) * m + 1
        self.B = []
        self.Bm = []
        jmax = m + 2
        for j in range(jmax + 1):
            for i in range(lie.dim):
                g = self.gr2(i, j)
                if g < self.N:
                    self.B.append((i, j))
                elif g == self.N:
                    self.Bm.append((i, j))
        self.B.sort(key=lambda t: (t[1], t[0]))
        self.Bm.sort(key=lambda t: (t[1], t[0]))
        self.names = [self.name(i, j) for i, j in self.B]
        self.index = {b: t for t, b in enumerate(self.B)}
        self.dual = lie.dual_basis()

    def gr2(self, i, j):
        return (self.lie.d + 1) * j + self.lie.grades[i]

    def name(self, i, j):
        return self.lie.labels[i] + zsuffix(j)

    def Lambda(self):
        """Λ_m as a loop element with Fraction coefficients."""
        lie, m = self.lie, self.m
        out = {}
        for k, c in enumerate(lie.f):
            if c:
                out[(k, -m)] = out.get((k, -m), F0) - c
        if lie.p is not None:
            for k, c in enumerate(lie.p):
                if c:
                    out[(k, -m - 1)] = out.get((k, -m - 1), F0) - c
        return {k: v for k, v in out.items() if v}

    def chi(self, i, j):
        """(Λ_m, u_i z^j)."""
        lam = self.Lambda()
        s = F0
        for (k, t), c in lam.items():
            if t + j == 0:
                s += c * self.lie.form_matrix[k][i]
        return s

    def classify(self, i, j):
        """'var', 'const' or 'zero' for the image of u_i z^j in the window."""
        if j < 0:
            return "zero"
        g = self.gr2(i, j)
        if g < self.N:
            return "var"
        if g == self.N:
            return "const"
        return "zero"


# ----------------------------------------------------------- loop elements

def loop_add(a, b, scale=1):
    out = dict(a)
    for k, v in b.items():
        w = out.get(k)
        v2 = v * scale if scale != 1 else v
        w = v2 if w is None else w + v2
        if w:
            out[k] = w
        else:
            out.pop(k, None)
    return out


def loop_scale(a, c):
    out = {}
    for k, v in a.items():
        w = v * c
        if w:
            out[k] = w
    return out


def loop_bracket(lie, a, b):
    """[a, b] for loop elements with commuting coefficients."""
    out = {}
    for (i, s), u in a.items():
        for (j, t), v in b.items():
            sc = lie.struct.get((i, j))
            if not sc:
                continue
            uv = u * v
            if not uv:
                continue
            for k, c in sc:
                key = (k, s + t)
                w = out.get(key)
                w = uv * c if w is None else w + uv * c
                if w:
                    out[key] = w
                else:
                    del out[key]
    return out


def loop_form(lie, a, b):
    """(a, b) = Σ (u, v) δ_{s+t,0} with coefficients multiplied."""
    total = None
    for (i, s), u in a.items():
        row = lie.form_matrix[i]
        for (j, t), v in b.items():
            if s + t or not row[j]:
                continue
            term = u * v * row[j]
            total = term if total is None else total + term
    return total


def vec_to_loop(v, j=0):
    return {(k, j): c for k, c in enumerate(v) if c}
