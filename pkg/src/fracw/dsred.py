"""Lax operators, gauge transformations and the canonical-form reduction.

The coefficient algebra V has one even generator per element u_i z^j of the
gr2-window; elements of gr2 exactly N = (d+1)m+1 are replaced by their
χ-values and anything beyond the window is zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from . import linalg
from .diffalg import DiffAlgebra, DiffPoly
from .liealg import LoopWindow, loop_add, loop_bracket, loop_form, loop_scale, zsuffix
from .pva import BracketPresentation, LambdaPoly, master_bracket

__all__ = [
    "LaxOperator",
    "FractionalDS",
    "GeneratorInfo",
]


@dataclass
class LaxOperator:
    """k∂ + q + Λ with q and Λ loop elements over V."""

    k: DiffPoly
    q: dict
    lam: dict

    def total(self):
        return loop_add(self.q, self.lam)

    def component(self, zdeg):
        return {key: v for key, v in self.q.items() if key[1] == zdeg}


@dataclass
class GeneratorInfo:
    name: str          # W-algebra generator name, e.g. g_fz
    label: str         # loop label, e.g. fz
    vec: list          # element of g (coordinates)
    zdeg: int
    gr2: Fraction


def _vec_label(lie, v):
    lab = lie.label_of(v)
    if lab is not None:
        return lab
    return None


class FractionalDS:
    """Drinfeld-Sokolov data for (g, Λ_m, k).

    ``k`` may be a rational number or the string 'k' for a symbolic level.
    """

    def __init__(self, lie, m, k=1):
        if m < 1:
            raise ValueError("fractional reduction needs m >= 1")
        self.lie = lie
        self.m = m
        self.window = LoopWindow(lie, m)
        params = ["k"] if isinstance(k, str) else []
        self.V = DiffAlgebra(self.window.names, params)
        self.k = self.V.var("k") if isinstance(k, str) else self.V.const(Fraction(k))
        self.k_value = k
        self._image_cache = {}
        self._setup_gf()
        self._canon = None
        self._presentations = None
        self._w = None

    # ---------------------------------------------------------------- window
    def image(self, i, j):
        """u_i z^j as an element of V: variable, χ-constant or zero."""
        key = (i, j)
        hit = self._image_cache.get(key)
        if hit is None:
            kind = self.window.classify(i, j)
            if kind == "var":
                hit = self.V.var(self.window.name(i, j))
            elif kind == "const":
                hit = self.V.const(self.window.chi(i, j))
            else:
                hit = self.V.zero()
            self._image_cache[key] = hit
        return hit

    def loop_to_V(self, elt):
        """Image in V of a loop element with rational coefficients."""
        out = self.V.zero()
        for (i, j), c in elt.items():
            if c:
                out = out + self.image(i, j).scale(c)
        return out

    def lambda_loop(self):
        return {key: self.V.const(c) for key, c in self.window.Lambda().items()}

    # -------------------------------------------------------------- the Lax
    def universal_lax(self):
        """k∂ + Σ ũ_i z^{-j} ⊗ u_i^j + Λ_m over the window basis."""
        q = {}
        dual = self.window.dual
        for (i, j) in self.window.B:
            var = self.V.var(self.window.name(i, j))
            for k, c in enumerate(dual[i]):
                if c:
                    key = (k, -j)
                    v = q.get(key)
                    v = var * c if v is None else v + var * c
                    if v:
                        q[key] = v
                    else:
                        q.pop(key)
        return LaxOperator(self.k, q, self.lambda_loop())

    def gauge_transform(self, lax, S, max_terms=64):
        """e^{ad S}(k∂ + q + Λ) with S supported at z-degree 0 in n."""
        lie = self.lie
        full = lax.total()
        dS = {key: v.derivative() for key, v in S.items()}
        dS = {key: v for key, v in dS.items() if v}
        T = loop_add(loop_bracket(lie, S, full), loop_scale(dS, lax.k), -1)
        acc = dict(full)
        n = 1
        while T:
            acc = loop_add(acc, loop_scale(T, Fraction(1, factorial(n))))
            n += 1
            if n > max_terms:
                raise RuntimeError("gauge series did not terminate; S is not nilpotent")
            T = loop_bracket(lie, S, T)
        q = loop_add(acc, lax.lam, -1)
        return LaxOperator(lax.k, q, lax.lam)

    # ------------------------------------------------------- g_f and g^e
    def _setup_gf(self):
        lie = self.lie
        gf, ge = [], []
        for g in sorted(set(lie.grades)):
            idx = [i for i, t in enumerate(lie.grades) if t == g]
            rows = [[c for c in r] for r in lie.ad_matrix(lie.f)]
            # restrict to the graded piece
            sub = [[r[i] for i in idx] for r in rows]
            for v in linalg.nullspace(sub, len(idx)) if any(any(r) for r in sub) else [
                    [Fraction(int(a == b)) for a in range(len(idx))] for b in range(len(idx))]:
                full = [Fraction(0)] * lie.dim
                for a, i in enumerate(idx):
                    full[i] = v[a]
                full = _normalise(full)
                gf.append(list(lie.f) if _proportional(full, lie.f) else full)
            sub = [[r[i] for i in idx] for r in lie.ad_matrix(lie.e)]
            for v in linalg.nullspace(sub, len(idx)) if any(any(r) for r in sub) else [
                    [Fraction(int(a == b)) for a in range(len(idx))] for b in range(len(idx))]:
                full = [Fraction(0)] * lie.dim
                for a, i in enumerate(idx):
                    full[i] = v[a]
                ge.append(_normalise(full))
        # dual basis of g^e against g_f
        G = [[lie.form(w, v) for v in ge] for w in gf]
        inv = linalg.inverse(G)
        # w̃_l = Σ_k inv[k][l] ge_k  gives (w_a, w̃_l) = Σ_k G[a][k] inv[k][l] = δ
        self.gf = gf
        self.ge_dual = [
            [sum((inv[k][l] * ge[k][t] for k in range(len(ge))), Fraction(0)) for t in range(lie.dim)]
            for l in range(len(gf))
        ]
        for a, w in enumerate(gf):
            for l, v in enumerate(self.ge_dual):
                assert lie.form(w, v) == int(a == l)
        self.gf_labels = []
        for l, w in enumerate(gf):
            lab = _vec_label(lie, w)
            if lab is None and _proportional(w, lie.f):
                lab = "f"

            self.gf_labels.append(lab if lab is not None else f"gf{l + 1}")

    # ---------------------------------------------------- canonical form
    def _z_component(self, q, zdeg):
        return {i: v for (i, j), v in q.items() if j == zdeg}

    def canonical_form(self, lax=None):
        """(S, lax_can) with e^{ad S} lax = k∂ + q_can + Λ and q_can's z^{-m} part in g^e."""
        lie = self.lie
        lax = lax or self.universal_lax()
        m = self.m
        S = {}
        grades = sorted({g for g in lie.grades if g > 0})
        for gi in grades:
            target = gi - 1
            cur = self.gauge_transform(lax, S)
            K = {i: v for i, v in self._z_component(cur.q, -m).items() if lie.grades[i] == target}
            if not K:
                continue
            idx_t = [i for i, g in enumerate(lie.grades) if g == target]
            idx_n = [i for i, g in enumerate(lie.grades) if g == gi]
            ge_t = [v for v in self.ge_dual_basis_full() if _grade_of(lie, v) == target]
            cols = [v for v in ge_t] + [lie.bracket(lie.f, lie.basis_vec(i)) for i in idx_n]
            M = [[col[r] for col in cols] for r in idx_t]
            rhs_cols = []
            for r_i in range(len(idx_t)):
                rhs_cols.append([Fraction(int(r == r_i)) for r in range(len(idx_t))])
            sols = linalg.solve_many(M, rhs_cols, len(cols))
            if sols is None:
                raise ValueError("complement is not transverse to [f, n]")
            nge = len(ge_t)
            for a, i in enumerate(idx_n):
                coeff = self.V.zero()
                for r_i, row_idx in enumerate(idx_t):
                    c = sols[r_i][nge + a]
                    if c and row_idx in K:
                        coeff = coeff + K[row_idx].scale(c)
                if coeff:
                    key = (i, 0)
                    S[key] = S.get(key, self.V.zero()) - coeff
                    if not S[key]:
                        del S[key]
        can = self.gauge_transform(lax, S)
        return S, can

    def ge_dual_basis_full(self):
        return self.ge_dual

    # --------------------------------------------------------- generators
    def generator_infos(self):
        infos = []
        lie, m = self.lie, self.m
        for j in range(m):
            for i in range(lie.dim):
                lab = lie.labels[i] + zsuffix(j)
                infos.append(GeneratorInfo("g_" + lab, lab, lie.basis_vec(i), j, self.window.gr2(i, j)))
        for l, w in enumerate(self.gf):
            lab = self.gf_labels[l] + zsuffix(m)
            g2 = _grade_of(lie, w) + (lie.d + 1) * m
            infos.append(GeneratorInfo("g_" + lab, lab, w, m, g2))
        return infos

    def pair_with(self, vec, zdeg, loop):
        """(v z^zdeg, loop) for loop elements over V."""
        elt = {(i, zdeg): c for i, c in enumerate(vec) if c}
        r = loop_form(self.lie, elt, loop)
        return r if r is not None else self.V.zero()

    def extract_generators(self, can=None):
        """Ordered dict W-name -> γ in V, read off from the canonical form."""
        if can is None:
            can = self.canonical()[1]
        total = can.total()
        out = {}
        for info in self.generator_infos():
            out[info.name] = self.pair_with(info.vec, info.zdeg, total)
        return out

    def canonical(self):
        if self._canon is None:
            self._canon = self.canonical_form()
        return self._canon

    def gamma(self, loop_vec, zdeg):
        """γ for an arbitrary element v z^zdeg: the pairing (v z^zdeg, q_can + Λ)."""
        return self.pair_with(loop_vec, zdeg, self.canonical()[1].total())

    def check_triangular(self, gammas=None):
        """Each γ_v - v only involves variables of larger gr2 at z-degree m or deg(v)."""
        gammas = gammas or self.extract_generators()
        bad = []
        for info in self.generator_infos():
            lead = self.V.zero()
            for i, c in enumerate(info.vec):
                if c:
                    lead = lead + self.image(i, info.zdeg).scale(c)
            tail = gammas[info.name] - lead
            for (g, _) in tail.jets():
                nm = self.V.names[g]
                i, j = self._name_to_b(nm)
                if not (self.window.gr2(i, j) > info.gr2 and j in (self.m, info.zdeg)):
                    bad.append((info.name, nm))
        return bad

    def _name_to_b(self, nm):
        if not hasattr(self, "_nb"):
            self._nb = {self.window.name(i, j): (i, j) for (i, j) in self.window.B}
        return self._nb[nm]

    # ------------------------------------------------------------ brackets
    def fractional_bracket_presentations(self):
        """(P1, P2) on V from the two loop-algebra brackets."""
        if self._presentations is not None:
            return self._presentations
        lie = self.lie
        t1, t2 = {}, {}
        B = self.window.B
        for (a, i) in B:
            for (b, j) in B:
                na, nb = self.window.name(a, i), self.window.name(b, j)
                br = lie.bracket(lie.basis_vec(a), lie.basis_vec(b))
                v1 = -self.loop_to_V({(c, i + j + 1): x for c, x in enumerate(br) if x})
                if v1:
                    t1[(na, nb)] = LambdaPoly(self.V, {0: v1})
                if i == 0 and j == 0:
                    v2 = LambdaPoly(self.V, {
                        0: self.loop_to_V({(c, 0): x for c, x in enumerate(br) if x}),
                        1: self.k.scale(lie.form_matrix[a][b]),
                    })
                elif i and j:
                    v2 = LambdaPoly(self.V, {0: -self.loop_to_V({(c, i + j): x for c, x in enumerate(br) if x})})
                else:
                    v2 = LambdaPoly(self.V, {})
                if v2:
                    t2[(na, nb)] = v2
        P1 = BracketPresentation(self.V, t1, "P1")
        P2 = BracketPresentation(self.V, t2, "P2")
        self._presentations = (P1, P2)
        return P1, P2

    def ad_n(self, nvec, phi):
        """{n λ φ} for n in the nilpotent part, extended by Leibniz and sesquilinearity."""
        lie = self.lie
        out = LambdaPoly(self.V, {})
        for (g, order) in sorted(phi.jets()):
            nm = self.V.names[g]
            a, i = self._name_to_b(nm)
            br = lie.bracket(nvec, lie.basis_vec(a))
            val = LambdaPoly(self.V, {0: self.loop_to_V({(c, i): x for c, x in enumerate(br) if x})})
            if i == 0:
                f = lie.form(nvec, lie.basis_vec(a))
                if f:
                    val = val + LambdaPoly(self.V, {1: self.k.scale(f)})
            if not val:
                continue
            out = out + val.shift_apply(order).rmul(phi.partial(g, order))
        return out

    def check_gauge_invariant(self, phi):
        """(ok, first nonzero residual) over the basis of n."""
        for i in self.lie.n_indices():
            r = self.ad_n(self.lie.basis_vec(i), phi)
            if r:
                return False, (self.lie.labels[i], r)
        return True, None

    # --------------------------------------------------------- W algebra
    def w_algebra(self):
        if self._w is None:
            self._w = WAlgebra(self)
        return self._w


def _normalise(v):
    lead = next(c for c in v if c)
    return [c / lead for c in v]


def _proportional(u, v):
    r = None
    for a, b in zip(u, v):
        if bool(a) != bool(b):
            return False
        if a:
            if r is None:
                r = a / b
            elif a / b != r:
                return False
    return r is not None


def _grade_of(lie, v):
    gs = {lie.grades[i] for i, c in enumerate(v) if c}
    if len(gs) != 1:
        raise ValueError("vector is not homogeneous")
    return gs.pop()


class WAlgebra:
    """The free differential algebra on the γ generators and the slice map.

    ``to_w`` rewrites a gauge-invariant element of V as a polynomial in the
    γ's by evaluating every window variable on the canonical form.
    """

    def __init__(self, ds):
        self.ds = ds
        self.infos = ds.generator_infos()
        self.gammas = ds.extract_generators()
        params = list(ds.V.params)
        self.alg = DiffAlgebra([i.name for i in self.infos], params)
        self._slice = self._build_slice()
        self._pres = None

    def _build_slice(self):
        ds, W = self.ds, self.alg
        lie, m = ds.lie, ds.m
        mapping = {}
        by_label = {(tuple(i.vec), i.zdeg): i.name for i in self.infos if i.zdeg < m}
        gf_names = [i.name for i in self.infos if i.zdeg == m]
        for (a, j) in ds.window.B:
            nm = ds.window.name(a, j)
            if j < m:
                mapping[nm] = W.var(by_label[(tuple(lie.basis_vec(a)), j)])
            else:
                val = W.zero()
                for l, v in enumerate(ds.ge_dual):
                    c = lie.form(lie.basis_vec(a), v)
                    if c:
                        val = val + W.var(gf_names[l]).scale(c)
                mapping[nm] = val
        for p in ds.V.params:
            mapping[p] = W.var(p)
        return mapping

    def to_w(self, phi):
        return phi.subs(self._slice, self.alg)

    def to_v(self, psi):
        mapping = dict(self.gammas)
        for p in self.alg.params:
            mapping[p] = self.ds.V.var(p)
        return psi.subs(mapping, self.ds.V)

    def lambda_to_w(self, lp):
        return LambdaPoly(self.alg, {d: self.to_w(v) for d, v in lp.coeffs.items()})

    def check_slice(self):
        """to_v(to_w(γ)) == γ for every generator, and to_w(γ_a) == var a."""
        bad = []
        for info in self.infos:
            g = self.gammas[info.name]
            w = self.to_w(g)
            if w != self.alg.var(info.name):
                bad.append(info.name)
        return bad

    def presentations(self):
        """Brackets among γ's computed by the engine on V, rewritten in γ's."""
        if self._pres is not None:
            return self._pres
        P1, P2 = self.ds.fractional_bracket_presentations()
        tables = ({}, {})
        names = [i.name for i in self.infos]
        for a in names:
            for b in names:
                for t, P in zip(tables, (P1, P2)):
                    val = master_bracket(P, self.gammas[a], self.gammas[b])
                    if val:
                        t[(a, b)] = self.lambda_to_w(val)
        self._pres = (BracketPresentation(self.alg, tables[0], "P1W"),
                      BracketPresentation(self.alg, tables[1], "P2W"))
        return self._pres

    def bracket_v(self, which, a, b):
        """Engine bracket of two W elements computed in V and brought back."""
        P = self.ds.fractional_bracket_presentations()[which - 1]
        return self.lambda_to_w(master_bracket(P, self.to_v(a), self.to_v(b)))
