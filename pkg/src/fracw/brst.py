"""The classical BRST complex of a graded simple Lie algebra.

Generators of the complex: currents a (even), charged fermions phi_a for a
in n (odd), their duals psi_a = phi^{v^a} (odd) and neutral fermions Phi_a
for a in g(1/2).  Everything is a differential polynomial in one DiffAlgebra
with k (and optionally c) as central parameters, so the pva engine does all
bracket work.

Conformal weights: a in g(j) has weight 1-j, so does phi_a; psi_a has
weight j; Phi has weight 1/2.  Charge: psi +1, phi -1, the rest 0.
d is homogeneous of weight 1 and charge 1, so d_(0) preserves weight.
"""

import random
from fractions import Fraction

from . import linalg
from .diffalg import DiffAlgebra
from .pva import BracketPresentation, CheckReport, LambdaPoly, at_lambda_zero, master_bracket

__all__ = [
    "BrstAlgebra",
    "build_brst",
    "build_d",
    "d0",
    "current_J",
    "energy_momentum",
    "monomials",
    "exact_preimage",
    "closed_lift",
    "generator_map_i",
    "AffineQuotient",
    "twist_check",
    "brst_checks",
]

HALF = Fraction(1, 2)


class BrstAlgebra:
    """S(R_k^{cp}(g, f)) with its bracket presentation.

    ``k`` and ``c`` are rationals or parameter names; ``p`` is a vector of g
    (only used when c is not 0).  ``neutral_parity`` is 0 (even Phi) or 1.
    """

    def __init__(self, lie, k="k", c=0, p=None, neutral_parity=0):
        self.lie = lie
        self.grades = lie.grades
        self.n_idx = [i for i, g in enumerate(lie.grades) if g > 0]
        self.half_idx = [i for i, g in enumerate(lie.grades) if g == HALF]
        self.neutral_parity = neutral_parity
        labels = lie.labels
        gens = [(lab, 0) for lab in labels]
        gens += [("phi_" + labels[i], 1) for i in self.n_idx]
        gens += [("psi_" + labels[i], 1) for i in self.n_idx]
        gens += [("Phi_" + labels[i], neutral_parity) for i in self.half_idx]
        params = [x for x in (k, c) if isinstance(x, str)]
        self.alg = DiffAlgebra(gens, params)
        alg = self.alg
        self.k = alg.var(k) if isinstance(k, str) else alg.const(k)
        self.c = alg.var(c) if isinstance(c, str) else alg.const(c)
        self.k_value, self.c_value = k, c
        if p is None:
            p = lie.zero()
        self.p = p
        if self.c and any(any(lie.bracket(p, lie.basis_vec(i))) for i in self.n_idx):
            raise ValueError("p must commute with n")
        self.P = BracketPresentation(alg, self._table(), "brst")
        self._d = None

    # ---------------------------------------------------------------- table
    def _table(self):
        lie, alg = self.lie, self.alg
        t = {}
        for i in range(lie.dim):
            for j in range(lie.dim):
                a, b = lie.basis_vec(i), lie.basis_vec(j)
                br = lie.bracket(a, b)
                c0 = self.current(br) + self.c.scale(lie.form(self.p, br))
                lam = self.k.scale(lie.form(a, b))
                v = LambdaPoly(alg, {0: c0, 1: lam})
                if v:
                    t[(lie.labels[i], lie.labels[j])] = v
        for i in self.n_idx:
            t[("phi_" + lie.labels[i], "psi_" + lie.labels[i])] = LambdaPoly.const(alg.one())
        for i in self.half_idx:
            for j in self.half_idx:
                v = lie.form(lie.f, lie.bracket(lie.basis_vec(i), lie.basis_vec(j)))
                if v:
                    t[("Phi_" + lie.labels[i], "Phi_" + lie.labels[j])] = LambdaPoly.const(alg.const(v))
        return t

    # ----------------------------------------------------- linear embeddings
    def current(self, v):
        out = self.alg.zero()
        for i, c in enumerate(v):
            if c:
                out = out + self.alg.var(self.lie.labels[i]).scale(c)
        return out

    def _sector(self, prefix, idx, v):
        out = self.alg.zero()
        for i in idx:
            if v[i]:
                out = out + self.alg.var(prefix + self.lie.labels[i]).scale(v[i])
        return out

    def phi(self, v):
        """phi of the n-component of v."""
        return self._sector("phi_", self.n_idx, v)

    def Phi(self, v):
        """Phi of the g(1/2)-component of v."""
        return self._sector("Phi_", self.half_idx, v)

    def psi(self, i):
        return self.alg.var("psi_" + self.lie.labels[i])

    def X(self, v):
        return self.current(v) + self.alg.const(self.lie.form(self.lie.f, v)) + self.Phi(v)

    def project_le0(self, v):
        return [c if self.grades[i] <= 0 else Fraction(0) for i, c in enumerate(v)]

    # -------------------------------------------------------------- grading
    def weight(self, g):
        nm = self.alg.names[g]
        if nm.startswith("phi_"):
            return 1 - self.grades[self.lie.index[nm[4:]]]
        if nm.startswith("psi_"):
            return self.grades[self.lie.index[nm[4:]]]
        if nm.startswith("Phi_"):
            return HALF
        return 1 - self.grades[self.lie.index[nm]]

    def charge(self, g):
        nm = self.alg.names[g]
        return 1 if nm.startswith("psi_") else -1 if nm.startswith("phi_") else 0

    def mono_weight(self, mono):
        return sum((self.weight(g) + n) * e for g, n, e in mono if g < self.alg.n_gens)

    @property
    def d(self):
        if self._d is None:
            self._d = build_d(self)
        return self._d


def build_brst(lie, k="k", c=0, p=None, neutral_parity=0):
    return BrstAlgebra(lie, k, c, p, neutral_parity)


def build_d(B):
    """d = Σ psi_α X_{u_α} + ½ Σ psi_α psi_β phi_{[u_β, u_α]}."""
    lie = B.lie
    out = B.alg.zero()
    for a in B.n_idx:
        out = out + B.psi(a) * B.X(lie.basis_vec(a))
    for a in B.n_idx:
        for b in B.n_idx:
            w = B.phi(lie.bracket(lie.basis_vec(b), lie.basis_vec(a)))
            if w:
                out = out + (B.psi(a) * B.psi(b) * w).scale(HALF)
    return out


def d0(B, A):
    return at_lambda_zero(master_bracket(B.P, B.d, A))


def current_J(B, v):
    """J_a = a + Σ psi_α phi_{[u_α, a]}."""
    lie = B.lie
    out = B.current(v)
    for a in B.n_idx:
        w = B.phi(lie.bracket(lie.basis_vec(a), v))
        if w:
            out = out + B.psi(a) * w
    return out


def d_on_J_formula(B, v):
    """Closed form Σ psi_α (J_{π≤[u_α,a]} - Phi_{[u_α,a]} - (u_α,[a,f])) + k(∂+λ)(u_α,a) psi_α."""
    lie, alg = B.lie, B.alg
    c0, c1 = alg.zero(), alg.zero()
    for a in B.n_idx:
        u = lie.basis_vec(a)
        br = lie.bracket(u, v)
        inner = current_J(B, B.project_le0(br)) - B.Phi(br) - alg.const(lie.form(u, lie.bracket(v, lie.f)))
        c0 = c0 + B.psi(a) * inner
        s = lie.form(u, v)
        if s:
            c0 = c0 + (B.k * B.psi(a).derivative()).scale(s)
            c1 = c1 + (B.k * B.psi(a)).scale(s)
    return LambdaPoly(alg, {0: c0, 1: c1})


def energy_momentum(B, scaled=False):
    """The field L; with ``scaled`` the multiple k L, which stays polynomial for symbolic k.

    L = (1/2k) Σ u_α u^α + ∂x - Σ j_α psi_α ∂phi_α + Σ (1-j_α) ∂psi_α phi_α
        + ½ Σ ∂Phi_{z_i*} Phi_{z_i}.
    """
    lie, alg = B.lie, B.alg
    if isinstance(B.k_value, str):
        if not scaled:
            raise ValueError("symbolic k: use scaled=True")
    elif B.k_value == 0:
        raise ValueError("k must be nonzero")
    quad = alg.zero()
    for i, dv in enumerate(lie.dual_basis()):
        quad = quad + alg.var(lie.labels[i]) * B.current(dv)
    rest = B.current(lie.x).derivative()
    for a in B.n_idx:
        j = B.grades[a]
        ph = alg.var("phi_" + lie.labels[a])
        rest = rest - (B.psi(a) * ph.derivative()).scale(j) + (B.psi(a).derivative() * ph).scale(1 - j)
    for z, zs in _neutral_frame(B):
        rest = rest + (B.Phi(zs).derivative() * B.Phi(z)).scale(HALF)
    if scaled:
        return quad.scale(HALF) + B.k * rest
    return quad.scale(Fraction(1, 2) / Fraction(B.k_value)) + rest


def _neutral_frame(B):
    """Pairs (z_i, z_i*) spanning g(1/2) with (f, [z_i, z_j*]) = δ_ij."""
    lie = B.lie
    idx = B.half_idx
    if not idx:
        return []
    G = [[lie.form(lie.f, lie.bracket(lie.basis_vec(i), lie.basis_vec(j))) for j in idx] for i in idx]
    # z_i* = Σ_j C[j][i] u_j with G C = 1
    C = linalg.inverse(G)
    out = []
    for r, i in enumerate(idx):
        zs = lie.zero()
        for s, j in enumerate(idx):
            zs[j] += C[s][r]
        out.append((lie.basis_vec(i), zs))
    return out


# ------------------------------------------------------------- monomials

def monomials(B, weight, charge=None, degree=4, gens=None):
    """Monomials (as DiffPoly) of the given conformal weight, charge and max degree."""
    alg = B.alg
    gens = range(alg.n_gens) if gens is None else [alg.index[g] if isinstance(g, str) else g for g in gens]
    jets = []
    for g in gens:
        w0 = B.weight(g)
        n = 0
        while w0 + n <= weight:
            jets.append((g, n, w0 + n, alg.odd[g], B.charge(g)))
            n += 1
    out = []

    def rec(start, w, q, deg, acc):
        if w == weight and (charge is None or q == charge):
            out.append(acc)
        if deg == degree:
            return
        for t in range(start, len(jets)):
            g, n, wj, odd, qj = jets[t]
            if w + wj > weight:
                continue
            rec(t + 1 if odd else t, w + wj, q + qj, deg + 1, acc * alg.var(g, n))

    rec(0, Fraction(0), 0, 0, alg.one())
    seen, uniq = set(), []
    for m in out:
        key = frozenset(m.terms)
        if m and key not in seen:
            seen.add(key)
            uniq.append(m)
    return uniq


def _param_multipliers(B, kpowers):
    if not isinstance(B.k_value, str):
        return [B.alg.one()]
    return [B.k ** i for i in range(kpowers + 1)]


def exact_preimage(B, target, weight, degree=4, kpowers=3):
    """Some A of charge -1 with d_(0) A = target, searched at the given weight; None if absent."""
    if not target:
        return B.alg.zero()
    basis = []
    for m in monomials(B, weight, charge=-1, degree=degree):
        for t in _param_multipliers(B, kpowers):
            basis.append(m * t)
    images = [d0(B, m) for m in basis]
    keys = {}
    rows = []
    for col, im in enumerate(images):
        for mono, v in im.terms.items():
            r = keys.get(mono)
            if r is None:
                r = keys[mono] = len(rows)
                rows.append({})
            rows[r][col] = v
    rhs = [Fraction(0)] * len(rows)
    for mono, v in target.terms.items():
        r = keys.get(mono)
        if r is None:
            return None
        rhs[r] = v
    sol = linalg.solve(rows, rhs, len(basis))
    if sol is None:
        return None
    out = B.alg.zero()
    for c, m in zip(sol, basis):
        if c:
            out = out + m.scale(c)
    return out


def virasoro_check(B, degree=4):
    """{L λ L} - (∂+2λ)L + ½kλ³ is d_(0)-exact coefficientwise.

    For symbolic k the scaled field kL is used and the identity is
    multiplied through by k^2.
    """
    scaled = isinstance(B.k_value, str)
    L = energy_momentum(B, scaled=scaled)
    k = B.k
    LL = master_bracket(B.P, L, L)
    if scaled:
        expect = LambdaPoly(B.alg, {0: (k * L).derivative(), 1: (k * L).scale(2), 3: (k * k * k).scale(-HALF)})
    else:
        expect = LambdaPoly(B.alg, {0: L.derivative(), 1: L.scale(2), 3: k.scale(-HALF)})
    res = LL - expect
    for n, r in sorted(res.coeffs.items()):
        A = exact_preimage(B, r, 3 - n, degree=degree)
        if A is None or d0(B, A) != r:
            return CheckReport("virasoro", (n,), False, r)
    return CheckReport("virasoro", (), True, None)


# ---------------------------------------------------- reduced complex R_-

class ReducedAlgebra:
    """Polynomials in J_a (a in g(<=0)), psi and Phi, with the map into the complex."""

    def __init__(self, B):
        self.B = B
        lie = B.lie
        self.le0 = [i for i, g in enumerate(B.grades) if g <= 0]
        gens = [("J_" + lie.labels[i], 0) for i in self.le0]
        gens += [("psi_" + lie.labels[i], 1) for i in B.n_idx]
        gens += [("Phi_" + lie.labels[i], B.neutral_parity) for i in B.half_idx]
        self.alg = DiffAlgebra(gens, B.alg.params)
        self.embed_map = {}
        for i in self.le0:
            self.embed_map["J_" + lie.labels[i]] = current_J(B, lie.basis_vec(i))
        for i in B.n_idx:
            self.embed_map["psi_" + lie.labels[i]] = B.psi(i)
        for i in B.half_idx:
            self.embed_map["Phi_" + lie.labels[i]] = B.alg.var("Phi_" + lie.labels[i])

    def to_complex(self, A):
        return A.subs(self.embed_map, self.B.alg)

    def weight(self, g):
        nm = self.alg.names[g]
        return self.B.weight(self.B.alg.index[nm[2:] if nm.startswith("J_") else nm])

    def charge(self, g):
        return 1 if self.alg.names[g].startswith("psi_") else 0


def closed_lift(B, label, degree=3):
    """A d_(0)-closed element J_a + (terms of lower polynomial order) in S(R_-).

    The correction is solved at the weight of J_a among R_- monomials of
    charge 0 other than J_a itself.  Returns (R, A) with A in R.alg.
    """
    R = ReducedAlgebra(B)
    lie = B.lie
    a = lie.index[label]
    w = 1 - B.grades[a]
    lead = R.alg.var("J_" + label)
    shim = _Shim(R)
    cands = [m * t for m in monomials(shim, w, charge=0, degree=degree)
             if m != lead and not m.is_constant()
             for t in _reduced_multipliers(R, 2)]
    cols = [d0(B, R.to_complex(m)) for m in cands]
    target = -d0(B, R.to_complex(lead))
    keys, rows = {}, []
    for col, im in enumerate(cols):
        for mono, v in im.terms.items():
            r = keys.get(mono)
            if r is None:
                r = keys[mono] = len(rows)
                rows.append({})
            rows[r][col] = v
    rhs = [Fraction(0)] * len(rows)
    for mono, v in target.terms.items():
        if mono not in keys:
            return R, None
        rhs[keys[mono]] = v
    sol = linalg.solve(rows, rhs, len(cands))
    if sol is None:
        return R, None
    A = lead
    for c, m in zip(sol, cands):
        if c:
            A = A + m.scale(c)
    return R, A


def _reduced_multipliers(R, kpowers):
    if not isinstance(R.B.k_value, str):
        return [R.alg.one()]
    k = R.alg.var(R.B.k_value)
    return [k ** i for i in range(kpowers + 1)]


class _Shim:
    """Adapter so ``monomials`` can enumerate over a ReducedAlgebra."""

    def __init__(self, R):
        self.alg = R.alg
        self.weight = R.weight
        self.charge = R.charge


class AffineQuotient:
    """S(C[∂]⊗g) / <m - sign·(f, m)> on the currents outside m, with ad_λ n.

    The default sign -1 (m -> -(f, m)) is the one compatible with
    d_(0) phi_a = J_a + (a, f) + Phi_a; sign +1 is kept for comparison.
    """

    def __init__(self, lie, k="k", sign=-1):
        self.lie = lie
        self.sign = sign
        self.m_idx = [i for i, g in enumerate(lie.grades) if g >= 1]
        self.keep = [i for i in range(lie.dim) if i not in self.m_idx]
        params = ["k"] if isinstance(k, str) else []
        self.alg = DiffAlgebra([lie.labels[i] for i in self.keep], params)
        self.k = self.alg.var("k") if isinstance(k, str) else self.alg.const(k)

    def image(self, v):
        out = self.alg.zero()
        for i, c in enumerate(v):
            if not c:
                continue
            if i in self.m_idx:
                out = out + self.alg.const(self.sign * c * self.lie.form(self.lie.f, self.lie.basis_vec(i)))
            else:
                out = out + self.alg.var(self.lie.labels[i]).scale(c)
        return out

    def ad_n(self, nvec, A):
        lie = self.lie
        out = LambdaPoly(self.alg, {})
        for (g, order) in sorted(A.jets()):
            b = lie.vec(self.alg.names[g])
            val = LambdaPoly(self.alg, {0: self.image(lie.bracket(nvec, b)), 1: self.k.scale(lie.form(nvec, b))})
            if val:
                out = out + val.shift_apply(order).rmul(A.partial(g, order))
        return out

    def check_gauge_invariant(self, A):
        for i, g in enumerate(self.lie.grades):
            if g > 0:
                r = self.ad_n(self.lie.basis_vec(i), A)
                if r:
                    return False, (self.lie.labels[i], r)
        return True, None


def generator_map_i(R, Q, A):
    """J_a -> a, Phi_b -> -b, psi -> 0, then m replaced through the quotient Q."""
    lie = R.B.lie
    mp = {}
    for nm in R.alg.generators:
        if nm.startswith("J_"):
            mp[nm] = Q.image(lie.vec(nm[2:]))
        elif nm.startswith("Phi_"):
            mp[nm] = -Q.image(lie.vec(nm[4:]))
        else:
            mp[nm] = Q.alg.zero()
    return A.subs(mp, Q.alg)


# ----------------------------------------------------------------- checks

def twist_check(lie, c="c", p=None, literal=False):
    """ψ(a) = a + c(p, a) intertwines the untwisted and twisted current brackets.

    With ``literal`` the map a -> a + c[p, a] is tested instead.
    Returns the list of failing (a, b) pairs.
    """
    p = lie.e if p is None else p
    B0 = BrstAlgebra(lie, "k", 0, None)
    B1 = BrstAlgebra(lie, "k", c, p)
    alg = B1.alg
    mp = {}
    for i, lab in enumerate(lie.labels):
        v = lie.basis_vec(i)
        if literal:
            mp[lab] = B1.current(v) + B1.c * B1.current(lie.bracket(p, v))
        else:
            mp[lab] = B1.current(v) + B1.c.scale(lie.form(p, v))
    bad = []
    for i, a in enumerate(lie.labels):
        for j, b in enumerate(lie.labels):
            lhs = B0.P.stored(a, b).subs(mp, alg)
            rhs = master_bracket(B1.P, mp[a], mp[b])
            if lhs != rhs:
                bad.append((a, b))
    return bad


def brst_checks(B, weight_bound=4, samples=12, seed=0):
    """Reports for the structural identities of the complex."""
    lie, alg = B.lie, B.alg
    reports = []
    dd = master_bracket(B.P, B.d, B.d)
    reports.append(CheckReport("d_lambda_d", (), not dd, dd or None))
    reports.append(CheckReport("d_odd", (), B.d.parity() == 1, None))
    rng = random.Random(seed)
    pool = []
    w = Fraction(0)
    while w <= weight_bound:
        pool += monomials(B, w, degree=3)
        w += HALF
    bad = None
    for m in rng.sample(pool, min(samples, len(pool))):
        r = d0(B, d0(B, m))
        if r:
            bad = (m, r)
            break
    reports.append(CheckReport("d0_squared", (weight_bound,), bad is None, bad))
    for a in B.n_idx:
        for b in B.n_idx:
            u, v = lie.basis_vec(a), lie.basis_vec(b)
            r = master_bracket(B.P, B.X(u), B.X(v)) - LambdaPoly.const(B.X(lie.bracket(u, v)))
            reports.append(CheckReport("X_bracket", (lie.labels[a], lie.labels[b]), not r, r or None))
    for a in B.n_idx:
        u = lie.basis_vec(a)
        r = d0(B, alg.var("phi_" + lie.labels[a])) - current_J(B, u) - alg.const(lie.form(u, lie.f)) - B.Phi(u)
        reports.append(CheckReport("d0_phi", (lie.labels[a],), not r, r or None))
    for i in range(lie.dim):
        v = lie.basis_vec(i)
        r = master_bracket(B.P, B.d, current_J(B, v)) - d_on_J_formula(B, v)
        reports.append(CheckReport("d_on_J", (lie.labels[i],), not r, r or None))
    return reports
