"""Lambda-brackets on differential superalgebras.

A BracketPresentation stores {a_i λ a_j} on generators; everything else is
obtained from the master formula.  Two independent evaluation routes are
kept on purpose:

* ``master_bracket`` uses left Leibniz in the second slot and the closed
  right-Leibniz expansion in the first slot (table read directly).
* ``leibniz_bracket`` uses left Leibniz in both slots, reaching the first
  slot through skewsymmetry of the table.

For a table that is skewsymmetric on generators the two agree; comparing
them is the sesquilinearity/skewsymmetry self-test.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import comb

from .diffalg import DiffAlgebra, DiffPoly, ParseError, format_monomial, parse_expression, _fmt_coeff

__all__ = [
    "LambdaPoly",
    "BracketPresentation",
    "CheckReport",
    "master_bracket",
    "leibniz_bracket",
    "check_sesquilinearity",
    "check_skewsymmetry",
    "check_jacobi",
    "check_compatibility",
    "at_lambda_zero",
    "structure_matrix",
    "check_all_generators",
    "jacobi_residual",
    "parse_lambda",
]


class LambdaPoly:
    """Polynomial in λ with DiffPoly coefficients (λ even and central)."""

    __slots__ = ("alg", "coeffs")

    def __init__(self, alg, coeffs=None):
        self.alg = alg
        self.coeffs = {d: c for d, c in (coeffs or {}).items() if c}

    @classmethod
    def const(cls, p):
        return cls(p.alg, {0: p})

    def __add__(self, other):
        out = dict(self.coeffs)
        for d, c in other.coeffs.items():
            v = out.get(d)
            v = c if v is None else v + c
            if v:
                out[d] = v
            else:
                out.pop(d, None)
        return LambdaPoly(self.alg, out)

    def __neg__(self):
        return LambdaPoly(self.alg, {d: -c for d, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return LambdaPoly(self.alg, {d: v.scale(c) for d, v in self.coeffs.items()})

    def lmul(self, p):
        """p * self (p on the left)."""
        return LambdaPoly(self.alg, {d: p * v for d, v in self.coeffs.items()})

    def rmul(self, p):
        return LambdaPoly(self.alg, {d: v * p for d, v in self.coeffs.items()})

    def times_lambda(self, k=1):
        return LambdaPoly(self.alg, {d + k: v for d, v in self.coeffs.items()})

    def derivative(self):
        return LambdaPoly(self.alg, {d: v.derivative() for d, v in self.coeffs.items()})

    def degree(self):
        return max(self.coeffs, default=-1)

    def coeff(self, d):
        return self.coeffs.get(d, self.alg.zero())

    def is_zero(self):
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, LambdaPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def map(self, fn):
        return LambdaPoly(self.alg, {d: fn(v) for d, v in self.coeffs.items()})

    def embed(self, target):
        return LambdaPoly(target, {d: v.embed(target) for d, v in self.coeffs.items()})

    def subs(self, mapping, target=None):
        target = target or self.alg
        return LambdaPoly(target, {d: v.subs(mapping, target) for d, v in self.coeffs.items()})

    def skew_substitute(self):
        """Replace λ by -λ-∂ with ∂ acting on the coefficients."""
        out = {}
        for n, p in self.coeffs.items():
            dp = p
            for r in range(n + 1):
                c = comb(n, r) * (-1) ** n
                term = dp.scale(c)
                d = n - r
                out[d] = out[d] + term if d in out else term
                dp = dp.derivative()
        return LambdaPoly(self.alg, out)

    def shift_apply(self, n):
        """(λ+∂)^n applied to self, ∂ acting on the coefficients."""
        if n == 0:
            return self
        out = {}
        for d, p in self.coeffs.items():
            dp = p
            for r in range(n + 1):
                term = dp.scale(comb(n, r))
                e = d + n - r
                out[e] = out[e] + term if e in out else term
                dp = dp.derivative()
        return LambdaPoly(self.alg, out)

    def __str__(self):
        return format_lambda(self)

    def __repr__(self):
        return f"LambdaPoly({str(self)!r})"


def format_lambda(lp):
    if not lp.coeffs:
        return "0"
    pieces = []
    alg = lp.alg
    for d in sorted(lp.coeffs):
        p = lp.coeffs[d]
        lam = "" if d == 0 else ("L" if d == 1 else f"L^{d}")
        for m in sorted(p.terms, key=lambda m: (sum(e for g, _, e in m if g < alg.n_gens), m)):
            c = p.terms[m]
            body = "*".join(x for x in (lam, format_monomial(alg, m)) if x)
            a = -c if c < 0 else c
            if not body:
                s = _fmt_coeff(a)
            elif a == 1:
                s = body
            else:
                s = f"{_fmt_coeff(a)}*{body}"
            if not pieces:
                pieces.append(("-" if c < 0 else "") + s)
            else:
                pieces.append((" - " if c < 0 else " + ") + s)
    return "".join(pieces)


def parse_lambda(alg, text):
    d, _ = parse_expression(alg, text, allow_lambda=True)
    return LambdaPoly(alg, d)


def parity_split(p):
    parts = {}
    for m, c in p.terms.items():
        par = p.alg.mono_parity(m)
        parts.setdefault(par, {})[m] = c
    return {k: DiffPoly(p.alg, v) for k, v in parts.items()}


@dataclass
class CheckReport:
    check: str
    arguments: tuple
    passed: bool
    residual: object = None

    def as_dict(self):
        return {
            "check": self.check,
            "arguments": [str(a) for a in self.arguments],
            "pass": self.passed,
            "residual": None if self.residual is None else str(self.residual),
        }


class BracketPresentation:
    """Generators of a differential algebra with a λ-bracket table.

    ``table`` maps (name_i, name_j) to LambdaPoly.  Pairs missing in both
    orientations are zero; a pair whose mirror is stored is completed by
    skewsymmetry.
    """

    def __init__(self, alg, table, name=""):
        self.alg = alg
        self.name = name
        self._raw = {}
        for (a, b), v in table.items():
            i = alg.index[a] if isinstance(a, str) else a
            j = alg.index[b] if isinstance(b, str) else b
            if not isinstance(v, LambdaPoly):
                v = LambdaPoly.const(v) if isinstance(v, DiffPoly) else LambdaPoly(alg, {})
            self._raw[(i, j)] = v
        self._full = {}
        self._gen_cache = {}
        self._right_cache = {}

    def entry(self, i, j):
        key = (i, j)
        hit = self._full.get(key)
        if hit is not None:
            return hit
        if key in self._raw:
            v = self._raw[key]
        elif (j, i) in self._raw:
            s = -1 if (self.alg.odd[i] and self.alg.odd[j]) else 1
            v = self._raw[(j, i)].skew_substitute().scale(-s)
        else:
            v = LambdaPoly(self.alg, {})
        self._full[key] = v
        return v

    def stored(self, a, b):
        """Table entry by generator names (completed by skewsymmetry)."""
        return self.entry(self.alg.index[a], self.alg.index[b])

    def gens(self):
        return list(range(self.alg.n_gens))

    def raw_pairs(self):
        return dict(self._raw)

    # --------------------------------------------------------- serialization
    def to_text(self):
        alg = self.alg
        lines = ["generators: " + ", ".join(
            nm + (":odd" if alg.odd[i] else "") for i, nm in enumerate(alg.generators))]
        if alg.params:
            lines.append("params: " + ", ".join(alg.params))
        for (i, j) in sorted(self._raw):
            lines.append(f"{{{alg.names[i]}, {alg.names[j]}}} = {format_lambda(self._raw[(i, j)])}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, name=""):
        gens, params, rows = [], [], []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("generators:"):
                for tok in line.split(":", 1)[1].split(","):
                    tok = tok.strip()
                    if not tok:
                        continue
                    nm, _, par = tok.partition(":")
                    gens.append((nm.strip(), 1 if par.strip() == "odd" else 0))
            elif line.startswith("params:"):
                params += [t.strip() for t in line.split(":", 1)[1].split(",") if t.strip()]
            else:
                mt = re.fullmatch(r"\{\s*(\w+)\s*,\s*(\w+)\s*\}\s*=\s*(.+)", line)
                if not mt:
                    raise ParseError(f"cannot read line {line!r}")
                rows.append(mt.groups())
        alg = DiffAlgebra(gens, params)
        table = {(a, b): parse_lambda(alg, e) for a, b, e in rows}
        return cls(alg, table, name)

    # -------------------------------------------------------------- algebra
    def scaled_sum(self, other, alpha_name="alpha"):
        """Presentation alpha*self + other on the algebra extended by alpha."""
        alg2 = self.alg.extend(params=[alpha_name])
        alpha = alg2.var(alpha_name)
        keys = set(self._raw) | set(other._raw)
        table = {}
        for (i, j) in keys:
            a = self.entry(i, j).embed(alg2).rmul(alpha)
            b = other.entry(i, j).embed(alg2)
            table[(alg2.names[i], alg2.names[j])] = a + b
        return BracketPresentation(alg2, table, f"{alpha_name}*{self.name}+{other.name}")


# --------------------------------------------------------------- brackets

def _gen_bracket_poly(P, i, g):
    """{a_i λ g} via left Leibniz in the second argument."""
    alg = P.alg
    out = LambdaPoly(alg, {})
    for (j, n) in sorted(g.jets()):
        part = g.partial(j, n)
        if not part:
            continue
        out = out + P.entry(i, j).shift_apply(n).rmul(part)
    return out


def _right_with_gen(P, f, j):
    """{f λ a_j} from the closed right-Leibniz expansion of the first slot."""
    key = (f, j)
    hit = P._right_cache.get(key)
    if hit is not None:
        return hit
    alg = P.alg
    out = LambdaPoly(alg, {})
    pj = alg.odd[j]
    for (i, m) in sorted(f.jets()):
        D = f.partial(i, m)
        if not D:
            continue
        t = P.entry(i, j)
        if not t:
            continue
        for par, Dp in parity_split(D).items():
            sign = -1 if (par and pj) else 1
            if m & 1:
                sign = -sign
            for k, tk in t.coeffs.items():
                N = k + m
                dD = Dp
                for r in range(N + 1):
                    term = (tk * dD).scale(sign * comb(N, r))
                    out = out + LambdaPoly(alg, {N - r: term})
                    dD = dD.derivative()
    P._right_cache[key] = out
    return out


def master_bracket(P, f, g):
    """{f λ g} for arbitrary differential polynomials f, g."""
    alg = P.alg
    if f.alg != alg or g.alg != alg:
        raise ValueError("arguments outside the presentation's algebra")
    out = LambdaPoly(alg, {})
    for (j, n) in sorted(g.jets()):
        part = g.partial(j, n)
        if not part:
            continue
        inner = _right_with_gen(P, f, j)
        if inner:
            out = out + inner.shift_apply(n).rmul(part)
    return out


def leibniz_bracket(P, f, g):
    """{f λ g} through skewsymmetry: {f λ a_j} = -p(f,a_j) {a_j -λ-∂ f}."""
    alg = P.alg
    out = LambdaPoly(alg, {})
    for (j, n) in sorted(g.jets()):
        part = g.partial(j, n)
        if not part:
            continue
        inner = LambdaPoly(alg, {})
        for par, fp in parity_split(f).items():
            s = -1 if (par and alg.odd[j]) else 1
            inner = inner + _gen_bracket_poly(P, j, fp).skew_substitute().scale(-s)
        out = out + inner.shift_apply(n).rmul(part)
    return out


def at_lambda_zero(lp):
    return lp.coeff(0)


def structure_matrix(P, generators=None):
    """H[j][i] = {u_i λ u_j}, λ read as ∂ acting to the right."""
    alg = P.alg
    names = generators or list(alg.generators)
    idx = [alg.index[n] for n in names]
    return [[P.entry(i, j) for i in idx] for j in idx]


def _parity(p):
    return p.parity() if p else 0


def check_sesquilinearity(P, a, b):
    # cross-route residual first: table read directly vs. through skewsymmetry
    ab0 = master_bracket(P, a, b)
    res = [-(ab0.times_lambda() + leibniz_bracket(P, a.derivative(), b))]
    for route in (master_bracket, leibniz_bracket):
        ab = route(P, a, b)
        r1 = route(P, a.derivative(), b) + ab.times_lambda()
        r2 = route(P, a, b.derivative()) - ab.shift_apply(1)
        res.append(r1)
        res.append(r2)
    bad = [r for r in res if r]
    return CheckReport("sesquilinearity", (a, b), not bad, bad[0] if bad else None)


def check_skewsymmetry(P, a, b):
    ab = master_bracket(P, a, b)
    ba = master_bracket(P, b, a)
    s = -1 if (_parity(a) and _parity(b)) else 1
    r = ba + ab.skew_substitute().scale(s)
    return CheckReport("skewsymmetry", (a, b), not r, r or None)


class TwoVar:
    """Polynomial in λ, μ with DiffPoly coefficients: {(i, j): DiffPoly}."""

    def __init__(self, alg, terms=None):
        self.alg = alg
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    def add_term(self, key, p):
        v = self.terms.get(key)
        v = p if v is None else v + p
        if v:
            self.terms[key] = v
        else:
            self.terms.pop(key, None)

    def __bool__(self):
        return bool(self.terms)

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"L^{i}*M^{j}*({p})" for (i, j), p in sorted(self.terms.items()))


def jacobi_residual(P, a, b, c):
    """{a_λ{b_μ c}} - p(a,b){b_μ{a_λ c}} - {{a_λ b}_{λ+μ} c} as TwoVar."""
    alg = P.alg
    out = TwoVar(alg)
    bc = master_bracket(P, b, c)
    for j, q in bc.coeffs.items():
        for i, r in master_bracket(P, a, q).coeffs.items():
            out.add_term((i, j), r)
    s = -1 if (_parity(a) and _parity(b)) else 1
    ac = master_bracket(P, a, c)
    for i, q in ac.coeffs.items():
        for j, r in master_bracket(P, b, q).coeffs.items():
            out.add_term((i, j), r.scale(-s))
    ab = master_bracket(P, a, b)
    for i, q in ab.coeffs.items():
        for r_deg, r in master_bracket(P, q, c).coeffs.items():
            for t in range(r_deg + 1):
                out.add_term((i + t, r_deg - t), r.scale(-comb(r_deg, t)))
    return out


def check_jacobi(P, a, b, c):
    r = jacobi_residual(P, a, b, c)
    return CheckReport("jacobi", (a, b, c), not r, r or None)


def generator_polys(P, names=None):
    alg = P.alg
    names = names or list(alg.generators)
    return [alg.var(n) for n in names]


def check_all_generators(P, names=None, skew=True, jacobi=True):
    """Run skewsymmetry on all pairs and Jacobi on all ordered triples."""
    gens = generator_polys(P, names)
    reports = []
    for a in gens:
        for b in gens:
            reports.append(check_sesquilinearity(P, a, b))
            if skew:
                reports.append(check_skewsymmetry(P, a, b))
    if jacobi:
        for a in gens:
            for b in gens:
                for c in gens:
                    reports.append(check_jacobi(P, a, b, c))
    return reports


def check_compatibility(P1, P2, generators=None, alpha_name="alpha"):
    """Jacobi of alpha*P1 + P2 on all generator triples, identically in alpha."""
    Q = P1.scaled_sum(P2, alpha_name)
    gens = generator_polys(Q, generators)
    reports = []
    for a in gens:
        for b in gens:
            for c in gens:
                r = check_jacobi(Q, a, b, c)
                r.check = "compatibility"
                reports.append(r)
    return reports
