"""Differential (super)polynomial algebras with exact rational coefficients.

A DiffAlgebra fixes an ordered list of generators, each even or odd, plus
optional central parameters (k, c, alpha, ...) that behave as even constants
killed by the derivation.  Elements are DiffPoly values: immutable maps from
canonical monomials to nonzero Fractions.

A monomial is a sorted tuple of ``(gen, order, exponent)`` triples.  Odd jets
always carry exponent 1 and the sign produced by sorting them is folded into
the coefficient.
"""

from __future__ import annotations

import re
from fractions import Fraction

__all__ = [
    "DiffAlgebra",
    "DiffPoly",
    "ParseError",
    "total_derivative_order",
    "is_total_derivative",
    "variational_derivative",
]


class ParseError(ValueError):
    pass


def _mono_mul(odd, a, b):
    """Product of two canonical monomials: (sign, monomial) or (0, None)."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    out = []
    i = j = 0
    na, nb = len(a), len(b)
    rem = 0
    for t in a:
        if odd[t[0]]:
            rem += 1
    sign = 1
    while i < na and j < nb:
        x, y = a[i], b[j]
        if (x[0], x[1]) < (y[0], y[1]):
            out.append(x)
            if odd[x[0]]:
                rem -= 1
            i += 1
        elif (y[0], y[1]) < (x[0], x[1]):
            if rem & 1 and odd[y[0]]:
                sign = -sign
            out.append(y)
            j += 1
        else:
            if odd[x[0]]:
                return 0, None
            out.append((x[0], x[1], x[2] + y[2]))
            i += 1
            j += 1
    if i < na:
        out.extend(a[i:])
    if j < nb:
        out.extend(b[j:])
    return sign, tuple(out)


def _remove_one(odd, mono, pos):
    """Pull one copy of factor ``pos`` to the front.

    Returns (sign, multiplicity, rest) with mono = sign * factor * rest
    counted ``multiplicity`` times (the exponent for even jets).
    """
    g, n, e = mono[pos]
    if odd[g]:
        before = 0
        for t in mono[:pos]:
            if odd[t[0]]:
                before += 1
        sign = -1 if before & 1 else 1
        return sign, 1, mono[:pos] + mono[pos + 1:]
    if e == 1:
        rest = mono[:pos] + mono[pos + 1:]
    else:
        rest = mono[:pos] + ((g, n, e - 1),) + mono[pos + 1:]
    return 1, e, rest


class DiffAlgebra:
    """Ordered generators (even or odd) plus central constant parameters."""

    def __init__(self, generators, params=()):
        names, parity = [], []
        for g in generators:
            if isinstance(g, str):
                names.append(g)
                parity.append(0)
            else:
                names.append(g[0])
                parity.append(int(g[1]) & 1)
        self.n_gens = len(names)
        for p in params:
            names.append(p)
            parity.append(0)
        if len(set(names)) != len(names):
            raise ValueError("generator names must be unique")
        for nm in names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", nm) or nm == "L":
                raise ValueError(f"bad generator name {nm!r}")
        self.names = tuple(names)
        self.odd = tuple(bool(p) for p in parity)
        self.params = tuple(params)
        self.index = {nm: i for i, nm in enumerate(names)}
        self._key = (self.names, self.odd, self.n_gens)
        self._dcache = {}

    def __eq__(self, other):
        return isinstance(other, DiffAlgebra) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"DiffAlgebra({list(self.names[:self.n_gens])}, params={list(self.params)})"

    @property
    def generators(self):
        return self.names[: self.n_gens]

    def is_param(self, g):
        return g >= self.n_gens

    def extend(self, generators=(), params=()):
        """New algebra with extra generators/params appended.

        Existing indices are kept only when no generators are added, so
        ``embed`` is a cheap re-wrap in the params-only case.
        """
        gens = [(nm, int(o)) for nm, o in zip(self.names[: self.n_gens], self.odd)]
        gens += [g if not isinstance(g, str) else (g, 0) for g in generators]
        return DiffAlgebra(gens, list(self.params) + [p for p in params if p not in self.params])

    # constructors
    def zero(self):
        return DiffPoly(self, {})

    def one(self):
        return DiffPoly(self, {(): Fraction(1)})

    def const(self, c):
        c = Fraction(c)
        return DiffPoly(self, {(): c} if c else {})

    def var(self, name, order=0):
        g = self.index[name] if isinstance(name, str) else name
        if self.is_param(g):
            if order:
                return self.zero()
            order = 0
        return DiffPoly(self, {((g, order, 1),): Fraction(1)})

    def jet_name(self, g, n):
        nm = self.names[g]
        if n == 0:
            return nm
        if n <= 3:
            return nm + "'" * n
        return f"{nm}^({n})"

    def parse(self, text):
        return parse_expression(self, text, allow_lambda=False)[0]

    def gens_of_parity(self, parity):
        return [i for i in range(self.n_gens) if self.odd[i] == bool(parity)]

    # monomial-level operations, memoised per algebra
    def _mono_derivative(self, mono):
        key = ("d", mono)
        hit = self._dcache.get(key)
        if hit is not None:
            return hit
        out = {}
        odd = self.odd
        for pos, (g, n, e) in enumerate(mono):
            if g >= self.n_gens:
                continue
            s1, mult, rest = _remove_one(odd, mono, pos)
            s2, m = _mono_mul(odd, ((g, n + 1, 1),), rest)
            if not s2:
                continue
            out[m] = out.get(m, 0) + s1 * s2 * mult
        res = tuple((m, c) for m, c in out.items() if c)
        self._dcache[key] = res
        return res

    def _mono_partial(self, mono, g, n):
        for pos, t in enumerate(mono):
            if t[0] == g and t[1] == n:
                s, mult, rest = _remove_one(self.odd, mono, pos)
                return s * mult, rest
        return 0, None

    def mono_parity(self, mono):
        p = 0
        for g, _, e in mono:
            if self.odd[g]:
                p ^= 1
        return p


class DiffPoly:
    """Immutable differential polynomial over Q."""

    __slots__ = ("alg", "terms", "_hash")

    def __init__(self, alg, terms):
        self.alg = alg
        self.terms = terms
        self._hash = None

    # helpers
    def _coerce(self, other):
        if isinstance(other, DiffPoly):
            if other.alg is not self.alg and other.alg != self.alg:
                raise ValueError("polynomials live in different algebras")
            return other
        if isinstance(other, (int, Fraction)):
            return self.alg.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.terms:
            return self
        t = dict(self.terms)
        for m, c in other.terms.items():
            v = t.get(m, 0) + c
            if v:
                t[m] = v
            else:
                t.pop(m, None)
        return DiffPoly(self.alg, t)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly(self.alg, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def scale(self, c):
        c = Fraction(c)
        if not c:
            return self.alg.zero()
        return DiffPoly(self.alg, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        odd = self.alg.odd
        t = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                s, m = _mono_mul(odd, m1, m2)
                if not s:
                    continue
                v = t.get(m, 0) + s * c1 * c2
                if v:
                    t[m] = v
                else:
                    del t[m]
        return DiffPoly(self.alg, t)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n):
        out = self.alg.one()
        for _ in range(n):
            out = out * self
        return out

    def __truediv__(self, c):
        return self.scale(Fraction(1) / Fraction(c))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.alg.const(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self.alg == other.alg and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"DiffPoly({str(self)!r})"

    def __str__(self):
        return format_poly(self)

    # structure
    def parity(self):
        """0 or 1 for homogeneous polynomials; raises on mixed parity."""
        ps = {self.alg.mono_parity(m) for m in self.terms}
        if len(ps) > 1:
            raise ValueError("polynomial is not parity-homogeneous")
        return ps.pop() if ps else 0

    def constant_term(self):
        return self.terms.get((), Fraction(0))

    def is_constant(self):
        """True when only parameters (no jets) occur."""
        n = self.alg.n_gens
        return all(all(g >= n for g, _, _ in m) for m in self.terms)

    def jets(self):
        out = set()
        n = self.alg.n_gens
        for m in self.terms:
            for g, k, _ in m:
                if g < n:
                    out.add((g, k))
        return out

    def degree(self):
        n = self.alg.n_gens
        return max((sum(e for g, _, e in m if g < n) for m in self.terms), default=0)

    def derivative(self, times=1):
        p = self
        for _ in range(times):
            alg = p.alg
            t = {}
            for m, c in p.terms.items():
                for m2, s in alg._mono_derivative(m):
                    v = t.get(m2, 0) + s * c
                    if v:
                        t[m2] = v
                    else:
                        del t[m2]
            p = DiffPoly(alg, t)
        return p

    def partial(self, gen, order=0):
        """Left partial derivative with respect to the jet gen^(order)."""
        alg = self.alg
        g = alg.index[gen] if isinstance(gen, str) else gen
        t = {}
        for m, c in self.terms.items():
            s, rest = alg._mono_partial(m, g, order)
            if s:
                v = t.get(rest, 0) + s * c
                if v:
                    t[rest] = v
                else:
                    del t[rest]
        return DiffPoly(alg, t)

    def split_by_jet(self):
        """Map jet -> left partial derivative, over every jet that occurs."""
        return {j: self.partial(*j) for j in sorted(self.jets())}

    def subs(self, mapping, target=None):
        """Replace generators by polynomials; jets go to derivatives of images.

        ``mapping`` maps generator names to DiffPoly values in ``target``
        (default: same algebra).  Unmapped names must exist in ``target``.
        """
        alg = self.alg
        target = target or alg
        cache = {}

        def image(g, n):
            key = (g, n)
            if key not in cache:
                nm = alg.names[g]
                if nm in mapping:
                    v = mapping[nm]
                    if not isinstance(v, DiffPoly):
                        v = target.const(v)
                    cache[key] = v.derivative(n) if n else v
                else:
                    cache[key] = target.var(nm, n)
            return cache[key]

        out = target.zero()
        for m, c in self.terms.items():
            term = target.const(c)
            for g, n, e in m:
                x = image(g, n)
                for _ in range(e):
                    term = term * x
                if not term:
                    break
            out = out + term
        return out

    def embed(self, target):
        """Same polynomial viewed in an algebra that extends this one by name."""
        if target == self.alg:
            return DiffPoly(target, self.terms)
        return self.subs({}, target)

    def coefficient_of(self, mono_poly):
        """Rational coefficient of a single-term polynomial's monomial."""
        (m,) = mono_poly.terms
        return self.terms.get(m, Fraction(0)) / mono_poly.terms[m]


# ---------------------------------------------------------------- calculus

def total_derivative_order(p):
    """Largest jet order present, or None for a constant."""
    js = p.jets()
    if not js:
        return None
    return max(n for _, n in js)


def variational_derivative(p, gen):
    alg = p.alg
    g = alg.index[gen] if isinstance(gen, str) else gen
    out = alg.zero()
    orders = sorted({n for (h, n) in p.jets() if h == g})
    for n in orders:
        term = p.partial(g, n)
        if n:
            term = term.derivative(n)
            if n & 1:
                term = -term
        out = out + term
    return out


def _integrate(q, g, n):
    """Antiderivative of q with respect to the (even) jet g^(n)."""
    alg = q.alg
    t = {}
    for m, c in q.terms.items():
        found = False
        new = []
        e_new = 1
        for (h, k, e) in m:
            if h == g and k == n:
                new.append((h, k, e + 1))
                e_new = e + 1
                found = True
            else:
                new.append((h, k, e))
        if not found:
            s, mm = _mono_mul(alg.odd, ((g, n, 1),), m)
            t[mm] = t.get(mm, 0) + s * c
        else:
            t[tuple(new)] = t.get(tuple(new), 0) + c / e_new
    return DiffPoly(alg, {m: c for m, c in t.items() if c})


def is_total_derivative(p):
    """(True, q) with q' = p when p lies in the image of the derivation.

    The decision is made by the Euler operator; the witness is built by
    peeling off the highest jet one generator at a time.
    """
    alg = p.alg
    if p.is_zero():
        return True, alg.zero()
    for g in range(alg.n_gens):
        if variational_derivative(p, g):
            return False, None
    if any(all(h >= alg.n_gens for h, _, _ in m) for m in p.terms):
        return False, None
    witness = alg.zero()
    rest = p
    guard = 0
    while rest:
        guard += 1
        if guard > 10000:
            raise RuntimeError("witness descent did not terminate")
        N = total_derivative_order(rest)
        if N is None or N == 0:
            return False, None
        top = max(g for (g, n) in rest.jets() if n == N)
        A = rest.partial(top, N)
        if alg.odd[top]:
            q = alg.var(top, N - 1) * A
        else:
            q = _integrate(A, top, N - 1)
        witness = witness + q
        rest = rest - q.derivative()
    return True, witness


def evolutionary_derivation(p, flows):
    """X_F(p) = sum over jets of (d^n F_g) * dp/dg^(n) for F given by name."""
    alg = p.alg
    out = alg.zero()
    for (g, n) in sorted(p.jets()):
        nm = alg.names[g]
        if nm not in flows:
            continue
        F = flows[nm]
        if not F:
            continue
        out = out + F.derivative(n) * p.partial(g, n)
    return out


def homotopy_density(grads):
    """Density h with delta h / delta g = grads[g], for a closed gradient.

    Uses the scaling homotopy: h = sum_g int_0^1 g * F_g(t u) dt.
    """
    alg = next(iter(grads.values())).alg
    out = alg.zero()
    n = alg.n_gens
    for nm, F in grads.items():
        gvar = alg.var(nm)
        for m, c in F.terms.items():
            deg = sum(e for h, _, e in m if h < n)
            term = gvar * DiffPoly(alg, {m: c / (deg + 1)})
            out = out + term
    return out


# ------------------------------------------------------------ text grammar

def _fmt_coeff(c):
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_monomial(alg, m):
    parts = []
    for g, n, e in m:
        j = alg.jet_name(g, n)
        parts.append(j if e == 1 else f"{j}^{e}")
    return "*".join(parts)


def _term_key(alg, m):
    n = alg.n_gens
    deg = sum(e for g, _, e in m if g < n)
    return (deg, m)


def format_poly(p):
    alg = p.alg
    if not p.terms:
        return "0"
    out = []
    for m in sorted(p.terms, key=lambda m: _term_key(alg, m)):
        c = p.terms[m]
        body = format_monomial(alg, m)
        neg = c < 0
        a = -c if neg else c
        if not body:
            s = _fmt_coeff(a)
        elif a == 1:
            s = body
        else:
            s = f"{_fmt_coeff(a)}*{body}"
        if not out:
            out.append(("-" if neg else "") + s)
        else:
            out.append((" - " if neg else " + ") + s)
    return "".join(out)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<dord>\^\(\d+\))"
    r"|(?P<op>[-+*^()']))"
)


def _tokenize(text):
    pos = 0
    toks = []
    text = text.strip()
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt or mt.end() == pos:
            raise ParseError(f"unexpected input at {text[pos:pos + 10]!r}")
        pos = mt.end()
        for kind in ("num", "id", "dord", "op"):
            v = mt.group(kind)
            if v is not None:
                toks.append((kind, v))
                break
    return toks


def parse_expression(alg, text, allow_lambda=False):
    """Parse the expression grammar into {lambda_degree: DiffPoly}.

    Returns a tuple (poly_at_degree_0_or_dict, raw_dict); with
    allow_lambda=False the first entry is a DiffPoly.
    """
    toks = _tokenize(text)
    pos = [0]

    def peek():
        return toks[pos[0]] if pos[0] < len(toks) else (None, None)

    def take():
        t = peek()
        pos[0] += 1
        return t

    def add(a, b, s=1):
        out = dict(a)
        for k, v in b.items():
            w = out.get(k, alg.zero()) + (v if s == 1 else -v)
            if w:
                out[k] = w
            else:
                out.pop(k, None)
        return out

    def mul(a, b):
        out = {}
        for i, x in a.items():
            for j, y in b.items():
                w = out.get(i + j, alg.zero()) + x * y
                if w:
                    out[i + j] = w
                else:
                    out.pop(i + j, None)
        return out

    def expr():
        sign = 1
        kind, v = peek()
        if kind == "op" and v in "+-":
            take()
            sign = -1 if v == "-" else 1
        acc = term()
        if sign < 0:
            acc = {k: -x for k, x in acc.items()}
        while True:
            kind, v = peek()
            if kind == "op" and v in "+-":
                take()
                acc = add(acc, term(), 1 if v == "+" else -1)
            else:
                return acc

    def term():
        acc = factor()
        while True:
            kind, v = peek()
            if kind == "op" and v == "*":
                take()
                acc = mul(acc, factor())
            else:
                return acc

    def factor():
        kind, v = take()
        if kind == "num":
            base = {0: alg.const(Fraction(v))}
        elif kind == "id":
            if v == "L":
                if not allow_lambda:
                    raise ParseError("lambda not allowed here")
                base = {1: alg.one()}
            else:
                if v not in alg.index:
                    raise ParseError(f"unknown generator {v!r}")
                order = 0
                while True:
                    k2, v2 = peek()
                    if k2 == "op" and v2 == "'":
                        take()
                        order += 1
                    elif k2 == "dord":
                        take()
                        order += int(v2[2:-1])
                    else:
                        break
                base = {0: alg.var(v, order)}
        elif kind == "op" and v == "(":
            base = expr()
            k2, v2 = take()
            if v2 != ")":
                raise ParseError("missing ')'")
            while True:
                k3, v3 = peek()
                if k3 == "op" and v3 == "'":
                    take()
                    base = {d: x.derivative() for d, x in base.items()}
                    base = {d: x for d, x in base.items() if x}
                else:
                    break
        elif kind == "op" and v == "-":
            inner = factor()
            return {k: -x for k, x in inner.items()}
        else:
            raise ParseError(f"unexpected token {v!r}")
        k2, v2 = peek()
        if k2 == "op" and v2 == "^":
            take()
            k3, v3 = take()
            if k3 != "num" or "/" in v3:
                raise ParseError("exponent must be a non-negative integer")
            res = {0: alg.one()}
            for _ in range(int(v3)):
                res = mul(res, base)
            base = res
        return base

    if not toks:
        raise ParseError("empty expression")
    out = expr()
    if pos[0] != len(toks):
        raise ParseError(f"trailing input near {toks[pos[0]][1]!r}")
    out = {k: v for k, v in out.items() if v}
    if not allow_lambda:
        return out.get(0, alg.zero()), out
    return out, out
