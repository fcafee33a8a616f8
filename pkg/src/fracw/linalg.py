"""Exact rational linear algebra, a thin layer over sympy's DomainMatrix.

Rows may be dense lists or sparse dicts {column: value}; matrices are
built in sympy's sparse format either way.
"""

from fractions import Fraction

from sympy import QQ
from sympy.polys.matrices import DomainMatrix


def _q(x):
    if isinstance(x, Fraction):
        return QQ(x.numerator, x.denominator)
    x = Fraction(x)
    return QQ(x.numerator, x.denominator)


def _f(x):
    return Fraction(int(x.numerator), int(x.denominator))


def _row_items(r):
    if isinstance(r, dict):
        return r.items()
    return enumerate(r)


def to_dm(rows, ncols=None):
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    data = {}
    for i, r in enumerate(rows):
        d = {j: _q(v) for j, v in _row_items(r) if v}
        if d:
            data[i] = d
    return DomainMatrix(data, (len(rows), ncols), QQ)


def _rref(rows, ncols):
    R, piv = to_dm(rows, ncols).rref()
    return R.to_sdm(), piv


def rank(rows, ncols=None):
    if not rows:
        return 0
    return to_dm(rows, ncols).rank()


def nullspace(rows, ncols=None):
    """Basis of {v : rows . v = 0} as lists of Fractions."""
    if ncols is None:
        ncols = len(rows[0])
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    R, piv = _rref(rows, ncols)
    pivset = set(piv)
    out = []
    for free in range(ncols):
        if free in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for r, p in enumerate(piv):
            c = R.get(r, {}).get(free)
            if c:
                v[p] = -_f(c)
        out.append(v)
    return out


def solve(rows, rhs, ncols=None):
    """One solution of rows . v = rhs (free variables 0), or None."""
    sols = solve_many(rows, [rhs], ncols)
    return None if sols is None else sols[0]


def solve_many(rows, rhs_cols, ncols=None):
    """Solve rows . V = B column by column sharing one elimination."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    k = len(rhs_cols)
    if not rows:
        return [[Fraction(0)] * ncols for _ in range(k)]
    aug = []
    for i, r in enumerate(rows):
        d = {j: v for j, v in _row_items(r) if v}
        for c, col in enumerate(rhs_cols):
            if col[i]:
                d[ncols + c] = col[i]
        aug.append(d)
    R, piv = _rref(aug, ncols + k)
    if any(p >= ncols for p in piv):
        return None
    out = []
    for c in range(k):
        sol = [Fraction(0)] * ncols
        for r, p in enumerate(piv):
            v = R.get(r, {}).get(ncols + c)
            if v:
                sol[p] = _f(v)
        out.append(sol)
    return out


def inverse(rows):
    n = len(rows)
    if n == 0:
        return []
    eye = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    cols = solve_many(rows, [[eye[i][c] for i in range(n)] for c in range(n)], n)
    if cols is None:
        raise ValueError("singular matrix")
    return [[cols[c][r] for c in range(n)] for r in range(n)]
