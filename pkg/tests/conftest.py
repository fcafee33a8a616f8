import functools

import pytest

from fracw.dsred import FractionalDS
from fracw.liealg import make_sl


@functools.lru_cache(maxsize=None)
def ds_cached(n, nilpotent, m, k):
    return FractionalDS(make_sl(n, nilpotent), m, k)


@functools.lru_cache(maxsize=None)
def w_cached(n, nilpotent, m, k):
    return ds_cached(n, nilpotent, m, k).w_algebra()


@functools.lru_cache(maxsize=None)
def sl2_hamiltonians(count=4):
    from fracw.hamflow import w_hamiltonians
    W = w_cached(2, "principal", 1, "k")
    return w_hamiltonians(W, count)


@pytest.fixture(scope="session")
def sl2():
    return make_sl(2)


@pytest.fixture(scope="session")
def sl3min():
    return make_sl(3, "minimal")


@pytest.fixture(scope="session")
def sl2_W1():
    return w_cached(2, "principal", 1, "k")


def loop_coefficient(lie, data, template, level=None):
    """Scalar X with data = template * X on the support of template (and zero
    elsewhere at the same level); None if the data is not of that shape."""
    from fracw.hamflow import _lvl
    idx = {k: v for k, v in template.items()}
    keys = [(lie.index[a], j) for (a, j) in idx]
    lvls = {_lvl(lie, key) for key in keys}
    if level is None:
        (level,) = lvls
    X = None
    for key, val in data.items():
        if _lvl(lie, key) != level or not val:
            continue
        name = (lie.labels[key[0]], key[1])
        if name not in idx:
            return None
        cand = val.scale(1 / idx[name])
        if X is None:
            X = cand
        elif X != cand:
            return None
    if X is None:
        return "zero"
    for (a, j) in idx:
        if data.get((lie.index[a], j)) is None:
            return None
    return X


LAMBDA_Z = lambda n: {("f", n - 1): -1, ("e", n - 2): -1}  # noqa: E731  Λ_1 z^n, Λ_1 = -f z^-1 - e z^-2
H_Z = lambda n: {("x", n): 2}  # noqa: E731  h z^n with h = 2x
K_Z = lambda n: {("e", n): -1, ("f", n + 1): 1}  # noqa: E731  (-e + fz) z^n


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
