from fractions import Fraction
from itertools import product
from pathlib import Path

import pytest

from flatcusp.catalog import catalog_lookup, catalog_names
from flatcusp.embed import embed_pipeline
from flatcusp.exact_linalg import Matrix

GROUPS = Path(__file__).resolve().parent.parent / "groups"

H = Fraction(1, 2)

# reference values for the Hantsche-Wendt embedding
EXPECTED_HW_A = Matrix(
    [
        [-1, 0, 0, 0, 2],
        [0, -1, 0, 0, 2],
        [0, 0, 1, 0, 2],
        [1, 1, -1, 1, -3],
        [0, 0, 0, 0, 1],
    ]
)
EXPECTED_HW_B = Matrix(
    [
        [1, 0, 0, 0, 2],
        [0, -1, 0, 0, 0],
        [0, 0, -1, 0, 0],
        [-1, 0, 0, 1, -1],
        [0, 0, 0, 0, 1],
    ]
)
# x^2 + y^2 + z^2 + 4wt
EXPECTED_HW_FORM = Matrix(
    [
        [1, 0, 0, 0, 0],
        [0, 1, 0, 0, 0],
        [0, 0, 1, 0, 0],
        [0, 0, 0, 0, 2],
        [0, 0, 0, 2, 0],
    ]
)


@pytest.fixture(scope="session")
def embeddings():
    return {name: embed_pipeline(catalog_lookup(name)) for name in catalog_names()}


@pytest.fixture(scope="session")
def hw(embeddings):
    return embeddings["hantsche-wendt"]


@pytest.fixture(scope="session")
def groups_dir():
    return GROUPS


def random_pd_seed(rng, n):
    """A random rational positive definite matrix L L^T + I/k."""
    rows = []
    for i in range(n):
        rows.append([Fraction(rng.randint(-4, 4), rng.randint(1, 3)) if j <= i else 0 for j in range(n)])
    L = Matrix(rows)
    return L @ L.T + Matrix.identity(n) * Fraction(1, rng.randint(1, 5))


def residues(m, mod):
    return tuple(tuple(int(x) % mod for x in r) for r in m.entries)


def power_oracle(tp, mod):
    """All products g1^k1 ... gn^kn of the T_p generators, reduced mod m.

    Independent of the breadth-first enumeration: powers are taken in exact
    integers and reduced only at the end.
    """
    ident = Matrix.identity(tp.n + 2)
    orders = []
    for g in tp.generators:
        k, x = 1, g
        while residues(x, mod) != residues(ident, mod):
            x, k = x @ g, k + 1
        orders.append(k)
    out = set()
    for ks in product(*(range(k) for k in orders)):
        x = ident
        for g, k in zip(tp.generators, ks):
            x = x @ g ** k
        out.add(residues(x, mod))
    return out


# -- acceptance summary -------------------------------------------------------

_ACCEPTANCE = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    _ACCEPTANCE[number] = (title, call.excinfo is None)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}")
