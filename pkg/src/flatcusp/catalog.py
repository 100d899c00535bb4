"""Built-in flat 2- and 3-manifold groups in lattice-adapted coordinates."""

from __future__ import annotations

from fractions import Fraction

from .crystal import CrystalGroupSpec, Word, check_group_axioms
from .exact_linalg import Matrix, Vector

_H = Fraction(1, 2)


def _spec(name, dim, gens, relators, mu_words) -> CrystalGroupSpec:
    names = tuple(g[0] for g in gens)
    return CrystalGroupSpec(
        dim=dim,
        names=names,
        holonomies=tuple(Matrix.diag(g[1]) for g in gens),
        translations=tuple(Vector(g[2]) for g in gens),
        relators=tuple(Word.parse(r, names) for r in relators),
        mu_words=tuple(Word.parse(w, names) for w in mu_words),
        name=name,
    )


def _torus(n: int) -> CrystalGroupSpec:
    names = "xyzuvw"[:n]
    gens = [(names[i], [1] * n, [int(i == j) for j in range(n)]) for i in range(n)]
    relators = [f"{a} {b} {a}^-1 {b}^-1" for i, a in enumerate(names) for b in names[i + 1:]]
    return _spec(f"torus-{n}", n, gens, relators, list(names))


def _klein_bottle() -> CrystalGroupSpec:
    return _spec(
        "klein-bottle",
        2,
        [("a", [1, -1], [_H, 0]), ("b", [1, 1], [0, 1])],
        ["a b a^-1 b"],
        ["a a", "b"],
    )


def _dicosm() -> CrystalGroupSpec:
    # half-turn space: a screw motion by pi about the first axis
    return _spec(
        "dicosm",
        3,
        [("a", [1, -1, -1], [_H, 0, 0]), ("y", [1, 1, 1], [0, 1, 0]), ("z", [1, 1, 1], [0, 0, 1])],
        ["a y a^-1 y", "a z a^-1 z", "y z y^-1 z^-1"],
        ["a a", "y", "z"],
    )


def _hantsche_wendt() -> CrystalGroupSpec:
    return _spec(
        "hantsche-wendt",
        3,
        [("a", [-1, -1, 1], [_H, _H, _H]), ("b", [1, -1, -1], [_H, 0, 0])],
        ["a b b a^-1 b b", "b a a b^-1 a a"],
        ["b b", "a b a b", "a a"],
    )


_BUILDERS = {
    "torus-2": lambda: _torus(2),
    "klein-bottle": _klein_bottle,
    "torus-3": lambda: _torus(3),
    "dicosm": _dicosm,
    "hantsche-wendt": _hantsche_wendt,
}


def catalog_names() -> list[str]:
    return list(_BUILDERS)


def catalog_lookup(name: str) -> CrystalGroupSpec:
    if name not in _BUILDERS:
        raise KeyError(f"unknown catalog entry {name!r}; available: {', '.join(_BUILDERS)}")
    spec = _BUILDERS[name]()
    report = check_group_axioms(spec)
    if not report.passed:
        raise AssertionError(f"catalog entry {name} is invalid:\n{report.summary()}")
    return spec
