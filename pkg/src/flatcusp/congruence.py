"""Congruence quotients, the translation subgroups T_p, and separation witnesses.

``T_p`` is generated by the images of translation by ``p e_i`` (cone-scaled
coordinates) under a fixed embedding. An element of the stabilizer of ``v1``
outside ``T_p`` is separated from it by a reduction map ``Z -> Z/mZ``:

* if its upper-left ``n x n`` block is not ``I``, reduce modulo the least prime
  not dividing the first non-identity entry of that block;
* otherwise its translation row is not divisible by ``p``, so reduce mod ``p``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .embed import EmbeddingResult, translation_image
from .exact_linalg import (
    LinalgError,
    Matrix,
    Vector,
    denominator_lcm,
    lattice_intersection,
    mat_inverse,
)
from .verify import check_isometry

ENUMERATION_BOUND = 10**6

HOLONOMY_BLOCK = "holonomy-block"
TRANSLATION_ROW = "translation-row"
OUTSIDE_STABILIZER = "outside-stabilizer"
MEMBER = "member"


class EnumerationBoundError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModMatrix:
    entries: tuple[tuple[int, ...], ...]
    modulus: int

    def __post_init__(self):
        if self.modulus < 2:
            raise ValueError("modulus must be at least 2")

    @classmethod
    def identity(cls, n: int, m: int) -> "ModMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), m)

    @property
    def size(self) -> int:
        return len(self.entries)

    def __matmul__(self, other: "ModMatrix") -> "ModMatrix":
        if other.modulus != self.modulus:
            raise ValueError("moduli differ")
        m = self.modulus
        cols = tuple(zip(*other.entries))
        return ModMatrix(
            tuple(tuple(sum(a * b for a, b in zip(r, c)) % m for c in cols) for r in self.entries),
            m,
        )

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.entries]


def reduce_mod(x: Matrix, m: int) -> ModMatrix:
    if not x.is_integral():
        raise LinalgError("cannot reduce a non-integral matrix")
    return ModMatrix(tuple(tuple(int(v) % m for v in r) for r in x.entries), m)


@dataclass(frozen=True)
class TranslationSubgroup:
    p: int
    n: int
    generators: tuple[Matrix, ...]

    @property
    def vectors(self) -> tuple[Vector, ...]:
        return tuple(Vector.unit(self.n, i) * self.p for i in range(self.n))


def build_Tp(result: EmbeddingResult, p: int) -> TranslationSubgroup:
    if p < 1:
        raise ValueError("p must be positive")
    n = result.dim
    gens = []
    for i in range(n):
        m = translation_image(result, Vector.unit(n, i) * p)
        if not m.is_integral():
            raise ValueError(
                f"translations by {p} are not integral for this embedding (K={result.K}); "
                "choose a multiple of p"
            )
        if not check_isometry(m, result.form):
            raise AssertionError(f"translation by {p}e{i + 1} is not an isometry")
        gens.append(m)
    return TranslationSubgroup(p, n, tuple(gens))


def tp_image_mod(
    tp: TranslationSubgroup, m: int, bound: int = ENUMERATION_BOUND
) -> frozenset[ModMatrix]:
    """Enumerate the reduction of ``T_p`` modulo ``m`` by closure."""
    gens = [reduce_mod(g, m) for g in tp.generators]
    start = ModMatrix.identity(tp.n + 2, m)
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = x @ g
            if y not in seen:
                seen.add(y)
                if len(seen) > bound:
                    raise EnumerationBoundError(f"image mod {m} exceeds {bound} elements")
                queue.append(y)
    return frozenset(seen)


def smallest_prime_not_dividing(k: int) -> int:
    q = 2
    while True:
        if all(q % d for d in range(2, math.isqrt(q) + 1)) and k % q:
            return q
        q += 1


@dataclass(frozen=True)
class SeparationWitness:
    """Evidence that ``element`` lies outside ``T_p``.

    For the two congruence cases, ``image`` is the reduction of the element
    modulo ``modulus``, ``entry`` a position whose residue differs from the
    identity there while every element of the enumerated ``T_p`` image agrees
    with the identity there, and ``image_order`` the size of that image.
    """

    case: str
    p: int
    element: Matrix
    modulus: int | None = None
    image: ModMatrix | None = None
    entry: tuple[int, int] | None = None
    image_order: int | None = None
    tp_image: frozenset = field(default=frozenset(), repr=False, compare=False)

    def certify(self, tp: TranslationSubgroup, v1: Vector | None = None) -> bool:
        """Re-derive the exclusion from scratch."""
        if self.case == OUTSIDE_STABILIZER:
            v1 = v1 if v1 is not None else Vector.unit(tp.n + 2, tp.n)
            return self.element @ v1 != v1
        image = tp_image_mod(tp, self.modulus)
        return reduce_mod(self.element, self.modulus) not in image


def translation_vector(x: Matrix, n: int) -> Vector:
    """Translation part of a translation-type stabilizer element (cone coords)."""
    return -Vector(x.entries[n][:n])


def is_in_Tp(gamma: Matrix, tp: TranslationSubgroup, result: EmbeddingResult) -> bool:
    n = tp.n
    if not gamma.submatrix(range(n), range(n)).is_identity():
        return False
    u = translation_vector(gamma, n)
    if not u.is_integral() or any(int(x) % tp.p for x in u):
        return False
    return gamma == translation_image(result, u)


def separate(
    gamma: Matrix, tp: TranslationSubgroup, result: EmbeddingResult
) -> SeparationWitness | str:
    """Return ``MEMBER`` or a witness separating ``gamma`` from ``T_p``."""
    n = tp.n
    if gamma.shape != (n + 2, n + 2):
        raise ValueError(f"element must be {n + 2}x{n + 2}")
    if not gamma.is_integral():
        raise ValueError("element is not integral")
    if not check_isometry(gamma, result.form):
        raise ValueError("element is not an isometry of the invariant form")
    v1 = result.v1
    if gamma @ v1 != v1:
        return SeparationWitness(OUTSIDE_STABILIZER, tp.p, gamma)
    if is_in_Tp(gamma, tp, result):
        return MEMBER

    block = gamma.submatrix(range(n), range(n))
    diff = [
        ((i, j), int(block[i, j]) - int(i == j))
        for i in range(n)
        for j in range(n)
        if block[i, j] != int(i == j)
    ]
    if diff:
        entry, value = diff[0]
        modulus = smallest_prime_not_dividing(value)
        case = HOLONOMY_BLOCK
    else:
        u = translation_vector(gamma, n)
        k = next((k for k in range(n) if int(u[k]) % tp.p), None)
        if k is None:
            # rigidity: the upper block determines the isometry
            raise AssertionError(f"translation-type isometry outside T_{tp.p}: {gamma}")
        entry, modulus, case = (n, k), tp.p, TRANSLATION_ROW

    image = tp_image_mod(tp, modulus)
    reduced = reduce_mod(gamma, modulus)
    if reduced in image:
        raise AssertionError(f"reduction mod {modulus} failed to separate {gamma}")
    return SeparationWitness(case, tp.p, gamma, modulus, reduced, entry, len(image), image)


# -- closing the separability argument ----------------------------------------


@dataclass(frozen=True)
class ClosureReport:
    p: int
    r: int
    gamma_lattice: Matrix
    intersection: Matrix
    trp: TranslationSubgroup
    trp_in_gamma: bool
    separations: tuple[tuple[str, SeparationWitness | str], ...]

    @property
    def passed(self) -> bool:
        return self.trp_in_gamma and all(
            isinstance(w, str) or w.case == OUTSIDE_STABILIZER or w.certify(self.trp)
            for _, w in self.separations
        )


def gamma_translation_lattice(result: EmbeddingResult) -> Matrix:
    """Columns span the translations of the group, read off the mu images."""
    return Matrix.from_columns([translation_vector(m, result.dim) for m in result.mu_hat])


def minimal_r(lattice: Matrix, p: int) -> int:
    """Least ``r`` with ``r p Z^n`` inside the lattice spanned by the columns."""
    return denominator_lcm(mat_inverse(lattice) * p)


def demo_theorem_closure(
    result: EmbeddingResult,
    p: int,
    r: int | None = None,
    elements: Iterable[tuple[str, Matrix]] | None = None,
) -> ClosureReport:
    """Exhibit ``T_rp <= T_Gamma ∩ T_p`` and separate sample elements from ``T_rp``."""
    n = result.dim
    L = gamma_translation_lattice(result)
    inter = lattice_intersection(L, Matrix.identity(n) * p)
    r_min = minimal_r(inter, p)
    if r is None:
        r = r_min
    elif r % r_min:
        raise ValueError(f"T_{r * p} is not inside T_Gamma ∩ T_{p}; r must be a multiple of {r_min}")
    trp = build_Tp(result, r * p)

    # each T_rp generator must be an explicit product of the mu images
    Linv = mat_inverse(L)
    ident = Matrix.identity(n + 2)
    inside = True
    for vec, g in zip(trp.vectors, trp.generators):
        coeffs = Linv @ vec
        if not coeffs.is_integral():
            inside = False
            break
        prod = ident
        for k, mu in zip(coeffs, result.mu_hat):
            prod = prod @ (mu ** int(k))
        inside &= prod == g

    if elements is None:
        elements = [("translation by e1", translation_image(result, Vector.unit(n, 0)))]
        elements += list(zip(result.names, result.matrices))
    seps = []
    for label, x in elements:
        if not x.is_integral():
            continue
        seps.append((label, separate(x, trp, result)))
    return ClosureReport(p, r, L, inter, trp, inside, tuple(seps))
