"""Crystallographic groups given by generators, relators and translation words.

Coordinates are lattice-adapted throughout: the translation lattice is
``Z^n``, the ``j``-th translation word evaluates to translation by ``e_j`` and
every holonomy matrix is integral.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence, TypeVar

from .exact_linalg import Matrix, Vector, smith_normal_form, solve_linear
from .report import Check, VerificationReport

HOLONOMY_BOUND = 10_000

T = TypeVar("T")


class CrystalError(ValueError):
    pass


class InconsistentSystemError(CrystalError):
    pass


class HolonomyNotFiniteError(CrystalError):
    pass


@dataclass(frozen=True)
class AffineIsometry:
    """The rigid motion ``v -> holonomy @ v + translation``."""

    holonomy: Matrix
    translation: Vector

    def __post_init__(self):
        if not self.holonomy.is_square or self.holonomy.rows != self.translation.dim:
            raise CrystalError("holonomy and translation dimensions disagree")

    @classmethod
    def identity(cls, n: int) -> "AffineIsometry":
        return cls(Matrix.identity(n), Vector.zeros(n))

    @classmethod
    def translation_by(cls, t: Vector) -> "AffineIsometry":
        return cls(Matrix.identity(t.dim), t)

    @property
    def dim(self) -> int:
        return self.translation.dim

    def __matmul__(self, other: "AffineIsometry") -> "AffineIsometry":
        # (θ1, t1)∘(θ2, t2) = (θ1θ2, t1 + θ1 t2)
        return AffineIsometry(
            self.holonomy @ other.holonomy,
            self.translation + self.holonomy @ other.translation,
        )

    def inverse(self) -> "AffineIsometry":
        hinv = self.holonomy.inverse()
        return AffineIsometry(hinv, -(hinv @ self.translation))

    def apply(self, v: Vector) -> Vector:
        return self.holonomy @ v + self.translation

    def is_translation(self) -> bool:
        return self.holonomy.is_identity()


@dataclass(frozen=True)
class Word:
    """A word in the generators: a sequence of ``(index, ±1)`` letters."""

    letters: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        for g, e in self.letters:
            if e not in (1, -1) or g < 0:
                raise CrystalError(f"bad letter {(g, e)}")

    def __add__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.letters)))

    def max_generator(self) -> int:
        return max((g for g, _ in self.letters), default=-1)

    @classmethod
    def parse(cls, text: str, names: Sequence[str]) -> "Word":
        """Parse whitespace-separated tokens ``x`` or ``x^-1``."""
        index = {name: i for i, name in enumerate(names)}
        letters = []
        for tok in text.split():
            name, exp = (tok[:-3], -1) if tok.endswith("^-1") else (tok, 1)
            if name not in index:
                raise CrystalError(f"unknown generator {name!r} in word {text!r}")
            letters.append((index[name], exp))
        return cls(tuple(letters))

    def format(self, names: Sequence[str]) -> str:
        return " ".join(names[g] + ("^-1" if e < 0 else "") for g, e in self.letters)


def evaluate_word(
    word: Word,
    images: Sequence[T],
    identity: T | None = None,
    inverse: Callable[[T], T] | None = None,
) -> T:
    """Multiply out ``word`` over ``images``.

    Works for anything with ``@`` and an ``inverse()`` method, so the same
    routine evaluates affine isometries and matrices.
    """
    if identity is None:
        first = images[0]
        identity = (
            AffineIsometry.identity(first.dim)
            if isinstance(first, AffineIsometry)
            else Matrix.identity(first.rows)
        )
    inverse = inverse or (lambda x: x.inverse())
    inverses: dict[int, T] = {}
    result = identity
    for g, e in word.letters:
        if e > 0:
            result = result @ images[g]
        else:
            if g not in inverses:
                inverses[g] = inverse(images[g])
            result = result @ inverses[g]
    return result


@dataclass(frozen=True)
class CrystalGroupSpec:
    """A presentation of a Bieberbach group with translation-word data.

    ``translations`` is ``None`` in abstract mode, where only the holonomy of
    each generator is known.
    """

    dim: int
    names: tuple[str, ...]
    holonomies: tuple[Matrix, ...]
    relators: tuple[Word, ...]
    mu_words: tuple[Word, ...]
    translations: tuple[Vector, ...] | None = None
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        n = self.dim
        if n < 1:
            raise CrystalError("dimension must be positive")
        if len(set(self.names)) != len(self.names) or not self.names:
            raise CrystalError("generator names must be distinct and non-empty")
        if len(self.holonomies) != len(self.names):
            raise CrystalError("one holonomy matrix per generator required")
        for name, h in zip(self.names, self.holonomies):
            if h.shape != (n, n):
                raise CrystalError(f"holonomy of {name} is not {n}x{n}")
        if self.translations is not None:
            if len(self.translations) != len(self.names):
                raise CrystalError("one translation per generator required")
            for name, t in zip(self.names, self.translations):
                if t.dim != n:
                    raise CrystalError(f"translation of {name} is not of dim {n}")
        if len(self.mu_words) != n:
            raise CrystalError(f"expected {n} translation words, got {len(self.mu_words)}")
        for w in (*self.relators, *self.mu_words):
            if w.max_generator() >= len(self.names):
                raise CrystalError("word refers to an undeclared generator")

    @property
    def mode(self) -> str:
        return "abstract" if self.translations is None else "explicit"

    @property
    def generators(self) -> tuple[AffineIsometry, ...]:
        if self.translations is None:
            raise CrystalError("abstract-mode spec has no affine generators")
        return tuple(AffineIsometry(h, t) for h, t in zip(self.holonomies, self.translations))

    def evaluate(self, word: Word) -> AffineIsometry:
        return evaluate_word(word, self.generators, AffineIsometry.identity(self.dim))

    def word(self, text: str) -> Word:
        return Word.parse(text, self.names)

    def with_translations(self, translations: Sequence[Vector] | None) -> "CrystalGroupSpec":
        return replace(self, translations=None if translations is None else tuple(translations))


# -- holonomy -----------------------------------------------------------------


@dataclass(frozen=True)
class HolonomyGroup:
    elements: tuple[Matrix, ...]
    generator_images: tuple[Matrix, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, m: Matrix) -> bool:
        return m in self.elements


def holonomy_closure(spec: CrystalGroupSpec, bound: int = HOLONOMY_BOUND) -> HolonomyGroup:
    for name, h in zip(spec.names, spec.holonomies):
        if not h.is_integral():
            raise CrystalError(f"holonomy of {name} is not integral")
    gens = list(spec.holonomies)
    steps = gens + [h.inverse() for h in gens]
    ident = Matrix.identity(spec.dim)
    seen = {ident: None}
    queue = deque([ident])
    while queue:
        x = queue.popleft()
        for s in steps:
            y = x @ s
            if y not in seen:
                seen[y] = None
                if len(seen) > bound:
                    raise HolonomyNotFiniteError(
                        f"holonomy closure exceeded {bound} elements: holonomy not "
                        "verified finite, input is not crystallographic in these coordinates"
                    )
                queue.append(y)
    return HolonomyGroup(tuple(seen), tuple(gens))


def coset_representatives(spec: CrystalGroupSpec, group: HolonomyGroup | None = None) -> dict:
    """Map each holonomy element to a short group element having that holonomy.

    Breadth-first over words, so the representative comes from a shortest word.
    """
    group = group or holonomy_closure(spec)
    gens = list(spec.generators)
    steps = gens + [g.inverse() for g in gens]
    start = AffineIsometry.identity(spec.dim)
    reps = {start.holonomy: start}
    queue = deque([start])
    while queue and len(reps) < group.order:
        x = queue.popleft()
        for s in steps:
            y = x @ s
            if y.holonomy not in reps:
                reps[y.holonomy] = y
                queue.append(y)
    return reps


# -- validation ---------------------------------------------------------------


def check_group_axioms(spec: CrystalGroupSpec) -> VerificationReport:
    """Check relators, translation words and the holonomy homomorphism."""
    report = VerificationReport()
    n = spec.dim
    ident = AffineIsometry.identity(n)
    for w in spec.relators:
        text = w.format(spec.names)
        hol = evaluate_word(w, spec.holonomies, Matrix.identity(n))
        report.add(
            f"holonomy kills relator {text}",
            hol.is_identity(),
            witness=None if hol.is_identity() else {"word": text, "holonomy": hol},
        )
        img = spec.evaluate(w)
        report.add(
            f"relator {text}",
            img == ident,
            witness=None if img == ident else {"word": text, "image": img},
        )
    mus = []
    for j, w in enumerate(spec.mu_words):
        text = w.format(spec.names)
        img = spec.evaluate(w)
        target = AffineIsometry.translation_by(Vector.unit(n, j))
        ok = img == target
        report.add(
            f"translation word {j + 1} ({text}) is translation by e{j + 1}",
            ok,
            witness=None if ok else {"word": text, "image": img},
        )
        mus.append(img)
    for i in range(n):
        for j in range(i + 1, n):
            ok = mus[i] @ mus[j] == mus[j] @ mus[i]
            report.add(
                f"translation words {i + 1} and {j + 1} commute",
                ok,
                witness=None if ok else {
                    "words": [spec.mu_words[i].format(spec.names), spec.mu_words[j].format(spec.names)]
                },
            )
    return report


@dataclass(frozen=True)
class TorsionCertificate:
    """An element of finite order together with a point it fixes."""

    element: AffineIsometry
    fixed_point: Vector


def check_torsion_free(
    spec: CrystalGroupSpec,
) -> tuple[bool, TorsionCertificate | None]:
    """Decide torsion-freeness class by class of the holonomy.

    The elements with holonomy ``h`` are ``(h, t + z)`` for ``z`` in ``Z^n``.
    One of them fixes a point iff ``-t`` lies in ``Im(h - I) + Z^n``, which the
    Smith form of ``h - I`` decides: with ``U (h - I) V = S`` of rank ``k``,
    coordinates ``k+1..n`` of ``-U t`` must all be integers.
    """
    group = holonomy_closure(spec)
    reps = coset_representatives(spec, group)
    n = spec.dim
    ident = Matrix.identity(n)
    for h, g in reps.items():
        if h == ident:
            continue
        m = h - ident
        u, s, _ = smith_normal_form(m)
        k = sum(1 for i in range(min(s.rows, s.cols)) if s[i, i] != 0)
        target = u @ (-g.translation)
        if all(x.denominator == 1 for x in target.entries[k:]):
            # shift by a lattice vector so that -(t+z) lands in Im(h - I)
            z_prime = Vector([0] * k + list(target.entries[k:]))
            z = -(u.inverse() @ z_prime)
            torsion = AffineIsometry(h, g.translation + z)
            sol = solve_linear(m, -torsion.translation)
            assert sol.consistent
            return False, TorsionCertificate(torsion, sol.particular)
    return True, None


# -- abstract mode ------------------------------------------------------------


def translation_equations(
    spec: CrystalGroupSpec, word: Word
) -> Matrix:
    """Coefficient matrix (n × pn) of the translation part of ``word``.

    The translation part is linear in the unknown generator translations:
    each letter contributes its prefix holonomy applied to ``t_g`` (or to
    ``-θ_g^{-1} t_g`` for an inverse letter).
    """
    n, p = spec.dim, len(spec.names)
    cols = [[Fraction(0)] * (n * p) for _ in range(n)]
    prefix = Matrix.identity(n)
    hinv = [h.inverse() for h in spec.holonomies]
    for g, e in word.letters:
        block = prefix if e > 0 else -(prefix @ hinv[g])
        for i in range(n):
            for j in range(n):
                cols[i][g * n + j] += block[i, j]
        prefix = prefix @ (spec.holonomies[g] if e > 0 else hinv[g])
    return Matrix(cols)


@dataclass(frozen=True)
class TranslationSolution:
    spec: CrystalGroupSpec
    particular: Vector
    null_space: tuple[Vector, ...]


def solve_translation_system(spec: CrystalGroupSpec) -> TranslationSolution:
    """Solve for generator translations from the relators and translation words.

    Relators must evaluate to the identity and the ``j``-th translation word to
    translation by ``e_j``. Returns the canonical particular solution (free
    parameters zero) installed into an explicit spec, plus the null space.
    """
    n, p = spec.dim, len(spec.names)
    ident = Matrix.identity(n)
    for w in spec.relators:
        if not evaluate_word(w, spec.holonomies, ident).is_identity():
            raise CrystalError(f"holonomy does not kill relator {w.format(spec.names)}")
    for w in spec.mu_words:
        if not evaluate_word(w, spec.holonomies, ident).is_identity():
            raise CrystalError(f"translation word {w.format(spec.names)} has nontrivial holonomy")

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for w in spec.relators:
        rows.extend(translation_equations(spec, w).tolist())
        rhs.extend([Fraction(0)] * n)
    for j, w in enumerate(spec.mu_words):
        rows.extend(translation_equations(spec, w).tolist())
        rhs.extend(Vector.unit(n, j).entries)
    sol = solve_linear(Matrix(rows), Vector(rhs))
    if not sol.consistent:
        raise InconsistentSystemError(
            "inconsistent system: spec does not describe a Bieberbach group "
            "with this holonomy/lattice data"
        )
    x = sol.particular.entries
    ts = [Vector(x[g * n:(g + 1) * n]) for g in range(p)]
    return TranslationSolution(spec.with_translations(ts), sol.particular, sol.null_space)


def solve_translation_parts(spec: CrystalGroupSpec) -> CrystalGroupSpec:
    return solve_translation_system(spec).spec
