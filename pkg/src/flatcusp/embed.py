"""Integral embedding of a Bieberbach group as a cusp group.

The pipeline takes a group acting on ``E^n`` by rigid motions to integral
``(n+2) x (n+2)`` matrices preserving a rational form of signature
``(n+1, 1)`` and fixing the isotropic vector ``e_{n+1}``:

1. cone the affine action to ``(n+1) x (n+1)`` matrices, rescaling the cone
   coordinate by ``c`` so every entry is an integer;
2. pass to the contragredient ``(M^T)^{-1}``;
3. average a positive definite seed form over the holonomy;
4. add a hyperbolic plane and solve for the unique last column making each
   generator an isometry;
5. rescale the last coordinate by ``K`` to clear denominators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .crystal import (
    CrystalError,
    CrystalGroupSpec,
    HolonomyGroup,
    check_group_axioms,
    check_torsion_free,
    evaluate_word,
    holonomy_closure,
    solve_translation_parts,
)
from .exact_linalg import (
    Matrix,
    SymmetricForm,
    Vector,
    denominator_lcm,
    hyperbolic_plane,
    mat_inverse,
    solve_linear,
)


class EmbeddingError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConingRep:
    scale: int
    matrices: tuple[Matrix, ...]


@dataclass(frozen=True)
class DualRep:
    scale: int
    matrices: tuple[Matrix, ...]


@dataclass(frozen=True)
class CuspExtension:
    form: SymmetricForm
    columns: tuple[Vector, ...]
    matrices: tuple[Matrix, ...]


@dataclass(frozen=True)
class EmbeddingResult:
    dim: int
    names: tuple[str, ...]
    matrices: tuple[Matrix, ...]
    form: SymmetricForm
    D: SymmetricForm
    K: int
    c: int
    mu_hat: tuple[Matrix, ...]
    spec: CrystalGroupSpec
    # intermediate stages, absent when rebuilt from a serialized report
    coning: ConingRep | None = None
    dual: DualRep | None = None
    cusp_columns: tuple[Vector, ...] | None = None

    @property
    def v1(self) -> Vector:
        return Vector.unit(self.dim + 2, self.dim)

    @property
    def v2(self) -> Vector:
        return Vector.unit(self.dim + 2, self.dim + 1)

    def generator(self, name: str) -> Matrix:
        return self.matrices[self.names.index(name)]

    def image(self, word) -> Matrix:
        return evaluate_word(word, self.matrices, Matrix.identity(self.dim + 2))


def cone(spec: CrystalGroupSpec) -> ConingRep:
    n = spec.dim
    gens = spec.generators
    c = denominator_lcm([x for g in gens for x in g.translation])
    mats = tuple(
        Matrix.block(
            [
                [g.holonomy, Matrix.from_columns([g.translation * c])],
                [Matrix.zeros(1, n), Matrix.identity(1)],
            ]
        )
        for g in gens
    )
    return ConingRep(c, mats)


def dualize(rep: ConingRep) -> DualRep:
    out = []
    for m in rep.matrices:
        d = mat_inverse(m.T)
        if not d.is_integral():
            raise EmbeddingError(f"dual matrix is not integral: {d}")
        out.append(d)
    return DualRep(rep.scale, tuple(out))


def theta_average(group: HolonomyGroup, seed: SymmetricForm | None = None) -> SymmetricForm:
    """Sum ``h seed h^T`` over the holonomy group (not divided by its order)."""
    n = group.elements[0].rows
    seed = seed or SymmetricForm(Matrix.identity(n))
    if seed.dim != n:
        raise ValueError(f"seed form must be {n}x{n}")
    if not seed.is_positive_definite():
        raise ValueError("seed form is not positive definite")
    total = Matrix.zeros(n)
    for h in group.elements:
        total = total + h @ seed.matrix @ h.T
    return SymmetricForm(total)


def primitive_form(form: SymmetricForm) -> SymmetricForm:
    """The positive multiple of ``form`` with coprime integer entries."""
    m = form.matrix * denominator_lcm(form.matrix)
    g = math.gcd(*(int(x) for r in m.entries for x in r))
    return SymmetricForm(m * Fraction(1, g)) if g else form


def cusp_column(phi: Matrix, D: SymmetricForm) -> Vector:
    """Solve for ``(W, tau)`` so that ``[[phi, (W, tau)], [0, 1]]`` preserves ``D ⊕ H``.

    With ``phi = [[A, 0], [r, 1]]`` the isometry equations reduce to
    ``A^T D W = -r^T`` and ``W^T D W + 2 tau = 0``; the first is solved
    exactly and must have a unique solution.
    """
    n = D.dim
    A = phi.submatrix(range(n), range(n))
    r = Vector(phi.entries[n][:n])
    sol = solve_linear(A.T @ D.matrix, -r)
    if not sol.consistent:
        raise EmbeddingError("no cusp column solves the isometry equations")
    if sol.null_space:
        raise EmbeddingError("cusp column is not unique: form is degenerate")
    W = sol.particular
    tau = -D(W) / 2
    return Vector(list(W) + [tau])


def _extended(phi: Matrix, column: Vector) -> Matrix:
    m = phi.rows
    return Matrix.block(
        [
            [phi, Matrix.from_columns([column])],
            [Matrix.zeros(1, m), Matrix.identity(1)],
        ]
    )


def hyperbolic_extend(rep: DualRep, D: SymmetricForm) -> CuspExtension:
    q = D.direct_sum(hyperbolic_plane())
    columns, mats = [], []
    for phi in rep.matrices:
        col = cusp_column(phi, D)
        m = _extended(phi, col)
        if m.T @ q.matrix @ m != q.matrix:
            raise EmbeddingError(f"extended matrix is not an isometry of D ⊕ H: {m}")
        columns.append(col)
        mats.append(m)
    return CuspExtension(q, tuple(columns), tuple(mats))


def cusp_conjugator(n: int, K: int) -> Matrix:
    return Matrix.diag([1] * (n + 1) + [K])


def integralize_cusp(ext: CuspExtension) -> tuple[int, tuple[Matrix, ...], SymmetricForm]:
    """Conjugate by ``diag(I, K)`` with the least ``K`` making everything integral.

    Returns ``(K, matrices, form)``; the last column (above the corner) is
    multiplied by ``K`` and the form becomes ``P^T Q P`` with ``P = diag(I, K)``.
    """
    n = ext.form.dim - 2
    K = denominator_lcm([x for v in ext.columns for x in v])
    P = cusp_conjugator(n, K)
    Pinv = mat_inverse(P)
    mats = tuple(Pinv @ m @ P for m in ext.matrices)
    form = ext.form.transform(P)
    for m in mats:
        if not m.is_integral():
            raise EmbeddingError(f"conjugated matrix is not integral: {m}")
    return K, mats, form


def translation_image(result: EmbeddingResult, u: Sequence) -> Matrix:
    """Image of translation by ``u`` (cone-scaled coordinates) under the embedding.

    Runs the same dualize/extend/conjugate steps as the generators, so the
    result is the isometry of the final form with that translation part.
    """
    n = result.dim
    u = u if isinstance(u, Vector) else Vector(u)
    phi = Matrix.block(
        [
            [Matrix.identity(n), Matrix.zeros(n, 1)],
            [Matrix([list(-u)]), Matrix.identity(1)],
        ]
    )
    m = _extended(phi, cusp_column(phi, result.D))
    P = cusp_conjugator(n, result.K)
    return mat_inverse(P) @ m @ P


def embed_pipeline(
    spec: CrystalGroupSpec,
    seed: SymmetricForm | None = None,
    *,
    verify: bool = True,
    samples: int = 100,
    max_length: int = 8,
    rng_seed: int = 0,
) -> EmbeddingResult:
    if spec.mode == "abstract":
        spec = solve_translation_parts(spec)
    axioms = check_group_axioms(spec)
    if not axioms.passed:
        raise CrystalError("group axioms fail:\n" + axioms.summary())
    free, cert = check_torsion_free(spec)
    if not free:
        raise CrystalError(
            f"group has torsion: {cert.element} fixes {cert.fixed_point}"
        )

    coning = cone(spec)
    dual = dualize(coning)
    D = primitive_form(theta_average(holonomy_closure(spec), seed))
    ext = hyperbolic_extend(dual, D)
    K, mats, form = integralize_cusp(ext)
    ident = Matrix.identity(spec.dim + 2)
    mu_hat = tuple(evaluate_word(w, mats, ident) for w in spec.mu_words)
    result = EmbeddingResult(
        dim=spec.dim,
        names=spec.names,
        matrices=mats,
        form=form,
        D=D,
        K=K,
        c=coning.scale,
        mu_hat=mu_hat,
        spec=spec,
        coning=coning,
        dual=dual,
        cusp_columns=ext.columns,
    )
    if verify:
        from .verify import full_report

        report = full_report(result, spec, samples=samples, max_length=max_length, seed=rng_seed)
        if not report.passed:
            raise EmbeddingError("verification failed:\n" + report.summary())
    return result
