"""Independent re-checks of an embedding.

Nothing here looks at how the embedding was computed: every check works from
the final matrices, the form and the group's words alone.
"""

from __future__ import annotations

import random
from typing import TYPE_CHECKING

from .crystal import CrystalGroupSpec, Word, check_group_axioms, evaluate_word
from .exact_linalg import Matrix, SymmetricForm, Vector, determinant, null_space, signature
from .report import VerificationReport

if TYPE_CHECKING:
    from .embed import EmbeddingResult


def isometry_defect(x: Matrix, q: SymmetricForm) -> tuple[int, int] | None:
    """First entry (row-major) where ``x^T q x`` differs from ``q``, or None."""
    lhs = x.T @ q.matrix @ x
    for i in range(q.dim):
        for j in range(q.dim):
            if lhs[i, j] != q.matrix[i, j]:
                return (i, j)
    return None


def check_isometry(x: Matrix, q: SymmetricForm) -> bool:
    if x.shape != (q.dim, q.dim):
        raise ValueError(f"matrix shape {x.shape} does not match form dim {q.dim}")
    return isometry_defect(x, q) is None


def check_lightlike_stabilizer(result: "EmbeddingResult") -> VerificationReport:
    report = VerificationReport()
    v1 = result.v1
    value = result.form(v1)
    report.add("v1 is isotropic", value == 0, witness=None if value == 0 else {"Q(v1,v1)": value})
    for name, m in zip(result.names, result.matrices):
        image = m @ v1
        report.add(
            f"{name} fixes v1",
            image == v1,
            witness=None if image == v1 else {"generator": name, "image": image},
        )
    return report


def is_unipotent(m: Matrix) -> bool:
    n = m.rows
    return (m - Matrix.identity(n)) ** n == Matrix.zeros(n)


def check_faithfulness_evidence(
    result: "EmbeddingResult", spec: CrystalGroupSpec
) -> VerificationReport:
    """Relators die, translation words give commuting independent translations."""
    report = VerificationReport()
    n = spec.dim
    ident = Matrix.identity(n + 2)
    for w in spec.relators:
        img = evaluate_word(w, result.matrices, ident)
        text = w.format(spec.names)
        report.add(
            f"relator {text} maps to I",
            img == ident,
            witness=None if img == ident else {"word": text, "image": img},
        )
    mus = [evaluate_word(w, result.matrices, ident) for w in spec.mu_words]
    for j, (w, m) in enumerate(zip(spec.mu_words, mus)):
        text = w.format(spec.names)
        same = m == result.mu_hat[j]
        report.add(
            f"mu_{j + 1} image matches its word {text}",
            same,
            witness=None if same else {"word": text, "recomputed": m, "stored": result.mu_hat[j]},
        )
        block = m.submatrix(range(n), range(n))
        ok = block.is_identity() and m != ident and is_unipotent(m)
        shift = Vector(m.entries[n][:n])
        want = -(Vector.unit(n, j) * result.c)
        report.add(
            f"mu_{j + 1} translates by c·e{j + 1}",
            shift == want,
            witness=None if shift == want else {"row": shift, "expected": want},
        )
        report.add(
            f"mu_{j + 1} is a nontrivial unipotent translation",
            ok,
            witness=None if ok else {"word": text, "image": m},
        )
    for i in range(n):
        for j in range(i + 1, n):
            ok = mus[i] @ mus[j] == mus[j] @ mus[i]
            report.add(
                f"mu_{i + 1} and mu_{j + 1} commute",
                ok,
                witness=None if ok else {"pair": (i + 1, j + 1)},
            )
    # translation parts live in row n+1
    rows = Matrix([m.entries[n][:n] for m in mus])
    independent = determinant(rows) != 0
    report.add(
        "mu translation parts are linearly independent",
        independent,
        witness=None if independent else {"translation rows": rows},
    )
    return report


def check_group_data(result: "EmbeddingResult", spec: CrystalGroupSpec) -> VerificationReport:
    """Each matrix must restrict to the dual coned motion of its generator.

    For ``g = (θ, t)`` the upper-left block is ``θ^{-T}`` and the row below it
    is ``-(θ^{-1} c t)^T``; the cusp columns, when stored, are the last column
    divided by ``K``.
    """
    report = VerificationReport()
    singular = [name for name, h in zip(spec.names, spec.holonomies) if determinant(h) == 0]
    if singular:
        report.add("group holonomies are invertible", False, witness={"singular": singular})
        return report
    report.extend(check_group_axioms(spec), prefix="group: ")
    n = spec.dim
    for i, (name, g, m) in enumerate(zip(spec.names, spec.generators, result.matrices)):
        hinv = g.holonomy.inverse()
        block = m.submatrix(range(n), range(n))
        row = Vector(m.entries[n][:n])
        want_row = -(hinv @ (g.translation * result.c))
        ok = block == hinv.T and row == want_row
        report.add(
            f"{name} matches its affine motion",
            ok,
            witness=None if ok else {"block": block, "expected block": hinv.T, "row": row, "expected row": want_row},
        )
        if result.cusp_columns is not None:
            col = Vector(m.entries[k][n + 1] for k in range(n + 1))
            want = result.cusp_columns[i] * result.K
            report.add(
                f"stored cusp column of {name} matches the matrix",
                col == want,
                witness=None if col == want else {"column": col, "K * stored": want},
            )
    return report


def rigidity_solutions(q: SymmetricForm) -> tuple[Vector, ...]:
    """Basis of ``x`` with ``[[I, x], [0, 1]]`` an isometry of ``q``.

    Writing ``q = [[Q11, q12], [q12^T, q22]]`` the conditions are
    ``Q11 x = 0`` and ``x^T Q11 x + 2 q12^T x = 0``, i.e. the linear system
    ``[Q11; q12^T] x = 0``.
    """
    m = q.dim - 1
    Q11 = q.matrix.submatrix(range(m), range(m))
    q12 = q.matrix.submatrix(range(m), [m]).T
    return null_space(Matrix(Q11.tolist() + q12.tolist()))


def check_rigidity(result_or_form) -> bool:
    q = result_or_form if isinstance(result_or_form, SymmetricForm) else result_or_form.form
    return not rigidity_solutions(q)


def random_words(
    n_generators: int, count: int, max_length: int, seed: int = 0
) -> list[Word]:
    rng = random.Random(seed)
    words = []
    for _ in range(count):
        length = rng.randint(1, max_length)
        words.append(
            Word(tuple((rng.randrange(n_generators), rng.choice((1, -1))) for _ in range(length)))
        )
    return words


def full_report(
    result: "EmbeddingResult",
    spec: CrystalGroupSpec,
    *,
    samples: int = 100,
    max_length: int = 8,
    seed: int = 0,
) -> VerificationReport:
    report = VerificationReport()
    n = result.dim
    q = result.form
    for name, m in zip(result.names, result.matrices):
        report.add(f"{name} is integral", m.is_integral(), witness=None if m.is_integral() else m)
        d = determinant(m)
        report.add(f"{name} has determinant ±1", d in (1, -1), witness=None if d in (1, -1) else d)
        bad = isometry_defect(m, q)
        report.add(
            f"{name} preserves Q'",
            bad is None,
            witness=None if bad is None else {"generator": name, "entry": bad},
        )
    D = result.D
    expected_form = D.direct_sum(SymmetricForm([[0, result.K], [result.K, 0]]))
    report.add(
        "Q' = D ⊕ 2K·XY",
        q == expected_form,
        witness=None if q == expected_form else {"form": q.matrix, "expected": expected_form.matrix},
    )
    pd = D.is_positive_definite()
    report.add("D is positive definite", pd, witness=None if pd else {"D": D.matrix})
    for name, m in zip(result.names, result.matrices):
        block = m.submatrix(range(n), range(n))
        bad = isometry_defect(block, D)
        report.add(
            f"upper-left block of {name} preserves D",
            bad is None,
            witness=None if bad is None else {"generator": name, "entry": bad},
        )
    sig = signature(q)
    expected = (n + 1, 1, 0)
    report.add(
        f"signature of Q' is {expected}",
        sig.as_tuple() == expected,
        witness=None if sig.as_tuple() == expected else {"signature": sig.as_tuple()},
    )
    report.extend(check_lightlike_stabilizer(result))
    sols = rigidity_solutions(q)
    report.add(
        "rigidity: only the identity isometry has identity upper block",
        not sols,
        witness=None if not sols else {"solutions": list(sols)},
    )
    report.extend(check_group_data(result, spec))
    singular = [name for name, m in zip(result.names, result.matrices) if determinant(m) == 0]
    if singular:
        # words with inverse letters cannot be evaluated
        report.add("generators are invertible", False, witness={"singular": singular})
        return report
    report.extend(check_faithfulness_evidence(result, spec))

    ident = Matrix.identity(n + 2)
    v1 = result.v1
    bad_words = []
    for w in random_words(len(result.names), samples, max_length, seed):
        m = evaluate_word(w, result.matrices, ident)
        if not (m.is_integral() and m @ v1 == v1 and isometry_defect(m, q) is None):
            bad_words.append(w.format(result.names))
    report.add(
        f"{samples} random words of length <= {max_length} are integral isometries fixing v1",
        not bad_words,
        witness=None if not bad_words else {"words": bad_words[:5]},
    )
    return report
