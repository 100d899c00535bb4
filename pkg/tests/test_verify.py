import dataclasses

import pytest

from conftest import EXPECTED_HW_A, EXPECTED_HW_FORM
from flatcusp.catalog import catalog_names
from flatcusp.crystal import Word
from flatcusp.exact_linalg import Matrix, SymmetricForm, Vector
from flatcusp.verify import (
    check_faithfulness_evidence,
    check_isometry,
    check_lightlike_stabilizer,
    check_rigidity,
    full_report,
    is_unipotent,
    isometry_defect,
    random_words,
    rigidity_solutions,
)

Q = SymmetricForm(EXPECTED_HW_FORM)


def with_entry(m, i, j, value):
    rows = m.tolist()
    rows[i][j] = value
    return Matrix(rows)


def test_identity_is_isometry():
    assert check_isometry(Matrix.identity(5), Q)


def test_expected_hw_matrix_is_isometry():
    assert check_isometry(EXPECTED_HW_A, Q)


def test_perturbed_matrix_reports_entry():
    bad = with_entry(EXPECTED_HW_A, 3, 0, 2)
    assert not check_isometry(bad, Q)
    lhs = bad.T @ Q.matrix @ bad
    diffs = [(i, j) for i in range(5) for j in range(5) if lhs[i, j] != Q.matrix[i, j]]
    assert isometry_defect(bad, Q) == diffs[0] == (0, 4)


def test_isometry_dimension_mismatch():
    with pytest.raises(ValueError):
        check_isometry(Matrix.identity(4), Q)


def test_lightlike_stabilizer_hw(hw):
    assert check_lightlike_stabilizer(hw).passed
    for m in hw.matrices:
        assert m.col(3) == Vector.unit(5, 3)


def test_lightlike_stabilizer_torus(embeddings):
    assert check_lightlike_stabilizer(embeddings["torus-3"]).passed


def test_lightlike_negative_control(hw):
    bad = with_entry(hw.matrices[0], 0, 3, 1)
    broken = dataclasses.replace(hw, matrices=(bad,) + hw.matrices[1:])
    report = check_lightlike_stabilizer(broken)
    assert not report.passed
    assert report["a fixes v1"].witness["image"] == Vector([1, 0, 0, 1, 0])


def test_faithfulness_hw(hw):
    report = check_faithfulness_evidence(hw, hw.spec)
    assert report.passed
    a2 = hw.generator("a") @ hw.generator("a")
    assert a2.submatrix(range(3), range(3)) == Matrix.identity(3)


def test_faithfulness_torus(embeddings):
    r = embeddings["torus-2"]
    assert r.mu_hat == r.matrices
    assert check_faithfulness_evidence(r, r.spec).passed


def test_faithfulness_failing_relator(hw):
    spec = hw.spec
    bad_spec = dataclasses.replace(spec, relators=spec.relators + (spec.word("a b"),))
    report = check_faithfulness_evidence(hw, bad_spec)
    assert [c.name for c in report.failures] == ["relator a b maps to I"]
    assert report.failures[0].witness["word"] == "a b"


def test_unipotent():
    assert is_unipotent(Matrix([[1, 5], [0, 1]]))
    assert not is_unipotent(Matrix.diag([1, -1]))


def brute_rigidity(q, bound=2):
    """Oracle: search small integer x for [[I, x], [0, 1]] preserving q."""
    from itertools import product

    m = q.dim - 1
    hits = []
    for x in product(range(-bound, bound + 1), repeat=m):
        if any(x):
            g = Matrix.block(
                [[Matrix.identity(m), Matrix.from_columns([Vector(x)])], [Matrix.zeros(1, m), Matrix.identity(1)]]
            )
            if g.T @ q.matrix @ g == q.matrix:
                hits.append(x)
    return hits


@pytest.mark.parametrize("name", catalog_names())
def test_rigidity_catalog(embeddings, name):
    r = embeddings[name]
    assert check_rigidity(r)
    assert rigidity_solutions(r.form) == ()
    if r.dim == 2:
        assert brute_rigidity(r.form) == []


def test_rigidity_degenerate_form():
    q = SymmetricForm(Matrix.diag([1, 1, 1, 0, 0]))
    assert not check_rigidity(q)
    sols = rigidity_solutions(q)
    assert len(sols) == 1
    assert brute_rigidity(q, 1)


@pytest.mark.parametrize("name", catalog_names())
def test_full_report_passes(embeddings, name):
    r = embeddings[name]
    report = full_report(r, r.spec)
    assert report.passed, report.summary()


def test_corrupted_result_fails_with_witness(hw):
    bad = with_entry(hw.matrices[1], 1, 4, 1)
    broken = dataclasses.replace(hw, matrices=(hw.matrices[0], bad))
    report = full_report(broken, broken.spec, samples=20)
    assert not report.passed
    assert all(c.witness is not None for c in report.failures)
    assert "b preserves Q'" in [c.name for c in report.failures]


def test_corrupted_form_fails(hw):
    broken = dataclasses.replace(hw, form=SymmetricForm(Matrix.diag([1, 1, 1, 1, 1])))
    assert not full_report(broken, broken.spec, samples=5).passed


def test_random_words_reproducible():
    assert random_words(2, 10, 8, seed=1) == random_words(2, 10, 8, seed=1)
    ws = random_words(3, 100, 8)
    assert all(1 <= len(w.letters) <= 8 for w in ws)
    assert all(isinstance(w, Word) for w in ws)
