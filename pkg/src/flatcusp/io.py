"""JSON group files and embedding reports.

Rationals are always written as strings (``"-3/2"``), never as JSON numbers,
so files round-trip exactly.
"""

from __future__ import annotations

import json
import re
from dataclasses import fields, is_dataclass
from fractions import Fraction
from typing import Any

from .crystal import AffineIsometry, CrystalError, CrystalGroupSpec, Word
from .embed import EmbeddingResult
from .exact_linalg import Matrix, SymmetricForm, Vector
from .report import VerificationReport

REPORT_FORMAT = "flatcusp-report/1"

_RATIONAL = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


class GroupFileError(ValueError):
    """A syntax or semantic error in an input file, with its location."""

    def __init__(self, reason: str, key: str | None = None, line: int | None = None):
        self.reason = reason
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key:
            where.append(f"at {key}")
        super().__init__(f"{', '.join(where)}: {reason}" if where else reason)


def parse_rational(value: Any, key: str = "") -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise GroupFileError(f"{value!r} is not an exact rational (write it as a string)", key)
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str):
        raise GroupFileError(f"expected a rational string, got {type(value).__name__}", key)
    m = _RATIONAL.match(value.replace("−", "-"))
    if not m:
        raise GroupFileError(f"bad rational literal {value!r}", key)
    num, den = m.groups()
    if den is not None and int(den) == 0:
        raise GroupFileError(f"zero denominator in {value!r}", key)
    return Fraction(int(num), int(den) if den else 1)


def format_rational(x: Fraction) -> str:
    return str(x)


def parse_matrix(value: Any, key: str) -> Matrix:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise GroupFileError("expected a non-empty list of rows", key)
    width = len(value[0])
    if any(len(r) != width for r in value) or width == 0:
        raise GroupFileError("matrix rows have unequal lengths", key)
    return Matrix(
        [parse_rational(x, f"{key}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(value)
    )


def parse_vector(value: Any, key: str) -> Vector:
    if not isinstance(value, list):
        raise GroupFileError("expected a list", key)
    return Vector(parse_rational(x, f"{key}[{i}]") for i, x in enumerate(value))


def matrix_json(m: Matrix) -> list[list[str]]:
    return [[format_rational(x) for x in r] for r in m.entries]


def vector_json(v: Vector) -> list[str]:
    return [format_rational(x) for x in v.entries]


def load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise GroupFileError(exc.msg, line=exc.lineno) from None


# -- group files --------------------------------------------------------------


def group_from_dict(doc: Any) -> CrystalGroupSpec:
    if not isinstance(doc, dict):
        raise GroupFileError("top level must be an object")
    for key in ("dim", "generators", "relators", "mu_words"):
        if key not in doc:
            raise GroupFileError("missing key", key)
    n = doc["dim"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise GroupFileError("dim must be a positive integer", "dim")
    mode = doc.get("mode", "explicit")
    if mode not in ("explicit", "abstract"):
        raise GroupFileError("mode must be 'explicit' or 'abstract'", "mode")
    gens = doc["generators"]
    if not isinstance(gens, list) or not gens:
        raise GroupFileError("expected a non-empty list", "generators")

    names, hols, trans = [], [], []
    for i, g in enumerate(gens):
        key = f"generators[{i}]"
        if not isinstance(g, dict):
            raise GroupFileError("expected an object", key)
        name = g.get("name")
        if not isinstance(name, str) or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise GroupFileError("generator name must be an identifier", f"{key}.name")
        if name in names:
            raise GroupFileError(f"duplicate generator {name!r}", f"{key}.name")
        if "holonomy" not in g:
            raise GroupFileError("missing key", f"{key}.holonomy")
        h = parse_matrix(g["holonomy"], f"{key}.holonomy")
        if h.shape != (n, n):
            raise GroupFileError(f"holonomy must be {n}x{n}, got {h.rows}x{h.cols}", f"{key}.holonomy")
        if mode == "explicit":
            if "translation" not in g:
                raise GroupFileError("explicit mode requires a translation", f"{key}.translation")
            t = parse_vector(g["translation"], f"{key}.translation")
            if t.dim != n:
                raise GroupFileError(f"translation must have {n} entries", f"{key}.translation")
            trans.append(t)
        names.append(name)
        hols.append(h)

    def words(key: str) -> list[Word]:
        value = doc[key]
        if not isinstance(value, list) or not all(isinstance(w, str) for w in value):
            raise GroupFileError("expected a list of word strings", key)
        out = []
        for i, w in enumerate(value):
            try:
                out.append(Word.parse(w, names))
            except CrystalError as exc:
                raise GroupFileError(str(exc), f"{key}[{i}]") from None
        return out

    relators = words("relators")
    mu = words("mu_words")
    if len(mu) != n:
        raise GroupFileError(f"expected {n} mu_words, got {len(mu)}", "mu_words")
    name = doc.get("name")
    return CrystalGroupSpec(
        dim=n,
        names=tuple(names),
        holonomies=tuple(hols),
        relators=tuple(relators),
        mu_words=tuple(mu),
        translations=tuple(trans) if mode == "explicit" else None,
        name=name if isinstance(name, str) else None,
    )


def parse_group_file(text: str) -> CrystalGroupSpec:
    return group_from_dict(load_json(text))


def group_to_dict(spec: CrystalGroupSpec) -> dict:
    gens = []
    for i, (name, h) in enumerate(zip(spec.names, spec.holonomies)):
        g = {"name": name, "holonomy": matrix_json(h)}
        if spec.translations is not None:
            g["translation"] = vector_json(spec.translations[i])
        gens.append(g)
    doc = {
        "dim": spec.dim,
        "mode": spec.mode,
        "generators": gens,
        "relators": [w.format(spec.names) for w in spec.relators],
        "mu_words": [w.format(spec.names) for w in spec.mu_words],
    }
    if spec.name:
        doc["name"] = spec.name
    return doc


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def serialize_group(spec: CrystalGroupSpec) -> str:
    return dumps(group_to_dict(spec))


def parse_matrix_file(text: str) -> Matrix:
    doc = load_json(text)
    if isinstance(doc, dict):
        doc = doc.get("matrix")
    return parse_matrix(doc, "matrix")


# -- reports ------------------------------------------------------------------


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, Matrix):
        return matrix_json(obj)
    if isinstance(obj, Vector):
        return vector_json(obj)
    if isinstance(obj, SymmetricForm):
        return matrix_json(obj.matrix)
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, AffineIsometry):
        return {"holonomy": matrix_json(obj.holonomy), "translation": vector_json(obj.translation)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [to_jsonable(v) for v in obj]
    if is_dataclass(obj):
        return to_jsonable({f.name: getattr(obj, f.name) for f in fields(obj)})
    return obj


def verification_json(report: VerificationReport) -> dict:
    return {
        "passed": report.passed,
        "checks": [
            {"name": c.name, "passed": c.passed, "witness": to_jsonable(c.witness)}
            for c in report.checks
        ],
    }


def witness_json(w) -> Any:
    if isinstance(w, str):
        return {"case": w}
    doc = {"case": w.case, "p": w.p, "element": matrix_json(w.element)}
    if w.modulus is not None:
        doc.update(
            modulus=w.modulus,
            image_mod=w.image.tolist(),
            entry=list(w.entry),
            tp_image_order=w.image_order,
            certified=True,
        )
    return doc


def report_to_dict(
    result: EmbeddingResult,
    verification: VerificationReport | None = None,
    separations: list | None = None,
) -> dict:
    doc = {
        "format": REPORT_FORMAT,
        "group": group_to_dict(result.spec),
        "dim": result.dim,
        "generators": [
            {"name": name, "matrix": matrix_json(m)} for name, m in zip(result.names, result.matrices)
        ],
        "form": matrix_json(result.form.matrix),
        "D": matrix_json(result.D.matrix),
        "c": result.c,
        "K": result.K,
        "v1": vector_json(result.v1),
        "v2": vector_json(result.v2),
        "mu_hat": [matrix_json(m) for m in result.mu_hat],
    }
    if result.cusp_columns is not None:
        doc["cusp_columns"] = [vector_json(v) for v in result.cusp_columns]
    if verification is not None:
        doc["verification"] = verification_json(verification)
    if separations:
        doc["separations"] = [dict(witness_json(w), label=label) for label, w in separations]
    return doc


class AsymmetricFormError(GroupFileError):
    def __init__(self, key: str, entry: tuple[int, int]):
        self.entry = entry
        super().__init__(f"form is not symmetric at entry {entry}", key)


def _form(value: Any, key: str) -> SymmetricForm:
    m = parse_matrix(value, key)
    if not m.is_square:
        raise GroupFileError("form must be square", key)
    for i in range(m.rows):
        for j in range(i + 1, m.rows):
            if m[i, j] != m[j, i]:
                raise AsymmetricFormError(key, (i, j))
    return SymmetricForm(m)


def result_from_dict(doc: Any) -> EmbeddingResult:
    """Rebuild an embedding from a report; intermediate stages are not restored."""
    if not isinstance(doc, dict) or doc.get("format") != REPORT_FORMAT:
        raise GroupFileError(f"not a {REPORT_FORMAT} document", "format")
    for key in ("group", "generators", "form", "D", "c", "K", "mu_hat"):
        if key not in doc:
            raise GroupFileError("missing key", key)
    spec = group_from_dict(doc["group"])
    gens = doc["generators"]
    if not isinstance(gens, list) or [g.get("name") for g in gens] != list(spec.names):
        raise GroupFileError("generators do not match the group", "generators")
    mats = tuple(parse_matrix(g["matrix"], f"generators[{i}].matrix") for i, g in enumerate(gens))
    form = _form(doc["form"], "form")
    D = _form(doc["D"], "D")
    n = spec.dim
    if doc.get("dim", n) != n:
        raise GroupFileError(f"dim {doc['dim']!r} disagrees with the group (dim {n})", "dim")
    for i, m in enumerate(mats):
        if m.shape != (n + 2, n + 2):
            raise GroupFileError(f"matrix must be {n + 2}x{n + 2}", f"generators[{i}].matrix")
    if form.dim != n + 2 or D.dim != n:
        raise GroupFileError("form dimensions disagree with dim", "form")
    mu = tuple(parse_matrix(m, f"mu_hat[{i}]") for i, m in enumerate(doc["mu_hat"]))
    cols = doc.get("cusp_columns")
    return EmbeddingResult(
        dim=n,
        names=spec.names,
        matrices=mats,
        form=form,
        D=D,
        K=int(doc["K"]),
        c=int(doc["c"]),
        mu_hat=mu,
        spec=spec,
        cusp_columns=None if cols is None else tuple(
            parse_vector(v, f"cusp_columns[{i}]") for i, v in enumerate(cols)
        ),
    )


def parse_report(text: str) -> EmbeddingResult:
    return result_from_dict(load_json(text))


def check_stored_vectors(doc: dict, result: EmbeddingResult) -> VerificationReport:
    """The report's copies of v1 and v2 must be the basis vectors they name."""
    report = VerificationReport()
    for key, want in (("v1", result.v1), ("v2", result.v2)):
        if key not in doc:
            continue
        try:
            got = parse_vector(doc[key], key)
        except GroupFileError as exc:
            report.add(f"stored {key} is e{want.entries.index(1) + 1}", False, witness={key: exc.reason})
            continue
        report.add(
            f"stored {key} is e{want.entries.index(1) + 1}",
            got == want,
            witness=None if got == want else {key: got},
        )
    return report
