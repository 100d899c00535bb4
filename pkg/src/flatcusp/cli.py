"""Command-line interface.

Exit codes: 0 all checks pass, 1 a verification failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import catalog
from .congruence import (
    MEMBER,
    OUTSIDE_STABILIZER,
    build_Tp,
    demo_theorem_closure,
    separate,
)
from .crystal import CrystalError, CrystalGroupSpec, Word
from .embed import EmbeddingError, EmbeddingResult, embed_pipeline
from .io import (
    AsymmetricFormError,
    GroupFileError,
    load_json,
    check_stored_vectors,
    dumps,
    group_to_dict,
    parse_group_file,
    parse_matrix_file,
    parse_report,
    report_to_dict,
    result_from_dict,
    witness_json,
)
from .exact_linalg import LinalgError, Matrix, SymmetricForm, signature
from .verify import full_report

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2


class InputError(Exception):
    pass


def format_matrix(m: Matrix, indent: str = "  ") -> str:
    cells = [[str(x) for x in r] for r in m.entries]
    width = max(len(c) for r in cells for c in r)
    return "\n".join(indent + "[ " + "  ".join(c.rjust(width) for c in r) + " ]" for r in cells)


def format_form(q: SymmetricForm) -> str:
    """Write a form as a polynomial in x, y, z, w, t (or x1..xk)."""
    k = q.dim
    names = list("xyzwt") if k == 5 else [f"x{i + 1}" for i in range(k)]
    terms = []
    for i in range(k):
        for j in range(i, k):
            coeff = q.matrix[i, j] * (1 if i == j else 2)
            if coeff == 0:
                continue
            mono = f"{names[i]}^2" if i == j else f"{names[i]}{names[j]}"
            c = "" if coeff == 1 else "-" if coeff == -1 else str(coeff)
            terms.append(f"{c}{mono}")
    return " + ".join(terms).replace("+ -", "- ") or "0"


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def load_group(source: str) -> CrystalGroupSpec:
    if source.startswith("catalog:"):
        try:
            return catalog.catalog_lookup(source[len("catalog:"):])
        except KeyError as exc:
            raise InputError(exc.args[0]) from None
    return parse_group_file(_read(source))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def render_text(result: EmbeddingResult, report) -> str:
    lines = [f"group: {result.spec.name or '(unnamed)'}  dim n = {result.dim}"]
    lines.append(f"cone scale c = {result.c}, cusp scale K = {result.K}")
    lines.append("holonomy-invariant form D =")
    lines.append(format_matrix(result.D.matrix))
    for name, m in zip(result.names, result.matrices):
        lines.append(f"Phi_hat({name}) =")
        lines.append(format_matrix(m))
    lines.append(f"invariant form Q' = {format_form(result.form)}")
    lines.append(format_matrix(result.form.matrix))
    sig = signature(result.form)
    lines.append(f"signature {sig.as_tuple()}, lightlike vector v1 = e{result.dim + 1}")
    lines.append("")
    lines.append(report.summary())
    lines.append("ALL CHECKS PASS" if report.passed else "VERIFICATION FAILED")
    return "\n".join(lines) + "\n"


def cmd_embed(args) -> int:
    spec = load_group(args.source)
    seed = None
    if args.seed_form:
        try:
            seed = SymmetricForm(parse_matrix_file(_read(args.seed_form)))
        except LinalgError as exc:
            raise InputError(f"seed form: {exc}") from None
    try:
        result = embed_pipeline(spec, seed, verify=False)
    except (CrystalError, ValueError) as exc:
        raise InputError(str(exc)) from None
    report = full_report(result, result.spec, samples=args.samples, max_length=args.max_length, seed=args.seed)
    if args.format == "text":
        _emit(render_text(result, report), args.out)
    else:
        _emit(dumps(report_to_dict(result, report)), args.out)
    if not report.passed:
        for c in report.failures:
            print(f"FAILED: {c.name}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_verify(args) -> int:
    doc = load_json(_read(args.report))
    try:
        result = result_from_dict(doc)
    except AsymmetricFormError as exc:
        print(f"[FAIL] {exc.key} is symmetric")
        print(f"witness for {exc.key} is symmetric: entry {exc.entry}")
        return EXIT_FAILED
    report = full_report(result, result.spec, samples=args.samples, max_length=args.max_length, seed=args.seed)
    report.extend(check_stored_vectors(doc, result))
    if args.format == "json":
        from .io import verification_json

        sys.stdout.write(dumps(verification_json(report)))
    else:
        print(report.summary())
        for c in report.failures:
            print(f"witness for {c.name}: {c.witness}")
    return EXIT_OK if report.passed else EXIT_FAILED


def _element(result: EmbeddingResult, text: str) -> Matrix:
    if Path(text).is_file():
        return parse_matrix_file(_read(text))
    try:
        word = Word.parse(text, result.names)
    except CrystalError as exc:
        raise InputError(str(exc)) from None
    return result.image(word)


def cmd_separate(args) -> int:
    result = parse_report(_read(args.report))
    gamma = _element(result, args.element)
    try:
        tp = build_Tp(result, args.p)
        outcome = separate(gamma, tp, result)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if args.format == "json":
        sys.stdout.write(dumps(witness_json(outcome)))
    elif outcome == MEMBER:
        print(f"member of T_{args.p}")
    elif outcome.case == OUTSIDE_STABILIZER:
        print("outside-stabilizer: element does not fix v1")
    else:
        print(f"case: {outcome.case}")
        print(f"modulus: {outcome.modulus}")
        print(f"distinguishing entry: {outcome.entry}")
        print(f"|T_{args.p} mod {outcome.modulus}| = {outcome.image_order}")
        print(f"element mod {outcome.modulus}:")
        print(format_matrix(Matrix(outcome.image.entries)))
        print("certificate: reduction is not in the enumerated image")
    if not isinstance(outcome, str) and outcome.case == OUTSIDE_STABILIZER:
        return EXIT_FAILED
    return EXIT_OK


def cmd_closure(args) -> int:
    result = parse_report(_read(args.report))
    try:
        rep = demo_theorem_closure(result, args.p, args.r)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    print(f"Gamma translation lattice basis (columns):\n{format_matrix(rep.gamma_lattice)}")
    print(f"T_Gamma ∩ T_{rep.p} basis (columns):\n{format_matrix(rep.intersection)}")
    print(f"r = {rep.r}: T_{rep.r * rep.p} <= T_Gamma ∩ T_{rep.p}: {rep.trp_in_gamma}")
    for label, w in rep.separations:
        if isinstance(w, str):
            print(f"  {label}: {w} of T_{rep.r * rep.p}")
        elif w.modulus is None:
            print(f"  {label}: {w.case}")
        else:
            print(f"  {label}: {w.case}, separated mod {w.modulus}")
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_catalog(args) -> int:
    if args.action == "list":
        for name in catalog.catalog_names():
            spec = catalog.catalog_lookup(name)
            print(f"{name}\tdim {spec.dim}\tgenerators {' '.join(spec.names)}")
        return EXIT_OK
    if not args.name:
        raise InputError("catalog show requires a name")
    try:
        spec = catalog.catalog_lookup(args.name)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None
    sys.stdout.write(dumps(group_to_dict(spec)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flatcusp",
        description="Embed Bieberbach groups as integral cusp groups of hyperbolic orthogonal groups.",
    )
    parser.add_argument("--plain", action="store_true", help="plain output (the default; no colour is ever used)")
    sub = parser.add_subparsers(dest="command", required=True)

    def sampling(p):
        p.add_argument("--samples", type=int, default=100, help="random words to check")
        p.add_argument("--max-length", type=int, default=8, help="maximum random word length")
        p.add_argument("--seed", type=int, default=0, help="seed for random words")

    p = sub.add_parser("embed", help="build and verify the integral embedding")
    p.add_argument("source", help="group file or catalog:<name>")
    p.add_argument("--seed-form", help="JSON file holding a positive definite seed matrix")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "text"), default="json")
    sampling(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("verify", help="re-run every check on a saved report")
    p.add_argument("report")
    p.add_argument("--format", choices=("json", "text"), default="text")
    sampling(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("separate", help="separate an element from T_p by a congruence map")
    p.add_argument("report")
    p.add_argument("--element", required=True, help="word over the generators, or a matrix file")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("closure", help="exhibit T_rp inside the group's translations")
    p.add_argument("report")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--r", type=int)
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("catalog", help="list or show built-in groups")
    p.add_argument("action", choices=("list", "show"))
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, GroupFileError, CrystalError, LinalgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EmbeddingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
