"""Command line front end.

    kleinforms classes --field 2,1 --module regular2
    kleinforms count   --field 2,1 --module cnf,2,1,1,1
    kleinforms canon   form.txt [--check]
    kleinforms quad    (form.txt | --field .. --module .. --label "label ..")
    kleinforms verify  [--field .. --module ..] [--tsv]

Exit codes: 0 success, 1 parse or argument error, 2 precondition failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import Sequence, TextIO

from . import classify as C
from . import oracle as O
from .field import Field, FieldError
from .forms import BilinearForm, QuadraticForm, bform_isometry_check, quad_is_invariant
from .kgmodules import FAMILIES, ModuleSpec, SpecError
from .matrix import Mat, MatrixError, parse_matrix_lines, to_text

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# argument and file parsing


def parse_field_arg(text: str) -> Field | None:
    """`2,e[,modulus]`, or `symbolic` (returns None)."""
    if text == "symbolic":
        return None
    parts = text.split(",")
    if len(parts) not in (2, 3) or parts[0] != "2":
        raise UsageError(f"--field expects 2,<e>[,<modulus>] or symbolic, got {text!r}")
    try:
        e = int(parts[1])
        mod = int(parts[2]) if len(parts) == 3 else None
        return Field(e, mod)
    except (ValueError, FieldError) as exc:
        raise UsageError(str(exc)) from exc


def _module(F: Field, family: str, n: int, coeffs: Sequence[int]) -> ModuleSpec:
    try:
        return ModuleSpec(family, F, n, tuple(coeffs))
    except (SpecError, FieldError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def parse_module_arg(F: Field, text: str) -> ModuleSpec:
    """`family[,n[,f0,f1,...]]` with f given by its coefficients from the constant term up."""
    parts = text.split(",")
    try:
        n = int(parts[1]) if len(parts) > 1 else 0
        coeffs = [int(c) for c in parts[2:]]
    except ValueError as exc:
        raise UsageError(f"bad --module {text!r}") from exc
    if parts[0] not in FAMILIES:
        raise UsageError(f"unknown family {parts[0]!r}; expected one of {', '.join(FAMILIES)}")
    return _module(F, parts[0], n, coeffs)


@dataclass
class FormFile:
    spec: ModuleSpec
    kind: str
    matrix: Mat
    label: str | None = None
    witness: Mat | None = None


def read_form_file(stream: TextIO) -> FormFile:
    lines = [ln.strip() for ln in stream.read().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    F: Field | None = None
    spec: ModuleSpec | None = None
    kind = "symplectic"
    mats: dict[str, Mat] = {}
    label = None
    slot = "matrix"
    i = 0
    try:
        while i < len(lines):
            words = lines[i].split()
            head = words[0]
            if head == "field":
                if len(words) not in (3, 4) or words[1] != "2":
                    raise UsageError(f"bad field line {lines[i]!r}")
                F = Field(int(words[2]), int(words[3]) if len(words) == 4 else None)
            elif head == "module":
                if F is None:
                    raise UsageError("module line before field line")
                if len(words) < 2:
                    raise UsageError("module line needs a family")
                n = int(words[2]) if len(words) > 2 else 0
                coeffs = [int(c) for c in words[3].split(",")] if len(words) > 3 else []
                spec = _module(F, words[1], n, coeffs)
            elif head == "kind":
                if len(words) != 2 or words[1] not in ("symplectic", "quadratic"):
                    raise UsageError("kind must be symplectic or quadratic")
                kind = words[1]
            elif head == "label":
                label = lines[i]
            elif head == "witness":
                slot = "witness"
            elif head == "matrix":
                if F is None:
                    raise UsageError("matrix before field line")
                r = int(words[1]) if len(words) == 3 else -1
                if r < 1:
                    raise UsageError(f"bad matrix header {lines[i]!r}")
                mats[slot] = parse_matrix_lines(F, lines[i], lines[i + 1 : i + 1 + r])
                slot = "matrix"
                i += r
            else:
                raise UsageError(f"unrecognised line {lines[i]!r}")
            i += 1
    except (ValueError, IndexError, FieldError, MatrixError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"malformed file: {exc}") from exc
    if spec is None or "matrix" not in mats:
        raise UsageError("file needs field, module and matrix lines")
    return FormFile(spec, kind, mats["matrix"], label, mats.get("witness"))


def form_file_text(ff: FormFile) -> str:
    out = [ff.spec.field.header(), ff.spec.header(), f"kind {ff.kind}", to_text(ff.matrix)]
    if ff.label:
        out.append(ff.label)
    if ff.witness is not None:
        out += ["witness", to_text(ff.witness)]
    return "\n".join(out)


# commands


def _spec_from_args(args: argparse.Namespace, allow_symbolic: bool = False) -> ModuleSpec | tuple[str, int, int]:
    if not args.field or not args.module:
        raise UsageError("--field and --module are required")
    F = parse_field_arg(args.field)
    if F is None:
        if not allow_symbolic:
            raise UsageError("symbolic fields only work with count")
        parts = args.module.split(",")
        if parts[0] not in FAMILIES:
            raise UsageError(f"unknown family {parts[0]!r}")
        n = int(parts[1]) if len(parts) > 1 else 0
        m = len(parts) - 3 if len(parts) > 3 else None
        return parts[0], n, m
    return parse_module_arg(F, args.module)


def cmd_classes(args: argparse.Namespace, out: TextIO) -> int:
    spec = _spec_from_args(args)
    assert isinstance(spec, ModuleSpec)
    labels = C.enumerate_classes(spec, cap=args.cap)
    if args.tsv:
        out.write("index\tlabel\tquadratic\n")
    for i, lab in enumerate(labels):
        quad = "yes" if C.quad_exists(lab) else "no"
        out.write(f"{i}\t{lab.text()}\t{quad}\n" if args.tsv else f"{lab.text()}\n")
    return EXIT_OK


def cmd_count(args: argparse.Namespace, out: TextIO) -> int:
    spec = _spec_from_args(args, allow_symbolic=True)
    if isinstance(spec, tuple):
        family, n, m = spec
        out.write(f"{C.count_formula(family, n, m)}\n")
        return EXIT_OK
    value = C.count_classes(spec)
    formula = C.count_formula(spec.family, spec.n, spec.m if spec.family in ("cnf", "cnf2") else 1)
    out.write(f"{value}\t{formula}\n" if args.tsv else f"{value}  ({formula})\n")
    if value <= args.cap and len(C.enumerate_classes(spec, cap=args.cap)) != value:
        sys.stderr.write("count does not match the enumeration\n")
        return EXIT_VERIFY
    return EXIT_OK


def _read(path: str) -> FormFile:
    try:
        with open(path) as fh:
            return read_form_file(fh)
    except OSError as exc:
        raise UsageError(str(exc)) from exc


def cmd_canon(args: argparse.Namespace, out: TextIO) -> int:
    ff = _read(args.file)
    spec = ff.spec
    if ff.kind != "symplectic":
        raise UsageError("canon takes a symplectic form; use quad for quadratic forms")
    if args.check:
        if ff.label is None or ff.witness is None:
            raise UsageError("--check needs a label line and a witness matrix")
        label = _parse_label(spec, ff.label)
        B = BilinearForm.on(spec, ff.matrix)
        ok = bform_isometry_check(B, C.representative(label), ff.witness)
        out.write("PASS\n" if ok else "FAIL\n")
        return EXIT_OK if ok else EXIT_VERIFY
    label, M = C.canonicalize(spec, ff.matrix)
    out.write(form_file_text(FormFile(spec, "symplectic", ff.matrix, label.text(), M)) + "\n")
    return EXIT_OK


def _parse_label(spec: ModuleSpec, text: str) -> C.ClassLabel:
    try:
        return C.parse_label(spec, text)
    except C.ClassifyError as exc:
        raise UsageError(str(exc)) from exc


def _write_quad_family(label: C.ClassLabel, out: TextIO) -> None:
    fam = C.quad_representatives(label)
    if not C.quad_exists(label):
        out.write("NONE\n")
        return
    out.write(f"EXISTS {len(fam.forms)}\n# {fam.description}\n")
    for ql, q in zip(fam.labels, fam.forms):
        out.write(f"{ql.text()}\n{to_text(q.rep)}\n")


def cmd_quad(args: argparse.Namespace, out: TextIO) -> int:
    if args.file:
        ff = _read(args.file)
        spec = ff.spec
        if ff.kind == "symplectic":
            label, _ = C.canonicalize(spec, ff.matrix)
            out.write(label.text() + "\n")
            _write_quad_family(label, out)
            return EXIT_OK
        q = QuadraticForm.on(spec, ff.matrix)
        if not quad_is_invariant(q):
            raise C.ClassifyError("quadratic form is not G-invariant")
        label, ql, M = C.quad_classify(spec, ff.matrix)
        out.write(f"{label.text()}\n{ql.text()}\nwitness\n{to_text(M)}\n")
        return EXIT_OK
    spec = _spec_from_args(args)
    assert isinstance(spec, ModuleSpec)
    if args.label:
        labels = [_parse_label(spec, args.label)]
    else:
        labels = C.enumerate_classes(spec, cap=args.cap)
    for label in labels:
        out.write(label.text() + "\n")
        _write_quad_family(label, out)
    return EXIT_OK


DEFAULT_SUITE = [
    ("trivial2", 0, ()),
    ("regular", 0, ()),
    ("regular2", 0, ()),
    ("anbn", 1, ()),
    ("anbn", 2, ()),
    ("cnf", 1, (0, 1)),
    ("cnf", 2, (0, 1)),
    ("cnf", 1, (1, 1, 1)),
    ("cnf", 2, (1, 1, 1)),
    ("cnf2", 1, (0, 1)),
    ("cnf2", 2, (0, 1)),
    ("cnf2", 3, (0, 1)),
    ("cninf", 1, ()),
    ("cninf", 2, ()),
    ("cninf2", 2, ()),
    ("cninf2", 3, ()),
]


def cmd_verify(args: argparse.Namespace, out: TextIO) -> int:
    if args.module:
        spec = _spec_from_args(args)
        assert isinstance(spec, ModuleSpec)
        specs = [spec]
    else:
        F = parse_field_arg(args.field or "2,1")
        if F is None:
            raise UsageError("verify needs a finite field")
        specs = [_module(F, fam, n, f) for fam, n, f in DEFAULT_SUITE]
    restrict = {"auto": None, "on": True, "off": False}[args.restrict_d]
    all_ok = True
    for spec in specs:
        try:
            rep = O.verify(spec, restrict_D=restrict, samples=args.samples, seed=args.seed)
        except O.OracleError as exc:
            out.write(f"FAIL\t{spec.field.header()} {spec.header()}\t{exc}\n")
            all_ok = False
            continue
        all_ok &= rep.ok
        out.write((rep.tsv() if args.tsv else rep.summary()) + "\n")
    out.write("PASS\n" if all_ok else "FAIL\n")
    return EXIT_OK if all_ok else EXIT_VERIFY


# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kleinforms", description="Invariant symplectic and quadratic forms for the Klein four group.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--field", help="2,<e>[,<modulus>]  (count also accepts: symbolic)")
        sp.add_argument("--module", help="<family>[,<n>[,<f coefficients, constant term first>]]")
        sp.add_argument("--tsv", action="store_true", help="tab separated output")
        sp.add_argument("--cap", type=int, default=C.ENUMERATION_CAP, help="enumeration cap")

    common(sub.add_parser("classes", help="list the isometry classes"))
    common(sub.add_parser("count", help="number of classes and its formula"))
    sp = sub.add_parser("canon", help="label and witness for a form read from a file")
    sp.add_argument("file")
    sp.add_argument("--check", action="store_true", help="re-verify the label and witness stored in the file")
    sp = sub.add_parser("quad", help="quadratic refinements of a class or of a form in a file")
    sp.add_argument("file", nargs="?")
    sp.add_argument("--label", help="a label line, e.g. 'label anbn omega=1,0'")
    common(sp)
    sp = sub.add_parser("verify", help="cross-check against the brute-force oracle")
    common(sp)
    sp.add_argument("--restrict-d", choices=("auto", "on", "off"), default="auto")
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    return p


COMMANDS = {"classes": cmd_classes, "count": cmd_count, "canon": cmd_canon, "quad": cmd_quad, "verify": cmd_verify}


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except (C.ClassifyError, SpecError) as exc:
        sys.stderr.write(f"precondition failed: {exc}\n")
        return EXIT_PRECONDITION
    except (ValueError, MatrixError) as exc:
        sys.stderr.write(f"precondition failed: {exc}\n")
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
