"""Command-line entry point: ``onto-multirep {parse,check,emit,evolve}``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import oo, sql, typesys
from .evolution import OpSyntaxError, UnknownEntity, detect, parse_ops
from .model import (
    ERROR,
    CheckConfig,
    ModelError,
    OntologyModel,
    build_model,
    check_abox,
    errors,
    infer_domain_types,
    validate_tbox,
)
from .ops import UnsupportedOp
from .ttl import TtlSyntaxError, UnknownPrefix, parse_document, serialize

EX_OK, EX_FINDINGS, EX_DISAGREE = 0, 1, 2
EX_USAGE, EX_DATAERR, EX_SOFTWARE = 64, 65, 70

TARGETS = ("types", "oo", "sql")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    top = _Parser(prog="onto-multirep", description="Compile a small OWL/N3 ontology into type, class and table views.")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", help="print the triples of a document in canonical form")
    p.add_argument("input")
    p.add_argument("--out", help="also write <name>.triples.ttl into this directory")

    c = sub.add_parser("check", help="validate the TBox and check the ABox")
    c.add_argument("input")
    mode = c.add_mutually_exclusive_group()
    mode.add_argument("--strict", action="store_true", help="declared types only (default)")
    mode.add_argument("--infer", action="store_true", help="add types implied by property domains first")
    c.add_argument("--restriction-severity", choices=("warning", "error"), default="warning")
    c.add_argument("--format", choices=("text", "json"), default="text")

    e = sub.add_parser("emit", help="write the selected views")
    e.add_argument("input")
    e.add_argument("--target", action="append", choices=TARGETS, required=True)
    e.add_argument("--out", default="out")

    v = sub.add_parser("evolve", help="apply evolution operations and compare the views")
    v.add_argument("input")
    v.add_argument("--ops", required=True)
    v.add_argument("--out", default="out")
    v.add_argument("--format", choices=("text", "json"), default="text")
    return top


def _color(stream) -> bool:
    return os.environ.get("ONTO_MULTIREP_COLOR", "1") != "0" and stream.isatty()


def _paint(line: str, severity: str, stream) -> str:
    if not _color(stream):
        return line
    code = "31" if severity == ERROR else "33"
    return f"\x1b[{code}m{line}\x1b[0m"


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _load(path: str) -> OntologyModel:
    return build_model(parse_document(_read(path)))


def _require_valid(m: OntologyModel) -> None:
    problems = validate_tbox(m)
    if problems:
        raise InputError("\n".join(f.render() for f in problems))


def _write_all(out: Path, files: dict[str, str]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def cmd_parse(args) -> int:
    ts = parse_document(_read(args.input))
    text = serialize(ts)
    if args.out:
        _write_all(Path(args.out), {f"{Path(args.input).stem}.triples.ttl": text})
    sys.stdout.write(text)
    return EX_OK


def cmd_check(args) -> int:
    m = _load(args.input)
    findings = validate_tbox(m)
    if not findings:
        if args.infer:
            m = infer_domain_types(m)
        findings = list(m.warnings) + check_abox(m, CheckConfig(infer=args.infer, restriction_severity=args.restriction_severity))
    else:
        findings = list(m.warnings) + findings
    if args.format == "json":
        sys.stdout.write(_dump({"schema": "1", "findings": [f.to_json() for f in findings]}))
    else:
        for f in findings:
            print(_paint(f.render(), f.severity, sys.stdout))
        n = len(errors(findings))
        print(f"{n} error(s), {len(findings) - n} warning(s)")
    return EX_FINDINGS if errors(findings) else EX_OK


def cmd_emit(args) -> int:
    m = _load(args.input)
    _require_valid(m)
    stem = Path(args.input).stem
    files: dict[str, str] = {}
    for target in dict.fromkeys(args.target):
        if target == "types":
            files[f"{stem}.types"] = typesys.emit_types(m)[1]
        elif target == "oo":
            cm = oo.emit_class_model(m)
            instances = oo.instantiate(cm, m)
            model = cm.to_json()
            model["instances"] = [i.to_json() for i in instances]
            files[f"{stem}.oo.json"] = _dump(model)
            files[f"{stem}.java.txt"] = oo.render_skeleton(cm)
        else:
            ddl, schema = sql.emit_ddl(m)
            db = sql.populate(m, schema)
            files[f"{stem}.sql"] = ddl + "\n" + sql.render_inserts(db, schema)
    _write_all(Path(args.out), files)
    for name in files:
        print(Path(args.out) / name)
    return EX_OK


def cmd_evolve(args) -> int:
    m = _load(args.input)
    _require_valid(m)
    ops = parse_ops(_read(args.ops), m)
    report = detect(m, ops)
    stem = Path(args.input).stem
    statements = []
    for r in report.results:
        statements += [f"-- {r.op}", r.sql_query + ";", r.sql_constraint + ";", ""]
    _write_all(
        Path(args.out),
        {f"{stem}.report.json": _dump(report.to_json()), f"{stem}.evolution.sql": "\n".join(statements)},
    )
    if args.format == "json":
        sys.stdout.write(_dump(report.to_json()))
    else:
        for r in report.results:
            sets = "  ".join(f"{k}={{{', '.join(sorted(v))}}}" for k, v in r.backends.items())
            flag = "agree" if r.agreement else "DISAGREE"
            print(f"{r.op}: {sets}  [{flag}]")
    if not report.agreement:
        return EX_DISAGREE
    return EX_FINDINGS if report.inconsistent else EX_OK


COMMANDS = {"parse": cmd_parse, "check": cmd_check, "emit": cmd_emit, "evolve": cmd_evolve}

INPUT_ERRORS = (
    TtlSyntaxError,
    UnknownPrefix,
    ModelError,
    OpSyntaxError,
    UnknownEntity,
    UnsupportedOp,
    sql.PopulationError,
    oo.AmbiguousClass,
    oo.NoClass,
    oo.MultipleInheritance,
    InputError,
)


def main(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except INPUT_ERRORS as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"input error: {message}", file=sys.stderr)
        return EX_DATAERR
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EX_SOFTWARE


def run() -> None:
    sys.exit(main())
