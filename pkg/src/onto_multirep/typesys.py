"""Type-system view: classes become types, subclass edges become ``<=``
declarations, properties become function signatures and facts become typed
constants and applications. Checking is plain type-checking of that program
against a (possibly evolved) model."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from .model import OWL_THING, OntologyModel, is_datatype, literal_fits
from .ttl import Iri, Literal

ROOT = "Thing"
HEADER = "// type program"

UNDECLARED_TYPE = "undeclared-type"
SIGNATURE_MISMATCH = "signature-mismatch"
FUNCTIONAL_VIOLATION = "functional-violation"
DISJOINT_VIOLATION = "disjoint-violation"
KINDS = (UNDECLARED_TYPE, SIGNATURE_MISMATCH, FUNCTIONAL_VIOLATION, DISJOINT_VIOLATION)


@dataclass(frozen=True)
class TypeProgram:
    type_decls: tuple[str, ...] = ()
    subtype_decls: tuple[tuple[str, str], ...] = ()
    signatures: tuple[tuple[str, str, str], ...] = ()
    constant_decls: tuple[tuple[str, str], ...] = ()
    applications: tuple[tuple[str, str, "str | Literal"], ...] = ()

    def constant_groups(self) -> dict[str, list[str]]:
        groups: dict[str, list[str]] = {}
        for const, ty in self.constant_decls:
            groups.setdefault(ty, []).append(const)
        return groups


@dataclass(frozen=True)
class TypeCheckError:
    kind: str
    locus: str
    message: str
    subjects: tuple[str, ...] = ()

    def render(self) -> str:
        return f"ERROR {self.kind} at {self.locus}: {self.message}"


def _type_name(x: Iri | None) -> str:
    if x is None or x == OWL_THING:
        return ROOT
    return x.local


def _value(v) -> str:
    if isinstance(v, Literal):
        return f'"{v.value}"' if isinstance(v.value, str) else str(v.value)
    return v


def _application(p: str, a: str, b) -> str:
    return f"{p}({a}, {_value(b)})"


def emit_types(m: OntologyModel) -> tuple[TypeProgram, str]:
    types = [c.local for c in m.classes]
    subtypes = [(c.name.local, s.local) for c in m.classes.values() for s in c.supers]
    sigs = [(p.name.local, _type_name(p.domain), _type_name(p.range)) for p in m.properties.values()]
    if any(ROOT in (d, r) for _, d, r in sigs) and ROOT not in types:
        types.insert(0, ROOT)
    consts = [(f.individual.local, f.cls.local) for f in m.type_assertions()]
    consts = list(dict.fromkeys(consts))
    apps = [
        (f.property.local, f.subject.local, f.object if isinstance(f.object, Literal) else f.object.local)
        for f in m.prop_assertions()
    ]
    prog = TypeProgram(tuple(types), tuple(subtypes), tuple(sigs), tuple(consts), tuple(apps))
    return prog, render_types(prog)


def render_types(prog: TypeProgram) -> str:
    lines = [HEADER]
    if prog.type_decls:
        lines.append(", ".join(prog.type_decls) + " : type;")
    lines += [f"{sub} <= {sup};" for sub, sup in prog.subtype_decls]
    lines += [f"{p} : {d} -> {r};" for p, d, r in prog.signatures]
    lines += [f"{', '.join(cs)} : {ty};" for ty, cs in prog.constant_groups().items()]
    lines += [_application(p, a, b) + ";" for p, a, b in prog.applications]
    return "\n".join(lines) + "\n"


def typecheck(prog: TypeProgram, m: OntologyModel) -> list[TypeCheckError]:
    classes = {c.local: c for c in m.classes}
    props = {p.local: d for p, d in m.properties.items()}
    out: list[TypeCheckError] = []

    const_types: dict[str, list[Iri]] = defaultdict(list)
    for ty, consts in prog.constant_groups().items():
        locus = f"{', '.join(consts)} : {ty}"
        if ty == ROOT:
            continue
        if ty not in classes:
            out.append(TypeCheckError(UNDECLARED_TYPE, locus, f"type {ty} is not declared", tuple(consts)))
            continue
        for c in consts:
            const_types[c].append(classes[ty])

    def fits(const: str, required: Iri | None) -> bool:
        if required is None or required == OWL_THING:
            return True
        return any(required in m.ancestors[t] for t in const_types.get(const, ()))

    values: dict[tuple[str, str], list] = defaultdict(list)
    for p, a, b in prog.applications:
        locus = _application(p, a, b)
        decl = props.get(p)
        if decl is None:
            out.append(TypeCheckError(SIGNATURE_MISMATCH, locus, f"function {p} is not declared", (a,)))
            continue
        sig = f"{p} : {_type_name(decl.domain)} -> {_type_name(decl.range)}"
        if not fits(a, decl.domain):
            out.append(TypeCheckError(SIGNATURE_MISMATCH, locus, f"{a} does not conform to {sig}", (a,)))
        if isinstance(b, Literal):
            if decl.range is not None and not (is_datatype(decl.range) and literal_fits(b, decl.range)):
                out.append(TypeCheckError(SIGNATURE_MISMATCH, locus, f"{_value(b)} does not conform to {sig}", (a,)))
        elif decl.range is not None and is_datatype(decl.range):
            out.append(TypeCheckError(SIGNATURE_MISMATCH, locus, f"{b} is not a {decl.range.local} value", (b,)))
        elif not fits(b, decl.range):
            out.append(TypeCheckError(SIGNATURE_MISMATCH, locus, f"{b} does not conform to {sig}", (b,)))
        if b not in values[p, a]:
            values[p, a].append(b)

    for (p, a), bs in values.items():
        decl = props.get(p)
        if decl is not None and decl.functional and len(bs) > 1:
            locus = _application(p, a, bs[1])
            shown = ", ".join(_value(b) for b in bs)
            out.append(TypeCheckError(FUNCTIONAL_VIOLATION, locus, f"{p} is functional but {a} maps to {shown}", (a,)))
    return out


def error_keys(errors: list[TypeCheckError]) -> set[tuple[str, str, str]]:
    return {(e.kind, e.locus, s) for e in errors for s in e.subjects}


def new_error_subjects(before: list[TypeCheckError], after: list[TypeCheckError]) -> set[str]:
    """Subjects of errors present after an evolution step but not before it."""
    old = error_keys(before)
    return {s for (kind, locus, s) in error_keys(after) if (kind, locus, s) not in old}
