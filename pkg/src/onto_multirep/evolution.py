"""Evolution operations: parsing, application to the model, and the
three-way inconsistency detection."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from dataclasses import replace as _replace

from . import oo, sql, typesys
from .model import WARNING, Code, Finding, OntologyModel, Restriction
from .ops import ChangeDomain, DeleteClass, EvolutionOp, UnsupportedOp
from .ttl import Iri

BACKENDS = ("types", "oo", "sql")
REPORT_SCHEMA = "1"


class OpSyntaxError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownEntity(KeyError):
    pass


_NAME = r"[^\s#]+"
_LINE = re.compile(rf"(change-domain)\s+({_NAME})\s+({_NAME})|(delete-class)\s+({_NAME})")


def _name(m: OntologyModel | None, text: str) -> Iri:
    if m is not None:
        try:
            return m.resolve(text)
        except KeyError:
            pass
    return Iri(text, None, text)


def parse_ops(text: str, m: OntologyModel | None = None) -> list[EvolutionOp]:
    """Read one operation per line. Names are resolved against ``m`` when given."""
    ops: list[EvolutionOp] = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _LINE.fullmatch(line)
        if match is None:
            raise OpSyntaxError(n, f"cannot read operation {line!r}")
        if match.group(1):
            ops.append(ChangeDomain(_name(m, match.group(2)), _name(m, match.group(3))))
        else:
            ops.append(DeleteClass(_name(m, match.group(5))))
    return ops


def _lookup(table: dict, x: Iri, what: str) -> Iri:
    if x in table:
        return x
    for key in table:
        if key.local == x.local:
            return key
    raise UnknownEntity(f"unknown {what} {x.local}")


def bind(m: OntologyModel, op: EvolutionOp) -> EvolutionOp:
    """Same operation with names replaced by the model's own IRIs."""
    if isinstance(op, ChangeDomain):
        return ChangeDomain(_lookup(m.properties, op.property, "property"), _lookup(m.classes, op.new_domain, "class"))
    if isinstance(op, DeleteClass):
        return DeleteClass(_lookup(m.classes, op.cls, "class"))
    raise UnsupportedOp(f"unsupported operation {op!r}")


def apply_op(m: OntologyModel, op: EvolutionOp) -> OntologyModel:
    op = bind(m, op)
    if isinstance(op, ChangeDomain):
        props = dict(m.properties)
        props[op.property] = _replace(props[op.property], domain=op.new_domain)
        return m.replace(properties=props)

    gone = op.cls
    dead = m.classes[gone]
    heir = dead.supers[0] if dead.supers else None
    notes: list[Finding] = []

    def note(code: Code, subjects, message: str) -> None:
        notes.append(Finding(WARNING, code, tuple(s.local for s in subjects), message, backend="evolution"))

    classes = {}
    for name, c in m.classes.items():
        if name == gone:
            continue
        supers: list[Iri] = []
        for s in c.supers:
            for t in dead.supers if s == gone else (s,):
                if t not in supers:
                    supers.append(t)
        disjoint = tuple(d for d in c.disjoint_with if d != gone)
        if len(disjoint) != len(c.disjoint_with):
            note(Code.DROPPED_REFERENCE, [name], f"{name.local} is no longer disjoint with deleted {gone.local}")
        kept: list[Restriction] = []
        for r in c.restrictions:
            if r.target == gone:
                note(Code.DROPPED_REFERENCE, [name], f"restriction on {name.local}.{r.on_property.local} named deleted {gone.local}")
            else:
                kept.append(r)
        classes[name] = _replace(c, supers=tuple(supers), disjoint_with=disjoint, restrictions=tuple(kept))

    props = {}
    for name, p in m.properties.items():
        changes = {}
        for slot in ("domain", "range"):
            if getattr(p, slot) == gone:
                changes[slot] = heir
                to = heir.local if heir is not None else "Thing"
                note(Code.RETARGETED, [name], f"{slot} of {name.local} moved from deleted {gone.local} to {to}")
        props[name] = _replace(p, **changes) if changes else p
    return m.replace(classes=classes, properties=props, warnings=m.warnings + tuple(notes))


@dataclass
class OpResult:
    op: EvolutionOp
    backends: dict[str, frozenset[str]]
    findings: list[str] = field(default_factory=list)
    sql_query: str = ""
    sql_constraint: str = ""

    @property
    def merged(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for s in self.backends.values():
            out |= s
        return out

    @property
    def agreement(self) -> bool:
        sets = list(self.backends.values())
        return all(s == sets[0] for s in sets)

    def to_json(self) -> dict:
        return {
            "op": str(self.op),
            "backends": {k: sorted(v) for k, v in self.backends.items()},
            "merged": sorted(self.merged),
            "agreement": self.agreement,
            "findings": list(self.findings),
            "artifacts": {"sql_query": self.sql_query, "sql_constraint": self.sql_constraint},
        }


@dataclass
class EvolutionReport:
    results: list[OpResult] = field(default_factory=list)
    model: OntologyModel | None = None  # model after the last op

    @property
    def agreement(self) -> bool:
        return all(r.agreement for r in self.results)

    @property
    def inconsistent(self) -> bool:
        return any(r.merged for r in self.results)

    def to_json(self) -> dict:
        return {"schema": REPORT_SCHEMA, "ops": [r.to_json() for r in self.results]}


def detect(m_old: OntologyModel, ops: list[EvolutionOp]) -> EvolutionReport:
    """Apply ``ops`` one after another and ask every view which of the
    original individuals each step makes inconsistent."""
    report = EvolutionReport(model=m_old)
    if not ops:
        return report
    prog, _ = typesys.emit_types(m_old)
    cm = oo.emit_class_model(m_old)
    objects = oo.instantiate(cm, m_old)
    schema = sql.build_schema(m_old)
    db = sql.populate(m_old, schema)

    current, errs = m_old, typesys.typecheck(prog, m_old)
    for n, raw in enumerate(ops, 1):
        op = bind(current, raw)
        after = apply_op(current, op)

        new_errs = typesys.typecheck(prog, after)
        types_set = typesys.new_error_subjects(errs, new_errs)
        old_keys = typesys.error_keys(errs)
        shown = [e.render() for e in new_errs if any((e.kind, e.locus, s) not in old_keys for s in e.subjects)]

        cm = oo.evolve_class_model(cm, op, current, after)
        oo_set = oo.find_inconsistent_objects(objects, cm, op)

        sql_set = sql.eval_inconsistency(db, op, m_old, schema)

        result = OpResult(
            op=op,
            backends={"types": frozenset(types_set), "oo": frozenset(oo_set), "sql": frozenset(sql_set)},
            findings=shown + [w.render() for w in after.warnings[len(current.warnings):]],
            sql_query=sql.emit_inconsistency_query(op, m_old, schema),
            sql_constraint=sql.emit_evolution_constraints(op, m_old, schema, name=f"C{n}"),
        )
        report.results.append(result)
        current, errs = after, new_errs
    report.model = current
    return report
