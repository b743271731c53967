"""Object-oriented view: a single-inheritance class model rooted at ``Thing``,
with fields and accessors for properties, listeners for someValuesFrom
restrictions, blocking interfaces for disjoint classes, and per-class
instance registries."""

from __future__ import annotations

import copy
from collections import defaultdict
from dataclasses import asdict, dataclass, field

from .model import (
    ERROR,
    OWL_THING,
    WARNING,
    Code,
    Finding,
    OntologyModel,
    is_datatype,
)
from .ops import ChangeDomain, DeleteClass, UnsupportedOp
from .ttl import Iri, Literal

ROOT = "Thing"

UnknownOp = UnsupportedOp


class MultipleInheritance(Exception):
    pass


class AmbiguousClass(Exception):
    pass


class NoClass(Exception):
    pass


@dataclass
class OoField:
    name: str
    target: str
    multiplicity: str  # "single" | "many"
    setter_removed: bool = False
    redefined: bool = False


@dataclass
class OoInterface:
    name: str
    operations: list[tuple[str, str]] = field(default_factory=list)
    stands_for: str | None = None


@dataclass
class OoClass:
    name: str
    extends: str | None
    implements: list[str] = field(default_factory=list)
    fields: list[OoField] = field(default_factory=list)
    listeners: list[tuple[str, str]] = field(default_factory=list)
    constructor_blocked: bool = False
    registry: list[str] = field(default_factory=list)

    def field(self, name: str) -> OoField | None:
        for f in self.fields:
            if f.name == name:
                return f
        return None


@dataclass
class ClassModel:
    classes: dict[str, OoClass] = field(default_factory=dict)
    interfaces: dict[str, OoInterface] = field(default_factory=dict)
    warnings: list[Finding] = field(default_factory=list)

    def supers(self, name: str) -> list[str]:
        """Direct supers: the extended class, then classes stood for by interfaces."""
        cls = self.classes[name]
        out = [cls.extends] if cls.extends else []
        for i in cls.implements:
            target = self.interfaces[i].stands_for
            if target and target not in out:
                out.append(target)
        return out

    def lineage(self, name: str) -> set[str]:
        seen = {name}
        todo = [name]
        while todo:
            for s in self.supers(todo.pop()):
                if s in self.classes and s not in seen:
                    seen.add(s)
                    todo.append(s)
        return seen

    def is_subclass(self, a: str, b: str) -> bool:
        return a in self.classes and b in self.lineage(a)

    def lookup_field(self, cls: str, name: str) -> OoField | None:
        """Nearest declaration of ``name`` walking up the extends chain."""
        current = cls
        while current is not None and current in self.classes:
            f = self.classes[current].field(name)
            if f is not None:
                return f
            current = self.classes[current].extends
        for s in self.lineage(cls) - {cls}:
            f = self.classes[s].field(name)
            if f is not None:
                return f
        return None

    def to_json(self) -> dict:
        return {
            "classes": [asdict(c) for c in self.classes.values()],
            "interfaces": [asdict(i) for i in self.interfaces.values()],
        }


@dataclass(frozen=True)
class OoInstance:
    id: str
    creating_class: str
    slots: dict[str, tuple]
    declared: tuple[str, ...] = ()
    ambiguous: bool = False

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "creating_class": self.creating_class,
            "slots": {k: list(v) for k, v in self.slots.items()},
        }


def _class_name(x: Iri | None) -> str:
    if x is None or x == OWL_THING:
        return ROOT
    return x.local


def _target(x: Iri | None) -> str:
    if is_datatype(x):
        return {"integer": "int", "int": "int", "long": "long"}.get(x.local, "String")
    return _class_name(x)


def emit_class_model(m: OntologyModel, strict: bool = False) -> ClassModel:
    cm = ClassModel()
    cm.classes[ROOT] = OoClass(ROOT, None, fields=[OoField("objectURL", "String", "single")])
    for c in m.classes.values():
        supers = [s for s in c.supers if s in m.classes]
        if len(supers) > 1:
            if strict:
                raise MultipleInheritance(f"{c.name.local} has supers {', '.join(s.local for s in supers)}")
            cm.warnings.append(
                Finding(WARNING, Code.MULTIPLE_INHERITANCE, (c.name.local,),
                        f"{c.name.local} extends {supers[0].local}; other supers become interfaces", "oo")
            )
        cls = OoClass(c.name.local, supers[0].local if supers else ROOT)
        for s in supers[1:]:
            iname = f"I{s.local}"
            cm.interfaces.setdefault(iname, OoInterface(iname, stands_for=s.local))
            cls.implements.append(iname)
        cls.listeners = [(r.on_property.local, r.target.local) for r in c.restrictions]
        cm.classes[cls.name] = cls

    for p in m.properties.values():
        owner = _class_name(p.domain)
        if owner not in cm.classes:
            owner = ROOT
        multiplicity = "single" if p.functional else "many"
        cm.classes[owner].fields.append(OoField(p.name.local, _target(p.range), multiplicity))

    done = set()
    for c in m.classes.values():
        for d in c.disjoint_with:
            pair = frozenset((c.name, d))
            if d not in m.classes or pair in done:
                continue
            done.add(pair)
            a, b = c.name.local, d.local
            op = f"disjoint{a}{b}"
            for mine, other in ((a, b), (b, a)):
                iname = f"{mine}Not{other}"
                cm.interfaces[iname] = OoInterface(iname, [(op, mine)])
                cm.classes[mine].implements.append(iname)
    return cm


def disjoint_blockers(cm: ClassModel) -> list[tuple[str, str, str]]:
    """(class, class, operation) triples for every pair whose interfaces clash."""
    ops: dict[str, list[tuple[str, str]]] = defaultdict(list)
    for c in cm.classes.values():
        for iname in c.implements:
            for op, result in cm.interfaces[iname].operations:
                ops[op].append((c.name, result))
    out = []
    for op, users in ops.items():
        for i, (a, ra) in enumerate(users):
            for b, rb in users[i + 1:]:
                if ra != rb:
                    out.append((a, b, op))
    return out


# --- rendering -------------------------------------------------------------


def _render_field(cls: OoClass, f: OoField) -> list[str]:
    ty = f.target if f.multiplicity == "single" else f"List<{f.target}>"
    lines = []
    if not f.redefined:
        lines.append(f"  protected {ty} {f.name};")
    if f.setter_removed:
        lines.append(f"  public void set{f.name}({ty} v) {{ throw new UnsupportedOperationException(\"set{f.name}\"); }}")
    elif f.redefined:
        lines.append(f"  public void set{f.name}({ty} v) {{ this.{f.name} = v; }}")
    else:
        lines.append(f"  public void set{f.name}({ty} v) {{ ... }}")
    if not f.redefined:
        lines.append(f"  public {ty} get{f.name}() {{ ... }}")
    return lines


def render_skeleton(cm: ClassModel) -> str:
    out: list[str] = []
    for i in cm.interfaces.values():
        out.append(f"public interface {i.name}")
        out.append("{")
        for op, result in i.operations:
            out.append(f"  {result} {op}();")
        out.append("}")
        out.append("")
    for c in cm.classes.values():
        header = f"public class {c.name}"
        if c.extends:
            header += f" extends {c.extends}"
        if c.implements:
            header += f" implements {', '.join(c.implements)}"
        out.append(header)
        out.append("{")
        for f in c.fields:
            out.extend(_render_field(c, f))
        for prop, target in c.listeners:
            out.append(f"  // listener {c.name}{prop}Test is registered on the accessors of {prop}:")
            out.append(f"  // a {c.name} needs at least one {prop} value that is a {target}")
        if c.registry or c.constructor_blocked:
            out.append("  private static ArrayList tous = new ArrayList();")
        if c.constructor_blocked:
            out.append(f"  public {c.name}() {{ throw new UnsupportedOperationException(\"{c.name} is blocked\"); }}")
        elif c.registry:
            out.append(f"  public {c.name}() {{ tous.add(new WeakReference(this)); }}")
        for iname in c.implements:
            for op, result in cm.interfaces[iname].operations:
                out.append(f"  public {result} {op}() {{ return null; }}")
        out.append("}")
        out.append("")
    return "\n".join(out)


# --- instances -------------------------------------------------------------


def instantiate(cm: ClassModel, m: OntologyModel) -> list[OoInstance]:
    """Create one object per typed individual and record it in its class registry."""
    slots: dict[Iri, dict[str, list]] = defaultdict(lambda: defaultdict(list))
    for f in m.prop_assertions():
        value = f.object.value if isinstance(f.object, Literal) else f.object.local
        slots[f.subject][f.property.local].append(value)
    instances = []
    for ind in m.individuals:
        cls, ambiguous = m.most_specific(ind)
        if cls is None:
            raise NoClass(f"{ind.local} has no declared class")
        declared = tuple(c.local for c in m.declared_types.get(ind, ()))
        inst = OoInstance(
            ind.local,
            cls.local,
            {k: tuple(v) for k, v in slots[ind].items()},
            declared,
            ambiguous,
        )
        cm.classes[cls.local].registry.append(inst.id)
        instances.append(inst)
    return instances


def check_objects(cm: ClassModel, instances: list[OoInstance]) -> list[Finding]:
    """Closed-world checks on an object graph: slots must exist on the object's
    class, single fields hold one value, listeners need a matching value."""
    by_id = {i.id: i for i in instances}
    out = []
    for inst in instances:
        for name, values in inst.slots.items():
            f = cm.lookup_field(inst.creating_class, name)
            if f is None:
                out.append(Finding(ERROR, Code.DOMAIN_VIOLATION, (inst.id,),
                                   f"{inst.creating_class} has no field {name}", "oo"))
            elif f.multiplicity == "single" and len(set(values)) > 1:
                out.append(Finding(ERROR, Code.FUNCTIONAL_VIOLATION, (inst.id,),
                                   f"single field {name} holds {len(set(values))} values", "oo"))
        for cls in sorted(cm.lineage(inst.creating_class)):
            for prop, target in cm.classes[cls].listeners:
                ok = any(
                    v in by_id and cm.is_subclass(by_id[v].creating_class, target)
                    for v in inst.slots.get(prop, ())
                )
                if not ok:
                    out.append(Finding(WARNING, Code.MISSING_RESTRICTION_VALUE, (inst.id,),
                                       f"listener on {cls}.{prop} expects a {target}", "oo"))
    return out


# --- evolution -------------------------------------------------------------


def evolve_class_model(cm: ClassModel, op, before: OntologyModel, after: OntologyModel) -> ClassModel:
    """Class model after ``op``; existing classes and registries are kept so
    that objects created earlier can still be inspected."""
    new = copy.deepcopy(cm)
    if isinstance(op, ChangeDomain):
        p = op.property.local
        old_owner = _class_name(before.properties[op.property].domain)
        target = op.new_domain.local
        if old_owner == target:
            return new
        affected = [c for c in new.classes if new.is_subclass(c, old_owner) and not new.is_subclass(c, target)]
        decl = new.lookup_field(old_owner, p)
        for c in affected:
            own = new.classes[c].field(p)
            if own is not None:
                own.setter_removed = True
            elif decl is not None:
                new.classes[c].fields.append(OoField(p, decl.target, decl.multiplicity, True, True))
        if decl is not None and new.classes[target].field(p) is None:
            redefined = new.is_subclass(target, old_owner)
            new.classes[target].fields.append(OoField(p, decl.target, decl.multiplicity, False, redefined))
        return new
    if isinstance(op, DeleteClass):
        gone = op.cls.local
        blocked = new.classes[gone]
        blocked.constructor_blocked = True
        for c in new.classes.values():
            if c.extends == gone:
                c.extends = blocked.extends
        for iri_, decl in before.properties.items():
            if decl.domain == op.cls:
                owner = _class_name(after.properties[iri_].domain)
                f = blocked.field(iri_.local)
                if f is not None and new.classes[owner].field(f.name) is None:
                    new.classes[owner].fields.append(copy.copy(f))
        return new
    raise UnknownOp(f"unsupported operation {op!r}")


def find_inconsistent_objects(instances: list[OoInstance], evolved: ClassModel, op) -> set[str]:
    if isinstance(op, ChangeDomain):
        p, target = op.property.local, op.new_domain.local
        bad = set()
        for inst in instances:
            if not inst.slots.get(p):
                continue
            if inst.ambiguous:
                raise AmbiguousClass(f"{inst.id} is declared as {', '.join(inst.declared)}")
            if not evolved.is_subclass(inst.creating_class, target):
                bad.add(inst.id)
        return bad
    if isinstance(op, DeleteClass):
        gone = op.cls.local
        for inst in instances:
            if inst.ambiguous and gone in inst.declared:
                raise AmbiguousClass(f"{inst.id} is declared as {', '.join(inst.declared)}")
        return set(evolved.classes[gone].registry) if gone in evolved.classes else set()
    raise UnknownOp(f"unsupported operation {op!r}")
