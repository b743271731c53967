"""Ontology model (TBox + ABox) built from triples, with subsumption queries
and the closed-world conformance checker shared by every backend."""

from __future__ import annotations

import dataclasses
import enum
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Union

from .ttl import (
    OWL,
    RDF,
    RDF_FIRST,
    RDF_NIL,
    RDF_REST,
    RDF_TYPE,
    RDFS,
    XSD,
    BNode,
    Iri,
    Literal,
    Node,
    TripleSet,
    iri,
)


class ModelError(Exception):
    pass


class DuplicateDeclaration(ModelError):
    pass


class UnknownClass(KeyError):
    pass


class Code(str, enum.Enum):
    """Closed list of finding codes; the values are part of the report schema."""

    CYCLE = "cycle"
    DANGLING_REF = "dangling-ref"
    DOMAIN_VIOLATION = "domain-violation"
    RANGE_VIOLATION = "range-violation"
    FUNCTIONAL_VIOLATION = "functional-violation"
    DISJOINT_VIOLATION = "disjoint-violation"
    MISSING_RESTRICTION_VALUE = "missing-restriction-value"
    UNDECLARED_CLASS = "undeclared-class"
    UNKNOWN_PREDICATE = "unknown-predicate"
    DUPLICATE_DECLARATION = "duplicate-declaration"
    ORPHAN_RESTRICTION = "orphan-restriction"
    MULTIPLE_INHERITANCE = "multiple-inheritance"
    RETARGETED = "retargeted"
    DROPPED_REFERENCE = "dropped-reference"


ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Finding:
    severity: str
    code: Code
    subjects: tuple[str, ...]
    message: str
    backend: str = "model"

    def render(self) -> str:
        who = ", ".join(self.subjects)
        return f"{self.severity.upper()} {self.code.value} [{self.backend}] {who}: {self.message}"

    def to_json(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code.value,
            "subjects": list(self.subjects),
            "backend": self.backend,
            "message": self.message,
        }


# --- vocabulary ------------------------------------------------------------

SUBCLASS_OF = iri(RDFS, "subClassOf", "rdfs")
SUBPROPERTY_OF = iri(RDFS, "subPropertyOf", "rdfs")
DOMAIN = iri(RDFS, "domain", "rdfs")
RANGE = iri(RDFS, "range", "rdfs")
RDFS_CLASS = iri(RDFS, "Class", "rdfs")
RDFS_LITERAL = iri(RDFS, "Literal", "rdfs")
RDF_PROPERTY = iri(RDF, "Property", "rdf")
OWL_CLASS = iri(OWL, "Class", "owl")
OWL_THING = iri(OWL, "Thing", "owl")
RESTRICTION = iri(OWL, "Restriction", "owl")
ON_PROPERTY = iri(OWL, "onProperty", "owl")
SOME_VALUES_FROM = iri(OWL, "someValuesFrom", "owl")
FUNCTIONAL = iri(OWL, "FunctionalProperty", "owl")
OBJECT_PROPERTY = iri(OWL, "ObjectProperty", "owl")
DATATYPE_PROPERTY = iri(OWL, "DatatypeProperty", "owl")
EQUIVALENT_CLASS = iri(OWL, "equivalentClass", "owl")
INTERSECTION_OF = iri(OWL, "intersectionOf", "owl")
DISJOINT_WITH = (iri(OWL, "disjointWith", "owl"), iri(OWL, "DisjointWith", "owl"))

CLASS_TYPES = {OWL_CLASS, RDFS_CLASS}
PROPERTY_TYPES = {RDF_PROPERTY, FUNCTIONAL, OBJECT_PROPERTY, DATATYPE_PROPERTY}
VOCAB_NAMESPACES = (RDF, RDFS, OWL)

STRING_TYPES = {iri(XSD, "string", "xsd")}
INTEGER_TYPES = {iri(XSD, n, "xsd") for n in ("integer", "int", "long", "nonNegativeInteger")}


def is_datatype(x: Iri | None) -> bool:
    return x is not None and (x.full.startswith(XSD) or x == RDFS_LITERAL)


def literal_fits(lit: Literal, datatype: Iri) -> bool:
    if datatype in STRING_TYPES:
        return isinstance(lit.value, str)
    if datatype in INTEGER_TYPES:
        return isinstance(lit.value, int)
    return True


# --- model types -----------------------------------------------------------


@dataclass(frozen=True)
class Restriction:
    on_property: Iri
    target: Iri
    kind: str = "someValuesFrom"


@dataclass(frozen=True)
class ClassDecl:
    name: Iri
    supers: tuple[Iri, ...] = ()
    disjoint_with: tuple[Iri, ...] = ()
    restrictions: tuple[Restriction, ...] = ()
    complete: bool = False
    # document position of the first named-super edge; orders siblings
    edge_index: int = 1 << 30


@dataclass(frozen=True)
class PropertyDecl:
    name: Iri
    supers: tuple[Iri, ...] = ()
    domain: Iri | None = None
    range: Iri | None = None
    functional: bool = False
    datatype: bool = False

    @property
    def is_object(self) -> bool:
        return not self.datatype and not is_datatype(self.range)


@dataclass(frozen=True)
class TypeAssertion:
    individual: Iri
    cls: Iri


@dataclass(frozen=True)
class PropAssertion:
    subject: Iri
    property: Iri
    object: Union[Iri, Literal]


Fact = Union[TypeAssertion, PropAssertion]


@dataclass(frozen=True)
class CheckConfig:
    infer: bool = False
    restriction_severity: str = WARNING


@dataclass(frozen=True)
class OntologyModel:
    classes: dict[Iri, ClassDecl] = field(default_factory=dict)
    properties: dict[Iri, PropertyDecl] = field(default_factory=dict)
    abox: tuple[Fact, ...] = ()
    prefixes: dict[str, str] = field(default_factory=dict)
    warnings: tuple[Finding, ...] = ()

    def replace(self, **changes) -> "OntologyModel":
        return dataclasses.replace(self, **changes)

    # lookups

    def resolve(self, name: str) -> Iri:
        """Find a declared class or property by local name, qname or full IRI."""
        for table in (self.classes, self.properties):
            for key in table:
                if name in (key.local, key.full, key.qname()):
                    return key
        raise KeyError(name)

    @cached_property
    def ancestors(self) -> dict[Iri, frozenset[Iri]]:
        """Reflexive-transitive super closure of every declared class."""
        result: dict[Iri, frozenset[Iri]] = {}

        def visit(c: Iri, stack: frozenset) -> frozenset[Iri]:
            if c in result:
                return result[c]
            acc = {c}
            for s in self.classes[c].supers:
                if s in self.classes and s not in stack:
                    acc |= visit(s, stack | {c})
            result[c] = frozenset(acc)
            return result[c]

        for c in self.classes:
            visit(c, frozenset())
        return result

    def children(self, c: Iri) -> list[Iri]:
        subs = [d for d in self.classes.values() if c in d.supers]
        order = {k: i for i, k in enumerate(self.classes)}
        subs.sort(key=lambda d: (d.edge_index, order[d.name]))
        return [d.name for d in subs]

    def primary_super(self, c: Iri) -> Iri | None:
        """First declared super that is itself a declared class."""
        for s in self.classes[c].supers:
            if s in self.classes:
                return s
        return None

    @cached_property
    def individuals(self) -> list[Iri]:
        seen: dict[Iri, None] = {}
        for f in self.abox:
            if isinstance(f, TypeAssertion):
                seen.setdefault(f.individual)
            else:
                seen.setdefault(f.subject)
                if isinstance(f.object, Iri):
                    seen.setdefault(f.object)
        return list(seen)

    @cached_property
    def declared_types(self) -> dict[Iri, list[Iri]]:
        out: dict[Iri, list[Iri]] = defaultdict(list)
        for f in self.abox:
            if isinstance(f, TypeAssertion) and f.cls not in out[f.individual]:
                out[f.individual].append(f.cls)
        return dict(out)

    def effective_types(self, ind: Iri) -> frozenset[Iri]:
        acc: set[Iri] = set()
        for c in self.declared_types.get(ind, ()):
            if c in self.classes:
                acc |= self.ancestors[c]
        return frozenset(acc)

    def most_specific(self, ind: Iri) -> tuple[Iri | None, bool]:
        """Most specific declared class of ``ind`` and whether the choice was ambiguous.

        Ties between incomparable classes go to the earliest type fact.
        """
        declared = [c for c in self.declared_types.get(ind, ()) if c in self.classes]
        if not declared:
            return None, False
        minimal = [c for c in declared if not any(d != c and c in self.ancestors[d] for d in declared)]
        best = minimal[0]
        ambiguous = any(c not in self.ancestors[best] for c in declared)
        return best, ambiguous

    def conforms(self, ind: Iri, required: Iri | None) -> bool:
        if required is None or required == OWL_THING:
            return True
        return any(required in self.ancestors[t] for t in self.effective_types(ind))

    def prop_assertions(self) -> list[PropAssertion]:
        return [f for f in self.abox if isinstance(f, PropAssertion)]

    def type_assertions(self) -> list[TypeAssertion]:
        return [f for f in self.abox if isinstance(f, TypeAssertion)]


# --- building --------------------------------------------------------------


def _is_vocab(x: Node) -> bool:
    return isinstance(x, Iri) and x.full.startswith(VOCAB_NAMESPACES)


def _read_list(ts: TripleSet, head: Node) -> list[Node]:
    items = []
    seen = set()
    while head != RDF_NIL and head not in seen:
        seen.add(head)
        firsts = list(ts.match(head, RDF_FIRST))
        rests = list(ts.match(head, RDF_REST))
        if not firsts or not rests:
            raise ModelError(f"malformed collection at {head}")
        items.append(firsts[0].object)
        head = rests[0].object
    return items


def build_model(ts: TripleSet) -> OntologyModel:
    warnings: list[Finding] = []

    def warn(code: Code, subjects, message: str) -> None:
        warnings.append(Finding(WARNING, code, tuple(str(s) for s in subjects), message))

    # first pass: which IRIs are classes / properties
    class_order: dict[Iri, None] = {}
    prop_order: dict[Iri, None] = {}
    restriction_nodes: set[BNode] = set()
    for s, p, o in ts:
        if p == RDF_TYPE and isinstance(o, Iri):
            if o == RESTRICTION and isinstance(s, BNode):
                restriction_nodes.add(s)
            elif o in CLASS_TYPES and isinstance(s, Iri):
                class_order.setdefault(s)
            elif o in PROPERTY_TYPES and isinstance(s, Iri):
                prop_order.setdefault(s)
        elif p in (SUBCLASS_OF, EQUIVALENT_CLASS) + DISJOINT_WITH and isinstance(s, Iri):
            class_order.setdefault(s)
        elif p in (DOMAIN, RANGE, SUBPROPERTY_OF) and isinstance(s, Iri):
            prop_order.setdefault(s)
        elif p == ON_PROPERTY and isinstance(s, BNode):
            restriction_nodes.add(s)

    def restriction_of(node: BNode) -> Restriction | None:
        props = [t.object for t in ts.match(node, ON_PROPERTY)]
        if not props:
            raise ModelError(f"restriction {node} lacks owl:onProperty")
        targets = [t.object for t in ts.match(node, SOME_VALUES_FROM)]
        if not targets:
            warn(Code.UNKNOWN_PREDICATE, [node], "only someValuesFrom restrictions are supported")
            return None
        return Restriction(props[-1], targets[-1])

    for node in sorted(restriction_nodes):
        restriction_of(node)

    supers: dict[Iri, list[Iri]] = {c: [] for c in class_order}
    edge_index: dict[Iri, int] = {}
    restrictions: dict[Iri, list[Restriction]] = {c: [] for c in class_order}
    disjoint: dict[Iri, list[Iri]] = {c: [] for c in class_order}
    complete: set[Iri] = set()
    used_restrictions: set[BNode] = set()

    props: dict[Iri, dict] = {
        p: {"supers": [], "domain": None, "range": None, "functional": False, "kinds": set()}
        for p in prop_order
    }

    def add_restriction(c: Iri, node: BNode) -> None:
        r = restriction_of(node)
        used_restrictions.add(node)
        if r is not None and r not in restrictions[c]:
            restrictions[c].append(r)

    def add_super(c: Iri, s: Iri, index: int) -> None:
        if s not in supers[c]:
            supers[c].append(s)
        edge_index.setdefault(c, index)

    def set_once(decl: dict, key: str, value, prop: Iri) -> None:
        if decl[key] is not None and decl[key] != value:
            warn(Code.DUPLICATE_DECLARATION, [prop], f"{key} of {prop} redeclared; keeping {value}")
        decl[key] = value

    abox: list[Fact] = []
    for index, (s, p, o) in enumerate(ts):
        if p == SUBCLASS_OF and isinstance(s, Iri):
            if isinstance(o, BNode):
                if o in restriction_nodes:
                    add_restriction(s, o)
            elif isinstance(o, Iri):
                add_super(s, o, index)
        elif p == EQUIVALENT_CLASS and isinstance(s, Iri) and isinstance(o, BNode):
            members = [t.object for t in ts.match(o, INTERSECTION_OF)]
            if o in restriction_nodes:
                add_restriction(s, o)
                complete.add(s)
            for head in members:
                complete.add(s)
                for item in _read_list(ts, head):
                    if isinstance(item, Iri):
                        add_super(s, item, index)
                    elif isinstance(item, BNode) and item in restriction_nodes:
                        add_restriction(s, item)
        elif p in DISJOINT_WITH and isinstance(s, Iri) and isinstance(o, Iri):
            if o not in disjoint[s]:
                disjoint[s].append(o)
            if o in disjoint and s not in disjoint[o]:
                disjoint[o].append(s)
        elif p == RDF_TYPE and isinstance(s, Iri) and s in props and isinstance(o, Iri):
            if o == FUNCTIONAL:
                props[s]["functional"] = True
            props[s]["kinds"].add(o)
            if {OBJECT_PROPERTY, DATATYPE_PROPERTY} <= props[s]["kinds"]:
                raise DuplicateDeclaration(f"{s} declared both object and datatype property")
        elif p == DOMAIN and isinstance(s, Iri) and isinstance(o, Iri):
            set_once(props[s], "domain", o, s)
        elif p == RANGE and isinstance(s, Iri) and isinstance(o, Iri):
            set_once(props[s], "range", o, s)
        elif p == SUBPROPERTY_OF and isinstance(s, Iri) and isinstance(o, Iri):
            if o not in props[s]["supers"]:
                props[s]["supers"].append(o)
        elif p == RDF_TYPE and isinstance(s, Iri) and isinstance(o, Iri):
            if not _is_vocab(o) and s not in class_order and s not in props:
                abox.append(TypeAssertion(s, o))
        elif isinstance(s, Iri) and p in props:
            if isinstance(o, BNode):
                warn(Code.UNKNOWN_PREDICATE, [s], f"blank object of {p.local} ignored")
            else:
                abox.append(PropAssertion(s, p, o))
        elif not _is_vocab(p) and p not in (RDF_FIRST, RDF_REST):
            warn(Code.UNKNOWN_PREDICATE, [s], f"unknown predicate {p.qname()} kept as a raw triple")

    # disjointness symmetric even when the target is declared later
    for c, others in list(disjoint.items()):
        for d in others:
            if d in disjoint and c not in disjoint[d]:
                disjoint[d].append(c)

    for node in sorted(restriction_nodes - used_restrictions):
        # restrictions only reachable through an equivalence list were folded above
        warn(Code.ORPHAN_RESTRICTION, [node], "restriction not attached to any named class")

    classes = {
        c: ClassDecl(
            c,
            tuple(supers[c]),
            tuple(disjoint[c]),
            tuple(restrictions[c]),
            c in complete,
            edge_index.get(c, 1 << 30),
        )
        for c in class_order
    }
    properties = {
        p: PropertyDecl(
            p,
            tuple(d["supers"]),
            d["domain"],
            d["range"],
            d["functional"],
            DATATYPE_PROPERTY in d["kinds"],
        )
        for p, d in props.items()
    }
    return OntologyModel(classes, properties, tuple(abox), dict(ts.prefixes), tuple(warnings))


# --- validation and queries ------------------------------------------------


def validate_tbox(m: OntologyModel) -> list[Finding]:
    findings: list[Finding] = []

    def error(code: Code, subjects, message: str) -> None:
        findings.append(Finding(ERROR, code, tuple(str(s) for s in subjects), message))

    for cycle in _cycles(m):
        names = " <= ".join(c.local for c in cycle + [cycle[0]])
        error(Code.CYCLE, cycle, f"subclass cycle {names}")

    for c in m.classes.values():
        for s in c.supers:
            if s not in m.classes and s != OWL_THING:
                error(Code.DANGLING_REF, [c.name], f"{c.name} has undeclared super {s}")
        for d in c.disjoint_with:
            if d not in m.classes:
                error(Code.DANGLING_REF, [c.name], f"{c.name} disjoint with undeclared {d}")
        for r in c.restrictions:
            if r.on_property not in m.properties:
                error(Code.DANGLING_REF, [c.name], f"restriction on undeclared property {r.on_property}")
            if r.target not in m.classes:
                error(Code.DANGLING_REF, [c.name], f"restriction target {r.target} is not a declared class")
    for p in m.properties.values():
        for s in p.supers:
            if s not in m.properties:
                error(Code.DANGLING_REF, [p.name], f"{p.name} has undeclared super property {s}")
        if p.domain is not None and p.domain not in m.classes and p.domain != OWL_THING:
            error(Code.DANGLING_REF, [p.name], f"domain of {p.name} is undeclared class {p.domain}")
        if p.range is not None and p.range not in m.classes and p.range != OWL_THING:
            if not is_datatype(p.range):
                error(Code.DANGLING_REF, [p.name], f"range of {p.name} is undeclared class {p.range}")
    return findings


def _cycles(m: OntologyModel) -> list[list[Iri]]:
    """Strongly connected components of the subclass graph that contain a cycle."""
    index: dict[Iri, int] = {}
    low: dict[Iri, int] = {}
    stack: list[Iri] = []
    on_stack: set[Iri] = set()
    out: list[list[Iri]] = []

    def strongconnect(v: Iri) -> None:
        index[v] = low[v] = len(index)
        stack.append(v)
        on_stack.add(v)
        for w in m.classes[v].supers:
            if w not in m.classes:
                continue
            if w not in index:
                strongconnect(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            if len(comp) > 1 or v in m.classes[v].supers:
                order = list(m.classes)
                out.append(sorted(comp, key=order.index))

    for v in m.classes:
        if v not in index:
            strongconnect(v)
    return out


def is_subtype(m: OntologyModel, a: Iri, b: Iri) -> bool:
    for c in (a, b):
        if c not in m.classes:
            raise UnknownClass(c)
    return b in m.ancestors[a]


def check_abox(m: OntologyModel, cfg: CheckConfig = CheckConfig()) -> list[Finding]:
    if cfg.infer:
        m = infer_domain_types(m)
    findings: list[Finding] = []

    def add(severity: str, code: Code, who: Iri, message: str) -> None:
        findings.append(Finding(severity, code, (str(who),), message))

    for f in m.type_assertions():
        if f.cls not in m.classes and f.cls != OWL_THING:
            add(ERROR, Code.UNDECLARED_CLASS, f.individual, f"{f.individual} typed with undeclared class {f.cls}")

    values: dict[tuple[Iri, Iri], list] = defaultdict(list)
    for f in m.prop_assertions():
        prop = m.properties[f.property]
        if not m.conforms(f.subject, prop.domain):
            add(ERROR, Code.DOMAIN_VIOLATION, f.subject,
                f"{f.property}({f.subject}, {f.object}): {f.subject} is not a {prop.domain}")
        if isinstance(f.object, Literal):
            if prop.range is not None and not (is_datatype(prop.range) and literal_fits(f.object, prop.range)):
                add(ERROR, Code.RANGE_VIOLATION, f.subject,
                    f"{f.property}({f.subject}, {f.object!s}): literal does not fit {prop.range}")
        elif prop.range is not None and is_datatype(prop.range):
            add(ERROR, Code.RANGE_VIOLATION, f.object,
                f"{f.property}({f.subject}, {f.object}): expected a {prop.range} literal")
        elif not m.conforms(f.object, prop.range):
            add(ERROR, Code.RANGE_VIOLATION, f.object,
                f"{f.property}({f.subject}, {f.object}): {f.object} is not a {prop.range}")
        if f.object not in values[f.subject, f.property]:
            values[f.subject, f.property].append(f.object)

    for (s, p), objs in values.items():
        if m.properties[p].functional and len(objs) > 1:
            shown = ", ".join(str(o) for o in objs)
            add(ERROR, Code.FUNCTIONAL_VIOLATION, s, f"functional {p} has {len(objs)} values for {s}: {shown}")

    disjoint_pairs = {
        frozenset((c.name, d)) for c in m.classes.values() for d in c.disjoint_with if d in m.classes
    }
    for ind in m.individuals:
        eff = m.effective_types(ind)
        for pair in sorted(disjoint_pairs, key=lambda p: sorted(x.full for x in p)):
            if pair <= eff:
                a, b = sorted(pair, key=list(m.classes).index)
                add(ERROR, Code.DISJOINT_VIOLATION, ind, f"{ind} is both a {a} and a {b}, which are disjoint")
        for c in sorted(eff, key=list(m.classes).index):
            for r in m.classes[c].restrictions:
                ok = any(
                    isinstance(o, Iri) and r.target in m.classes and m.conforms(o, r.target)
                    for o in values.get((ind, r.on_property), ())
                )
                if not ok:
                    add(cfg.restriction_severity, Code.MISSING_RESTRICTION_VALUE, ind,
                        f"{ind} is a {c} but has no {r.on_property} value in {r.target}")
    return findings


def infer_domain_types(m: OntologyModel) -> OntologyModel:
    abox = list(m.abox)
    present = set(abox)
    for f in m.prop_assertions():
        prop = m.properties.get(f.property)
        if prop is None:
            continue
        extra = []
        if prop.domain is not None and prop.domain in m.classes:
            extra.append(TypeAssertion(f.subject, prop.domain))
        if isinstance(f.object, Iri) and prop.range is not None and prop.range in m.classes:
            extra.append(TypeAssertion(f.object, prop.range))
        for t in extra:
            if t not in present:
                present.add(t)
                abox.append(t)
    if len(abox) == len(m.abox):
        return m
    return m.replace(abox=tuple(abox))


def errors(findings: Iterable[Finding]) -> list[Finding]:
    return [f for f in findings if f.severity == ERROR]
