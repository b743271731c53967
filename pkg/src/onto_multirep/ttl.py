"""Reader and writer for the small N3/Turtle subset used by the ontology inputs.

Supported: ``@prefix`` directives, statements terminated by ``.``, ``;``
predicate lists, ``,`` object lists, the ``a`` keyword, ``[ ... ]`` blank
nodes, ``( ... )`` collections, ``_:label`` blank nodes, plain string and
integer literals, and ``#`` comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"
XSD = "http://www.w3.org/2001/XMLSchema#"

WELL_KNOWN = {"rdf": RDF, "rdfs": RDFS, "owl": OWL, "xsd": XSD}


class TtlSyntaxError(Exception):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class UnknownPrefix(Exception):
    def __init__(self, name: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: undeclared prefix {name!r}")
        self.name = name
        self.line = line
        self.col = col


@dataclass(frozen=True, repr=False)
class Iri:
    """An IRI, remembered with the prefix and local name it was written with.

    Equality and hashing only look at ``full``.
    """

    full: str
    prefix: str | None = field(default=None, compare=False)
    local: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.local:
            object.__setattr__(self, "local", _local_part(self.full))

    def __str__(self) -> str:
        return self.local

    def __repr__(self) -> str:
        return f"Iri({self.qname()})"

    def __lt__(self, other: "Iri") -> bool:
        return self.full < other.full

    def qname(self) -> str:
        if self.prefix is None:
            return f"<{self.full}>"
        return f"{self.prefix}:{self.local}"


@dataclass(frozen=True, order=True)
class BNode:
    id: str

    def __str__(self) -> str:
        return self.id


@dataclass(frozen=True)
class Literal:
    value: Union[str, int]
    datatype: Iri | None = None

    def __str__(self) -> str:
        return str(self.value)


Node = Union[Iri, BNode, Literal]


def iri(namespace: str, local: str, prefix: str | None = None) -> Iri:
    return Iri(namespace + local, prefix, local)


RDF_TYPE = iri(RDF, "type", "rdf")
RDF_FIRST = iri(RDF, "first", "rdf")
RDF_REST = iri(RDF, "rest", "rdf")
RDF_NIL = iri(RDF, "nil", "rdf")
XSD_INTEGER = iri(XSD, "integer", "xsd")
XSD_STRING = iri(XSD, "string", "xsd")


class Triple:
    __slots__ = ("subject", "predicate", "object")

    def __init__(self, subject: Node, predicate: Iri, object: Node):
        if not isinstance(predicate, Iri):
            raise TypeError(f"predicate must be an IRI, got {predicate!r}")
        if isinstance(subject, Literal):
            raise TypeError("literal subjects are not allowed")
        self.subject = subject
        self.predicate = predicate
        self.object = object

    def __iter__(self) -> Iterator[Node]:
        return iter((self.subject, self.predicate, self.object))

    def __eq__(self, other) -> bool:
        return isinstance(other, Triple) and tuple(self) == tuple(other)

    def __hash__(self) -> int:
        return hash(tuple(self))

    def __repr__(self) -> str:
        return f"Triple({self.subject!s}, {self.predicate!s}, {self.object!s})"


@dataclass
class TripleSet:
    prefixes: dict[str, str] = field(default_factory=dict)
    triples: list[Triple] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.triples)

    def match(self, s=None, p=None, o=None) -> Iterator[Triple]:
        for t in self.triples:
            if (s is None or t.subject == s) and (p is None or t.predicate == p) and (
                o is None or t.object == o
            ):
                yield t


def _local_part(full: str) -> str:
    for sep in ("#", "/", ":"):
        if sep in full:
            tail = full.rsplit(sep, 1)[1]
            if tail:
                return tail
    return full


# --- lexer -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<directive>@prefix\b|@base\b)
  | (?P<iriref><[^<>"{}|^`\\\s]*>)
  | (?P<bnode>_:[A-Za-z0-9_][A-Za-z0-9_\-.]*(?<!\.))
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<integer>[+-]?\d+(?![\w.]\w))
  | (?P<pname>(?:[A-Za-z][\w\-]*)?:(?:[\w\-]+(?:\.[\w\-]+)*)?)
  | (?P<keyword>a(?![\w:]))
  | (?P<punct>[.;,\[\]()])
  | (?P<datatype>\^\^)
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise TtlSyntaxError(line, col, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


def _unescape(body: str) -> str:
    return re.sub(r"\\(.)", lambda m: _ESCAPES.get(m.group(1), m.group(1)), body)


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.prefixes: dict[str, str] = {}
        self.triples: list[Triple] = []
        self.blank_count = 0
        self.labels: dict[str, BNode] = {}

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> _Token:
        t = self.tok
        if t.text != text or t.kind not in ("punct", "datatype"):
            raise TtlSyntaxError(t.line, t.col, f"expected {text!r}, found {t.text or 'end of input'!r}")
        return self.advance()

    def fresh(self) -> BNode:
        self.blank_count += 1
        return BNode(f"_:b{self.blank_count}")

    def emit(self, s: Node, p: Iri, o: Node) -> None:
        self.triples.append(Triple(s, p, o))

    def parse(self) -> TripleSet:
        while self.tok.kind != "eof":
            if self.tok.kind == "directive":
                self.directive()
            else:
                self.statement()
        return TripleSet(dict(self.prefixes), self.triples)

    def directive(self) -> None:
        t = self.advance()
        if t.text == "@base":
            raise TtlSyntaxError(t.line, t.col, "@base is not supported")
        name = self.advance()
        if name.kind != "pname" or not name.text.endswith(":"):
            raise TtlSyntaxError(name.line, name.col, "expected a prefix name such as 'ex:'")
        ns = self.advance()
        if ns.kind != "iriref":
            raise TtlSyntaxError(ns.line, ns.col, "expected a namespace IRI in angle brackets")
        self.prefixes[name.text[:-1]] = ns.text[1:-1]
        self.expect(".")

    def statement(self) -> None:
        t = self.tok
        if t.kind == "punct" and t.text == "[":
            subject = self.blank_property_list()
            if not (self.tok.kind == "punct" and self.tok.text == "."):
                self.predicate_object_list(subject)
        else:
            subject = self.subject()
            self.predicate_object_list(subject)
        self.expect(".")

    def subject(self) -> Node:
        t = self.tok
        if t.kind in ("iriref", "pname"):
            return self.iri_term()
        if t.kind == "bnode":
            return self.labelled_blank()
        if t.kind == "punct" and t.text == "(":
            return self.collection()
        raise TtlSyntaxError(t.line, t.col, f"expected a subject, found {t.text or 'end of input'!r}")

    def predicate_object_list(self, subject: Node) -> None:
        while True:
            predicate = self.verb()
            self.object_list(subject, predicate)
            if self.tok.kind == "punct" and self.tok.text == ";":
                while self.tok.kind == "punct" and self.tok.text == ";":
                    self.advance()
                if self.tok.kind == "punct" and self.tok.text in (".", "]"):
                    return
                continue
            return

    def verb(self) -> Iri:
        t = self.tok
        if t.kind == "keyword":
            self.advance()
            return RDF_TYPE
        if t.kind in ("iriref", "pname"):
            return self.iri_term()
        raise TtlSyntaxError(t.line, t.col, f"expected a predicate, found {t.text or 'end of input'!r}")

    def object_list(self, subject: Node, predicate: Iri) -> None:
        while True:
            obj = self.object()
            self.emit(subject, predicate, obj)
            if self.tok.kind == "punct" and self.tok.text == ",":
                self.advance()
                continue
            return

    def object(self) -> Node:
        t = self.tok
        if t.kind in ("iriref", "pname"):
            return self.iri_term()
        if t.kind == "bnode":
            return self.labelled_blank()
        if t.kind == "string":
            self.advance()
            if self.tok.kind == "datatype":
                raise TtlSyntaxError(self.tok.line, self.tok.col, "typed literals are not supported")
            return Literal(_unescape(t.text[1:-1]))
        if t.kind == "integer":
            self.advance()
            return Literal(int(t.text), XSD_INTEGER)
        if t.kind == "punct" and t.text == "[":
            return self.blank_property_list()
        if t.kind == "punct" and t.text == "(":
            return self.collection()
        raise TtlSyntaxError(t.line, t.col, f"expected an object, found {t.text or 'end of input'!r}")

    def blank_property_list(self) -> BNode:
        self.expect("[")
        node = self.fresh()
        if not (self.tok.kind == "punct" and self.tok.text == "]"):
            self.predicate_object_list(node)
        self.expect("]")
        return node

    def collection(self) -> Node:
        self.expect("(")
        items = []
        while not (self.tok.kind == "punct" and self.tok.text == ")"):
            if self.tok.kind == "eof":
                raise TtlSyntaxError(self.tok.line, self.tok.col, "unterminated collection")
            items.append(self.object())
        self.advance()
        if not items:
            return RDF_NIL
        cells = [self.fresh() for _ in items]
        for i, (cell, item) in enumerate(zip(cells, items)):
            self.emit(cell, RDF_FIRST, item)
            self.emit(cell, RDF_REST, cells[i + 1] if i + 1 < len(cells) else RDF_NIL)
        return cells[0]

    def labelled_blank(self) -> BNode:
        t = self.advance()
        if t.text not in self.labels:
            self.labels[t.text] = self.fresh()
        return self.labels[t.text]

    def iri_term(self) -> Iri:
        t = self.advance()
        if t.kind == "iriref":
            return compact(t.text[1:-1], self.prefixes)
        prefix, local = t.text.split(":", 1)
        if prefix not in self.prefixes:
            raise UnknownPrefix(prefix, t.line, t.col)
        if not local:
            raise TtlSyntaxError(t.line, t.col, f"empty local name in {t.text!r}")
        return Iri(self.prefixes[prefix] + local, prefix, local)


_PN_LOCAL = re.compile(r"^[A-Za-z_][\w\-]*$")


def compact(full: str, prefixes: dict[str, str]) -> Iri:
    """Turn an absolute IRI into an :class:`Iri`, using the longest matching prefix."""
    best = None
    for name, ns in prefixes.items():
        if full.startswith(ns) and _PN_LOCAL.match(full[len(ns):]):
            if best is None or len(ns) > len(prefixes[best]):
                best = name
    if best is None:
        return Iri(full)
    return Iri(full, best, full[len(prefixes[best]):])


def parse_document(text: str) -> TripleSet:
    return _Parser(text).parse()


# --- writer ----------------------------------------------------------------


def _term(node: Node, prefixes: dict[str, str]) -> str:
    if isinstance(node, BNode):
        return node.id
    if isinstance(node, Literal):
        if isinstance(node.value, int):
            return str(node.value)
        body = node.value.replace("\\", "\\\\").replace('"', '\\"')
        body = body.replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r")
        return f'"{body}"'
    return compact(node.full, prefixes).qname()


def serialize(ts: TripleSet) -> str:
    """Canonical text: prefix lines, then one triple per line in stored order."""
    lines = [f"@prefix {name}: <{ns}> ." for name, ns in ts.prefixes.items()]
    if ts.triples:
        lines.append("")
    for s, p, o in ts.triples:
        verb = "a" if p == RDF_TYPE else _term(p, ts.prefixes)
        lines.append(f"{_term(s, ts.prefixes)} {verb} {_term(o, ts.prefixes)} .")
    return "\n".join(lines) + "\n"


def canonical_triples(triples: Iterable[Triple]) -> list[tuple]:
    """Triples with blank nodes renamed by first appearance, then sorted."""
    names: dict[BNode, str] = {}

    def key(node: Node) -> tuple:
        if isinstance(node, BNode):
            if node not in names:
                names[node] = f"_:c{len(names) + 1}"
            return ("b", names[node])
        if isinstance(node, Literal):
            return ("l", type(node.value).__name__, str(node.value))
        return ("i", node.full)

    return sorted((key(s), key(p), key(o)) for s, p, o in triples)


def equivalent(a: TripleSet, b: TripleSet) -> bool:
    """Equality of triple sets up to consistent blank-node renaming."""
    return canonical_triples(a.triples) == canonical_triples(b.triples)
