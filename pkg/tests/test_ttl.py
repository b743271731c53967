from importlib import resources

import pytest
from hypothesis import given
from hypothesis import strategies as st

from onto_multirep.ttl import (
    RDF_FIRST,
    RDF_NIL,
    RDF_TYPE,
    BNode,
    Iri,
    Literal,
    Triple,
    TripleSet,
    TtlSyntaxError,
    UnknownPrefix,
    canonical_triples,
    equivalent,
    parse_document,
    serialize,
)

HEAD = """@prefix : <http://example.org/univ#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
"""
U = "http://example.org/univ#"


def example_text() -> str:
    return resources.files("onto_multirep").joinpath("data/example.ttl").read_text()


def test_single_subclass_statement():
    ts = parse_document(HEAD + ":Manager rdfs:subClassOf :Person .")
    assert len(ts.triples) == 1
    s, p, o = ts.triples[0]
    assert (s.local, p.qname(), o.local) == ("Manager", "rdfs:subClassOf", "Person")
    assert s.full == U + "Manager"


def test_empty_document():
    assert parse_document("").triples == []


def test_restriction_blank_node_shares_subject():
    ts = parse_document(HEAD + "[ a owl:Restriction; owl:onProperty :studyAmong ; owl:someValuesFrom :Computer].")
    assert len(ts.triples) == 3
    subjects = {t.subject for t in ts.triples}
    assert subjects == {BNode("_:b1")}


def test_blank_ids_follow_document_order():
    ts = parse_document(HEAD + ":a :p [ :q :b ] , [ :q :c ] .")
    blanks = [t.object for t in ts.triples if t.subject == Iri(U + "a")]
    assert blanks == [BNode("_:b1"), BNode("_:b2")]


def test_predicate_and_object_lists():
    ts = parse_document(HEAD + ":x a :A , :B ; :p :y .")
    assert [(s.local, p, o.local) for s, p, o in ts.triples] == [
        ("x", RDF_TYPE, "A"),
        ("x", RDF_TYPE, "B"),
        ("x", Iri(U + "p"), "y"),
    ]


def test_literals_and_comments():
    ts = parse_document(HEAD + ':x :name "Ann \\"A\\"" ; # trailing comment\n :age 42 .')
    assert ts.triples[0].object == Literal('Ann "A"')
    assert ts.triples[1].object.value == 42


def test_collection_expands_to_list_cells():
    ts = parse_document(HEAD + ":C owl:intersectionOf ( :A :B ) .")
    firsts = [t.object.local for t in ts.triples if t.predicate == RDF_FIRST]
    assert firsts == ["A", "B"]
    assert any(t.object == RDF_NIL for t in ts.triples)


def test_unknown_prefix():
    with pytest.raises(UnknownPrefix):
        parse_document(":a :b :c .")
    with pytest.raises(UnknownPrefix) as err:
        parse_document(HEAD + ":a foo:b :c .")
    assert err.value.name == "foo"


@pytest.mark.parametrize(
    "text, line",
    [
        (HEAD + ":a :b :c", 4),  # missing terminator
        (HEAD + ":a :b .", 4),
        (HEAD + "\n\n:a :b [ :c :d .", 6),
        (HEAD + ':a :b "open .', 4),
    ],
)
def test_syntax_errors_carry_position(text, line):
    with pytest.raises(TtlSyntaxError) as err:
        parse_document(text)
    assert err.value.line == line
    assert err.value.col >= 1


def test_literal_subject_rejected():
    with pytest.raises(TtlSyntaxError):
        parse_document(HEAD + '"x" :p :o .')


def test_serialize_empty_is_prefixes_only():
    ts = TripleSet({"": U}, [])
    assert serialize(ts) == f"@prefix : <{U}> .\n"


def test_serialize_type_triple():
    ts = TripleSet({"": U}, [Triple(Iri(U + "r1"), RDF_TYPE, Iri(U + "Person"))])
    assert serialize(ts).splitlines()[-1] == ":r1 a :Person ."


def test_example_counts_and_roundtrip():
    ts = parse_document(example_text())
    individuals = {f"{k}{n}" for k in "rv" for n in range(1, 9)}
    types = [t for t in ts.triples if t.predicate == RDF_TYPE and isinstance(t.subject, Iri) and t.subject.local in individuals]
    props = [t for t in ts.triples if t.predicate.local in ("work", "manage")]
    assert len(types) == 16
    assert len(props) == 8
    again = parse_document(serialize(ts))
    assert equivalent(ts, again)


def test_parsing_is_deterministic():
    text = example_text()
    assert parse_document(text).triples == parse_document(text).triples


def test_canonical_form_ignores_blank_labels():
    a = parse_document(HEAD + ":x :p [ :q :y ] .")
    b = parse_document(HEAD + ":x :p _:zz . _:zz :q :y .")
    assert canonical_triples(a.triples) == canonical_triples(b.triples)


# --- round trip over random documents ---

names = st.sampled_from(["a", "b", "c", "Person", "r1"])
objects = st.one_of(
    names.map(lambda n: f":{n}"),
    st.integers(-5, 50).map(str),
    st.text(alphabet="abc xyz\"\\", max_size=6).map(lambda s: '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'),
)


@st.composite
def documents(draw):
    lines = []
    for _ in range(draw(st.integers(0, 6))):
        subj = draw(st.one_of(names.map(lambda n: f":{n}"), st.just("[ :q :a ]")))
        pred = draw(st.sampled_from(["a", ":p", "rdfs:subClassOf", ":q"]))
        objs = draw(st.lists(objects, min_size=1, max_size=3))
        if pred == "a":
            objs = [o for o in objs if o.startswith(":")] or [":a"]
        lines.append(f"{subj} {pred} {' , '.join(objs)} .")
    return HEAD + "\n".join(lines)


@given(documents())
def test_serialize_parse_roundtrip(doc):
    ts = parse_document(doc)
    assert equivalent(parse_document(serialize(ts)), ts)
    assert serialize(parse_document(serialize(ts))) == serialize(ts)
