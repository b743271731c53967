from importlib import resources

import pytest

from onto_multirep.evolution import apply_op
from onto_multirep.model import build_model
from onto_multirep.ops import ChangeDomain, DeleteClass
from onto_multirep.ttl import parse_document
from onto_multirep.typesys import (
    FUNCTIONAL_VIOLATION,
    HEADER,
    SIGNATURE_MISMATCH,
    UNDECLARED_TYPE,
    emit_types,
    new_error_subjects,
    render_types,
    typecheck,
)

HEAD = """@prefix : <http://example.org/univ#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
"""


@pytest.fixture(scope="module")
def example():
    text = resources.files("onto_multirep").joinpath("data/example.ttl").read_text()
    return build_model(parse_document(text))


@pytest.fixture(scope="module")
def mod1(example):
    return apply_op(example, ChangeDomain(example.resolve("manage"), example.resolve("Director")))


@pytest.fixture(scope="module")
def mod2(mod1):
    return apply_op(mod1, DeleteClass(mod1.resolve("Manager")))


def lines(text):
    return text.splitlines()


def test_example_program_lines(example):
    _, text = emit_types(example)
    got = lines(text)
    assert got[0] == HEADER
    for expected in [
        "PhdStudent <= Person;",
        "Trainee <= Person;",
        "ComputerTrainee <= Trainee;",
        "Manager <= Person;",
        "Researcher <= Manager;",
        "Director <= Manager;",
        "work : Person -> Department;",
        "manage : Manager -> Department;",
        "r1 : Person;",
        "r2 : PhdStudent;",
        "r3, r4 : Manager;",
        "r5, r6 : Researcher;",
        "r7, r8 : Director;",
        "v1, v2, v3, v4, v5, v6, v7, v8 : Department;",
        "manage(r4, v4);",
    ]:
        assert expected in got
    assert got[1].startswith("Person, PhdStudent, Trainee, ComputerTrainee, Manager, Researcher, Director, Department")


def test_program_structure(example):
    prog, text = emit_types(example)
    assert render_types(prog) == text
    assert "Thing" not in prog.type_decls
    assert len(prog.applications) == 8
    assert prog.constant_groups()["Manager"] == ["r3", "r4"]


def test_example_typechecks(example):
    prog, _ = emit_types(example)
    assert typecheck(prog, example) == []


def test_modification_one_breaks_manage_signature(example, mod1):
    prog, _ = emit_types(example)
    errs = typecheck(prog, mod1)
    assert [(e.kind, e.locus, e.subjects) for e in errs] == [
        (SIGNATURE_MISMATCH, "manage(r4, v4)", ("r4",)),
        (SIGNATURE_MISMATCH, "manage(r6, v6)", ("r6",)),
    ]
    assert errs[0].render() == "ERROR signature-mismatch at manage(r4, v4): r4 does not conform to manage : Director -> Department"


def test_modification_two_undeclares_manager(example, mod1, mod2):
    prog, _ = emit_types(example)
    errs = typecheck(prog, mod2)
    undeclared = [e for e in errs if e.kind == UNDECLARED_TYPE]
    assert [(e.locus, e.subjects) for e in undeclared] == [("r3, r4 : Manager", ("r3", "r4"))]
    loci = {e.locus for e in errs if e.kind == SIGNATURE_MISMATCH}
    assert {"work(r3, v3)", "manage(r4, v4)"} <= loci
    assert new_error_subjects(typecheck(prog, mod1), errs) == {"r3", "r4"}


def test_program_after_both_modifications(mod2):
    _, text = emit_types(mod2)
    got = lines(text)
    assert "Researcher <= Person;" in got
    assert "Director <= Person;" in got
    assert "manage : Director -> Department;" in got
    assert not any("Manager" in line for line in got[:12])


def test_thing_appears_for_open_signatures():
    m = build_model(parse_document(HEAD + ":A a owl:Class . :p a owl:ObjectProperty . :x a :A . :x :p :y ."))
    prog, text = emit_types(m)
    assert prog.type_decls[0] == "Thing"
    assert "p : Thing -> Thing;" in lines(text)
    assert typecheck(prog, m) == []


def test_literal_applications():
    m = build_model(
        parse_document(
            HEAD + ':A a owl:Class . :age a owl:DatatypeProperty ; rdfs:domain :A ; rdfs:range xsd:integer .'
            ':x a :A . :x :age 3 . :x :age "old" .'
        )
    )
    prog, text = emit_types(m)
    assert "age(x, 3);" in lines(text)
    assert 'age(x, "old");' in lines(text)
    errs = typecheck(prog, m)
    assert [(e.kind, e.locus, e.subjects) for e in errs] == [(SIGNATURE_MISMATCH, 'age(x, "old")', ("x",))]


def test_functional_violation_points_at_second_value():
    m = build_model(
        parse_document(
            HEAD + ":A a owl:Class . :B a owl:Class . :f a owl:FunctionalProperty , owl:ObjectProperty ; rdfs:domain :A ; rdfs:range :B ."
            ":x a :A . :b1 a :B . :b2 a :B . :x :f :b1 , :b2 ."
        )
    )
    prog, _ = emit_types(m)
    (err,) = typecheck(prog, m)
    assert (err.kind, err.locus, err.subjects) == (FUNCTIONAL_VIOLATION, "f(x, b2)", ("x",))


def test_new_error_subjects_ignores_preexisting():
    m = build_model(parse_document(HEAD + ":A a owl:Class . :x a :Ghost ."))
    prog, _ = emit_types(m)
    errs = typecheck(prog, m)
    assert new_error_subjects(errs, errs) == set()
    assert new_error_subjects([], errs) == {"x"}
