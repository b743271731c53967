import json
from importlib import resources

import pytest
from hypothesis import given
from hypothesis import strategies as st

from onto_multirep.evolution import (
    OpSyntaxError,
    UnknownEntity,
    apply_op,
    detect,
    parse_ops,
)
from onto_multirep.model import Code, TypeAssertion, build_model, validate_tbox
from onto_multirep.ops import ChangeDomain, DeleteClass
from onto_multirep.ttl import parse_document

from .strategies import Desc, consistent_models, model_of

HEAD = """@prefix : <http://example.org/univ#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
"""


def load(text):
    return build_model(parse_document(HEAD + text))


@pytest.fixture(scope="module")
def example():
    text = resources.files("onto_multirep").joinpath("data/example.ttl").read_text()
    return build_model(parse_document(text))


# --- parsing ---


def test_parse_both_operations(example):
    ops = parse_ops("change-domain manage Director\ndelete-class Manager\n", example)
    assert ops == [
        ChangeDomain(example.resolve("manage"), example.resolve("Director")),
        DeleteClass(example.resolve("Manager")),
    ]
    assert [str(op) for op in ops] == ["change-domain manage Director", "delete-class Manager"]


def test_parse_comments_and_blank_lines():
    ops = parse_ops("# header\n\n  delete-class Manager   # trailing\n")
    assert [str(op) for op in ops] == ["delete-class Manager"]


def test_parse_empty():
    assert parse_ops("") == []


@pytest.mark.parametrize("text, line", [("rename A B", 1), ("# ok\ndelete-class\n", 2), ("change-domain p", 1), ("delete-class A B", 1)])
def test_parse_errors_report_line(text, line):
    with pytest.raises(OpSyntaxError) as err:
        parse_ops(text)
    assert err.value.line == line


def test_bundled_ops_file(example):
    text = resources.files("onto_multirep").joinpath("data/example.evo").read_text()
    assert [str(op) for op in parse_ops(text, example)] == ["change-domain manage Director", "delete-class Manager"]


# --- application ---


def test_change_domain_touches_only_the_domain(example):
    after = apply_op(example, ChangeDomain(example.resolve("manage"), example.resolve("Director")))
    manage = example.resolve("manage")
    assert after.properties[manage].domain.local == "Director"
    assert after.classes == example.classes
    assert after.abox == example.abox
    assert {k: v for k, v in after.properties.items() if k != manage} == {
        k: v for k, v in example.properties.items() if k != manage
    }
    assert after.warnings == example.warnings


def test_delete_manager_after_change(example):
    mod1 = apply_op(example, ChangeDomain(example.resolve("manage"), example.resolve("Director")))
    mod2 = apply_op(mod1, DeleteClass(mod1.resolve("Manager")))
    names = {c.local for c in mod2.classes}
    assert "Manager" not in names
    assert [s.local for s in mod2.classes[mod2.resolve("Researcher")].supers] == ["Person"]
    assert [s.local for s in mod2.classes[mod2.resolve("Director")].supers] == ["Person"]
    assert mod2.abox == example.abox
    assert any(isinstance(f, TypeAssertion) and f.cls.local == "Manager" for f in mod2.abox)
    assert [w.code for w in mod2.warnings] == [Code.DROPPED_REFERENCE]
    assert mod2.classes[mod2.resolve("Trainee")].disjoint_with == ()
    assert validate_tbox(mod2) == []


def test_delete_retargets_domain(example):
    after = apply_op(example, DeleteClass(example.resolve("Manager")))
    assert after.properties[example.resolve("manage")].domain.local == "Person"
    assert Code.RETARGETED in [w.code for w in after.warnings]


def test_delete_unused_leaf_is_clean(example):
    after = apply_op(example, DeleteClass(example.resolve("ComputerTrainee")))
    assert set(after.classes) == set(example.classes) - {example.resolve("ComputerTrainee")}
    assert after.warnings == ()
    assert validate_tbox(after) == []


def test_delete_inherits_every_super():
    m = load(":A a owl:Class . :B a owl:Class . :C rdfs:subClassOf :A , :B . :D rdfs:subClassOf :C .")
    after = apply_op(m, DeleteClass(m.resolve("C")))
    assert [s.local for s in after.classes[m.resolve("D")].supers] == ["A", "B"]


def test_restriction_target_dropped(example):
    after = apply_op(example, DeleteClass(example.resolve("Computer")))
    assert after.classes[example.resolve("ComputerTrainee")].restrictions == ()
    assert [w.code for w in after.warnings] == [Code.DROPPED_REFERENCE]


def test_unknown_entities(example):
    with pytest.raises(UnknownEntity):
        apply_op(example, parse_ops("delete-class Nobody")[0])
    with pytest.raises(UnknownEntity):
        apply_op(example, parse_ops("change-domain nothing Person")[0])
    gone = apply_op(example, DeleteClass(example.resolve("Manager")))
    with pytest.raises(UnknownEntity):
        apply_op(gone, DeleteClass(example.resolve("Manager")))


# --- detection ---


def test_detect_modification_one(example):
    report = detect(example, parse_ops("change-domain manage Director", example))
    (r,) = report.results
    assert r.backends == {"types": {"r4", "r6"}, "oo": {"r4", "r6"}, "sql": {"r4", "r6"}}
    assert r.agreement and r.merged == {"r4", "r6"}


def test_detect_both_modifications(example):
    ops = parse_ops("change-domain manage Director\ndelete-class Manager", example)
    report = detect(example, ops)
    assert [r.merged for r in report.results] == [{"r4", "r6"}, {"r3", "r4"}]
    assert all(r.agreement for r in report.results)
    assert report.results[1].sql_query == "SELECT * FROM Manager where SCManager IS NULL"
    assert report.results[1].sql_constraint == "ALTER TABLE Manager ADD CONSTRAINT C2 CHECK(SCManager IS NOT NULL)"
    data = report.to_json()
    assert data["schema"] == "1"
    assert data["ops"][0]["backends"]["oo"] == ["r4", "r6"]
    assert json.dumps(data) == json.dumps(detect(example, ops).to_json())


def test_detect_is_sequential(example):
    ops = parse_ops("change-domain manage Director\ndelete-class Manager", example)
    report = detect(example, ops)
    assert report.model == apply_op(apply_op(example, ops[0]), ops[1])


def test_detect_without_ops(example):
    report = detect(example, [])
    assert report.results == [] and report.agreement and not report.inconsistent
    assert report.to_json() == {"schema": "1", "ops": []}


def test_multi_typed_individual_uses_most_specific_class():
    m = load(
        ":A a owl:Class . :B rdfs:subClassOf :A . :D a owl:Class . :p rdfs:domain :A ; rdfs:range :D ."
        ":x a :A , :B . :y a :A . :d a :D . :x :p :d . :y :p :d ."
    )
    (r,) = detect(m, parse_ops("change-domain p B", m)).results
    assert r.backends == {"types": {"y"}, "oo": {"y"}, "sql": {"y"}}


# --- randomized agreement ---


def expected_after(d: Desc, op) -> set[str]:
    """Individuals that an op leaves in violation of the evolved model, from the description alone."""
    kind, *args = op
    cls = dict(d.types)
    if kind == "change-domain":
        p, target = args
        anc = d.ancestors()
        return {f"i{s}" for q, s, _ in d.facts if q == p and target not in anc[cls[s]]}
    (gone,) = args
    return {f"i{i}" for i, c in d.types if c == gone}


@st.composite
def model_and_op(draw):
    d = draw(consistent_models())
    if draw(st.booleans()):
        op = ("change-domain", draw(st.integers(0, len(d.props) - 1)), draw(st.integers(0, len(d.parents) - 1)))
    else:
        op = ("delete-class", draw(st.integers(0, len(d.parents) - 1)))
    return d, op


@given(model_and_op())
def test_backends_agree_with_oracle(case):
    d, op = case
    m = model_of(d)
    text = f"change-domain p{op[1]} C{op[2]}" if op[0] == "change-domain" else f"delete-class C{op[1]}"
    report = detect(m, parse_ops(text, m))
    (r,) = report.results
    want = expected_after(d, op)
    assert r.backends == {"types": want, "oo": want, "sql": want}
    assert r.agreement
    assert validate_tbox(report.model) == []
