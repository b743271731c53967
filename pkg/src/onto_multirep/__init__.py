"""Compile a small OWL/N3 ontology into a type program, an object model and a
relational schema, and track which individuals each evolution step breaks."""

from .evolution import EvolutionReport, apply_op, detect, parse_ops
from .model import CheckConfig, Finding, OntologyModel, build_model, check_abox, validate_tbox
from .ops import ChangeDomain, DeleteClass
from .ttl import parse_document, serialize

__version__ = "0.1.0"

__all__ = [
    "ChangeDomain",
    "CheckConfig",
    "DeleteClass",
    "EvolutionReport",
    "Finding",
    "OntologyModel",
    "apply_op",
    "build_model",
    "check_abox",
    "detect",
    "parse_document",
    "parse_ops",
    "serialize",
    "validate_tbox",
]
