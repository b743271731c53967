"""Evolution operations understood by every backend."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .ttl import Iri


class UnsupportedOp(Exception):
    pass


@dataclass(frozen=True)
class ChangeDomain:
    property: Iri
    new_domain: Iri

    def __str__(self) -> str:
        return f"change-domain {self.property.local} {self.new_domain.local}"


@dataclass(frozen=True)
class DeleteClass:
    cls: Iri

    def __str__(self) -> str:
        return f"delete-class {self.cls.local}"


EvolutionOp = Union[ChangeDomain, DeleteClass]
