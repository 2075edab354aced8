"""clonekit: a workbench for clones, relations and minor conditions on
small finite domains."""

from .core import (
    Domain,
    Operation,
    Partition,
    Relation,
    Structure,
    compose,
    constant,
    has_parallelogram,
    is_congruence,
    preserves,
    projection,
    take_minor,
)

__all__ = [
    "Domain",
    "Operation",
    "Partition",
    "Relation",
    "Structure",
    "compose",
    "constant",
    "has_parallelogram",
    "is_congruence",
    "preserves",
    "projection",
    "take_minor",
]

__version__ = "0.1.0"
