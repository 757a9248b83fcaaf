"""Invariant symplectic and quadratic forms on modules for the Klein four group in characteristic 2."""

from .classify import (
    ClassifyError,
    ClassLabel,
    QuadLabel,
    canonicalize,
    count_classes,
    count_formula,
    enumerate_classes,
    quad_canonicalize,
    quad_classify,
    quad_exists,
    quad_representatives,
    representative,
)
from .field import Field
from .kgmodules import ModuleSpec
from .matrix import Mat

__all__ = [
    "ClassLabel",
    "ClassifyError",
    "Field",
    "Mat",
    "ModuleSpec",
    "QuadLabel",
    "canonicalize",
    "count_classes",
    "count_formula",
    "enumerate_classes",
    "quad_canonicalize",
    "quad_classify",
    "quad_exists",
    "quad_representatives",
    "representative",
]
