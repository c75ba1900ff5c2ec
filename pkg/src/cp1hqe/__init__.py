"""Exact verification engine for the vertex-operator calculus and Hirota
quadratic equations of the equivariant Gromov-Witten theory of CP^1."""

from .params import ParamField, symbolic_field, random_fields

__all__ = ["ParamField", "symbolic_field", "random_fields"]
__version__ = "0.1.0"
