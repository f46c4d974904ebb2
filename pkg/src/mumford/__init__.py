"""Exact-arithmetic toolkit for Mumford curves cut out by degree-p
cyclic covers of the projective line over a local field of
characteristic p."""

from .errors import MumfordError, ExtensionRequired
from .valfield import FieldParams, LaurentElem, Valu, artin_schreier_solve, extend_field

__all__ = [
    "MumfordError",
    "ExtensionRequired",
    "FieldParams",
    "LaurentElem",
    "Valu",
    "artin_schreier_solve",
    "extend_field",
]

__version__ = "0.1.0"
