"""Differentiation, rational-trig normalization and restricted integration."""

from .diff import differentiate
from .normal import (
    NormalForm, factor, is_zero, simplify, simplify_flagged, together, trig_expand,
)
from .apart import apart
from .integrate import integrate

__all__ = [
    "differentiate", "NormalForm", "simplify", "simplify_flagged", "together",
    "factor", "trig_expand", "is_zero", "apart", "integrate",
]
