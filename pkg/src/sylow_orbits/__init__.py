"""Sylow p-subgroups of the classical groups B_n, C_n, D_n: monomial orbit modules and their characters."""

from .charspace import CharLabel, Space, parse_label
from .field import CycNum, FieldCtx, FieldElem, make_field, theta, trace
from .geometry import TypeParams, mirror
from .group import BudgetExceeded, Group, GroupElem
from .orbits import classify, orbit_partition

__all__ = [
    "BudgetExceeded", "CharLabel", "CycNum", "FieldCtx", "FieldElem", "Group", "GroupElem", "Space",
    "TypeParams", "classify", "make_field", "mirror", "orbit_partition", "parse_label", "theta", "trace",
]
