"""Predicate mini-language: bare atoms and single comparisons.

Grammar (one predicate per string; lists of predicates are implicit
conjunctions):

    predicate := atom | compare
    atom      := dotted_path
    compare   := dotted_path op literal [unit]
    op        := < | <= | == | >= | >

Richer boolean structure is intentionally out of scope.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import PredicateError, UnitError
from .quantities import Quantity, normalize_quantity, same_family

_PATH_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")
_COMPARE_RE = re.compile(
    r"^\s*([A-Za-z_][A-Za-z0-9_.]*)\s*(<=|>=|==|<|>)\s*"
    r"(-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)\s*$"
)

OPS = ("<", "<=", "==", ">=", ">")


@dataclass(frozen=True)
class Atom:
    path: str

    def __str__(self):
        return self.path


@dataclass(frozen=True)
class Compare:
    path: str
    op: str
    value: Quantity

    def __str__(self):
        return f"{self.path} {self.op} {self.value}"


Predicate = Atom | Compare


def parse_predicate(text: str) -> Predicate:
    """Parse one predicate string; literal units normalize to canonical."""
    if not isinstance(text, str) or not text.strip():
        raise PredicateError(f"empty predicate {text!r}")
    s = text.strip()
    m = _COMPARE_RE.match(s)
    if m:
        path, op, literal, unit = m.groups()
        if op not in OPS:
            raise PredicateError(f"unknown operator in {text!r}")
        try:
            value = normalize_quantity(Quantity(float(literal), unit or "dimensionless"))
        except UnitError as e:
            raise PredicateError(f"bad literal in {text!r}: {e}") from e
        return Compare(path, op, value)
    if _PATH_RE.match(s):
        return Atom(s)
    raise PredicateError(f"cannot parse predicate {text!r}")


def _holds(op: str, lhs: float, rhs: float) -> bool:
    if op == "<":
        return lhs < rhs
    if op == "<=":
        return lhs <= rhs
    if op == "==":
        return lhs == rhs
    if op == ">=":
        return lhs >= rhs
    return lhs > rhs


def predicate_entails(p: Predicate, q: Predicate) -> bool:
    """True iff p guarantees q.

    Identical atoms entail. Comparisons on the same path entail via
    interval containment after unit normalization; differing paths never
    entail (no cross-variable reasoning).
    """
    if isinstance(p, Atom) or isinstance(q, Atom):
        return p == q
    if p.path != q.path:
        return False
    if not same_family(p.value.unit, q.value.unit):
        return False
    a, b = p.value.magnitude, q.value.magnitude
    if p.op == "==":
        return _holds(q.op, a, b)
    if q.op == "==":
        return False
    lower_ops = (">", ">=")
    upper_ops = ("<", "<=")
    if p.op in lower_ops and q.op in lower_ops:
        # {x : x >(=) a} subset of {x : x >(=) b}
        if a > b:
            return True
        return a == b and not (p.op == ">=" and q.op == ">")
    if p.op in upper_ops and q.op in upper_ops:
        if a < b:
            return True
        return a == b and not (p.op == "<=" and q.op == "<")
    return False


def evaluate(p: Predicate, facts: dict) -> str:
    """Evaluate against a fact map; returns 'holds', 'fails', or 'unknown'.

    Atom facts must be booleans; Compare facts may be numbers or
    quantities. Absent paths are unknown, never a silent pass.
    """
    if p.path not in facts:
        return "unknown"
    value = facts[p.path]
    if isinstance(p, Atom):
        return "holds" if value is True else "fails"
    if isinstance(value, Quantity):
        qty = normalize_quantity(value)
    else:
        try:
            qty = Quantity(float(value))
        except (TypeError, ValueError):
            return "fails"
    if not same_family(qty.unit, p.value.unit) and qty.unit != "dimensionless":
        return "fails"
    return "holds" if _holds(p.op, qty.magnitude, p.value.magnitude) else "fails"
