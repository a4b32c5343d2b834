"""Physical quantities with a closed canonical unit set.

All contract fields that carry magnitudes normalize to one of the canonical
units below; aliases are rescaled exactly at parse time so downstream
comparisons never see mixed units.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import UnitError

CANONICAL_UNITS = ("m", "rad", "N", "Hz", "ms", "core", "GB", "dimensionless")

# alias -> (canonical unit, multiplier applied to the magnitude)
UNIT_ALIASES = {
    "cm": ("m", 0.01),
    "mm": ("m", 0.001),
    "deg": ("rad", math.pi / 180.0),
    "s": ("ms", 1000.0),
    "kHz": ("Hz", 1000.0),
    "MB": ("GB", 1.0 / 1024.0),
    "cores": ("core", 1.0),
}

# canonical unit family, used to decide whether two units are comparable
_FAMILY = {u: u for u in CANONICAL_UNITS}

_QTY_RE = re.compile(r"^\s*(-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)\s*$")


@dataclass(frozen=True)
class Quantity:
    """A magnitude with a unit symbol (canonical after normalization)."""

    magnitude: float
    unit: str = "dimensionless"

    def __str__(self):
        if self.unit == "dimensionless":
            return _fmt(self.magnitude)
        return f"{_fmt(self.magnitude)} {self.unit}"


def _fmt(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def normalize_quantity(q: Quantity) -> Quantity:
    """Rescale to a canonical unit. Idempotent; raises UnitError on unknowns."""
    if q.unit in CANONICAL_UNITS:
        return q
    if q.unit in UNIT_ALIASES:
        canon, factor = UNIT_ALIASES[q.unit]
        return Quantity(q.magnitude * factor, canon)
    raise UnitError(f"unknown unit {q.unit!r}")


def normalize_unit(unit: str | None) -> str | None:
    """Canonical unit symbol for a bare unit name (no magnitude)."""
    if unit is None:
        return None
    if unit in CANONICAL_UNITS:
        return unit
    if unit in UNIT_ALIASES:
        return UNIT_ALIASES[unit][0]
    raise UnitError(f"unknown unit {unit!r}")


def parse_quantity(text) -> Quantity:
    """Parse '0.5 m', '30Hz', 'true', or a bare number into a Quantity.

    Booleans map to dimensionless 1/0 so permission bounds can mix flags
    and limits.
    """
    if isinstance(text, bool):
        return Quantity(1.0 if text else 0.0)
    if isinstance(text, (int, float)):
        return Quantity(float(text))
    m = _QTY_RE.match(str(text))
    if not m:
        raise UnitError(f"cannot parse quantity {text!r}")
    mag = float(m.group(1))
    unit = m.group(2) or "dimensionless"
    return normalize_quantity(Quantity(mag, unit))


def same_family(a: str, b: str) -> bool:
    """True when two canonical units are directly comparable."""
    return _FAMILY.get(a) == _FAMILY.get(b)
