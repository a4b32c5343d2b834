"""Semantic versions and range constraints.

Versions are strict MAJOR.MINOR.PATCH; range constraints accept two-part
literals (">=2.1" means ">=2.1.0") and comma-separated conjunctions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError

_VERSION_RE = re.compile(r"^(\d+)\.(\d+)\.(\d+)$")
_RANGE_PART_RE = re.compile(r"^(>=|<=|==|>|<)?\s*(\d+)\.(\d+)(?:\.(\d+))?$")


@dataclass(frozen=True, order=True)
class SemVer:
    major: int
    minor: int
    patch: int

    @classmethod
    def parse(cls, text: str) -> "SemVer":
        m = _VERSION_RE.match(str(text).strip())
        if not m:
            raise ParseError(f"invalid version {text!r} (expected MAJOR.MINOR.PATCH)")
        return cls(int(m.group(1)), int(m.group(2)), int(m.group(3)))

    def bump(self, level: str) -> "SemVer":
        if level == "major":
            return SemVer(self.major + 1, 0, 0)
        if level == "minor":
            return SemVer(self.major, self.minor + 1, 0)
        if level == "patch":
            return SemVer(self.major, self.minor, self.patch + 1)
        raise ValueError(f"unknown bump level {level!r}")

    def __str__(self):
        return f"{self.major}.{self.minor}.{self.patch}"


@dataclass(frozen=True)
class VersionRange:
    """Conjunction of simple comparator constraints."""

    parts: tuple[tuple[str, SemVer], ...]
    text: str

    @classmethod
    def parse(cls, text: str) -> "VersionRange":
        parts = []
        for raw in str(text).split(","):
            raw = raw.strip()
            if not raw:
                continue
            m = _RANGE_PART_RE.match(raw)
            if not m:
                raise ParseError(f"invalid version range part {raw!r}")
            op = m.group(1) or "=="
            ver = SemVer(int(m.group(2)), int(m.group(3)), int(m.group(4) or 0))
            parts.append((op, ver))
        if not parts:
            raise ParseError(f"empty version range {text!r}")
        return cls(tuple(parts), str(text))

    def contains(self, version: SemVer) -> bool:
        for op, bound in self.parts:
            if op == ">=" and not version >= bound:
                return False
            if op == ">" and not version > bound:
                return False
            if op == "<=" and not version <= bound:
                return False
            if op == "<" and not version < bound:
                return False
            if op == "==" and version != bound:
                return False
        return True

    def __str__(self):
        return self.text
