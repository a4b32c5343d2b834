"""Structured check outcomes.

Checks never raise on incompatibility; they return a CompatReport whose
outcome is derived from finding severities. Finding codes are stable
public identifiers consumed by golden tests and CI tooling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

DIMENSIONS = ("Sig", "Beh", "Res", "Perm", "Rec", "Ver")
_DIM_ORDER = {d: i for i, d in enumerate(DIMENSIONS + ("Global",))}
_SEVERITY_ORDER = {"info": 0, "warning": 1, "blocking": 2}

OUTCOME_ACCEPT = "Accept"
OUTCOME_ACCEPT_WITH_CONDITIONS = "AcceptWithConditions"
OUTCOME_REJECT = "Reject"
OUTCOME_REQUIRE_MIGRATION = "RequireMigrationOrReview"

ACCEPTING_OUTCOMES = (OUTCOME_ACCEPT, OUTCOME_ACCEPT_WITH_CONDITIONS)


@dataclass(frozen=True)
class Finding:
    """One concrete incompatibility or observation.

    at: where it was found (a pair index like 'pair[2]', a field path, or
    a module id). Blocking findings force rejection; mitigated issues are
    downgraded to info by the checker before they reach a report.
    """

    dimension: str
    severity: str
    code: str
    message: str
    at: str = ""
    suggestion: str | None = None

    def sort_key(self):
        return (self.at, _DIM_ORDER.get(self.dimension, 99), self.code, self.message)

    def to_dict(self):
        d = {
            "dimension": self.dimension,
            "severity": self.severity,
            "code": self.code,
            "at": self.at,
            "message": self.message,
        }
        if self.suggestion is not None:
            d["suggestion"] = self.suggestion
        return d


@dataclass(frozen=True)
class CompatReport:
    outcome: str
    findings: tuple[Finding, ...] = ()
    checked_dimensions: frozenset[str] = frozenset()
    conditions: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.outcome in ACCEPTING_OUTCOMES

    def blocking(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "blocking")

    def to_dict(self):
        return {
            "outcome": self.outcome,
            "checked_dimensions": sorted(self.checked_dimensions, key=lambda d: _DIM_ORDER.get(d, 99)),
            "findings": [f.to_dict() for f in self.findings],
            "conditions": list(self.conditions),
        }

    def to_json(self, indent=None) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=False)


def build_report(findings, checked_dimensions, require_migration: bool = False, extra_conditions=()) -> CompatReport:
    """Derive the outcome from finding severities.

    Reject on any blocking finding; otherwise RequireMigrationOrReview
    when a delta check demanded review; otherwise AcceptWithConditions
    when warnings remain (each warning contributes one condition).
    """
    ordered = tuple(sorted(findings, key=Finding.sort_key))
    conditions = tuple(extra_conditions) + tuple(
        f.suggestion or f"{f.code}: {f.message}" for f in ordered if f.severity == "warning"
    )
    if any(f.severity == "blocking" for f in ordered):
        outcome = OUTCOME_REJECT
    elif require_migration:
        outcome = OUTCOME_REQUIRE_MIGRATION
    elif any(f.severity == "warning" for f in ordered):
        outcome = OUTCOME_ACCEPT_WITH_CONDITIONS
    else:
        outcome = OUTCOME_ACCEPT
    if outcome != OUTCOME_ACCEPT_WITH_CONDITIONS and not require_migration:
        conditions = ()
    return CompatReport(
        outcome=outcome,
        findings=ordered,
        checked_dimensions=frozenset(checked_dimensions),
        conditions=conditions,
    )


@dataclass(frozen=True)
class CheckConfig:
    """Checker configuration, including the ablation toggles."""

    enabled_dimensions: frozenset[str] = frozenset(DIMENSIONS)
    chain_latency_budget_ms: int | None = None
    lock_churn_threshold: int = 3

    def __post_init__(self):
        unknown = set(self.enabled_dimensions) - set(DIMENSIONS)
        if unknown:
            raise ValueError(f"unknown dimensions: {sorted(unknown)}")
        if not self.enabled_dimensions:
            raise ValueError("enabled_dimensions must be non-empty")

    def enabled(self, dim: str) -> bool:
        return dim in self.enabled_dimensions

    def without(self, dim: str) -> "CheckConfig":
        if dim not in DIMENSIONS:
            raise ValueError(f"unknown dimension {dim!r}")
        return replace(self, enabled_dimensions=self.enabled_dimensions - {dim})
