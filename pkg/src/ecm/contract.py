"""Six-dimension contract model for embodied capability modules.

A contract bundles what a module computes (signature), when it behaves as
specified (behavior), what it consumes (resources), what it is allowed to
do (permissions), how it fails (recovery), and how it evolves (versioning).
All types are immutable value objects; operations over them are pure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .predicates import Predicate
from .quantities import Quantity
from .versions import SemVer, VersionRange

MODULE_ID_RE = re.compile(r"^[a-z0-9_]+(\.[a-z0-9_]+)+$")

# Closed catalog of semantic field types. SigMatch is decidable only
# because this set is closed.
TYPE_CATALOG = frozenset(
    {
        "Pose2D",
        "Pose3D",
        "Point3D",
        "Float",
        "Int",
        "Bool",
        "String",
        "NavStatus",
        "GraspState",
        "ObjectId",
        "Confidence",
    }
)

SPATIAL_TYPES = frozenset({"Pose2D", "Pose3D", "Point3D"})

# One-step promotion edges; deliberately non-transitive.
TYPE_PROMOTIONS = frozenset(
    {
        ("Pose2D", "Pose3D"),
        ("Int", "Float"),
        ("Confidence", "Float"),
    }
)


def dtype_assignable(src: str, dst: str) -> bool:
    """Exact match or a single promotion edge."""
    return src == dst or (src, dst) in TYPE_PROMOTIONS


class InvocationMode(str, Enum):
    SYNC = "sync"
    ASYNC = "async"
    EVENT = "event"


class Handoff(str, Enum):
    PERSISTENT_HOLD = "persistent_hold"
    STABILIZED = "stabilized"
    TRANSFER_READY = "transfer_ready"
    NOMINAL_SUCCESS = "nominal_success"
    STABLE_ARRIVAL = "stable_arrival"


class Severity(str, Enum):
    TRANSIENT = "transient"
    DEGRADED = "degraded"
    CRITICAL = "critical"
    FATAL = "fatal"


class RetryStrategy(str, Enum):
    SAME_POSE_MORE_FORCE = "same_pose_more_force"
    NEW_POSE = "new_pose"
    RETRY_ONCE = "retry_once"
    RETREAT = "retreat"
    NONE = "none"


class AuditLevel(str, Enum):
    NONE = "none"
    STANDARD = "standard"
    TRACED = "traced"


AUDIT_ORDER = {AuditLevel.NONE: 0, AuditLevel.STANDARD: 1, AuditLevel.TRACED: 2}


class CompatibilityClass(str, Enum):
    FULLY_COMPATIBLE = "fully_compatible"
    RESOURCE_SENSITIVE = "resource_sensitive"
    POLICY_SENSITIVE = "policy_sensitive"
    RECOVERY_SENSITIVE = "recovery_sensitive"
    BREAKING = "breaking"


# Severity order for conservative fallbacks and reporting.
CLASS_SEVERITY = {
    CompatibilityClass.FULLY_COMPATIBLE: 0,
    CompatibilityClass.RESOURCE_SENSITIVE: 1,
    CompatibilityClass.RECOVERY_SENSITIVE: 2,
    CompatibilityClass.POLICY_SENSITIVE: 3,
    CompatibilityClass.BREAKING: 4,
}


class ReleaseChannel(str, Enum):
    SANDBOX = "sandbox"
    BETA = "beta"
    STABLE = "stable"
    CERTIFIED = "certified"


CHANNEL_ORDER = {
    ReleaseChannel.SANDBOX: 0,
    ReleaseChannel.BETA: 1,
    ReleaseChannel.STABLE: 2,
    ReleaseChannel.CERTIFIED: 3,
}


@dataclass(frozen=True)
class FieldSpec:
    """One named field of an input or output schema.

    Spatial types must carry a frame. `required=False` marks inputs a
    module can default internally; they do not constrain composition.
    """

    name: str
    dtype: str
    unit: str | None = None
    frame: str | None = None
    required: bool = True


@dataclass(frozen=True)
class Signature:
    input_schema: tuple[FieldSpec, ...] = ()
    output_schema: tuple[FieldSpec, ...] = ()
    coord_frame: str | None = None
    timeout_ms: int | None = None
    invocation_mode: InvocationMode = InvocationMode.SYNC
    state_objects: tuple[str, ...] = ()


@dataclass(frozen=True)
class Behavior:
    preconditions: tuple[Predicate, ...] = ()
    postconditions: tuple[Predicate, ...] = ()
    invariants_: tuple[Predicate, ...] = ()
    semantic_assumptions: tuple[str, ...] = ()
    handoff_semantics: Handoff | None = None
    # Minimum completion level this module needs from its upstream
    # neighbour; absent means any handoff is acceptable.
    required_handoff: Handoff | None = None


@dataclass(frozen=True)
class SensorSpec:
    kind: str
    mount: str | None = None
    min_rate_hz: float | None = None


@dataclass(frozen=True)
class ActuatorSpec:
    kind: str
    dof: int | None = None
    control_mode: str | None = None


@dataclass(frozen=True)
class ComputeSpec:
    cpu_cores: float = 0.0
    gpu_gb: float = 0.0
    mem_gb: float = 0.0


@dataclass(frozen=True)
class Resources:
    sensors: tuple[SensorSpec, ...] | None = None
    actuators: tuple[ActuatorSpec, ...] | None = None
    compute: ComputeSpec | None = None
    control_frequency_hz: float | None = None
    exclusive_locks: tuple[str, ...] = ()
    comm: tuple[str, ...] = ()


@dataclass(frozen=True)
class PermClaim:
    """A permission key with either a boolean flag or a quantity bound."""

    key: str
    bound: Quantity | bool = True


@dataclass(frozen=True)
class Permissions:
    physical: tuple[PermClaim, ...] | None = None
    data: tuple[PermClaim, ...] = ()
    network: tuple[PermClaim, ...] = ()
    operational: tuple[PermClaim, ...] = ()
    audit_req: AuditLevel = AuditLevel.NONE

    def all_claims(self) -> tuple[PermClaim, ...]:
        return tuple(self.physical or ()) + self.data + self.network + self.operational


@dataclass(frozen=True)
class FailureMode:
    mode: str
    severity: Severity = Severity.TRANSIENT


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 1
    strategy: RetryStrategy = RetryStrategy.NONE


@dataclass(frozen=True)
class Escalation:
    """Escalate to `target` on a predicate condition or a failure count."""

    target: str
    condition: Predicate | None = None
    after_failures: int | None = None


@dataclass(frozen=True)
class Recovery:
    failure_modes: tuple[FailureMode, ...] | None = None
    rollback_state: str | None = None
    retry_policy: RetryPolicy | None = None
    safe_stop_action: str | None = None
    escalation: tuple[Escalation, ...] | None = None


@dataclass(frozen=True)
class Deprecation:
    flag: bool = False
    end_of_support: str | None = None
    migration_ref: str | None = None


@dataclass(frozen=True)
class Versioning:
    version: SemVer | None = None
    compat_level: CompatibilityClass | None = None
    dependencies: tuple[tuple[str, VersionRange], ...] | None = None
    deprecation: Deprecation = Deprecation()
    policy_change: bool | None = None
    resource_change: bool | None = None


@dataclass(frozen=True)
class EcmContract:
    module_id: str
    sig: Signature = Signature()
    beh: Behavior = Behavior()
    res: Resources = Resources()
    perm: Permissions = Permissions()
    rec: Recovery = Recovery()
    ver: Versioning = Versioning()
    channel: ReleaseChannel | None = None
    # Unknown manifest keys survive round trips for forward compatibility.
    extensions: tuple[tuple[str, object], ...] = ()

    def __post_init__(self):
        if not MODULE_ID_RE.match(self.module_id):
            raise ValueError(f"invalid module_id {self.module_id!r}")

    @property
    def family(self) -> str:
        """Second segment of the dotted id, e.g. ecm.navigation.fast -> navigation."""
        return self.module_id.split(".")[1]

    @property
    def version(self) -> SemVer | None:
        return self.ver.version

    @property
    def ref(self) -> str:
        return f"{self.module_id}@{self.ver.version}"

    def exported_states(self) -> frozenset[str]:
        states = set(self.sig.state_objects)
        if self.rec.rollback_state:
            states.add(self.rec.rollback_state)
        return frozenset(states)


@dataclass(frozen=True)
class CompletenessReport:
    complete: bool
    missing_fields: tuple[tuple[str, str], ...]


# (dimension, field, probe) rows for every required contract field. A field
# is missing when its value is None; declared-but-empty collections count
# as present except pre/postconditions, which the behavior dimension
# requires to be non-empty.
_REQUIRED_ROWS = (
    ("Sig", "input_schema", lambda c: c.sig.input_schema is not None and len(c.sig.input_schema) > 0),
    ("Sig", "output_schema", lambda c: c.sig.output_schema is not None and len(c.sig.output_schema) > 0),
    ("Sig", "coord_frame", lambda c: bool(c.sig.coord_frame)),
    ("Sig", "timeout_ms", lambda c: c.sig.timeout_ms is not None and c.sig.timeout_ms > 0),
    ("Beh", "preconditions", lambda c: len(c.beh.preconditions) > 0),
    ("Beh", "postconditions", lambda c: len(c.beh.postconditions) > 0),
    ("Beh", "handoff_semantics", lambda c: c.beh.handoff_semantics is not None),
    ("Res", "sensors", lambda c: c.res.sensors is not None),
    ("Res", "actuators", lambda c: c.res.actuators is not None),
    ("Res", "compute", lambda c: c.res.compute is not None),
    ("Perm", "physical", lambda c: c.perm.physical is not None),
    ("Rec", "failure_modes", lambda c: bool(c.rec.failure_modes)),
    ("Rec", "rollback_state", lambda c: bool(c.rec.rollback_state)),
    ("Rec", "retry_policy", lambda c: c.rec.retry_policy is not None),
    ("Rec", "escalation", lambda c: c.rec.escalation is not None),
    ("Ver", "version", lambda c: c.ver.version is not None),
    ("Ver", "compat_level", lambda c: c.ver.compat_level is not None),
    ("Ver", "dependencies", lambda c: c.ver.dependencies is not None),
    ("Ver", "policy_change", lambda c: c.ver.policy_change is not None),
)


def check_completeness(c: EcmContract) -> CompletenessReport:
    """Flag required fields that are absent from the contract."""
    missing = tuple(
        (dim, name) for dim, name, present in _REQUIRED_ROWS if not present(c)
    )
    return CompletenessReport(complete=not missing, missing_fields=missing)
