"""Deployment context: embodiment profiles, policy profiles, and world state.

These are declared documents, not live hardware discovery. The checker
composes the satisfiability primitives defined here; each primitive
returns findings rather than booleans so reports stay explainable.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import yaml

from .contract import (
    ActuatorSpec,
    AuditLevel,
    AUDIT_ORDER,
    ComputeSpec,
    Permissions,
    ReleaseChannel,
    Resources,
    SensorSpec,
)
from .errors import SchemaError
from .predicates import Predicate, evaluate
from .quantities import Quantity, parse_quantity, same_family
from .report import Finding
from .versions import SemVer


@dataclass(frozen=True)
class FrameTransformRegistry:
    """Directed frame-transform availability; closure is computed on demand."""

    edges: frozenset[tuple[str, str]] = frozenset()

    def with_edge(self, src: str, dst: str) -> "FrameTransformRegistry":
        return FrameTransformRegistry(self.edges | {(src, dst)})


def frame_path_exists(src: str, dst: str, reg: FrameTransformRegistry) -> bool:
    """Reflexive-transitive reachability over registered directed edges."""
    if src == dst:
        return True
    adjacency: dict[str, list[str]] = {}
    for a, b in reg.edges:
        adjacency.setdefault(a, []).append(b)
    seen = {src}
    frontier = [src]
    while frontier:
        node = frontier.pop()
        for nxt in adjacency.get(node, ()):
            if nxt == dst:
                return True
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return False


@dataclass(frozen=True)
class EmbodimentProfile:
    profile_id: str
    sensors: tuple[SensorSpec, ...] = ()
    actuators: tuple[ActuatorSpec, ...] = ()
    compute_capacity: ComputeSpec = ComputeSpec()
    max_control_rate_hz: float = 1000.0
    runtime_version: SemVer = SemVer(1, 0, 0)
    provided_services: tuple[tuple[str, SemVer], ...] = ()
    frame_transforms: FrameTransformRegistry = FrameTransformRegistry()

    def service_version(self, name: str) -> SemVer | None:
        if name == "runtime":
            return self.runtime_version
        for svc, ver in self.provided_services:
            if svc == name:
                return ver
        return None


@dataclass(frozen=True)
class PolicyProfile:
    profile_id: str
    granted: tuple[tuple[str, Quantity | bool], ...] = ()
    allowed_channels: frozenset[ReleaseChannel] = frozenset(ReleaseChannel)
    audit_mode: AuditLevel = AuditLevel.NONE

    def grant_for(self, key: str):
        for k, bound in self.granted:
            if k == key:
                return bound
        return None


@dataclass(frozen=True)
class WorldState:
    facts: dict = field(default_factory=dict)
    available_locks: frozenset[str] = frozenset()
    allocatable: ComputeSpec = ComputeSpec()
    live_sensors: frozenset[str] = frozenset()


def resource_satisfiable(res: Resources, emb: EmbodimentProfile) -> list[Finding]:
    """Findings for every declared requirement the embodiment cannot meet."""
    findings = []
    for need in res.sensors or ():
        if not any(_sensor_matches(need, have) for have in emb.sensors):
            findings.append(
                Finding(
                    dimension="Res",
                    severity="blocking",
                    code="SENSOR_UNSUPPORTED",
                    message=f"no inventory sensor satisfies {need.kind!r}"
                    + (f" (mount={need.mount})" if need.mount else "")
                    + (f" at >= {need.min_rate_hz} Hz" if need.min_rate_hz else ""),
                    at=f"resources.required_sensors.{need.kind}",
                )
            )
    for need in res.actuators or ():
        if not any(_actuator_matches(need, have) for have in emb.actuators):
            findings.append(
                Finding(
                    dimension="Res",
                    severity="blocking",
                    code="ACTUATOR_UNSUPPORTED",
                    message=f"no inventory actuator satisfies {need.kind!r}",
                    at=f"resources.required_actuators.{need.kind}",
                )
            )
    if res.compute is not None:
        cap = emb.compute_capacity
        for attr, label in (("cpu_cores", "core"), ("gpu_gb", "GB"), ("mem_gb", "GB")):
            need_v = getattr(res.compute, attr)
            if need_v > getattr(cap, attr):
                findings.append(
                    Finding(
                        dimension="Res",
                        severity="blocking",
                        code="COMPUTE_EXCEEDED",
                        message=f"{attr} {need_v:g} {label} exceeds capacity {getattr(cap, attr):g} {label}",
                        at=f"resources.compute.{attr}",
                    )
                )
    if res.control_frequency_hz is not None and res.control_frequency_hz > emb.max_control_rate_hz:
        findings.append(
            Finding(
                dimension="Res",
                severity="blocking",
                code="CONTROL_RATE_EXCEEDED",
                message=f"control loop {res.control_frequency_hz:g} Hz exceeds platform max {emb.max_control_rate_hz:g} Hz",
                at="resources.control_frequency_hz",
            )
        )
    return findings


def _sensor_matches(need: SensorSpec, have: SensorSpec) -> bool:
    # Kind equality, never capability subsumption: a fingertip pressure
    # sensor does not satisfy a force-torque requirement.
    if need.kind != have.kind:
        return False
    if need.mount is not None and have.mount is not None and need.mount != have.mount:
        return False
    if need.min_rate_hz is not None:
        if have.min_rate_hz is None or have.min_rate_hz < need.min_rate_hz:
            return False
    return True


def _actuator_matches(need: ActuatorSpec, have: ActuatorSpec) -> bool:
    if need.kind != have.kind:
        return False
    if need.dof is not None:
        if have.dof is None or have.dof < need.dof:
            return False
    if need.control_mode is not None and have.control_mode is not None:
        if need.control_mode != have.control_mode:
            return False
    return True


def permission_grantable(perm: Permissions, pol: PolicyProfile) -> list[Finding]:
    """Findings for claims the policy does not cover.

    A quantity claim is grantable when it stays within the granted bound;
    for minimum-distance style limits the module must promise at least the
    distance policy demands, so claimed >= granted passes.
    """
    findings = []
    for claim in perm.all_claims():
        granted = pol.grant_for(claim.key)
        if granted is None or granted is False:
            findings.append(
                Finding(
                    dimension="Perm",
                    severity="blocking",
                    code="PERM_GAP",
                    message=f"permission {claim.key!r} is not granted by policy {pol.profile_id!r}",
                    at=f"permissions.{claim.key}",
                    suggestion=f"request grant for {claim.key!r} or drop the claim",
                )
            )
            continue
        if claim.bound is True or granted is True:
            continue
        if not same_family(claim.bound.unit, granted.unit):
            findings.append(
                Finding(
                    dimension="Perm",
                    severity="blocking",
                    code="PERM_GAP",
                    message=f"claim {claim.key!r} unit {claim.bound.unit} does not match grant unit {granted.unit}",
                    at=f"permissions.{claim.key}",
                )
            )
        elif claim.bound.magnitude < granted.magnitude:
            findings.append(
                Finding(
                    dimension="Perm",
                    severity="blocking",
                    code="PERM_GAP",
                    message=(
                        f"claim {claim.key!r} bound {claim.bound} is tighter than the "
                        f"policy minimum {granted}"
                    ),
                    at=f"permissions.{claim.key}",
                )
            )
    if AUDIT_ORDER[perm.audit_req] > AUDIT_ORDER[pol.audit_mode]:
        findings.append(
            Finding(
                dimension="Perm",
                severity="blocking",
                code="AUDIT_SHORTFALL",
                message=f"module requires audit {perm.audit_req.value!r} but policy provides {pol.audit_mode.value!r}",
                at="permissions.audit_req",
            )
        )
    return findings


def evaluate_predicate(p: Predicate, w: WorldState) -> str:
    """Tri-state evaluation against world facts: holds / fails / unknown."""
    return evaluate(p, w.facts)


# -- profile documents -------------------------------------------------------


def parse_profiles(text: str) -> tuple[EmbodimentProfile | None, PolicyProfile | None]:
    """Load a `.profile.yaml` document with embodiment/policy sections."""
    doc = yaml.safe_load(text) or {}
    emb = None
    pol = None
    if "embodiment" in doc:
        raw = doc["embodiment"] or {}
        edges = []
        for edge in raw.get("frames") or ():
            if "->" not in str(edge):
                raise SchemaError("embodiment.frames", f"expected 'from->to', got {edge!r}")
            src, dst = (part.strip() for part in str(edge).split("->", 1))
            edges.append((src, dst))
        compute = raw.get("compute") or {}
        emb = EmbodimentProfile(
            profile_id=str(raw.get("profile_id", "embodiment")),
            sensors=tuple(
                SensorSpec(str(s), None, None)
                if isinstance(s, str)
                else SensorSpec(str(s["kind"]), s.get("mount"), float(s["rate_hz"]) if "rate_hz" in s else None)
                for s in raw.get("sensors") or ()
            ),
            actuators=tuple(
                ActuatorSpec(str(a), None, None)
                if isinstance(a, str)
                else ActuatorSpec(str(a["kind"]), int(a["dof"]) if "dof" in a else None, a.get("control_mode"))
                for a in raw.get("actuators") or ()
            ),
            compute_capacity=ComputeSpec(
                cpu_cores=float(compute.get("cpu_cores", 0)),
                gpu_gb=float(compute.get("gpu_gb", 0)),
                mem_gb=float(compute.get("mem_gb", 0)),
            ),
            max_control_rate_hz=float(raw.get("max_control_rate_hz", 1000.0)),
            runtime_version=SemVer.parse(raw.get("runtime_version", "1.0.0")),
            provided_services=tuple(sorted((str(k), SemVer.parse(v)) for k, v in (raw.get("services") or {}).items())),
            frame_transforms=FrameTransformRegistry(frozenset(edges)),
        )
    if "policy" in doc:
        raw = doc["policy"] or {}
        granted = []
        for key, bound in (raw.get("granted") or {}).items():
            granted.append((str(key), bound if isinstance(bound, bool) else parse_quantity(bound)))
        channels = raw.get("allowed_channels")
        pol = PolicyProfile(
            profile_id=str(raw.get("profile_id", "policy")),
            granted=tuple(granted),
            allowed_channels=frozenset(ReleaseChannel(str(ch)) for ch in channels) if channels else frozenset(ReleaseChannel),
            audit_mode=AuditLevel(str(raw.get("audit_mode", "none"))),
        )
    return emb, pol


def load_profiles(path) -> tuple[EmbodimentProfile | None, PolicyProfile | None]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_profiles(fh.read())


def parse_world(text: str) -> WorldState:
    """Load a `.world.yaml` fact map into a world state."""
    doc = yaml.safe_load(text) or {}
    facts = {}
    for key, value in (doc.get("facts") or {}).items():
        if isinstance(value, bool) or isinstance(value, (int, float)):
            facts[str(key)] = value
        else:
            facts[str(key)] = parse_quantity(value)
    compute = doc.get("allocatable") or {}
    return WorldState(
        facts=facts,
        available_locks=frozenset(doc.get("available_locks") or ()),
        allocatable=ComputeSpec(
            cpu_cores=float(compute.get("cpu_cores", 0)),
            gpu_gb=float(compute.get("gpu_gb", 0)),
            mem_gb=float(compute.get("mem_gb", 0)),
        ),
        live_sensors=frozenset(doc.get("live_sensors") or ()),
    )


def load_world(path) -> WorldState:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_world(fh.read())
