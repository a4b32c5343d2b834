"""Manifest parsing and serialization (`.ecm.yaml`).

The document layout mirrors the shipped manifest convention: top-level
sections ecm / signature / behavior / resources / permissions / recovery /
versioning. Unknown keys are preserved in an extensions bag so newer
manifests survive a round trip through an older toolkit.
"""

from __future__ import annotations

import io

import yaml

from .contract import (
    ActuatorSpec,
    AuditLevel,
    Behavior,
    CompatibilityClass,
    ComputeSpec,
    Deprecation,
    EcmContract,
    Escalation,
    FailureMode,
    FieldSpec,
    Handoff,
    InvocationMode,
    PermClaim,
    Permissions,
    Recovery,
    ReleaseChannel,
    Resources,
    RetryPolicy,
    RetryStrategy,
    SensorSpec,
    Severity,
    Signature,
    SPATIAL_TYPES,
    TYPE_CATALOG,
    Versioning,
    check_completeness,
)
from .errors import ParseError, SchemaError
from .predicates import parse_predicate
from .quantities import Quantity, normalize_unit, parse_quantity
from .versions import SemVer, VersionRange

_SECTIONS = ("ecm", "signature", "behavior", "resources", "permissions", "recovery", "versioning")

_SIG_KEYS = ("input_schema", "output_schema", "coordinate_frame", "timeout_ms", "invocation_mode", "state_objects")
_BEH_KEYS = ("preconditions", "postconditions", "invariants", "semantic_assumptions", "completion_semantics", "required_handoff")
_RES_KEYS = ("required_sensors", "required_actuators", "compute", "control_frequency_hz", "exclusive_resource_lock", "comm")
_PERM_KEYS = ("physical", "data", "network", "operational", "audit_req")
_REC_KEYS = ("failure_modes", "rollback_state", "retry_policy", "safe_stop_action", "escalation")
_VER_KEYS = ("dependency_constraints", "deprecation", "policy_change_marker", "resource_change_marker")


def _enum(cls, value, path):
    try:
        return cls(str(value).replace("-", "_"))
    except ValueError:
        raise SchemaError(path, f"invalid value {value!r}")


def _parse_field_spec(entry, path) -> FieldSpec:
    if not isinstance(entry, dict) or len(entry) != 1:
        raise SchemaError(path, f"expected one-key field mapping, got {entry!r}")
    name, spec = next(iter(entry.items()))
    if isinstance(spec, str):
        dtype, unit, frame, required = spec, None, None, True
    elif isinstance(spec, dict):
        dtype = spec.get("type")
        unit = spec.get("unit")
        frame = spec.get("frame")
        required = bool(spec.get("required", True))
    else:
        raise SchemaError(path, f"bad field spec for {name!r}")
    if dtype not in TYPE_CATALOG:
        raise SchemaError(f"{path}.{name}", f"unknown field type {dtype!r}")
    if dtype in SPATIAL_TYPES and not frame:
        raise SchemaError(f"{path}.{name}", "spatial field requires a frame")
    return FieldSpec(str(name), dtype, normalize_unit(unit), frame, required)


def _parse_schema(raw, path):
    if raw is None:
        return None
    if not isinstance(raw, list):
        raise SchemaError(path, "expected a list of field specs")
    return tuple(_parse_field_spec(e, path) for e in raw)


def _parse_predicates(raw, path):
    if raw is None:
        return ()
    return tuple(parse_predicate(p) for p in raw)


def _parse_signature(raw: dict) -> tuple[Signature, list]:
    extras = [(f"signature.{k}", v) for k, v in raw.items() if k not in _SIG_KEYS]
    timeout = raw.get("timeout_ms")
    if timeout is not None:
        timeout = int(timeout)
        if timeout <= 0:
            raise SchemaError("signature.timeout_ms", "must be positive")
    sig = Signature(
        input_schema=_parse_schema(raw.get("input_schema"), "signature.input_schema"),
        output_schema=_parse_schema(raw.get("output_schema"), "signature.output_schema"),
        coord_frame=raw.get("coordinate_frame"),
        timeout_ms=timeout,
        invocation_mode=_enum(InvocationMode, raw.get("invocation_mode", "sync"), "signature.invocation_mode"),
        state_objects=tuple(raw.get("state_objects") or ()),
    )
    return sig, extras


def _parse_behavior(raw: dict) -> tuple[Behavior, list]:
    extras = [(f"behavior.{k}", v) for k, v in raw.items() if k not in _BEH_KEYS]
    handoff = raw.get("completion_semantics")
    required = raw.get("required_handoff")
    beh = Behavior(
        preconditions=_parse_predicates(raw.get("preconditions"), "behavior.preconditions"),
        postconditions=_parse_predicates(raw.get("postconditions"), "behavior.postconditions"),
        invariants_=_parse_predicates(raw.get("invariants"), "behavior.invariants"),
        semantic_assumptions=tuple(raw.get("semantic_assumptions") or ()),
        handoff_semantics=_enum(Handoff, handoff, "behavior.completion_semantics") if handoff else None,
        required_handoff=_enum(Handoff, required, "behavior.required_handoff") if required else None,
    )
    return beh, extras


def _parse_sensor(entry, path) -> SensorSpec:
    if isinstance(entry, str):
        return SensorSpec(entry)
    if isinstance(entry, dict):
        kind = entry.get("kind")
        if not kind:
            raise SchemaError(path, f"sensor spec needs a kind: {entry!r}")
        rate = entry.get("min_rate_hz")
        return SensorSpec(str(kind), entry.get("mount"), float(rate) if rate is not None else None)
    raise SchemaError(path, f"bad sensor spec {entry!r}")


def _parse_actuator(entry, path) -> ActuatorSpec:
    if isinstance(entry, str):
        return ActuatorSpec(entry)
    if isinstance(entry, dict):
        kind = entry.get("kind")
        if not kind:
            raise SchemaError(path, f"actuator spec needs a kind: {entry!r}")
        dof = entry.get("dof")
        return ActuatorSpec(str(kind), int(dof) if dof is not None else None, entry.get("control_mode"))
    raise SchemaError(path, f"bad actuator spec {entry!r}")


def _parse_compute(raw, path) -> ComputeSpec | None:
    if raw is None:
        return None
    spec = ComputeSpec(
        cpu_cores=float(raw.get("cpu_cores", 0)),
        gpu_gb=float(raw.get("gpu_gb", 0)),
        mem_gb=float(raw.get("mem_gb", 0)),
    )
    if spec.cpu_cores < 0 or spec.gpu_gb < 0 or spec.mem_gb < 0:
        raise SchemaError(path, "compute components must be non-negative")
    return spec


def _parse_resources(raw: dict) -> tuple[Resources, list]:
    extras = [(f"resources.{k}", v) for k, v in raw.items() if k not in _RES_KEYS]
    sensors = raw.get("required_sensors")
    actuators = raw.get("required_actuators")
    freq = raw.get("control_frequency_hz")
    res = Resources(
        sensors=None if sensors is None else tuple(_parse_sensor(s, "resources.required_sensors") for s in sensors),
        actuators=None if actuators is None else tuple(_parse_actuator(a, "resources.required_actuators") for a in actuators),
        compute=_parse_compute(raw.get("compute"), "resources.compute"),
        control_frequency_hz=float(freq) if freq is not None else None,
        exclusive_locks=tuple(raw.get("exclusive_resource_lock") or ()),
        comm=tuple(raw.get("comm") or ()),
    )
    return res, extras


def _parse_claims(raw, path):
    claims = []
    for key, bound in (raw or {}).items():
        if bound is False:
            continue  # an explicitly denied claim is simply not claimed
        if bound is True:
            claims.append(PermClaim(str(key), True))
        else:
            claims.append(PermClaim(str(key), parse_quantity(bound)))
    return tuple(claims)


def _parse_permissions(raw: dict) -> tuple[Permissions, list]:
    known = set(_PERM_KEYS)
    sectioned = any(k in known for k in raw)
    extras = []
    if sectioned:
        extras = [(f"permissions.{k}", v) for k, v in raw.items() if k not in known]
        physical = raw.get("physical")
        perm = Permissions(
            physical=None if physical is None else _parse_claims(physical, "permissions.physical"),
            data=_parse_claims(raw.get("data"), "permissions.data"),
            network=_parse_claims(raw.get("network"), "permissions.network"),
            operational=_parse_claims(raw.get("operational"), "permissions.operational"),
            audit_req=_enum(AuditLevel, raw.get("audit_req", "none"), "permissions.audit_req"),
        )
    else:
        # flat form: bare keys are physical permissions
        perm = Permissions(physical=_parse_claims(raw, "permissions"))
    return perm, extras


def _parse_failure_mode(entry, path) -> FailureMode:
    if isinstance(entry, str):
        return FailureMode(entry)
    if isinstance(entry, dict) and len(entry) == 1:
        mode, sev = next(iter(entry.items()))
        return FailureMode(str(mode), _enum(Severity, sev, path))
    raise SchemaError(path, f"bad failure mode {entry!r}")


def _parse_retry(raw, path) -> RetryPolicy | None:
    if raw is None:
        return None
    if isinstance(raw, str):
        return RetryPolicy(max_attempts=1, strategy=_enum(RetryStrategy, raw, path))
    if isinstance(raw, dict):
        attempts = int(raw.get("max", raw.get("max_attempts", 1)))
        if attempts < 0 or attempts > 10:
            raise SchemaError(path, "max_attempts must be between 0 and 10")
        return RetryPolicy(attempts, _enum(RetryStrategy, raw.get("strategy", "none"), path))
    raise SchemaError(path, f"bad retry policy {raw!r}")


def _parse_escalation(raw, path):
    if raw is None:
        return None
    rules = []
    for entry in raw:
        if not isinstance(entry, dict) or "target" not in entry:
            raise SchemaError(path, f"escalation rule needs a target: {entry!r}")
        condition = entry.get("condition")
        after = entry.get("after_failures")
        rules.append(
            Escalation(
                target=str(entry["target"]),
                condition=parse_predicate(condition) if condition else None,
                after_failures=int(after) if after is not None else None,
            )
        )
    return tuple(rules)


def _parse_recovery(raw: dict) -> tuple[Recovery, list]:
    extras = [(f"recovery.{k}", v) for k, v in raw.items() if k not in _REC_KEYS]
    modes = raw.get("failure_modes")
    rec = Recovery(
        failure_modes=None if modes is None else tuple(_parse_failure_mode(m, "recovery.failure_modes") for m in modes),
        rollback_state=raw.get("rollback_state"),
        retry_policy=_parse_retry(raw.get("retry_policy"), "recovery.retry_policy"),
        safe_stop_action=raw.get("safe_stop_action"),
        escalation=_parse_escalation(raw.get("escalation"), "recovery.escalation"),
    )
    return rec, extras


def _parse_versioning(raw: dict, version, compat_level) -> tuple[Versioning, list]:
    extras = [(f"versioning.{k}", v) for k, v in raw.items() if k not in _VER_KEYS]
    deps = raw.get("dependency_constraints")
    dep_items = None
    if deps is not None:
        dep_items = tuple((str(k), VersionRange.parse(v)) for k, v in deps.items())
    dep_raw = raw.get("deprecation") or {}
    ver = Versioning(
        version=version,
        compat_level=compat_level,
        dependencies=dep_items,
        deprecation=Deprecation(
            flag=bool(dep_raw.get("flag", False)),
            end_of_support=dep_raw.get("end_of_support"),
            migration_ref=dep_raw.get("migration_ref"),
        ),
        policy_change=bool(raw.get("policy_change_marker", False)),
        resource_change=bool(raw.get("resource_change_marker", False)),
    )
    return ver, extras


def parse_manifest(text: str) -> EcmContract:
    """Parse a manifest document into a contract.

    Missing optional fields stay absent; missing required fields parse to
    None and are surfaced by check_completeness rather than failing here,
    so partial (sandbox-stage) manifests load.
    """
    try:
        doc = yaml.safe_load(io.StringIO(text))
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ParseError(str(e), line=None if mark is None else mark.line + 1)
    if not isinstance(doc, dict):
        raise ParseError("manifest is not a mapping")
    if "ecm" not in doc:
        raise SchemaError("ecm", "missing required section")

    ecm = doc["ecm"] or {}
    module_id = ecm.get("module_id")
    if not module_id:
        raise SchemaError("ecm.module_id", "missing")
    version = SemVer.parse(ecm["version"]) if "version" in ecm else None
    compat = _enum(CompatibilityClass, ecm["compatibility_class"], "ecm.compatibility_class") if "compatibility_class" in ecm else None
    channel = _enum(ReleaseChannel, ecm["release_channel"], "ecm.release_channel") if "release_channel" in ecm else None

    extensions = [(f"ecm.{k}", v) for k, v in ecm.items() if k not in ("module_id", "version", "release_channel", "compatibility_class")]
    sig, ex = _parse_signature(doc.get("signature") or {})
    extensions += ex
    beh, ex = _parse_behavior(doc.get("behavior") or {})
    extensions += ex
    res, ex = _parse_resources(doc.get("resources") or {})
    extensions += ex
    perm, ex = _parse_permissions(doc.get("permissions") or {})
    extensions += ex
    rec, ex = _parse_recovery(doc.get("recovery") or {})
    extensions += ex
    ver, ex = _parse_versioning(doc.get("versioning") or {}, version, compat)
    extensions += ex
    extensions += [(k, v) for k, v in doc.items() if k not in _SECTIONS]

    try:
        return EcmContract(
            module_id=str(module_id),
            sig=sig,
            beh=beh,
            res=res,
            perm=perm,
            rec=rec,
            ver=ver,
            channel=channel,
            extensions=tuple(extensions),
        )
    except ValueError as e:
        raise SchemaError("ecm.module_id", str(e))


def _emit_field(f: FieldSpec):
    if f.unit is None and f.frame is None and f.required:
        return {f.name: f.dtype}
    spec = {"type": f.dtype}
    if f.unit is not None:
        spec["unit"] = f.unit
    if f.frame is not None:
        spec["frame"] = f.frame
    if not f.required:
        spec["required"] = False
    return {f.name: spec}


def _emit_quantity(q):
    if q is True or q is False:
        return q
    if isinstance(q, Quantity):
        if q.unit == "dimensionless":
            return q.magnitude if q.magnitude != int(q.magnitude) else int(q.magnitude)
        return str(q)
    return q


def _emit_claims(claims):
    return {c.key: _emit_quantity(c.bound) for c in claims}


def serialize_manifest(c: EcmContract, allow_partial: bool = False) -> str:
    """Serialize to the canonical manifest form (dimension order fixed).

    Optional fields that are absent are omitted entirely; output re-parses
    to an equal contract and re-serializes byte-identically.
    """
    if not allow_partial:
        report = check_completeness(c)
        if not report.complete:
            missing = ", ".join(f"{d}.{f}" for d, f in report.missing_fields)
            raise SchemaError("contract", f"incomplete contract ({missing}); pass allow_partial to serialize anyway")

    doc: dict = {}
    ecm: dict = {"module_id": c.module_id}
    if c.ver.version is not None:
        ecm["version"] = str(c.ver.version)
    if c.channel is not None:
        ecm["release_channel"] = c.channel.value
    if c.ver.compat_level is not None:
        ecm["compatibility_class"] = c.ver.compat_level.value.replace("_", "-")
    doc["ecm"] = ecm

    sig: dict = {}
    if c.sig.input_schema is not None:
        sig["input_schema"] = [_emit_field(f) for f in c.sig.input_schema]
    if c.sig.output_schema is not None:
        sig["output_schema"] = [_emit_field(f) for f in c.sig.output_schema]
    if c.sig.coord_frame is not None:
        sig["coordinate_frame"] = c.sig.coord_frame
    if c.sig.timeout_ms is not None:
        sig["timeout_ms"] = c.sig.timeout_ms
    if c.sig.invocation_mode != InvocationMode.SYNC:
        sig["invocation_mode"] = c.sig.invocation_mode.value
    if c.sig.state_objects:
        sig["state_objects"] = list(c.sig.state_objects)
    doc["signature"] = sig

    beh: dict = {}
    if c.beh.preconditions:
        beh["preconditions"] = [str(p) for p in c.beh.preconditions]
    if c.beh.postconditions:
        beh["postconditions"] = [str(p) for p in c.beh.postconditions]
    if c.beh.invariants_:
        beh["invariants"] = [str(p) for p in c.beh.invariants_]
    if c.beh.semantic_assumptions:
        beh["semantic_assumptions"] = list(c.beh.semantic_assumptions)
    if c.beh.handoff_semantics is not None:
        beh["completion_semantics"] = c.beh.handoff_semantics.value
    if c.beh.required_handoff is not None:
        beh["required_handoff"] = c.beh.required_handoff.value
    doc["behavior"] = beh

    res: dict = {}
    if c.res.sensors is not None:
        res["required_sensors"] = [
            s.kind if s.mount is None and s.min_rate_hz is None else _strip_none({"kind": s.kind, "mount": s.mount, "min_rate_hz": s.min_rate_hz})
            for s in c.res.sensors
        ]
    if c.res.actuators is not None:
        res["required_actuators"] = [
            a.kind if a.dof is None and a.control_mode is None else _strip_none({"kind": a.kind, "dof": a.dof, "control_mode": a.control_mode})
            for a in c.res.actuators
        ]
    if c.res.compute is not None:
        res["compute"] = _strip_zero({"cpu_cores": c.res.compute.cpu_cores, "gpu_gb": c.res.compute.gpu_gb, "mem_gb": c.res.compute.mem_gb})
    if c.res.control_frequency_hz is not None:
        res["control_frequency_hz"] = _num(c.res.control_frequency_hz)
    if c.res.exclusive_locks:
        res["exclusive_resource_lock"] = list(c.res.exclusive_locks)
    if c.res.comm:
        res["comm"] = list(c.res.comm)
    doc["resources"] = res

    perm: dict = {}
    if c.perm.physical is not None:
        perm["physical"] = _emit_claims(c.perm.physical)
    if c.perm.data:
        perm["data"] = _emit_claims(c.perm.data)
    if c.perm.network:
        perm["network"] = _emit_claims(c.perm.network)
    if c.perm.operational:
        perm["operational"] = _emit_claims(c.perm.operational)
    if c.perm.audit_req != AuditLevel.NONE:
        perm["audit_req"] = c.perm.audit_req.value
    doc["permissions"] = perm

    rec: dict = {}
    if c.rec.failure_modes is not None:
        rec["failure_modes"] = [
            m.mode if m.severity == Severity.TRANSIENT else {m.mode: m.severity.value} for m in c.rec.failure_modes
        ]
    if c.rec.rollback_state is not None:
        rec["rollback_state"] = c.rec.rollback_state
    if c.rec.retry_policy is not None:
        rp = c.rec.retry_policy
        rec["retry_policy"] = rp.strategy.value if rp.max_attempts == 1 else {"max": rp.max_attempts, "strategy": rp.strategy.value}
    if c.rec.safe_stop_action is not None:
        rec["safe_stop_action"] = c.rec.safe_stop_action
    if c.rec.escalation is not None:
        rec["escalation"] = [
            _strip_none(
                {
                    "after_failures": e.after_failures,
                    "condition": str(e.condition) if e.condition is not None else None,
                    "target": e.target,
                }
            )
            for e in c.rec.escalation
        ]
    doc["recovery"] = rec

    ver: dict = {}
    if c.ver.dependencies is not None:
        ver["dependency_constraints"] = {k: str(r) for k, r in c.ver.dependencies}
    if c.ver.deprecation != Deprecation():
        ver["deprecation"] = _strip_none(
            {
                "flag": c.ver.deprecation.flag,
                "end_of_support": c.ver.deprecation.end_of_support,
                "migration_ref": c.ver.deprecation.migration_ref,
            }
        )
    if c.ver.policy_change:
        ver["policy_change_marker"] = True
    if c.ver.resource_change:
        ver["resource_change_marker"] = True
    doc["versioning"] = ver

    for path, value in c.extensions:
        parts = path.split(".")
        node = doc
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value

    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False, width=100)


def _strip_none(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


def _num(x: float):
    return int(x) if x == int(x) else x


def _strip_zero(d: dict) -> dict:
    return {k: _num(v) for k, v in d.items() if v}


def load_manifest(path) -> EcmContract:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_manifest(fh.read())


def save_manifest(c: EcmContract, path, allow_partial: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_manifest(c, allow_partial=allow_partial))
