"""Standard datasheet sections: description, hardware, communication, compliance."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from mlsds._reader import SCHEMA_VERSION, Reader, as_number, check_enum, check_version, join, load_json
from mlsds.findings import ParseError, ValidationReport, error, warning
from mlsds.wire import PAYLOAD_SCHEMAS

BUSES = ("I2C", "SPI", "UART")
COMPLIANCE_STATUSES = ("certified", "self_declared", "not_applicable")


@dataclass(frozen=True)
class HardwareSpec:
    supply_voltage_min_v: float
    supply_voltage_max_v: float
    operating_current_ma: float
    processor: str
    memory_kb: float

    def __post_init__(self):
        if not 0 < self.supply_voltage_min_v <= self.supply_voltage_max_v:
            raise ValueError(
                "supply voltage range must satisfy 0 < min <= max, got "
                f"{self.supply_voltage_min_v:g}..{self.supply_voltage_max_v:g}"
            )
        if self.operating_current_ma <= 0:
            raise ValueError("operating current must be positive")
        if self.memory_kb < 0:
            raise ValueError("memory must be nonnegative")


@dataclass(frozen=True)
class CommSpec:
    bus: str  # I2C, SPI, UART or "other:<text>"
    max_rate_kbps: float
    connector: str
    payload_schema: str

    def __post_init__(self):
        if self.max_rate_kbps <= 0:
            raise ValueError("max_rate_kbps must be positive")


@dataclass(frozen=True)
class ComplianceClaim:
    standard_id: str
    status: str
    evidence_url: str | None = None


@dataclass(frozen=True)
class SensorManifest:
    name: str
    description_technical: str
    description_plain: str
    features: tuple[str, ...]
    use_cases: tuple[str, ...]
    hardware: HardwareSpec
    communication: CommSpec
    compliance: tuple[ComplianceClaim, ...]
    dimensions_mm: tuple[float, float]

    def __post_init__(self):
        if not self.name.strip():
            raise ValueError("name must not be empty")
        if not self.description_plain.strip():
            raise ValueError("description_plain must not be empty")
        if len(self.dimensions_mm) != 2 or min(self.dimensions_mm) <= 0:
            raise ValueError("dimensions_mm must be two positive lengths")


@dataclass(frozen=True)
class ComplianceRegistry:
    standards: Mapping[str, Mapping[str, str]] = field(default_factory=dict)

    def __contains__(self, standard_id: str) -> bool:
        return standard_id in self.standards


def default_registry() -> ComplianceRegistry:
    text = resources.files("mlsds").joinpath("data/registry.json").read_text("utf-8")
    return parse_registry(text)


def load_registry(path: str | Path) -> ComplianceRegistry:
    return parse_registry(Path(path).read_bytes(), str(path))


def parse_registry(source: str | bytes, origin: str = "registry") -> ComplianceRegistry:
    r = Reader(load_json(source, origin), "")
    check_version(r)
    standards = r.raw("standards")
    if not isinstance(standards, dict):
        raise ParseError("expected an object mapping standard ids", "standards")
    r.done()
    return ComplianceRegistry({k: dict(v) if isinstance(v, dict) else {} for k, v in standards.items()})


def manifest_from_obj(obj: Any, path: str = "") -> SensorManifest:
    """Build a manifest from a decoded JSON object (no schema_version key)."""
    r = Reader(obj, path)
    m = _read_manifest(r)
    r.done()
    return m


def parse_manifest(source: str | bytes) -> SensorManifest:
    """Parse a standalone manifest document.

    Raises ParseError (with a field path and, for syntax errors, a line and
    column) on malformed JSON, missing or unknown keys, type mismatches and
    broken invariants. Never returns a partially filled manifest.
    """
    r = Reader(load_json(source), "")
    check_version(r)
    m = _read_manifest(r)
    r.done()
    return m


def _read_manifest(r: Reader) -> SensorManifest:
    hw = r.child("hardware")
    hardware = _build(
        HardwareSpec, hw.path,
        supply_voltage_min_v=hw.number("supply_voltage_min_v"),
        supply_voltage_max_v=hw.number("supply_voltage_max_v"),
        operating_current_ma=hw.number("operating_current_ma"),
        processor=hw.text("processor"),
        memory_kb=hw.number("memory_kb", minimum=0),
    )
    hw.done()

    c = r.child("communication")
    communication = _build(
        CommSpec, c.path,
        bus=check_enum(c.text("bus"), BUSES, c.at("bus"), open_ended=True),
        max_rate_kbps=c.number("max_rate_kbps", minimum=0, strict=True),
        connector=c.text("connector"),
        payload_schema=c.text("payload_schema"),
    )
    c.done()

    claims = []
    for i, item in enumerate(r.list("compliance")):
        cr = Reader(item, join(r.at("compliance"), i))
        claims.append(ComplianceClaim(
            standard_id=cr.text("standard_id", nonempty=True),
            status=check_enum(cr.text("status"), COMPLIANCE_STATUSES, cr.at("status")),
            evidence_url=cr.optional_text("evidence_url"),
        ))
        cr.done()

    dims = r.list("dimensions_mm")
    if len(dims) != 2:
        raise ParseError("expected [width, height]", r.at("dimensions_mm"))
    dims_checked = []
    for i, d in enumerate(dims):
        dims_checked.append(round(as_number(d, join(r.at("dimensions_mm"), i), 0, strict=True), 3))

    return _build(
        SensorManifest, r.path,
        name=r.text("name", nonempty=True),
        description_technical=r.text("description_technical"),
        description_plain=r.text("description_plain", nonempty=True),
        features=r.text_list("features"),
        use_cases=r.text_list("use_cases"),
        hardware=hardware,
        communication=communication,
        compliance=tuple(claims),
        dimensions_mm=(dims_checked[0], dims_checked[1]),
    )


def _build(cls, path: str, **kwargs):
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ParseError(f"invariant violated: {exc}", path or "<root>") from None


def manifest_to_obj(m: SensorManifest) -> dict[str, Any]:
    hw, c = m.hardware, m.communication
    return {
        "name": m.name,
        "description_technical": m.description_technical,
        "description_plain": m.description_plain,
        "features": list(m.features),
        "use_cases": list(m.use_cases),
        "hardware": {
            "supply_voltage_min_v": hw.supply_voltage_min_v,
            "supply_voltage_max_v": hw.supply_voltage_max_v,
            "operating_current_ma": hw.operating_current_ma,
            "processor": hw.processor,
            "memory_kb": hw.memory_kb,
        },
        "communication": {
            "bus": c.bus,
            "max_rate_kbps": c.max_rate_kbps,
            "connector": c.connector,
            "payload_schema": c.payload_schema,
        },
        "compliance": [
            {"standard_id": cl.standard_id, "status": cl.status}
            | ({"evidence_url": cl.evidence_url} if cl.evidence_url is not None else {})
            for cl in m.compliance
        ],
        "dimensions_mm": list(m.dimensions_mm),
    }


def serialize_manifest(m: SensorManifest) -> str:
    doc = {"schema_version": SCHEMA_VERSION} | manifest_to_obj(m)
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def validate_manifest(m: SensorManifest, registry: ComplianceRegistry | None = None) -> ValidationReport:
    if registry is None:
        registry = default_registry()
    findings = []
    for i, claim in enumerate(m.compliance):
        path = f"compliance[{i}]"
        if claim.standard_id not in registry:
            findings.append(error(f"{path}.standard_id", f"unknown standard {claim.standard_id!r}"))
        if claim.status == "certified" and not claim.evidence_url:
            findings.append(warning(f"{path}.evidence_url", "certified claim without evidence"))
    if m.communication.payload_schema not in PAYLOAD_SCHEMAS:
        findings.append(warning(
            "communication.payload_schema",
            f"unrecognized payload schema {m.communication.payload_schema!r}",
        ))
    return ValidationReport(findings)
