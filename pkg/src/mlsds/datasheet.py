"""Bundle loading and datasheet assembly.

A bundle is a directory holding ``bundle.json`` plus the CSV files it
references::

    {
      "schema_version": "1",
      "generated_at": "2024-01-01T00:00:00Z",        (optional)
      "manifest": {...} | "manifest.json",
      "privacy_label": {...} | "privacy.json",
      "nutrition_label": {...} | "nutrition.json",
      "model": {"eval": "eval.csv", "meta": {...}, "fp_cost": 1.0},
      "footprint": {"bom": "bom.csv", "transport_kg": 0.1, "training_kg": 0.1,
                    "usage": {...}},
      "study": {"participants": "participants.csv", "readings": "readings.csv",
                "distances_m": [1, 3, 5]}              (optional)
    }

A string in place of a section object names a standalone JSON document
(with its own ``schema_version``) inside the bundle directory.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path, PurePosixPath
from typing import Any, Callable, Mapping

from mlsds import __version__
from mlsds._reader import Reader, check_version, load_json
from mlsds.findings import (
    DatasheetError,
    MissingSectionError,
    ParseError,
    ValidationFailed,
    ValidationReport,
)
from mlsds.footprint import FootprintReport, compute_footprint, footprint_inputs_from_obj, read_bom_csv
from mlsds.labels import (
    NutritionLabel,
    PrivacyLabel,
    nutrition_label_from_obj,
    privacy_label_from_obj,
    validate_nutrition_label,
    validate_privacy_label,
)
from mlsds.manifest import ComplianceRegistry, SensorManifest, manifest_from_obj, validate_manifest
from mlsds.metrics import ModelReport, build_model_report, model_meta_from_obj, read_eval_csv
from mlsds.study import (
    StudyReport,
    build_study_report,
    check_study,
    read_participants_csv,
    read_readings_csv,
    study_config_distances,
)

BUNDLE_FILE = "bundle.json"
REQUIRED_SECTIONS = ("manifest", "privacy_label", "nutrition_label", "model", "footprint")
OPTIONAL_SECTIONS = ("study",)
EPOCH = "1970-01-01T00:00:00Z"


@dataclass(frozen=True)
class Datasheet:
    manifest: SensorManifest
    privacy: PrivacyLabel
    nutrition: NutritionLabel
    model: ModelReport
    footprint: FootprintReport
    study: StudyReport | None
    generated_at: str
    tool_version: str


@dataclass(frozen=True)
class Bundle:
    """Decoded ``bundle.json`` plus the raw bytes of every referenced file."""

    doc: Mapping[str, Any]
    files: Mapping[str, bytes] = field(default_factory=dict)
    root: str = "."

    def text(self, name: str, path: str) -> str:
        if name not in self.files:
            raise ParseError(f"file {name!r} not found in bundle", path)
        try:
            return self.files[name].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"{name}: not valid UTF-8 at byte {exc.start}", path) from None


def _file_refs(doc: Mapping[str, Any]) -> list[str]:
    refs = []
    for key in ("manifest", "privacy_label", "nutrition_label"):
        if isinstance(doc.get(key), str):
            refs.append(doc[key])
    for key, names in (("model", ("eval",)), ("footprint", ("bom",)), ("study", ("participants", "readings"))):
        section = doc.get(key)
        if isinstance(section, dict):
            refs.extend(section[n] for n in names if isinstance(section.get(n), str))
    return refs


def _safe_name(name: str) -> bool:
    p = PurePosixPath(name)
    return bool(name) and not p.is_absolute() and ".." not in p.parts and "\\" not in name


def load_bundle(directory: str | Path) -> Bundle:
    root = Path(directory)
    source = root / BUNDLE_FILE
    if not source.is_file():
        raise ParseError("bundle.json not found", str(source))
    doc = load_json(source.read_bytes(), BUNDLE_FILE)
    if not isinstance(doc, dict):
        raise ParseError("expected an object", BUNDLE_FILE)
    files = {}
    for name in _file_refs(doc):
        if not _safe_name(name):
            raise ParseError(f"file reference {name!r} must stay inside the bundle", BUNDLE_FILE)
        target = root / name
        if target.is_file():
            files[name] = target.read_bytes()
    return Bundle(doc, files, str(root))


def _generated_at(doc_value: Any) -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        try:
            return datetime.fromtimestamp(int(epoch), timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        except ValueError:
            raise ParseError(f"SOURCE_DATE_EPOCH is not an integer: {epoch!r}", "SOURCE_DATE_EPOCH") from None
    if doc_value is None:
        return EPOCH
    if not isinstance(doc_value, str):
        raise ParseError("expected an ISO-8601 timestamp", "generated_at")
    return doc_value


class _Collector:
    """Runs section builders, turning raised errors into findings."""

    def __init__(self):
        self.report = ValidationReport()

    def run(self, fn: Callable[[], Any], prefix: str = "") -> Any:
        try:
            return fn()
        except DatasheetError as exc:
            found = ValidationReport(exc.findings())
            self.report += found.prefixed(prefix) if prefix else found
            return None

    def add(self, report: ValidationReport, prefix: str) -> None:
        self.report += report.prefixed(prefix)


def _section_obj(bundle: Bundle, key: str) -> Any:
    value = bundle.doc[key]
    if isinstance(value, str):
        r = Reader(load_json(bundle.text(value, key), key), key)
        check_version(r)
        return {k: v for k, v in r.obj.items() if k != "schema_version"}
    return value


def compile_bundle(
    bundle: Bundle,
    registry: ComplianceRegistry | None = None,
    strict: bool = False,
) -> tuple[Datasheet | None, ValidationReport]:
    """Parse and validate every section.

    Returns the datasheet (None when any error finding exists) together
    with every finding. Raises MissingSectionError for absent required
    sections.
    """
    doc = bundle.doc
    for key in REQUIRED_SECTIONS:
        if key not in doc:
            raise MissingSectionError(key)
    c = _Collector()
    top = c.run(lambda: _check_top(doc))

    manifest = c.run(lambda: manifest_from_obj(_section_obj(bundle, "manifest"), "manifest"))
    if manifest is not None:
        c.add(validate_manifest(manifest, registry), "manifest")

    privacy = c.run(lambda: privacy_label_from_obj(_section_obj(bundle, "privacy_label"), "privacy_label"))
    if privacy is not None:
        c.add(validate_privacy_label(privacy), "privacy_label")

    nutrition = c.run(lambda: nutrition_label_from_obj(_section_obj(bundle, "nutrition_label"), "nutrition_label"))
    if nutrition is not None:
        c.add(validate_nutrition_label(nutrition), "nutrition_label")

    model = c.run(lambda: _model(bundle))
    footprint = c.run(lambda: _footprint(bundle))
    study = None
    if doc.get("study") is not None:
        study = c.run(lambda: _study(bundle, c))

    report = c.report.strict() if strict else c.report
    if not report.valid or top is None:
        return None, report
    sheet = Datasheet(
        manifest=manifest,
        privacy=privacy,
        nutrition=nutrition,
        model=model,
        footprint=footprint,
        study=study,
        generated_at=top,
        tool_version=__version__,
    )
    return sheet, report


def _check_top(doc: Mapping[str, Any]) -> str:
    r = Reader(doc, "")
    check_version(r)
    for key in REQUIRED_SECTIONS + OPTIONAL_SECTIONS:
        r.raw(key, optional=True)
    stamp = _generated_at(r.raw("generated_at", optional=True))
    r.done()
    return stamp


def _model(bundle: Bundle) -> ModelReport:
    r = Reader(bundle.doc["model"], "model")
    name = r.text("eval", nonempty=True)
    meta = model_meta_from_obj(r.raw("meta"), "model.meta")
    fp_cost = r.number("fp_cost", minimum=0) if r.has("fp_cost") else 1.0
    r.done()
    records = read_eval_csv(bundle.text(name, "model.eval"), "model.eval")
    try:
        return build_model_report(records, meta, fp_cost)
    except DatasheetError as exc:
        raise type(exc)(exc.message, f"model.eval.{exc.path}") from None


def _footprint(bundle: Bundle) -> FootprintReport:
    obj = bundle.doc["footprint"]
    if not isinstance(obj, dict):
        raise ParseError("expected an object", "footprint")
    obj = dict(obj)
    name = obj.pop("bom", None)
    if not isinstance(name, str) or not name:
        raise ParseError("missing required field", "footprint.bom")
    inputs = footprint_inputs_from_obj(obj, "footprint")
    bom = read_bom_csv(bundle.text(name, "footprint.bom"), "footprint.bom")
    return compute_footprint(bom, inputs.transport_kg, inputs.training_kg, inputs.usage)


def _study(bundle: Bundle, c: _Collector) -> StudyReport | None:
    r = Reader(bundle.doc["study"], "study")
    participants_name = r.text("participants", nonempty=True)
    readings_name = r.text("readings", nonempty=True)
    distances = study_config_distances(r.raw("distances_m", optional=True))
    r.done()
    participants = read_participants_csv(bundle.text(participants_name, "study.participants"), "study.participants")
    readings = read_readings_csv(bundle.text(readings_name, "study.readings"), "study.readings")
    checked = check_study(participants, readings, distances)
    c.add(checked, "study")
    if not checked.valid:
        return None
    return build_study_report(participants, readings, distances)


def assemble(bundle: Bundle, registry: ComplianceRegistry | None = None, strict: bool = False) -> Datasheet:
    """Validate every section and return the aggregate.

    Raises MissingSectionError when a required section is absent and
    ValidationFailed (carrying every finding) when any error exists.
    """
    sheet, report = compile_bundle(bundle, registry, strict)
    if sheet is None:
        raise ValidationFailed(report)
    return sheet
