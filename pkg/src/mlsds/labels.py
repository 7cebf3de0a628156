"""IoT security & privacy label and dataset nutrition label."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from mlsds._reader import Reader, check_enum, check_version, join, load_json
from mlsds.findings import ValidationReport, error, warning

SENSOR_KINDS = ("camera", "microphone", "imu")
COLLECTION_MODES = ("continuous", "on_trigger", "never")
UPDATEABILITY = ("none", "ota_automatic", "ota_user_approved")
SOURCE_CATEGORIES = ("governmental", "commercial", "academic", "mixed")
MODALITIES = ("image", "audio", "timeseries", "text")

# Which privacy-label fields go on the packaging (primary layer) and which
# behind the QR target (secondary layer).
PRIMARY_LAYER = (
    "sensors_present",
    "data_stored_on_device",
    "data_transmitted_off_device",
    "security_mechanisms",
    "secondary_layer_url",
)
SECONDARY_LAYER = ("model_updateability", "update_frequency")


@dataclass(frozen=True)
class SensorPresence:
    kind: str
    collection: str


@dataclass(frozen=True)
class PrivacyLabel:
    sensors_present: tuple[SensorPresence, ...]
    data_stored_on_device: bool
    data_transmitted_off_device: bool
    security_mechanisms: tuple[str, ...]
    model_updateability: str
    secondary_layer_url: str
    update_frequency: str | None = None


@dataclass(frozen=True)
class NutritionLabel:
    dataset_name: str
    upstream_sources: tuple[str, ...]
    source_category: str
    license: str
    modality: str
    human_labeled: bool
    contains_human_data: bool
    actively_managed: bool
    consent_obtained: bool | None = None  # None: not stated


@dataclass(frozen=True)
class LabelSummary:
    from_upstream_source: bool
    human_data: bool
    no_consent: bool
    unmanaged: bool
    human_labeled: bool

    def badges(self) -> list[str]:
        return [name for name, on in vars(self).items() if on]


def privacy_label_from_obj(obj: Any, path: str = "") -> PrivacyLabel:
    r = Reader(obj, path)
    sensors = []
    for i, item in enumerate(r.list("sensors_present")):
        sr = Reader(item, join(r.at("sensors_present"), i))
        sensors.append(SensorPresence(
            kind=check_enum(sr.text("kind"), SENSOR_KINDS, sr.at("kind"), open_ended=True),
            collection=check_enum(sr.text("collection"), COLLECTION_MODES, sr.at("collection")),
        ))
        sr.done()
    label = PrivacyLabel(
        sensors_present=tuple(sensors),
        data_stored_on_device=r.boolean("data_stored_on_device"),
        data_transmitted_off_device=r.boolean("data_transmitted_off_device"),
        security_mechanisms=r.text_list("security_mechanisms"),
        model_updateability=check_enum(r.text("model_updateability"), UPDATEABILITY, r.at("model_updateability")),
        update_frequency=r.optional_text("update_frequency"),
        secondary_layer_url=r.text("secondary_layer_url"),
    )
    r.done()
    return label


def nutrition_label_from_obj(obj: Any, path: str = "") -> NutritionLabel:
    r = Reader(obj, path)
    label = NutritionLabel(
        dataset_name=r.text("dataset_name", nonempty=True),
        upstream_sources=r.text_list("upstream_sources"),
        source_category=check_enum(r.text("source_category"), SOURCE_CATEGORIES, r.at("source_category")),
        license=r.text("license"),
        modality=check_enum(r.text("modality"), MODALITIES, r.at("modality"), open_ended=True),
        human_labeled=r.boolean("human_labeled"),
        contains_human_data=r.boolean("contains_human_data"),
        consent_obtained=r.optional_boolean("consent_obtained"),
        actively_managed=r.boolean("actively_managed"),
    )
    r.done()
    return label


def parse_privacy_label(source: str | bytes) -> PrivacyLabel:
    r = Reader(load_json(source), "")
    check_version(r)
    return privacy_label_from_obj({k: v for k, v in r.obj.items() if k != "schema_version"})


def parse_nutrition_label(source: str | bytes) -> NutritionLabel:
    r = Reader(load_json(source), "")
    check_version(r)
    return nutrition_label_from_obj({k: v for k, v in r.obj.items() if k != "schema_version"})


def privacy_label_to_obj(p: PrivacyLabel) -> dict[str, Any]:
    obj = {
        "sensors_present": [{"kind": s.kind, "collection": s.collection} for s in p.sensors_present],
        "data_stored_on_device": p.data_stored_on_device,
        "data_transmitted_off_device": p.data_transmitted_off_device,
        "security_mechanisms": list(p.security_mechanisms),
        "model_updateability": p.model_updateability,
        "secondary_layer_url": p.secondary_layer_url,
    }
    if p.update_frequency is not None:
        obj["update_frequency"] = p.update_frequency
    return obj


def nutrition_label_to_obj(n: NutritionLabel) -> dict[str, Any]:
    obj = {
        "dataset_name": n.dataset_name,
        "upstream_sources": list(n.upstream_sources),
        "source_category": n.source_category,
        "license": n.license,
        "modality": n.modality,
        "human_labeled": n.human_labeled,
        "contains_human_data": n.contains_human_data,
        "actively_managed": n.actively_managed,
    }
    if n.consent_obtained is not None:
        obj["consent_obtained"] = n.consent_obtained
    return obj


def validate_privacy_label(p: PrivacyLabel) -> ValidationReport:
    findings = []
    if not p.secondary_layer_url.strip():
        findings.append(error("secondary_layer_url", "primary layer must link to the secondary layer"))
    if p.data_transmitted_off_device and not p.security_mechanisms:
        findings.append(warning(
            "security_mechanisms", "off-device transmission without declared security mechanisms"
        ))
    if p.model_updateability == "none" and p.update_frequency:
        findings.append(warning("update_frequency", "update frequency given for a non-updateable model"))
    return ValidationReport(findings)


def validate_nutrition_label(n: NutritionLabel) -> ValidationReport:
    findings = []
    if not n.contains_human_data and n.consent_obtained is not None:
        findings.append(error("consent_obtained", "consent flag set on a dataset without human data"))
    if n.contains_human_data and n.consent_obtained is False:
        findings.append(warning("consent_obtained", "contains human data obtained without consent"))
    if not n.actively_managed:
        findings.append(warning("actively_managed", "dataset is not actively managed or updated"))
    if not n.license.strip():
        findings.append(warning("license", "no license declared"))
    return ValidationReport(findings)


def summarize_label(n: NutritionLabel) -> LabelSummary:
    return LabelSummary(
        from_upstream_source=bool(n.upstream_sources),
        human_data=n.contains_human_data,
        no_consent=n.contains_human_data and n.consent_obtained is False,
        unmanaged=not n.actively_managed,
        human_labeled=n.human_labeled,
    )
