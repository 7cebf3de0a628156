"""Datasheet rendering to Markdown and standalone HTML.

Both formats are serialized from the same intermediate document (a list
of sections holding labeled fields, tables and notes), so they always
carry the same values. Every datasheet field is emitted as exactly one
labeled line; tables only elaborate on a field that already has a line.
"""

from __future__ import annotations

import csv
import html
import io
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from mlsds.datasheet import Datasheet
from mlsds.footprint import breakdown_csv, footprint_breakdown_table, footprint_report_json
from mlsds.labels import PRIMARY_LAYER, SECONDARY_LAYER, summarize_label
from mlsds.metrics import curve_csv, model_report_json
from mlsds.study import DIMENSIONS, InsufficientStrataError, bias_gap, strata_csv, study_report_json
from mlsds.wire import BYTE_MAX, QUANTIZATION_BOUND

GROUPS = (
    "Standard Datasheet Components",
    "IoT Datasheet Components",
    "AI Datasheet Components",
    "ML Sensor Datasheet Components",
)
NONE_DECLARED = "none declared"
STUDY_MISSING = "End-to-End Performance Analysis: not provided"
CURVE_PREVIEW_POINTS = 11

# Field path -> label. Labels are unique across the document.
LABELS = {
    "generated_at": "Generated at",
    "tool_version": "Tool version",
    "manifest.name": "Sensor name",
    "manifest.description_technical": "Technical description",
    "manifest.description_plain": "Plain-language description",
    "manifest.features": "Features",
    "manifest.use_cases": "Use cases",
    "manifest.dimensions_mm": "Dimensions",
    "manifest.communication.bus": "Interface bus",
    "manifest.communication.max_rate_kbps": "Maximum data rate",
    "manifest.communication.connector": "Connector",
    "manifest.communication.payload_schema": "Payload schema",
    "manifest.hardware.supply_voltage_min_v": "Minimum supply voltage",
    "manifest.hardware.supply_voltage_max_v": "Maximum supply voltage",
    "manifest.hardware.operating_current_ma": "Operating current",
    "manifest.hardware.processor": "Processor",
    "manifest.hardware.memory_kb": "Memory",
    "manifest.compliance": "Compliance claims",
    "privacy.sensors_present": "Sensors present",
    "privacy.data_stored_on_device": "Data stored on device",
    "privacy.data_transmitted_off_device": "Data transmitted off device",
    "privacy.security_mechanisms": "Security mechanisms",
    "privacy.secondary_layer_url": "Secondary layer URL",
    "privacy.model_updateability": "Model updateability",
    "privacy.update_frequency": "Update frequency",
    "nutrition.dataset_name": "Dataset",
    "nutrition.upstream_sources": "Upstream sources",
    "nutrition.source_category": "Source category",
    "nutrition.license": "License",
    "nutrition.modality": "Modality",
    "nutrition.human_labeled": "Human labeled",
    "nutrition.contains_human_data": "Contains human data",
    "nutrition.consent_obtained": "Consent obtained",
    "nutrition.actively_managed": "Actively managed",
    "model.model_meta.architecture": "Architecture",
    "model.model_meta.parameter_count": "Parameters",
    "model.model_meta.input_shape": "Input",
    "model.model_meta.output_schema": "Output",
    "model.roc.auc": "ROC AUC",
    "model.roc.points": "ROC curve",
    "model.pr.points": "Precision-recall curve",
    "model.chosen_threshold": "Decision threshold",
    "model.accuracy": "Accuracy",
    "model.precision": "Precision",
    "model.recall": "Recall",
    "model.f1": "F1 score",
    "model.confusion.threshold": "Confusion matrix threshold",
    "model.confusion.tp": "True positives",
    "model.confusion.fp": "False positives",
    "model.confusion.fn": "False negatives",
    "model.confusion.tn": "True negatives",
    "footprint.embodied_by_category": "Embodied carbon by category",
    "footprint.embodied_total": "Embodied carbon",
    "footprint.transport_kg": "Transport",
    "footprint.training_kg": "Model training",
    "footprint.operational_kg": "Operational use",
    "footprint.total_kg": "Total carbon footprint",
    "footprint.usage.average_power_w": "Average power draw",
    "footprint.usage.lifetime_hours": "Use period",
    "footprint.usage.grid_intensity_kg_per_kwh": "Grid carbon intensity",
    "study.by_lighting": "Mean confidence by lighting",
    "study.by_distance": "Mean confidence by distance",
    "study.by_gender": "Mean confidence by gender",
    "study.by_skintone": "Mean confidence by skin tone",
    "study.per_sensor": "Mean confidence per sensor",
    "study.demographics.percent_male": "Participants male",
    "study.demographics.percent_female": "Participants female",
    "study.demographics.percent_other": "Participants other or unspecified gender",
    "study.demographics.percent_light": "Participants light skin tone (MST 0-4)",
    "study.demographics.percent_medium": "Participants medium skin tone (MST 5-7)",
    "study.demographics.percent_dark": "Participants dark skin tone (MST 8-10)",
}


# -- number formatting -----------------------------------------------------

def kg(x: float) -> str:
    return f"{x:.2f} kg CO2-eq"


def pct(x: float) -> str:
    return f"{x:.1f}%"


def prob(x: float) -> str:
    return f"{x:.2f}"


def qty(x: float, unit: str) -> str:
    return f"{x:g} {unit}"


def yes_no(b: bool | None) -> str:
    if b is None:
        return "not stated"
    return "yes" if b else "no"


def listing(items: Sequence[str]) -> str:
    return "; ".join(items) if items else NONE_DECLARED


def other_text(value: str) -> str:
    return value[len("other:"):] if value.startswith("other:") else value


# -- document model --------------------------------------------------------

@dataclass
class Field:
    path: str
    value: str
    href: str | None = None

    @property
    def label(self) -> str:
        return LABELS[self.path]


@dataclass
class Table:
    caption: str
    header: Sequence[str]
    rows: Sequence[Sequence[str]]


@dataclass
class Note:
    text: str


@dataclass
class Section:
    group: str
    title: str
    blocks: list = field(default_factory=list)

    @property
    def anchor(self) -> str:
        return slugify(self.title)


def slugify(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")


def file_stem(d: Datasheet) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "-", d.manifest.name).strip("-.") or "sensor"


def _preview(points: Sequence[tuple[float, float]], limit: int = CURVE_PREVIEW_POINTS) -> list[tuple[float, float]]:
    if len(points) <= limit:
        return list(points)
    idx = sorted({round(i * (len(points) - 1) / (limit - 1)) for i in range(limit)})
    return [points[i] for i in idx]


def build_sections(d: Datasheet) -> list[Section]:
    stem = file_stem(d)
    m, hw, comm = d.manifest, d.manifest.hardware, d.manifest.communication
    std, iot, ai, mls = GROUPS

    desc = Section(std, "Description, Features, and Use Cases", [
        Field("manifest.name", m.name),
        Field("manifest.description_plain", m.description_plain),
        Field("manifest.description_technical", m.description_technical or NONE_DECLARED),
        Field("manifest.features", listing(m.features)),
        Field("manifest.use_cases", listing(m.use_cases)),
    ])

    w, h = m.dimensions_mm
    diagrams = Section(std, "Diagrams and Communication Specification", [
        Field("manifest.dimensions_mm", f"{w:g} mm x {h:g} mm"),
        Field("manifest.communication.bus", other_text(comm.bus)),
        Field("manifest.communication.max_rate_kbps", qty(comm.max_rate_kbps, "kB/s")),
        Field("manifest.communication.connector", comm.connector),
        Field("manifest.communication.payload_schema", comm.payload_schema),
        Note(
            f"Confidence is sent as one byte: raw = round(p x {BYTE_MAX}), decoded as raw / {BYTE_MAX}. "
            f"Quantization error is at most 0.5/{BYTE_MAX} ({QUANTIZATION_BOUND:.4f})."
        ),
    ])

    hardware = Section(std, "Hardware Characteristics", [
        Field("manifest.hardware.supply_voltage_min_v", qty(hw.supply_voltage_min_v, "V")),
        Field("manifest.hardware.supply_voltage_max_v", qty(hw.supply_voltage_max_v, "V")),
        Field("manifest.hardware.operating_current_ma", qty(hw.operating_current_ma, "mA")),
        Field("manifest.hardware.processor", hw.processor),
        Field("manifest.hardware.memory_kb", qty(hw.memory_kb, "KB")),
    ])

    compliance = Section(std, "Compliance and Certification", [
        Field("manifest.compliance", f"{len(m.compliance)} declared" if m.compliance else NONE_DECLARED),
    ])
    if m.compliance:
        compliance.blocks.append(Table(
            "Compliance claims",
            ("Standard", "Status", "Evidence"),
            [(c.standard_id, c.status.replace("_", " "), c.evidence_url or "none") for c in m.compliance],
        ))

    p = d.privacy
    privacy_values = {
        "sensors_present": listing([f"{other_text(s.kind)} ({s.collection.replace('_', ' ')})"
                                    for s in p.sensors_present]),
        "data_stored_on_device": yes_no(p.data_stored_on_device),
        "data_transmitted_off_device": yes_no(p.data_transmitted_off_device),
        "security_mechanisms": listing(p.security_mechanisms),
        "secondary_layer_url": p.secondary_layer_url,
        "model_updateability": p.model_updateability.replace("_", " "),
        "update_frequency": p.update_frequency or "not stated",
    }
    privacy = Section(iot, "Security and Privacy", [Note("Primary layer (packaging):")])
    for name in PRIMARY_LAYER:
        href = p.secondary_layer_url if name == "secondary_layer_url" else None
        privacy.blocks.append(Field(f"privacy.{name}", privacy_values[name], href))
    privacy.blocks.append(Note("Secondary layer (linked from the primary layer):"))
    for name in SECONDARY_LAYER:
        privacy.blocks.append(Field(f"privacy.{name}", privacy_values[name]))

    n = d.nutrition
    badges = summarize_label(n).badges()
    nutrition = Section(ai, "Dataset Nutrition Label", [
        Field("nutrition.dataset_name", n.dataset_name),
        Field("nutrition.upstream_sources", listing(n.upstream_sources)),
        Field("nutrition.source_category", n.source_category),
        Field("nutrition.license", n.license or NONE_DECLARED),
        Field("nutrition.modality", other_text(n.modality)),
        Field("nutrition.human_labeled", yes_no(n.human_labeled)),
        Field("nutrition.contains_human_data", yes_no(n.contains_human_data)),
        Field("nutrition.consent_obtained", yes_no(n.consent_obtained)),
        Field("nutrition.actively_managed", yes_no(n.actively_managed)),
        Note("Label summary: " + (", ".join(b.replace("_", " ") for b in badges) if badges else "no flags")),
    ])

    r, cm = d.model, d.model.confusion
    model = Section(ai, "Model Characteristics", [
        Field("model.model_meta.architecture", r.model_meta.architecture),
        Field("model.model_meta.parameter_count", f"{r.model_meta.parameter_count:,}"),
        Field("model.model_meta.input_shape", r.model_meta.input_shape),
        Field("model.model_meta.output_schema", r.model_meta.output_schema),
        Field("model.chosen_threshold", prob(r.chosen_threshold)),
        Field("model.accuracy", prob(r.accuracy)),
        Field("model.precision", prob(r.precision)),
        Field("model.recall", prob(r.recall)),
        Field("model.f1", prob(r.f1)),
        Field("model.roc.auc", prob(r.roc.auc)),
        Field("model.roc.points", f"{len(r.roc.points)} points, full curve in {stem}.roc.csv"),
        Table("ROC curve (preview)", ("False positive rate", "True positive rate"),
              [(prob(x), prob(y)) for x, y in _preview(r.roc.points)]),
        Field("model.pr.points", f"{len(r.pr.points)} points, full curve in {stem}.pr.csv"),
        Table("Precision-recall curve (preview)", ("Recall", "Precision"),
              [(prob(x), prob(y)) for x, y in _preview(r.pr.points)]),
        Field("model.confusion.threshold", prob(cm.threshold)),
        Field("model.confusion.tp", str(cm.tp)),
        Field("model.confusion.fp", str(cm.fp)),
        Field("model.confusion.fn", str(cm.fn)),
        Field("model.confusion.tn", str(cm.tn)),
        Note("Predictions count as positive when confidence >= threshold; false positives and "
             "false negatives are weighted equally unless stated otherwise."),
    ])

    f = d.footprint
    env = Section(mls, "Environmental Impact", [
        Field("footprint.total_kg", kg(f.total_kg)),
        Field("footprint.embodied_total", kg(f.embodied_total)),
        Field("footprint.transport_kg", kg(f.transport_kg)),
        Field("footprint.training_kg", kg(f.training_kg)),
        Field("footprint.operational_kg", kg(f.operational_kg)),
        Field("footprint.embodied_by_category",
              ", ".join(f"{cat.replace('_', ' ')} {kg(v)}" for cat, v in
                        sorted(f.embodied_by_category.items(), key=lambda kv: (-kv[1], kv[0])))
              or NONE_DECLARED),
        Table(f"Carbon footprint breakdown (also in {stem}.footprint.csv)", ("Component", "kg CO2-eq", "Share"),
              [(other_text(name).replace("_", " "), f"{v:.2f}", pct(share))
               for name, v, share in footprint_breakdown_table(f)]),
    ])
    if f.usage is not None:
        u = f.usage
        env.blocks[5:5] = [
            Field("footprint.usage.average_power_w", qty(u.average_power_w, "W")),
            Field("footprint.usage.lifetime_hours", f"{u.lifetime_hours:g} h ({u.lifetime_hours / 8760:g} years)"),
            Field("footprint.usage.grid_intensity_kg_per_kwh", qty(u.grid_intensity_kg_per_kwh, "kg CO2-eq/kWh")),
        ]

    e2e = Section(mls, "End-to-End Performance Analysis")
    if d.study is None:
        e2e.blocks.append(Note(STUDY_MISSING))
    else:
        s = d.study
        dims = (("lighting", "Lighting", s.by_lighting), ("distance", "Distance", s.by_distance),
                ("gender", "Gender", s.by_gender), ("skintone", "Skin tone", s.by_skintone))
        for dim, title, strata in dims:
            e2e.blocks.append(Field(f"study.by_{dim}", ", ".join(
                f"{k} {prob(v.mean_confidence)}" for k, v in strata.items())))
            e2e.blocks.append(Table(
                f"{title} (also in {stem}.study.{dim}.csv)",
                (title, "Mean confidence", "Sample std. dev.", "n"),
                [(k, prob(v.mean_confidence), prob(v.stddev), str(v.n)) for k, v in strata.items()],
            ))
        e2e.blocks.append(Field("study.per_sensor", ", ".join(
            f"{k} {prob(v)}" for k, v in s.per_sensor.items())))
        demo = s.demographics
        for name in ("percent_male", "percent_female", "percent_other",
                     "percent_light", "percent_medium", "percent_dark"):
            e2e.blocks.append(Field(f"study.demographics.{name}", pct(getattr(demo, name))))
        gaps = []
        for dim in DIMENSIONS:
            try:
                gaps.append(f"{dim} {prob(bias_gap(s.stratification(dim), dim))}")
            except InsufficientStrataError:
                gaps.append(f"{dim} n/a")
        e2e.blocks.append(Note("Largest gap in mean confidence between strata: " + ", ".join(gaps) + "."))

    return [desc, diagrams, hardware, compliance, privacy, nutrition, model, env, e2e]


def _header_fields(d: Datasheet) -> list[Field]:
    return [Field("generated_at", d.generated_at), Field("tool_version", d.tool_version)]


def _title(d: Datasheet) -> str:
    return f"{d.manifest.name} ML Sensor Datasheet"


# -- Markdown --------------------------------------------------------------

def _md_inline(text: str) -> str:
    return " ".join(text.split())


def _md_cell(text: str) -> str:
    return _md_inline(text).replace("|", "\\|")


def _md_blocks(blocks: Iterable) -> list[str]:
    out: list[str] = []
    for b in blocks:
        if isinstance(b, Field):
            out.append(f"- {b.label}: {_md_inline(b.value)}")
        else:
            if out and out[-1] != "":
                out.append("")
            if isinstance(b, Note):
                out.append(_md_inline(b.text))
            else:
                out.append(f"{b.caption}:")
                out.append("")
                out.append("| " + " | ".join(_md_cell(h) for h in b.header) + " |")
                out.append("|" + "|".join("---" for _ in b.header) + "|")
                out.extend("| " + " | ".join(_md_cell(c) for c in row) + " |" for row in b.rows)
            out.append("")
    if out and out[-1] == "":
        out.pop()
    return out


def render_markdown(d: Datasheet) -> str:
    lines = [f"# {_md_inline(_title(d))}", ""]
    lines += _md_blocks(_header_fields(d))
    group = None
    for section in build_sections(d):
        if section.group != group:
            group = section.group
            lines += ["", f"## {group}"]
        lines += ["", f"### {section.title}", ""]
        lines += _md_blocks(section.blocks)
    return "\n".join(lines) + "\n"


# -- HTML ------------------------------------------------------------------

_CSS = """body{font-family:sans-serif;max-width:60em;margin:2em auto;padding:0 1em;color:#222}
h2{border-bottom:2px solid #888;margin-top:2em}
table{border-collapse:collapse;margin:.5em 0 1em}
th,td{border:1px solid #bbb;padding:.2em .6em;text-align:left}
.label{font-weight:bold}"""


def _esc(text: str) -> str:
    return html.escape(" ".join(text.split()), quote=True)


def _html_blocks(blocks: Iterable) -> list[str]:
    out: list[str] = []
    in_list = False
    for b in blocks:
        if isinstance(b, Field):
            if not in_list:
                out.append("<ul>")
                in_list = True
            value = _esc(b.value)
            if b.href:
                value = f'<a href="{_esc(b.href)}">{value}</a>'
            out.append(f'<li data-field="{b.path}"><span class="label">{_esc(b.label)}:</span> {value}</li>')
            continue
        if in_list:
            out.append("</ul>")
            in_list = False
        if isinstance(b, Note):
            out.append(f"<p>{_esc(b.text)}</p>")
        else:
            out.append("<table>")
            out.append(f"<caption>{_esc(b.caption)}</caption>")
            out.append("<tr>" + "".join(f"<th>{_esc(h)}</th>" for h in b.header) + "</tr>")
            out.extend("<tr>" + "".join(f"<td>{_esc(c)}</td>" for c in row) + "</tr>" for row in b.rows)
            out.append("</table>")
    if in_list:
        out.append("</ul>")
    return out


def render_html(d: Datasheet) -> str:
    title = _esc(_title(d))
    lines = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        f"<title>{title}</title>",
        f"<style>\n{_CSS}\n</style>",
        "</head>",
        "<body>",
        f'<h1 id="{slugify(_title(d))}">{title}</h1>',
    ]
    lines += _html_blocks(_header_fields(d))
    group = None
    for section in build_sections(d):
        if section.group != group:
            if group is not None:
                lines.append("</section>")
            group = section.group
            lines.append("<section>")
            lines.append(f'<h2 id="{slugify(group)}">{_esc(group)}</h2>')
        lines.append(f'<h3 id="{section.anchor}">{_esc(section.title)}</h3>')
        lines += _html_blocks(section.blocks)
    lines += ["</section>", "</body>", "</html>"]
    return "\n".join(lines) + "\n"


# -- output files ----------------------------------------------------------

def sidecar_files(d: Datasheet) -> dict[str, str]:
    stem = file_stem(d)
    files = {
        f"{stem}.roc.csv": curve_csv(d.model.roc.points, ("fpr", "tpr")),
        f"{stem}.pr.csv": curve_csv(d.model.pr.points, ("recall", "precision")),
        f"{stem}.model.json": model_report_json(d.model),
        f"{stem}.footprint.csv": breakdown_csv(d.footprint),
        f"{stem}.footprint.json": footprint_report_json(d.footprint),
    }
    if d.study is not None:
        for dim in DIMENSIONS:
            files[f"{stem}.study.{dim}.csv"] = strata_csv(d.study.stratification(dim))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sensor_id", "mean_confidence"])
        w.writerows([k, repr(v)] for k, v in d.study.per_sensor.items())
        files[f"{stem}.study.sensors.csv"] = buf.getvalue()
        files[f"{stem}.study.json"] = study_report_json(d.study)
    return files


def output_files(d: Datasheet, fmt: str = "both") -> dict[str, str]:
    stem = file_stem(d)
    files = {}
    if fmt in ("md", "both"):
        files[f"{stem}.datasheet.md"] = render_markdown(d)
    if fmt in ("html", "both"):
        files[f"{stem}.datasheet.html"] = render_html(d)
    files.update(sidecar_files(d))
    return files
