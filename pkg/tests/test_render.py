import dataclasses
import html
import os
import re

import pytest

from mlsds.datasheet import Datasheet, assemble
from mlsds.render import (
    GROUPS,
    LABELS,
    NONE_DECLARED,
    STUDY_MISSING,
    Field,
    Table,
    build_sections,
    output_files,
    render_html,
    render_markdown,
    slugify,
)

from conftest import GOLDEN

TEMPLATE = [
    ("Standard Datasheet Components", "Description, Features, and Use Cases"),
    ("Standard Datasheet Components", "Diagrams and Communication Specification"),
    ("Standard Datasheet Components", "Hardware Characteristics"),
    ("Standard Datasheet Components", "Compliance and Certification"),
    ("IoT Datasheet Components", "Security and Privacy"),
    ("AI Datasheet Components", "Dataset Nutrition Label"),
    ("AI Datasheet Components", "Model Characteristics"),
    ("ML Sensor Datasheet Components", "Environmental Impact"),
    ("ML Sensor Datasheet Components", "End-to-End Performance Analysis"),
]


@pytest.fixture(scope="module")
def sheet(fixture_bundle):
    return assemble(fixture_bundle)


def field_paths(obj, prefix=""):
    """Leaf field paths of a datasheet, descending into nested records.

    Collections (curves, strata maps, claim lists) count as one field.
    """
    out = []
    for f in dataclasses.fields(obj):
        value = getattr(obj, f.name)
        path = f"{prefix}{f.name}"
        if dataclasses.is_dataclass(value):
            out += field_paths(value, path + ".")
        elif value is not None or f.name in ("update_frequency", "consent_obtained"):
            out.append(path)
    return out


def md_fields(text):
    return dict(re.findall(r"^- ([^:\n]+): (.*)$", text, flags=re.M))


def html_fields(text):
    rows = re.findall(r'<li data-field="([^"]+)"><span class="label">([^<]+):</span> (.*)</li>', text)
    return [(path, html.unescape(label), html.unescape(re.sub(r"<[^>]+>", "", value))) for path, label, value in rows]


def test_every_field_rendered_exactly_once(sheet):
    paths = field_paths(sheet)
    assert set(paths) == set(LABELS)
    md = render_markdown(sheet)
    for path in paths:
        assert len(re.findall(rf"^- {re.escape(LABELS[path])}: ", md, flags=re.M)) == 1, path
    rendered = [path for path, _, _ in html_fields(render_html(sheet))]
    assert sorted(rendered) == sorted(paths)


def test_labels_are_unique():
    assert len(set(LABELS.values())) == len(LABELS)


def test_template_order(sheet):
    assert [(s.group, s.title) for s in build_sections(sheet)] == TEMPLATE
    md = render_markdown(sheet)
    headings = re.findall(r"^(#{1,3}) (.*)$", md, flags=re.M)
    assert headings[0] == ("#", "persondet ML Sensor Datasheet")
    assert [h for level, h in headings if level == "##"] == list(GROUPS)
    assert [h for level, h in headings if level == "###"] == [t for _, t in TEMPLATE]


def test_html_anchors_match_markdown_headings(sheet):
    md_heads = [h for _, h in re.findall(r"^(#{1,3}) (.*)$", render_markdown(sheet), flags=re.M)]
    ids = re.findall(r'<h[123] id="([^"]+)">', render_html(sheet))
    assert ids == [slugify(h) for h in md_heads]


def test_markdown_and_html_carry_same_values(sheet):
    md = md_fields(render_markdown(sheet))
    from_html = {label: value for _, label, value in html_fields(render_html(sheet))}
    assert from_html == md
    md_cells = set(re.findall(r"\| ([^|\n]+?) (?=\|)", render_markdown(sheet)))
    html_cells = {html.unescape(c) for c in re.findall(r"<t[dh]>([^<]*)</t[dh]>", render_html(sheet))}
    assert md_cells - {"---"} == html_cells


def test_fixture_headline_lines(sheet):
    md = render_markdown(sheet)
    assert "- Total carbon footprint: 2.34 kg CO2-eq" in md.splitlines()
    fields = md_fields(md)
    assert fields["Participants male"] == "63.2%"
    assert fields["Participants female"] == "36.8%"
    assert fields["Participants light skin tone (MST 0-4)"] == "47.4%"
    assert fields["Participants medium skin tone (MST 5-7)"] == "39.5%"
    assert fields["Participants dark skin tone (MST 8-10)"] == "13.2%"
    assert fields["Decision threshold"] == "0.52"


def test_secondary_url_is_hyperlink(sheet):
    assert '<a href="https://example.org/persondet/privacy-label">' in render_html(sheet)


def test_render_is_deterministic(sheet, fixture_bundle):
    again = assemble(fixture_bundle)
    assert render_markdown(sheet) == render_markdown(again)
    assert render_html(sheet) == render_html(again)


def test_no_study_placeholder(sheet):
    d = dataclasses.replace(sheet, study=None)
    md = render_markdown(d)
    assert STUDY_MISSING in md.splitlines()
    assert "### End-to-End Performance Analysis" in md
    assert STUDY_MISSING in render_html(d)
    assert not any(name.startswith("persondet.study") for name in output_files(d))


def test_empty_features_none_declared(sheet):
    d = dataclasses.replace(sheet, manifest=dataclasses.replace(sheet.manifest, features=()))
    assert f"- Features: {NONE_DECLARED}" in render_markdown(d)
    assert f"Features:</span> {NONE_DECLARED}</li>" in render_html(d)


def test_markup_in_values_is_escaped(sheet):
    hw = dataclasses.replace(sheet.manifest.hardware, processor="<b>x</b> | y")
    d = dataclasses.replace(sheet, manifest=dataclasses.replace(sheet.manifest, hardware=hw))
    assert "- Processor: <b>x</b> | y" in render_markdown(d)
    assert "&lt;b&gt;x&lt;/b&gt;" in render_html(d)
    assert "<b>x</b>" not in render_html(d)


def test_output_file_names(sheet):
    names = sorted(output_files(sheet))
    assert names == sorted([
        "persondet.datasheet.md", "persondet.datasheet.html",
        "persondet.roc.csv", "persondet.pr.csv", "persondet.model.json",
        "persondet.footprint.csv", "persondet.footprint.json",
        "persondet.study.gender.csv", "persondet.study.skintone.csv",
        "persondet.study.lighting.csv", "persondet.study.distance.csv",
        "persondet.study.sensors.csv", "persondet.study.json",
    ])
    assert sorted(output_files(sheet, "md")) == [n for n in names if not n.endswith(".html")]
    assert all(text.endswith("\n") and "\r" not in text for text in output_files(sheet).values())


def test_fields_reference_known_labels(sheet):
    for section in build_sections(sheet):
        for block in section.blocks:
            if isinstance(block, Field):
                assert block.path in LABELS
            if isinstance(block, Table):
                assert all(len(row) == len(block.header) for row in block.rows)


@pytest.mark.parametrize("name", ["persondet.datasheet.md", "persondet.datasheet.html"])
def test_golden(sheet, name):
    produced = output_files(sheet)[name]
    golden = GOLDEN / name
    if os.environ.get("MLSDS_UPDATE_GOLDEN"):
        golden.parent.mkdir(exist_ok=True)
        golden.write_bytes(produced.encode("utf-8"))
    assert golden.read_bytes() == produced.encode("utf-8")


def test_datasheet_type_matches_render_inputs():
    assert [f.name for f in dataclasses.fields(Datasheet)] == [
        "manifest", "privacy", "nutrition", "model", "footprint", "study", "generated_at", "tool_version"]
