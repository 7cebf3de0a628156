import json

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from mlsds.findings import ParseError
from mlsds.manifest import (
    ComplianceRegistry,
    default_registry,
    parse_manifest,
    parse_registry,
    serialize_manifest,
    validate_manifest,
)


def doc(**overrides):
    base = {
        "schema_version": "1",
        "name": "persondet",
        "description_technical": "camera + classifier",
        "description_plain": "Detects people.",
        "features": ["on-device"],
        "use_cases": ["lighting"],
        "hardware": {
            "supply_voltage_min_v": 3.5,
            "supply_voltage_max_v": 5.5,
            "operating_current_ma": 40,
            "processor": "MCU",
            "memory_kb": 512,
        },
        "communication": {
            "bus": "I2C",
            "max_rate_kbps": 100,
            "connector": "Qwiic",
            "payload_schema": "mlsds-confidence-byte/1",
        },
        "compliance": [],
        "dimensions_mm": [27.2, 27.7],
    }
    base.update(overrides)
    return base


def text(d):
    return json.dumps(d)


def test_parse_minimal_document():
    m = parse_manifest(text(doc()))
    assert m.name == "persondet"
    assert m.dimensions_mm == (27.2, 27.7)
    assert (m.hardware.supply_voltage_min_v, m.hardware.supply_voltage_max_v) == (3.5, 5.5)
    assert m.hardware.operating_current_ma == 40
    assert m.communication.bus == "I2C"
    assert m.communication.max_rate_kbps == 100


def test_missing_field_is_named():
    d = doc()
    del d["description_plain"]
    with pytest.raises(ParseError) as exc:
        parse_manifest(text(d))
    assert exc.value.path == "description_plain"
    assert "missing" in exc.value.message


def test_nested_missing_field_path():
    d = doc()
    del d["hardware"]["processor"]
    with pytest.raises(ParseError) as exc:
        parse_manifest(text(d))
    assert exc.value.path == "hardware.processor"


def test_voltage_order_violation():
    d = doc()
    d["hardware"]["supply_voltage_min_v"] = 5.5
    d["hardware"]["supply_voltage_max_v"] = 3.5
    with pytest.raises(ParseError) as exc:
        parse_manifest(text(d))
    assert exc.value.path == "hardware"
    assert "invariant" in exc.value.message


@pytest.mark.parametrize("key, value, path", [
    ("name", 7, "name"),
    ("features", "one", "features"),
    ("dimensions_mm", [27.2], "dimensions_mm"),
    ("dimensions_mm", [0, 27.7], "dimensions_mm[0]"),
    ("name", "  ", "name"),
])
def test_type_and_value_errors(key, value, path):
    with pytest.raises(ParseError) as exc:
        parse_manifest(text(doc(**{key: value})))
    assert exc.value.path == path


def test_unknown_key_rejected():
    with pytest.raises(ParseError) as exc:
        parse_manifest(text(doc(colour="red")))
    assert exc.value.path == "colour"


def test_unknown_nested_key_rejected():
    d = doc()
    d["communication"]["baud"] = 9600
    with pytest.raises(ParseError) as exc:
        parse_manifest(text(d))
    assert exc.value.path == "communication.baud"


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as exc:
        parse_manifest('{\n  "name": "x",\n  oops\n}')
    assert exc.value.line == 3
    assert exc.value.column == 3


def test_schema_version_required():
    d = doc()
    d["schema_version"] = "2"
    with pytest.raises(ParseError) as exc:
        parse_manifest(text(d))
    assert exc.value.path == "schema_version"


def test_duplicate_keys_rejected():
    with pytest.raises(ParseError, match="duplicate"):
        parse_manifest('{"schema_version": "1", "name": "a", "name": "b"}')


def test_other_bus_accepted():
    d = doc()
    d["communication"]["bus"] = "other:CAN"
    assert parse_manifest(text(d)).communication.bus == "other:CAN"
    d["communication"]["bus"] = "CAN"
    with pytest.raises(ParseError):
        parse_manifest(text(d))


def test_dimensions_stored_to_three_decimals():
    m = parse_manifest(text(doc(dimensions_mm=[27.21234, 27.7])))
    assert m.dimensions_mm == (27.212, 27.7)


def test_round_trip_idempotent():
    d = doc(compliance=[{"standard_id": "FCC", "status": "certified", "evidence_url": "https://x"}])
    once = parse_manifest(text(d))
    twice = parse_manifest(serialize_manifest(once))
    assert once == twice
    assert serialize_manifest(twice) == serialize_manifest(once)


@given(st.binary(max_size=200))
def test_parsing_is_total(blob):
    try:
        parse_manifest(blob)
    except ParseError:
        pass


@settings(suppress_health_check=[HealthCheck.too_slow], deadline=None)
@given(st.dictionaries(st.sampled_from(list(doc())), st.none() | st.integers() | st.text(max_size=5), max_size=4))
def test_corrupted_fields_give_structured_errors(patch):
    try:
        parse_manifest(text(doc(**patch)))
    except ParseError as exc:
        assert exc.path


# -- validation ------------------------------------------------------------

def test_default_registry_contents():
    reg = default_registry()
    for sid in ("GDPR", "HIPAA", "FCC", "ISO-26262", "IEC-61508", "FDA"):
        assert sid in reg


def test_certified_without_evidence_warns():
    m = parse_manifest(text(doc(compliance=[{"standard_id": "ISO-26262", "status": "certified"}])))
    report = validate_manifest(m)
    assert report.valid
    assert [(f.severity, f.path, f.message) for f in report] == [
        ("warning", "compliance[0].evidence_url", "certified claim without evidence")
    ]


def test_unknown_standard_is_error():
    m = parse_manifest(text(doc(compliance=[{"standard_id": "ISO-99999", "status": "self_declared"}])))
    report = validate_manifest(m)
    assert not report.valid
    assert report.errors[0].path == "compliance[0].standard_id"
    assert "unknown standard" in report.errors[0].message


def test_clean_manifest_has_no_findings():
    m = parse_manifest(text(doc(compliance=[
        {"standard_id": "GDPR", "status": "self_declared"},
        {"standard_id": "FCC", "status": "certified", "evidence_url": "https://example.org/fcc"},
    ])))
    assert len(validate_manifest(m)) == 0


def test_registry_override():
    reg = parse_registry('{"schema_version": "1", "standards": {"ISO-99999": {}}}')
    m = parse_manifest(text(doc(compliance=[{"standard_id": "ISO-99999", "status": "self_declared"}])))
    assert validate_manifest(m, reg).valid
    assert not validate_manifest(m, ComplianceRegistry()).valid


def test_unrecognized_payload_schema_warns():
    d = doc()
    d["communication"]["payload_schema"] = "custom/9"
    report = validate_manifest(parse_manifest(text(d)))
    assert report.valid and report.warnings[0].path == "communication.payload_schema"


def test_validation_is_pure():
    m = parse_manifest(text(doc(compliance=[{"standard_id": "X", "status": "certified"}])))
    assert validate_manifest(m) == validate_manifest(m)


def test_report_json_shape():
    m = parse_manifest(text(doc(compliance=[{"standard_id": "X", "status": "certified"}])))
    rows = json.loads(validate_manifest(m).to_json())
    assert all(set(r) == {"severity", "path", "message"} for r in rows)
