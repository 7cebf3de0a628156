import math

import pytest
from hypothesis import given, strategies as st

from mlsds.findings import DatasheetError, InsufficientStrataError, ParseError, RangeError
from mlsds.study import (
    DIMENSIONS,
    Participant,
    Reading,
    StratumStats,
    average_readings,
    bias_gap,
    bias_gaps,
    build_study_report,
    check_study,
    demographics,
    grand_mean,
    lighting_level,
    mst_bucket,
    read_participants_csv,
    read_readings_csv,
    strata_csv,
)

from oracles import analytic_strata, synthetic_study

PEOPLE = [("A", "male", 2), ("B", "female", 6), ("C", "male", 9), ("D", "female", 0)]


def participants(rows=PEOPLE):
    return [Participant(*row) for row in rows]


def stats(mean):
    return StratumStats(mean, 0.0, 1, 1)


@pytest.mark.parametrize("mst, bucket", [(0, "light"), (4, "light"), (5, "medium"), (7, "medium"),
                                         (8, "dark"), (10, "dark")])
def test_mst_examples(mst, bucket):
    assert mst_bucket(mst) == bucket


@pytest.mark.parametrize("bad", [-1, 11, 2.5, True, "3"])
def test_mst_out_of_range(bad):
    with pytest.raises(RangeError):
        mst_bucket(bad)


@pytest.mark.parametrize("lux, level", [(0, "off"), (210, "low"), (104, "off"), (104.01, "low"),
                                        (396, "low"), (866.5, "medium"), (866.6, "high"), (5000, "high")])
def test_lighting_levels(lux, level):
    assert lighting_level(lux) == level


def test_lighting_negative():
    with pytest.raises(RangeError):
        lighting_level(-1)


def test_average_readings_examples():
    assert average_readings({"g": [0.8] * 10}) == {"g": pytest.approx(0.8, abs=1e-15)}
    assert average_readings({"g": [0.2, 0.4, 0.6]})["g"] == pytest.approx(0.4, abs=1e-15)
    assert average_readings({"g": [0.37]}) == {"g": 0.37}
    with pytest.raises(DatasheetError):
        average_readings({"g": []})


def test_constant_readings():
    ps = participants()
    rs = [Reading(p.id, s, lux, d, 1.0) for p in ps for s in ("S1", "S2")
          for lux in (0, 208, 584, 1149) for d in (1, 3, 5)]
    report = build_study_report(ps, rs)
    for dim in DIMENSIONS:
        for s in report.stratification(dim).values():
            assert s.mean_confidence == 1.0 and s.stddev == 0.0


def test_per_sensor_partition():
    ps = participants()
    rs = [Reading(p.id, s, 584, 3, c) for p in ps for s, c in (("S1", 0.4), ("S2", 0.6))]
    assert build_study_report(ps, rs).per_sensor == {"S1": 0.4, "S2": 0.6}


def test_stratum_counts():
    ps = participants()
    rs = [Reading(p.id, "S1", 584, d, 0.5) for p in ps for d in (1, 3, 5) for _ in range(2)]
    report = build_study_report(ps, rs)
    assert sum(s.n for s in report.by_distance.values()) == len(rs)
    assert sum(s.n for s in report.by_lighting.values()) == len(rs)
    assert sum(s.n for s in report.by_gender.values()) == len(ps)
    assert sum(s.n for s in report.by_skintone.values()) == len(ps)
    assert list(report.by_distance) == ["1 m", "3 m", "5 m"]
    assert report.by_distance["1 m"] == StratumStats(0.5, 0.0, 8, 4)


def test_prolific_participant_does_not_dominate():
    ps = participants([("A", "male", 2), ("B", "male", 3)])
    rs = [Reading("A", "S1", 584, 3, 1.0)] * 99 + [Reading("B", "S1", 584, 3, 0.0)]
    s = build_study_report(ps, rs).by_lighting["medium"]
    assert s.mean_confidence == 0.5
    assert (s.n, s.groups) == (100, 2)


def test_sample_stddev_of_means():
    ps = participants([("A", "male", 2), ("B", "male", 3), ("C", "male", 4)])
    rs = [Reading(pid, "S1", 0, 1, c) for pid, c in (("A", 0.2), ("B", 0.4), ("C", 0.6))]
    s = build_study_report(ps, rs).by_gender["male"]
    assert s.mean_confidence == pytest.approx(0.4)
    assert s.stddev == pytest.approx(0.2)


def test_analytic_stratum_means():
    text, cells = synthetic_study(PEOPLE)
    report = build_study_report(participants(), read_readings_csv(text))
    expected = analytic_strata(PEOPLE, cells)
    for dim in DIMENSIONS:
        got = report.stratification(dim)
        assert set(got) == set(expected[dim])
        for k, v in expected[dim].items():
            assert abs(got[k].mean_confidence - float(v)) <= 1e-12, (dim, k)


def test_grand_mean_reconstruction():
    text, cells = synthetic_study(PEOPLE)
    report = build_study_report(participants(), read_readings_csv(text))
    overall = float(sum(cells.values()) / len(cells))
    for dim in DIMENSIONS:
        assert abs(grand_mean(report.stratification(dim)) - overall) <= 1e-12


@given(st.randoms(use_true_random=False))
def test_permutation_invariance(rnd):
    text, _ = synthetic_study(PEOPLE, repeats=2)
    rs = read_readings_csv(text)
    ps = participants()
    base = build_study_report(ps, rs)
    rnd.shuffle(rs)
    rnd.shuffle(ps)
    again = build_study_report(ps, rs)
    for dim in DIMENSIONS:
        for k, s in base.stratification(dim).items():
            t = again.stratification(dim)[k]
            assert math.isclose(s.mean_confidence, t.mean_confidence, abs_tol=1e-15)
            assert (s.n, s.groups) == (t.n, t.groups)


def test_demographics_percentages():
    d = demographics(participants([("A", "male", 1), ("B", "female", 6), ("C", "other", 9)]))
    assert round(d.percent_male + d.percent_female + d.percent_other, 1) == 100.0
    assert d.percent_dark == pytest.approx(100 / 3)


def test_fixture_demographics(fixture_bundle):
    ps = read_participants_csv(fixture_bundle.files["participants.csv"].decode())
    d = demographics(ps)
    assert len(ps) == 38
    got = [round(x, 1) for x in (d.percent_male, d.percent_female, d.percent_light, d.percent_medium, d.percent_dark)]
    assert got == [63.2, 36.8, 47.4, 39.5, 13.2]


def test_bias_gap_examples():
    assert bias_gap({"light": stats(0.9), "medium": stats(0.8), "dark": stats(0.7)}) == pytest.approx(0.2)
    assert bias_gap({"a": stats(0.5), "b": stats(0.5)}) == 0.0
    with pytest.raises(InsufficientStrataError):
        bias_gap({"a": stats(0.5)}, "skintone")


def test_bias_gaps_covers_all_dimensions():
    text, _ = synthetic_study(PEOPLE)
    gaps = bias_gaps(build_study_report(participants(), read_readings_csv(text)))
    assert set(gaps) == set(DIMENSIONS)
    assert gaps["lighting"] > gaps["gender"]


def test_check_study():
    ps = participants()
    rs = [Reading("A", "S1", 584, 3, 0.5), Reading("Z", "S1", 584, 3, 0.5), Reading("B", "S1", 584, 2, 0.5)]
    report = check_study(ps, rs)
    assert [(f.severity, f.path) for f in report.errors] == [("error", "readings[Z].participant_id")]
    paths = [f.path for f in report.warnings]
    assert "readings.distance_m" in paths
    assert "participants[C]" in paths and "participants[D]" in paths


def test_off_grid_distance_gets_literal_stratum():
    ps = participants([("A", "male", 1)])
    report = build_study_report(ps, [Reading("A", "S1", 0, 2, 0.5)])
    assert list(report.by_distance) == ["2 m"]


def test_unknown_participant_in_report():
    with pytest.raises(DatasheetError):
        build_study_report(participants(), [Reading("Z", "S1", 0, 1, 0.5)])


# -- CSV ---------------------------------------------------------------------

def test_participants_csv():
    ps = read_participants_csv("id,gender,mst\nP1,Male,3\nP2,unspecified,8\n")
    assert ps == [Participant("P1", "male", 3), Participant("P2", "other", 8)]


@pytest.mark.parametrize("row, path", [
    ("P1,robot,3", "participants.csv[line 2].gender"),
    ("P1,male,11", "participants.csv[line 2].mst"),
    ("P1,male,x", "participants.csv[line 2].mst"),
])
def test_participants_csv_errors(row, path):
    with pytest.raises(ParseError) as exc:
        read_participants_csv("id,gender,mst\n" + row + "\n")
    assert exc.value.path == path


def test_readings_csv_raw_bytes_are_decoded():
    rs = read_readings_csv("participant_id,sensor_id,lighting_lux,distance_m,confidence_raw\nP1,S1,208,1,255\n")
    assert rs[0].confidence == 1.0
    with pytest.raises(ParseError) as exc:
        read_readings_csv("participant_id,sensor_id,lighting_lux,distance_m,confidence_raw\nP1,S1,208,1,256\n")
    assert exc.value.path.endswith("confidence_raw")


def test_readings_csv_confidence_range():
    with pytest.raises(ParseError):
        read_readings_csv("participant_id,sensor_id,lighting_lux,distance_m,confidence\nP1,S1,208,1,1.5\n")


def test_strata_csv():
    out = strata_csv({"off": StratumStats(0.25, 0.0, 4, 2)})
    assert out == "stratum,mean_confidence,stddev,n,groups\noff,0.25,0.0,4,2\n"
