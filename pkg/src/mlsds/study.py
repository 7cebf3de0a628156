"""End-to-end study: stratified mean confidence by lighting, distance,
gender and skin tone, per-sensor variability, and cohort demographics.

Readings are first averaged per (participant, sensor, lighting level,
distance) group. Lighting, distance and per-sensor strata aggregate those
group means; gender and skin-tone strata aggregate per-participant means
(the mean of that participant's group means), so every participant
carries equal weight regardless of how many readings they produced.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

from mlsds._reader import as_number
from mlsds.findings import (
    DatasheetError,
    InsufficientStrataError,
    ParseError,
    RangeError,
    ValidationReport,
    error,
    warning,
)
from mlsds.wire import decode_confidence

GENDERS = ("male", "female", "other")
GENDER_ALIASES = {"unspecified": "other", "other/unspecified": "other"}
SKIN_TONES = ("light", "medium", "dark")
LIGHTING_LEVELS = (("off", 0.0), ("low", 208.0), ("medium", 584.0), ("high", 1149.0))
DEFAULT_DISTANCES_M = (1.0, 3.0, 5.0)
DIMENSIONS = ("gender", "skintone", "lighting", "distance")
_DISTANCE_TOL = 1e-9


@dataclass(frozen=True)
class Participant:
    id: str
    gender: str
    mst: int

    def __post_init__(self):
        if self.gender not in GENDERS:
            raise ValueError(f"gender must be one of {', '.join(GENDERS)}, got {self.gender!r}")
        mst_bucket(self.mst)


@dataclass(frozen=True)
class Reading:
    participant_id: str
    sensor_id: str
    lighting_lux: float
    distance_m: float
    confidence: float

    def __post_init__(self):
        if not self.lighting_lux >= 0:
            raise ValueError(f"lighting_lux must be >= 0, got {self.lighting_lux!r}")
        if not self.distance_m > 0:
            raise ValueError(f"distance_m must be > 0, got {self.distance_m!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence!r}")


@dataclass(frozen=True)
class StratumStats:
    mean_confidence: float
    stddev: float  # sample standard deviation of the aggregated means
    n: int  # readings (lighting, distance) or participants (gender, skin tone)
    groups: int  # number of means aggregated


@dataclass(frozen=True)
class Demographics:
    percent_male: float
    percent_female: float
    percent_other: float
    percent_light: float
    percent_medium: float
    percent_dark: float


@dataclass(frozen=True)
class StudyReport:
    by_lighting: Mapping[str, StratumStats]
    by_distance: Mapping[str, StratumStats]
    by_gender: Mapping[str, StratumStats]
    by_skintone: Mapping[str, StratumStats]
    per_sensor: Mapping[str, float]
    demographics: Demographics

    def stratification(self, dimension: str) -> Mapping[str, StratumStats]:
        return {
            "lighting": self.by_lighting,
            "distance": self.by_distance,
            "gender": self.by_gender,
            "skintone": self.by_skintone,
        }[dimension]


def mst_bucket(mst: int) -> str:
    if isinstance(mst, bool) or not isinstance(mst, int) or not 0 <= mst <= 10:
        raise RangeError(f"Monk Skin Tone value must be an integer in [0, 10], got {mst!r}", "mst")
    if mst <= 4:
        return "light"
    if mst <= 7:
        return "medium"
    return "dark"


def lighting_level(lux: float) -> str:
    """Nearest nominal level among 0, 208, 584 and 1149 lux; ties go to the lower level."""
    if not lux >= 0:
        raise RangeError(f"illuminance must be >= 0, got {lux!r}", "lighting_lux")
    best, best_dist = LIGHTING_LEVELS[0][0], math.inf
    for name, nominal in LIGHTING_LEVELS:
        d = abs(lux - nominal)
        if d < best_dist:
            best, best_dist = name, d
    return best


def distance_label(distance_m: float, configured: Sequence[float] = DEFAULT_DISTANCES_M) -> tuple[str, bool]:
    """Stratum label for a distance, and whether it matched the configured set."""
    for d in configured:
        if abs(distance_m - d) <= _DISTANCE_TOL:
            return f"{d:g} m", True
    return f"{distance_m:g} m", False


def average_readings(groups: Mapping[Any, Sequence[float]]) -> dict[Any, float]:
    out = {}
    for key, values in groups.items():
        if not values:
            raise DatasheetError(f"group {key!r} has no readings", "readings")
        out[key] = math.fsum(values) / len(values)
    return out


def _stats(values: Sequence[float], n: int) -> StratumStats:
    k = len(values)
    mean = math.fsum(values) / k
    if k > 1:
        sd = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (k - 1))
    else:
        sd = 0.0
    return StratumStats(mean, sd, n, k)


def check_study(
    participants: Iterable[Participant],
    readings: Iterable[Reading],
    distances: Sequence[float] = DEFAULT_DISTANCES_M,
) -> ValidationReport:
    """Dangling participant references are errors; off-grid distances and
    participants without readings are warnings."""
    participants = list(participants)
    known = {p.id for p in participants}
    seen: set[str] = set()
    findings = []
    if len(known) != len(participants):
        findings.append(error("participants.id", "duplicate participant id"))
    for r in readings:
        seen.add(r.participant_id)
        if r.participant_id not in known:
            findings.append(error(f"readings[{r.participant_id}].participant_id",
                                  f"unknown participant {r.participant_id!r}"))
        label, ok = distance_label(r.distance_m, distances)
        if not ok:
            findings.append(warning("readings.distance_m",
                                    f"distance {label} is not in the configured set; binned under its literal value"))
    for pid in sorted(known - seen):
        findings.append(warning(f"participants[{pid}]", "participant has no readings"))
    return ValidationReport(findings)


def build_study_report(
    participants: Iterable[Participant],
    readings: Iterable[Reading],
    distances: Sequence[float] = DEFAULT_DISTANCES_M,
) -> StudyReport:
    participants = list(participants)
    if not participants:
        raise DatasheetError("no participants", "participants")
    by_id = {p.id: p for p in participants}

    raw: dict[tuple[str, str, str, str], list[float]] = defaultdict(list)
    for r in readings:
        if r.participant_id not in by_id:
            raise DatasheetError(f"unknown participant {r.participant_id!r}", "readings.participant_id")
        key = (r.participant_id, r.sensor_id, lighting_level(r.lighting_lux), distance_label(r.distance_m, distances)[0])
        raw[key].append(r.confidence)
    if not raw:
        raise DatasheetError("no readings", "readings")
    group_means = average_readings(raw)

    lighting: dict[str, list[float]] = defaultdict(list)
    lighting_n: dict[str, int] = defaultdict(int)
    distance: dict[str, list[float]] = defaultdict(list)
    distance_n: dict[str, int] = defaultdict(int)
    sensor: dict[str, list[float]] = defaultdict(list)
    by_participant: dict[str, list[float]] = defaultdict(list)
    for key, mean in group_means.items():
        pid, sid, level, dist = key
        count = len(raw[key])
        lighting[level].append(mean)
        lighting_n[level] += count
        distance[dist].append(mean)
        distance_n[dist] += count
        sensor[sid].append(mean)
        by_participant[pid].append(mean)

    participant_means = {pid: math.fsum(v) / len(v) for pid, v in by_participant.items()}
    gender: dict[str, list[float]] = defaultdict(list)
    tone: dict[str, list[float]] = defaultdict(list)
    for pid, mean in participant_means.items():
        p = by_id[pid]
        gender[p.gender].append(mean)
        tone[mst_bucket(p.mst)].append(mean)

    level_order = [name for name, _ in LIGHTING_LEVELS]
    return StudyReport(
        by_lighting={k: _stats(lighting[k], lighting_n[k]) for k in level_order if k in lighting},
        by_distance={k: _stats(distance[k], distance_n[k]) for k in sorted(distance, key=_distance_sort_key)},
        by_gender={k: _stats(gender[k], len(gender[k])) for k in GENDERS if k in gender},
        by_skintone={k: _stats(tone[k], len(tone[k])) for k in SKIN_TONES if k in tone},
        per_sensor={k: math.fsum(sensor[k]) / len(sensor[k]) for k in sorted(sensor)},
        demographics=demographics(participants),
    )


def _distance_sort_key(label: str) -> float:
    return float(label.split()[0])


def demographics(participants: Sequence[Participant]) -> Demographics:
    total = len(participants)
    genders = defaultdict(int)
    tones = defaultdict(int)
    for p in participants:
        genders[p.gender] += 1
        tones[mst_bucket(p.mst)] += 1
    pct = lambda count: 100 * count / total  # noqa: E731
    return Demographics(
        percent_male=pct(genders["male"]),
        percent_female=pct(genders["female"]),
        percent_other=pct(genders["other"]),
        percent_light=pct(tones["light"]),
        percent_medium=pct(tones["medium"]),
        percent_dark=pct(tones["dark"]),
    )


def bias_gap(strata: Mapping[str, StratumStats], dimension: str = "") -> float:
    means = [s.mean_confidence for s in strata.values() if s.n > 0]
    if len(means) < 2:
        raise InsufficientStrataError(f"need at least 2 populated strata, got {len(means)}", dimension)
    return max(means) - min(means)


def bias_gaps(report: StudyReport) -> dict[str, float]:
    """Largest difference in stratum mean confidence for each dimension."""
    return {dim: bias_gap(report.stratification(dim), dim) for dim in DIMENSIONS}


def grand_mean(strata: Mapping[str, StratumStats]) -> float:
    """Mean reconstructed from (mean, n) pairs."""
    n = sum(s.n for s in strata.values())
    return math.fsum(s.mean_confidence * s.n for s in strata.values()) / n


# -- CSV ingestion ---------------------------------------------------------

def _rows(text: str, expected: Sequence[str], origin: str):
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != list(expected):
        raise ParseError(f"expected header {','.join(expected)!r}", origin, 1, 1)
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        where = f"{origin}[line {lineno}]"
        if len(row) != len(expected):
            raise ParseError(f"expected {len(expected)} columns, got {len(row)}", where)
        yield where, [c.strip() for c in row]


def _float(value: str, where: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise ParseError(f"not a number: {value!r}", where) from None
    if not math.isfinite(out):
        raise ParseError("must be finite", where)
    return out


def read_participants_csv(text: str, origin: str = "participants.csv") -> list[Participant]:
    out = []
    for where, (pid, gender, mst) in _rows(text, ("id", "gender", "mst"), origin):
        gender = GENDER_ALIASES.get(gender.lower(), gender.lower())
        if gender not in GENDERS:
            raise ParseError(f"gender must be male, female or other/unspecified, got {gender!r}", f"{where}.gender")
        try:
            tone = int(mst)
        except ValueError:
            raise ParseError(f"mst must be an integer, got {mst!r}", f"{where}.mst") from None
        if not 0 <= tone <= 10:
            raise ParseError(f"mst must be in [0, 10], got {tone}", f"{where}.mst")
        if not pid:
            raise ParseError("empty participant id", f"{where}.id")
        out.append(Participant(pid, gender, tone))
    return out


READING_COLUMNS = ("participant_id", "sensor_id", "lighting_lux", "distance_m", "confidence")
RAW_READING_COLUMNS = READING_COLUMNS[:-1] + ("confidence_raw",)


def read_readings_csv(text: str, origin: str = "readings.csv") -> list[Reading]:
    """Readings with a ``confidence`` column in [0, 1], or raw captures whose
    last column is ``confidence_raw`` (the wire byte, decoded here)."""
    first = text.split("\n", 1)[0].strip()
    raw_bytes = first.split(",")[-1].strip() == "confidence_raw"
    columns = RAW_READING_COLUMNS if raw_bytes else READING_COLUMNS
    out = []
    for where, (pid, sid, lux, dist, conf) in _rows(text, columns, origin):
        if raw_bytes:
            try:
                confidence = decode_confidence(int(conf))
            except (ValueError, RangeError):
                raise ParseError(f"confidence byte must be an integer in [0, 255], got {conf!r}",
                                 f"{where}.confidence_raw") from None
        else:
            confidence = _float(conf, f"{where}.confidence")
        try:
            out.append(Reading(pid, sid, _float(lux, f"{where}.lighting_lux"),
                               _float(dist, f"{where}.distance_m"), confidence))
        except ValueError as exc:
            raise ParseError(str(exc), where) from None
    return out


# -- export ----------------------------------------------------------------

def study_report_to_obj(r: StudyReport) -> dict[str, Any]:
    strata = lambda m: {k: vars(v).copy() for k, v in m.items()}  # noqa: E731
    return {
        "by_lighting": strata(r.by_lighting),
        "by_distance": strata(r.by_distance),
        "by_gender": strata(r.by_gender),
        "by_skintone": strata(r.by_skintone),
        "per_sensor": dict(r.per_sensor),
        "demographics": vars(r.demographics).copy(),
    }


def study_report_json(r: StudyReport) -> str:
    return json.dumps(study_report_to_obj(r), indent=2) + "\n"


def strata_csv(strata: Mapping[str, StratumStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["stratum", "mean_confidence", "stddev", "n", "groups"])
    for name, s in strata.items():
        w.writerow([name, repr(s.mean_confidence), repr(s.stddev), s.n, s.groups])
    return buf.getvalue()


def study_config_distances(obj: Any, path: str = "study.distances_m") -> tuple[float, ...]:
    if obj is None:
        return DEFAULT_DISTANCES_M
    if not isinstance(obj, list) or not obj:
        raise ParseError("expected a nonempty list of distances", path)
    return tuple(as_number(v, f"{path}[{i}]", 0, strict=True) for i, v in enumerate(obj))
