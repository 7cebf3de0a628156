"""Slow, obviously-correct reference implementations used by the tests."""

from __future__ import annotations

import random
from fractions import Fraction

from mlsds.metrics import EvalRecord


def pairwise_auc(records) -> float:
    """Probability that a random positive outscores a random negative (ties 1/2)."""
    pos = [r.score for r in records if r.label]
    neg = [r.score for r in records if not r.label]
    wins = Fraction(0)
    for p in pos:
        for n in neg:
            wins += 1 if p > n else Fraction(1, 2) if p == n else 0
    return float(wins / (len(pos) * len(neg)))


def errors_at(records, threshold: float) -> tuple[int, int]:
    fp = sum(1 for r in records if r.score >= threshold and not r.label)
    fn = sum(1 for r in records if r.score < threshold and r.label)
    return fp, fn


def brute_force_threshold(records, fp_cost: float = 1.0) -> tuple[float, float]:
    """Smallest threshold in [0, 1] minimizing fp_cost*FP + FN, by trying every
    distinct score (and 1.0, which predicts nothing positive when all scores
    are below it). Returns (threshold, cost)."""
    scores = sorted({r.score for r in records})
    trial = scores + ([1.0] if scores[-1] < 1.0 else [])
    best = None
    for t in trial:
        fp, fn = errors_at(records, t)
        cost = fp_cost * fp + fn
        if best is None or cost < best[1]:
            best = (t, cost)
    return best


def random_eval_set(rng: random.Random, ties: bool) -> list[EvalRecord]:
    n = rng.randint(2, 50)
    labels = [True, False] + [rng.random() < 0.5 for _ in range(n - 2)]
    rng.shuffle(labels)
    if ties:
        grid = rng.randint(2, 6)
        scores = [rng.randint(0, grid) / grid for _ in range(n)]
    else:
        scores = [rng.random() for _ in range(n)]
    return [EvalRecord(s, y) for s, y in zip(scores, labels)]


# -- study -------------------------------------------------------------------

LEVEL_LUX = {"off": 0.0, "low": 208.0, "medium": 584.0, "high": 1149.0}
LEVEL_BASE = {"off": Fraction(1, 4), "low": Fraction(1, 2), "medium": Fraction(5, 8), "high": Fraction(3, 4)}
DISTANCE_SHIFT = {1.0: Fraction(1, 16), 3.0: Fraction(0), 5.0: Fraction(-1, 8)}
SENSOR_SHIFT = {"S1": Fraction(0), "S2": Fraction(-1, 32)}
TONE_SHIFT = {"light": Fraction(1, 32), "medium": Fraction(0), "dark": Fraction(-1, 16)}
GENDER_SHIFT = {"male": Fraction(0), "female": Fraction(1, 64)}


def synthetic_study(people, repeats: int = 3):
    """Deterministic, fully balanced readings from an additive model.

    ``people`` is a list of (id, gender, mst). Every (person, sensor,
    lighting level, distance) cell gets ``repeats`` readings spread
    symmetrically around the cell's generating mean, so each cell mean is
    exactly that value. Returns (readings_csv_text, cell_means) where
    cell_means maps (id, sensor, level, distance) to a Fraction.
    """
    from mlsds.study import mst_bucket

    lines = ["participant_id,sensor_id,lighting_lux,distance_m,confidence"]
    cells = {}
    jitter = [Fraction(k - (repeats - 1) / 2) / 256 for k in range(repeats)]
    for pid, gender, mst in people:
        for sensor, s in SENSOR_SHIFT.items():
            for level, lux in LEVEL_LUX.items():
                for dist, d in DISTANCE_SHIFT.items():
                    mean = LEVEL_BASE[level] + d + s + TONE_SHIFT[mst_bucket(mst)] + GENDER_SHIFT[gender]
                    cells[(pid, sensor, level, dist)] = mean
                    for j in jitter:
                        lines.append(f"{pid},{sensor},{lux:g},{dist:g},{float(mean + j)!r}")
    return "\n".join(lines) + "\n", cells


def analytic_strata(people, cells):
    """Per-stratum means from the generating model, as exact Fractions."""
    from mlsds.study import mst_bucket

    by = {"lighting": {}, "distance": {}, "gender": {}, "skintone": {}}
    per_person: dict[str, list[Fraction]] = {}
    for (pid, _, level, dist), m in cells.items():
        by["lighting"].setdefault(level, []).append(m)
        by["distance"].setdefault(f"{dist:g} m", []).append(m)
        per_person.setdefault(pid, []).append(m)
    for pid, gender, mst in people:
        pm = sum(per_person[pid]) / len(per_person[pid])
        by["gender"].setdefault(gender, []).append(pm)
        by["skintone"].setdefault(mst_bucket(mst), []).append(pm)
    return {dim: {k: sum(v) / len(v) for k, v in strata.items()} for dim, strata in by.items()}
