"""Binary-classifier characteristics from labeled scores.

All sweeps classify ``score >= threshold`` as positive. Curves are built
from one descending pass over the distinct scores, so tied scores move a
curve diagonally and contribute one half to the area.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from mlsds._reader import Reader
from mlsds.findings import DegenerateClassError, ParseError, RangeError


@dataclass(frozen=True)
class EvalRecord:
    score: float
    label: bool

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise RangeError(f"score must be in [0, 1], got {self.score!r}", "score")


@dataclass(frozen=True)
class RocCurve:
    points: tuple[tuple[float, float], ...]  # (fpr, tpr)
    auc: float


@dataclass(frozen=True)
class PrCurve:
    points: tuple[tuple[float, float], ...]  # (recall, precision)


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int
    threshold: float

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.n if self.n else 0.0

    @property
    def precision(self) -> float:
        denom = self.tp + self.fp
        return self.tp / denom if denom else 1.0

    @property
    def recall(self) -> float:
        denom = self.tp + self.fn
        return self.tp / denom if denom else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


@dataclass(frozen=True)
class ModelMeta:
    architecture: str
    parameter_count: int
    input_shape: str
    output_schema: str


@dataclass(frozen=True)
class ModelReport:
    roc: RocCurve
    pr: PrCurve
    chosen_threshold: float
    confusion: ConfusionMatrix
    accuracy: float
    precision: float
    recall: float
    f1: float
    model_meta: ModelMeta


def _class_counts(records: Iterable[EvalRecord]) -> tuple[list[tuple[float, int, int]], int, int]:
    """Distinct scores ascending, each with (positives, negatives) at that score."""
    pos: Counter[float] = Counter()
    neg: Counter[float] = Counter()
    for rec in records:
        (pos if rec.label else neg)[rec.score] += 1
    scores = sorted(set(pos) | set(neg))
    return [(s, pos[s], neg[s]) for s in scores], sum(pos.values()), sum(neg.values())


def _require_both(n_pos: int, n_neg: int) -> None:
    if n_pos == 0 or n_neg == 0:
        missing = "positive" if n_pos == 0 else "negative"
        raise DegenerateClassError(f"evaluation set has no {missing} records; both classes are required", "label")


def roc_curve(records: Iterable[EvalRecord]) -> RocCurve:
    groups, n_pos, n_neg = _class_counts(records)
    _require_both(n_pos, n_neg)
    tp = fp = 0
    points = [(0.0, 0.0)]
    for _, p, n in reversed(groups):
        tp += p
        fp += n
        points.append((fp / n_neg, tp / n_pos))
    return RocCurve(tuple(points), trapezoid_area(points))


def trapezoid_area(points: Sequence[tuple[float, float]]) -> float:
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2
    return area


def pr_curve(records: Iterable[EvalRecord]) -> PrCurve:
    groups, n_pos, _ = _class_counts(records)
    if n_pos == 0:
        raise DegenerateClassError("evaluation set has no positive records", "label")
    tp = fp = 0
    points = [(0.0, 1.0)]
    for _, p, n in reversed(groups):
        tp += p
        fp += n
        points.append((tp / n_pos, tp / (tp + fp)))
    return PrCurve(tuple(points))


def candidate_thresholds(scores: Iterable[float]) -> list[float]:
    """Ascending candidates: a sentinel below every score, midpoints between
    consecutive distinct scores, and a sentinel above the top score when one
    fits inside [0, 1].

    Candidate ``j`` splits the distinct scores so that exactly the lowest
    ``j`` of them are predicted negative.
    """
    distinct = sorted(set(scores))
    if not distinct:
        return [0.0]
    out = [distinct[0] / 2]
    for a, b in zip(distinct, distinct[1:]):
        mid = (a + b) / 2
        out.append(mid if a < mid <= b else b)
    top = distinct[-1]
    if top < 1.0:
        upper = (top + 1.0) / 2
        out.append(upper if upper > top else 1.0)
    return out


def select_threshold(records: Iterable[EvalRecord], fp_cost: float = 1.0) -> float:
    """Threshold minimizing ``fp_cost * FP + FN``; ties go to the smallest candidate."""
    if fp_cost < 0:
        raise RangeError("fp_cost must be nonnegative", "fp_cost")
    groups, n_pos, n_neg = _class_counts(records)
    _require_both(n_pos, n_neg)
    candidates = candidate_thresholds(s for s, _, _ in groups)

    best_j, best_cost = 0, math.inf
    fn, fp = 0, n_neg
    for j, _ in enumerate(candidates):
        if j > 0:
            _, p, n = groups[j - 1]
            fn += p
            fp -= n
        cost = fp_cost * fp + fn
        if cost < best_cost:
            best_j, best_cost = j, cost
    return candidates[best_j]


def confusion_at(records: Iterable[EvalRecord], threshold: float) -> ConfusionMatrix:
    if not 0.0 <= threshold <= 1.0:
        raise RangeError(f"threshold must be in [0, 1], got {threshold!r}", "threshold")
    tp = fp = fn = tn = 0
    for rec in records:
        predicted = rec.score >= threshold
        if predicted and rec.label:
            tp += 1
        elif predicted:
            fp += 1
        elif rec.label:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, fn, tn, threshold)


def build_model_report(records: Iterable[EvalRecord], model_meta: ModelMeta, fp_cost: float = 1.0) -> ModelReport:
    records = list(records)
    roc = roc_curve(records)
    pr = pr_curve(records)
    threshold = select_threshold(records, fp_cost)
    cm = confusion_at(records, threshold)
    return ModelReport(
        roc=roc,
        pr=pr,
        chosen_threshold=threshold,
        confusion=cm,
        accuracy=cm.accuracy,
        precision=cm.precision,
        recall=cm.recall,
        f1=cm.f1,
        model_meta=model_meta,
    )


def model_meta_from_obj(obj: Any, path: str = "model_meta") -> ModelMeta:
    r = Reader(obj, path)
    meta = ModelMeta(
        architecture=r.text("architecture", nonempty=True),
        parameter_count=r.integer("parameter_count", minimum=0),
        input_shape=r.text("input_shape"),
        output_schema=r.text("output_schema"),
    )
    r.done()
    return meta


def read_eval_csv(text: str, origin: str = "eval.csv") -> list[EvalRecord]:
    """Parse ``score,label`` rows; label must be 0 or 1."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["score", "label"]:
        raise ParseError("expected header 'score,label'", origin, 1, 1)
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        where = f"{origin}[line {lineno}]"
        if len(row) != 2:
            raise ParseError(f"expected 2 columns, got {len(row)}", where)
        try:
            score = float(row[0])
        except ValueError:
            raise ParseError(f"score is not a number: {row[0]!r}", f"{where}.score") from None
        if not 0.0 <= score <= 1.0:
            raise ParseError(f"score must be in [0, 1], got {row[0].strip()}", f"{where}.score")
        label = row[1].strip()
        if label not in ("0", "1"):
            raise ParseError(f"label must be 0 or 1, got {label!r}", f"{where}.label")
        records.append(EvalRecord(score, label == "1"))
    return records


def model_report_to_obj(r: ModelReport) -> dict[str, Any]:
    cm = r.confusion
    return {
        "model_meta": vars(r.model_meta).copy(),
        "chosen_threshold": r.chosen_threshold,
        "confusion": {"tp": cm.tp, "fp": cm.fp, "fn": cm.fn, "tn": cm.tn, "threshold": cm.threshold},
        "accuracy": r.accuracy,
        "precision": r.precision,
        "recall": r.recall,
        "f1": r.f1,
        "roc": {"auc": r.roc.auc, "points": [list(p) for p in r.roc.points]},
        "pr": {"points": [list(p) for p in r.pr.points]},
    }


def model_report_json(r: ModelReport) -> str:
    return json.dumps(model_report_to_obj(r), indent=2) + "\n"


def curve_csv(points: Iterable[tuple[float, float]], header: tuple[str, str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for x, y in points:
        w.writerow([repr(x), repr(y)])
    return buf.getvalue()
