"""Carbon footprint: embodied carbon per BOM category plus transport,
model training and operational use.

Sums are exact float accumulations; rounding happens only when rendering.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from mlsds._reader import Reader, check_enum
from mlsds.findings import ParseError, RangeError

CATEGORIES = ("processing", "sensing", "power_supply", "memory", "pcb", "passives")
HOURS_PER_YEAR = 8760
THREE_YEARS_H = 3 * HOURS_PER_YEAR

# Row labels for the non-embodied terms in the breakdown table.
TRANSPORT, TRAINING, OPERATIONAL = "transport", "training", "operational_use"


@dataclass(frozen=True)
class BomEntry:
    category: str
    name: str
    embodied_kg_co2e: float

    def __post_init__(self):
        if not self.embodied_kg_co2e >= 0:
            raise RangeError(f"embodied carbon must be >= 0, got {self.embodied_kg_co2e!r}", "embodied_kg_co2e")


@dataclass(frozen=True)
class UsageProfile:
    average_power_w: float
    lifetime_hours: float
    grid_intensity_kg_per_kwh: float

    def __post_init__(self):
        for name in ("average_power_w", "lifetime_hours", "grid_intensity_kg_per_kwh"):
            value = getattr(self, name)
            if not value >= 0:
                raise RangeError(f"must be >= 0, got {value!r}", name)


@dataclass(frozen=True)
class FootprintReport:
    embodied_by_category: Mapping[str, float]
    embodied_total: float
    transport_kg: float
    training_kg: float
    operational_kg: float
    total_kg: float
    usage: UsageProfile | None = field(default=None, compare=False)


def operational_carbon(u: UsageProfile) -> float:
    return u.average_power_w * u.lifetime_hours / 1000 * u.grid_intensity_kg_per_kwh


def training_carbon(energy_kwh: float, grid_intensity_kg_per_kwh: float) -> float:
    """Convert training energy to kg CO2-eq for the ``training_kg`` input."""
    if energy_kwh < 0 or grid_intensity_kg_per_kwh < 0:
        raise RangeError("training energy and grid intensity must be >= 0", "training_kg")
    return energy_kwh * grid_intensity_kg_per_kwh


def compute_footprint(
    bom: Iterable[BomEntry],
    transport_kg: float,
    training_kg: float,
    usage: UsageProfile,
) -> FootprintReport:
    if not transport_kg >= 0:
        raise RangeError(f"must be >= 0, got {transport_kg!r}", "transport_kg")
    if not training_kg >= 0:
        raise RangeError(f"must be >= 0, got {training_kg!r}", "training_kg")
    by_cat: dict[str, list[float]] = {}
    for entry in bom:
        by_cat.setdefault(entry.category, []).append(entry.embodied_kg_co2e)
    # fsum keeps per-category totals independent of BOM order.
    embodied = {cat: math.fsum(vals) for cat, vals in sorted(by_cat.items())}
    embodied_total = math.fsum(embodied.values())
    operational = operational_carbon(usage)
    return FootprintReport(
        embodied_by_category=embodied,
        embodied_total=embodied_total,
        transport_kg=transport_kg,
        training_kg=training_kg,
        operational_kg=operational,
        total_kg=math.fsum([embodied_total, transport_kg, training_kg, operational]),
        usage=usage,
    )


def footprint_breakdown_table(r: FootprintReport) -> list[tuple[str, float, float]]:
    """Rows ``(category or term, kg, percent)`` sorted by kg descending.

    Percents are rounded to two decimals with largest-remainder
    apportionment so they add up to exactly 100.00 whenever the total is
    positive. Ties in kg sort by name.
    """
    rows = list(r.embodied_by_category.items()) + [
        (TRANSPORT, r.transport_kg),
        (TRAINING, r.training_kg),
        (OPERATIONAL, r.operational_kg),
    ]
    rows.sort(key=lambda row: (-row[1], row[0]))
    total = math.fsum(kg for _, kg in rows)
    if total <= 0:
        return [(name, kg, 0.0) for name, kg in rows]
    return [(name, kg, pct) for (name, kg), pct in zip(rows, _apportion([kg / total for _, kg in rows]))]


def _apportion(shares: list[float], scale: int = 10_000) -> list[float]:
    exact = [s * scale for s in shares]
    floors = [math.floor(x) for x in exact]
    short = scale - sum(floors)
    order = sorted(range(len(exact)), key=lambda i: (-(exact[i] - floors[i]), i))
    for i in order[:short]:
        floors[i] += 1
    return [f / 100 for f in floors]


def read_bom_csv(text: str, origin: str = "bom.csv") -> list[BomEntry]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    expected = ["category", "name", "embodied_kg_co2e"]
    if header is None or [h.strip() for h in header] != expected:
        raise ParseError("expected header 'category,name,embodied_kg_co2e'", origin, 1, 1)
    entries = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        where = f"{origin}[line {lineno}]"
        if len(row) != 3:
            raise ParseError(f"expected 3 columns, got {len(row)}", where)
        category = check_enum(row[0].strip(), CATEGORIES, f"{where}.category", open_ended=True)
        try:
            kg = float(row[2])
        except ValueError:
            raise ParseError(f"not a number: {row[2]!r}", f"{where}.embodied_kg_co2e") from None
        if not (math.isfinite(kg) and kg >= 0):
            raise ParseError(f"embodied carbon must be >= 0, got {row[2].strip()}", f"{where}.embodied_kg_co2e")
        entries.append(BomEntry(category, row[1].strip(), kg))
    return entries


@dataclass(frozen=True)
class FootprintInputs:
    transport_kg: float
    training_kg: float
    usage: UsageProfile


def footprint_inputs_from_obj(obj: Any, path: str = "footprint") -> FootprintInputs:
    r = Reader(obj, path)
    u = r.child("usage")
    usage = UsageProfile(
        average_power_w=u.number("average_power_w", minimum=0),
        lifetime_hours=u.number("lifetime_hours", minimum=0),
        grid_intensity_kg_per_kwh=u.number("grid_intensity_kg_per_kwh", minimum=0),
    )
    u.done()
    inputs = FootprintInputs(
        transport_kg=r.number("transport_kg", minimum=0),
        training_kg=r.number("training_kg", minimum=0),
        usage=usage,
    )
    r.done()
    return inputs


def footprint_report_to_obj(r: FootprintReport) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "embodied_by_category": dict(r.embodied_by_category),
        "embodied_total": r.embodied_total,
        "transport_kg": r.transport_kg,
        "training_kg": r.training_kg,
        "operational_kg": r.operational_kg,
        "total_kg": r.total_kg,
    }
    if r.usage is not None:
        obj["usage"] = vars(r.usage).copy()
    return obj


def footprint_report_json(r: FootprintReport) -> str:
    return json.dumps(footprint_report_to_obj(r), indent=2) + "\n"


def breakdown_csv(r: FootprintReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["component", "kg_co2e", "percent"])
    for name, kg, pct in footprint_breakdown_table(r):
        w.writerow([name, repr(kg), f"{pct:.2f}"])
    return buf.getvalue()
