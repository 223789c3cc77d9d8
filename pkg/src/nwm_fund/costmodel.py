"""Cost projections, escalation and storage cost curves.

Cost amounts are held as base-year real EUR in :class:`~decimal.Decimal`.
Escalation to nominal EUR happens once, inside :func:`aggregate_annual_costs`,
which returns plain floats for the simulation loop.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import ROUND_DOWN, Decimal, InvalidOperation
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from nwm_fund.errors import InputError, ValidationError

CENT = Decimal("0.01")
KG_PER_TON = 1000
DEFAULT_FX_USD_TO_EUR = 0.93

CSV_COLUMNS = ("year", "site", "category", "component", "amount_eur")


class CostComponentKind(str, Enum):
    CAPITAL = "capital"
    OPERATION = "operation"
    TRANSPORT = "transport"
    DISPOSAL = "disposal"
    REGULATORY = "regulatory"
    MISC = "misc"
    DECONTAMINATION = "decontamination"
    DEMOLITION = "demolition"
    SITE_RESTORATION = "site_restoration"
    SAFEGUARDING = "safeguarding"


class CostCategory(str, Enum):
    INTERIM_STORAGE = "interim_storage"
    CONTAINERS_TRANSPORT_OPERATIONAL_WASTE = "containers_transport_operational_waste"
    KONRAD_REPOSITORY = "konrad_repository"
    HAW_FINAL_DISPOSAL = "haw_final_disposal"
    DECOMMISSIONING = "decommissioning"
    CONSOLIDATED_INTERIM_STORAGE = "consolidated_interim_storage"
    TRANSPORT_TO_CIS = "transport_to_cis"


class CostGroup(str, Enum):
    """Coverage group a category is funded under (final disposal, interim, decommissioning)."""

    FINAL_DISPOSAL = "final_disposal"
    INTERIM = "interim"
    DECOMMISSIONING = "decommissioning"


_C = CostComponentKind

GROUP_COMPONENTS: dict[CostGroup, frozenset[CostComponentKind]] = {
    CostGroup.FINAL_DISPOSAL: frozenset(
        {_C.CAPITAL, _C.OPERATION, _C.TRANSPORT, _C.DISPOSAL, _C.REGULATORY, _C.MISC}
    ),
    CostGroup.INTERIM: frozenset(
        {_C.CAPITAL, _C.OPERATION, _C.TRANSPORT, _C.REGULATORY, _C.MISC}
    ),
    CostGroup.DECOMMISSIONING: frozenset(
        {
            _C.DECONTAMINATION,
            _C.DEMOLITION,
            _C.TRANSPORT,
            _C.SITE_RESTORATION,
            _C.SAFEGUARDING,
            _C.MISC,
        }
    ),
}

CATEGORY_GROUP: dict[CostCategory, CostGroup] = {
    CostCategory.INTERIM_STORAGE: CostGroup.INTERIM,
    CostCategory.CONTAINERS_TRANSPORT_OPERATIONAL_WASTE: CostGroup.INTERIM,
    CostCategory.CONSOLIDATED_INTERIM_STORAGE: CostGroup.INTERIM,
    CostCategory.TRANSPORT_TO_CIS: CostGroup.INTERIM,
    CostCategory.KONRAD_REPOSITORY: CostGroup.FINAL_DISPOSAL,
    CostCategory.HAW_FINAL_DISPOSAL: CostGroup.FINAL_DISPOSAL,
    CostCategory.DECOMMISSIONING: CostGroup.DECOMMISSIONING,
}

CIS_CATEGORIES = frozenset(
    {CostCategory.CONSOLIDATED_INTERIM_STORAGE, CostCategory.TRANSPORT_TO_CIS}
)


def to_money(value) -> Decimal:
    """Coerce a number or numeric string to a Decimal amount."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InputError(f"amount must be finite, got {value!r}")
        return Decimal(repr(value))
    try:
        return Decimal(str(value))
    except InvalidOperation as exc:
        raise InputError(f"not a decimal amount: {value!r}") from exc


@dataclass(frozen=True)
class EscalationParams:
    inflation_rate: float = 0.0172
    nsci_rate: float = 0.0197
    base_year: int = 2024
    combine: str = "multiplicative"  # or "additive"

    def __post_init__(self):
        if self.inflation_rate < 0 or self.nsci_rate < 0:
            raise InputError("escalation rates must be non-negative")
        if not 1900 <= self.base_year <= 2300:
            raise InputError(f"base_year {self.base_year} outside [1900, 2300]")
        if self.combine not in ("multiplicative", "additive"):
            raise InputError(f"unknown escalation combine mode {self.combine!r}")

    @property
    def annual_factor(self) -> float:
        if self.combine == "additive":
            return 1.0 + self.inflation_rate + self.nsci_rate
        return (1.0 + self.inflation_rate) * (1.0 + self.nsci_rate)


@dataclass(frozen=True)
class CoverageFlags:
    """Which cost groups the fund pays for: final disposal, interim storage, decommissioning."""

    i: int = 1
    j: int = 1
    k: int = 0

    def __post_init__(self):
        for name in ("i", "j", "k"):
            if getattr(self, name) not in (0, 1):
                raise InputError(f"coverage flag {name} must be 0 or 1")

    @classmethod
    def kenfo(cls) -> "CoverageFlags":
        return cls(i=1, j=1, k=0)

    def covers(self, group: CostGroup) -> bool:
        return bool(
            {
                CostGroup.FINAL_DISPOSAL: self.i,
                CostGroup.INTERIM: self.j,
                CostGroup.DECOMMISSIONING: self.k,
            }[group]
        )


@dataclass(frozen=True)
class CostRecord:
    year: int
    site: str
    category: CostCategory
    component: CostComponentKind
    amount: Decimal

    def __post_init__(self):
        object.__setattr__(self, "category", CostCategory(self.category))
        object.__setattr__(self, "component", CostComponentKind(self.component))
        object.__setattr__(self, "amount", to_money(self.amount))
        if self.amount < 0:
            raise InputError(f"negative amount in {self}")

    @property
    def group(self) -> CostGroup:
        return CATEGORY_GROUP[self.category]

    def check_component(self) -> None:
        if self.component not in GROUP_COMPONENTS[self.group]:
            raise ValidationError(
                f"component {self.component.value!r} is not valid for category "
                f"{self.category.value!r}: {self.year},{self.site},"
                f"{self.category.value},{self.component.value},{self.amount}"
            )


@dataclass(frozen=True)
class CostProjection:
    base_year: int
    horizon_end: int
    records: tuple[CostRecord, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if self.horizon_end <= self.base_year:
            raise InputError("horizon_end must be after base_year")
        for rec in self.records:
            if rec.year > self.horizon_end:
                raise InputError(f"record year {rec.year} beyond horizon {self.horizon_end}")
            if rec.year < self.base_year:
                raise InputError(f"record year {rec.year} before base year {self.base_year}")

    @property
    def periods(self) -> int:
        return self.horizon_end - self.base_year

    def total(self) -> Decimal:
        return sum((r.amount for r in self.records), Decimal(0))

    def categories(self) -> set[CostCategory]:
        return {r.category for r in self.records}


@dataclass(frozen=True)
class StorageCostParams:
    """Size-cost curve ``a + b / capacity`` per kgHM.

    ``eur_decimals`` rounds each coefficient after USD conversion; the
    offsite pool figures are quoted in whole euros (176 USD -> 164 EUR).
    """

    a: float
    b: float
    currency: str = "EUR"
    fx_usd_to_eur: float = DEFAULT_FX_USD_TO_EUR
    eur_decimals: int | None = 0

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise InputError("storage cost coefficients must be non-negative")
        if self.fx_usd_to_eur <= 0:
            raise InputError("fx_usd_to_eur must be positive")
        if self.currency not in ("USD", "EUR"):
            raise InputError(f"unsupported currency {self.currency!r}")

    def in_eur(self) -> tuple[float, float]:
        if self.currency == "EUR":
            return self.a, self.b
        a, b = self.a * self.fx_usd_to_eur, self.b * self.fx_usd_to_eur
        if self.eur_decimals is not None:
            a, b = round(a, self.eur_decimals), round(b, self.eur_decimals)
        return a, b

    @classmethod
    def offsite_pool(cls) -> "StorageCostParams":
        """Offsite consolidated pool storage curve, 176 USD + 370,000 USD / capacity."""
        return cls(a=176.0, b=370_000.0, currency="USD")


@dataclass(frozen=True)
class ContainerFleet:
    site: str
    container_count: int
    load_year: int
    replacement_interval: int = 40
    unit_replacement_cost: Decimal = Decimal("2000000")

    def __post_init__(self):
        object.__setattr__(self, "unit_replacement_cost", to_money(self.unit_replacement_cost))
        if self.container_count < 0:
            raise InputError("container_count must be non-negative")
        if self.replacement_interval <= 0:
            raise InputError("replacement_interval must be positive")
        if self.unit_replacement_cost < 0:
            raise InputError("unit_replacement_cost must be non-negative")


def unit_storage_cost(params: StorageCostParams, capacity: float) -> float:
    """EUR per kgHM for a facility of ``capacity`` metric tons."""
    if not capacity > 0:
        raise InputError(f"capacity must be positive, got {capacity}")
    a, b = params.in_eur()
    return a + b / capacity


def cis_total_cost(params: StorageCostParams, volume: float) -> float:
    """Total EUR to store ``volume`` tons of heavy metal at a consolidated site."""
    if not volume > 0:
        raise InputError(f"volume must be positive, got {volume}")
    return unit_storage_cost(params, volume) * volume * KG_PER_TON


def escalate(amount, years_from_base: int, esc: EscalationParams) -> float:
    """Convert a base-year amount to nominal EUR ``years_from_base`` years later."""
    if years_from_base < 0:
        raise InputError(f"negative escalation offset {years_from_base}")
    return float(amount) * esc.annual_factor**years_from_base


def replacement_schedule(fleet: ContainerFleet, transfer_year: int) -> list[tuple[int, Decimal]]:
    """Cask replacement events strictly before the fleet leaves interim storage."""
    if transfer_year < fleet.load_year:
        raise InputError(
            f"transfer year {transfer_year} precedes load year {fleet.load_year}"
        )
    cost = fleet.container_count * fleet.unit_replacement_cost
    years = range(
        fleet.load_year + fleet.replacement_interval, transfer_year, fleet.replacement_interval
    )
    return [(year, cost) for year in years]


def allocate_over_period(
    total,
    start: int,
    end: int,
    *,
    site: str = "",
    category: CostCategory = CostCategory.CONSOLIDATED_INTERIM_STORAGE,
    component: CostComponentKind = CostComponentKind.CAPITAL,
) -> list[CostRecord]:
    """Split ``total`` equally over ``start..end`` inclusive, to the cent.

    The final year absorbs the rounding residue so the records sum to
    ``total`` exactly.
    """
    if start > end:
        raise InputError(f"empty allocation period {start}..{end}")
    total = to_money(total)
    if total < 0:
        raise InputError("cannot allocate a negative total")
    n = end - start + 1
    share = (total / n).quantize(CENT, rounding=ROUND_DOWN)
    amounts = [share] * (n - 1) + [total - share * (n - 1)]
    return [
        CostRecord(year, site, category, component, amt)
        for year, amt in zip(range(start, end + 1), amounts)
    ]


def aggregate_annual_costs(
    projection: CostProjection, flags: CoverageFlags, esc: EscalationParams
) -> list[float]:
    """Nominal cost per period; element ``t - 1`` holds period ``t = 1..T``.

    Period ``t`` is calendar year ``base_year + t``. Records dated in the base
    year itself fall due in period 1 and are not escalated.
    """
    if esc.base_year != projection.base_year:
        raise InputError(
            f"escalation base year {esc.base_year} != projection base year "
            f"{projection.base_year}"
        )
    buckets: dict[int, list[float]] = defaultdict(list)
    for rec in projection.records:
        rec.check_component()
        if not flags.covers(rec.group):
            continue
        offset = rec.year - projection.base_year
        buckets[max(offset, 1)].append(escalate(rec.amount, offset, esc))
    return [math.fsum(buckets.get(t, ())) for t in range(1, projection.periods + 1)]


# -- CSV ---------------------------------------------------------------------


def read_cost_records(fh: TextIO, *, source: str = "<stream>") -> list[CostRecord]:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError(f"{source}: empty file, header required") from None
    header = [h.strip() for h in header]
    if tuple(header) != CSV_COLUMNS:
        raise ValidationError(
            f"{source}:1: expected header {','.join(CSV_COLUMNS)}, got {','.join(header)}"
        )
    records = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(CSV_COLUMNS):
            raise ValidationError(f"{source}:{line}: expected 5 fields, got {len(row)}")
        year, site, category, component, amount = (c.strip() for c in row)
        try:
            rec = CostRecord(
                year=int(year),
                site=site,
                category=CostCategory(category),
                component=CostComponentKind(component),
                amount=Decimal(amount),
            )
        except (ValueError, InvalidOperation) as exc:
            raise ValidationError(f"{source}:{line}: {exc}") from exc
        if not rec.amount.is_finite():
            raise ValidationError(f"{source}:{line}: amount must be finite")
        records.append(rec)
    return records


def load_cost_csv(path: str | Path) -> list[CostRecord]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        return read_cost_records(fh, source=str(path))


def write_cost_csv(records: Iterable[CostRecord], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([r.year, r.site, r.category.value, r.component.value, f"{r.amount:f}"])


def projection_from_records(
    records: Sequence[CostRecord], base_year: int, horizon_end: int | None = None
) -> CostProjection:
    """Build a projection whose horizon covers every record."""
    last = max((r.year for r in records), default=base_year + 1)
    end = max(last, horizon_end or 0, base_year + 1)
    return CostProjection(base_year=base_year, horizon_end=end, records=tuple(records))
