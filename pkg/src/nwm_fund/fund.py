"""Year-by-year simulation of the segregated fund."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

from nwm_fund.errors import InputError

DEFAULT_LIQUID_SCHEDULE = (0.70, 0.60, 0.50, 0.40)
DEFAULT_CASH_START = 0.08
DEFAULT_CASH_RUNDOWN_YEARS = 5

LEDGER_COLUMNS = (
    "t",
    "year",
    "opening_eur",
    "growth_eur",
    "cost_eur",
    "closing_eur",
    "liquid_fraction",
    "cash_fraction",
    "liquid_assets_eur",
)


class CashMode(str, Enum):
    FULL_GROWTH = "full_growth"
    CASH_DRAG = "cash_drag"


class Shortfall(str, Enum):
    LIQUIDITY = "liquidity_shortfall"
    NEGATIVE_BALANCE = "negative_balance"


@dataclass(frozen=True)
class FundParams:
    """Fund state and policy.

    ``start_year`` is the calendar year of the opening balance; period ``t``
    falls in ``start_year + t``.
    """

    initial_balance: float
    roi: float = 0.0
    start_year: int = 2024
    cash_mode: CashMode = CashMode.FULL_GROWTH
    enforce_liquidity: bool = True
    liquid_schedule: tuple[float, float, float, float] = DEFAULT_LIQUID_SCHEDULE
    cash_start: float = DEFAULT_CASH_START
    cash_rundown_years: int = DEFAULT_CASH_RUNDOWN_YEARS

    def __post_init__(self):
        object.__setattr__(self, "cash_mode", CashMode(self.cash_mode))
        object.__setattr__(self, "liquid_schedule", tuple(self.liquid_schedule))
        if not self.initial_balance >= 0:
            raise InputError(f"initial balance must be non-negative, got {self.initial_balance}")
        if not self.roi >= 0:
            raise InputError(f"roi must be non-negative, got {self.roi}")
        if len(self.liquid_schedule) != 4 or any(
            not 0 <= f <= 1 for f in self.liquid_schedule
        ):
            raise InputError("liquid schedule needs four fractions in [0, 1]")
        if not 0 <= self.cash_start <= 1:
            raise InputError("cash_start must be in [0, 1]")
        if self.cash_rundown_years <= 0:
            raise InputError("cash_rundown_years must be positive")

    def with_roi(self, roi: float) -> "FundParams":
        return replace(self, roi=roi)

    def with_balance(self, balance: float) -> "FundParams":
        return replace(self, initial_balance=balance)

    def min_liquid_fraction(self) -> float:
        """Smallest liquid + cash share the schedule can produce in any period."""
        return min(self.liquid_schedule)


@dataclass(frozen=True)
class LedgerRow:
    t: int
    year: int
    opening_balance: float
    growth_amount: float
    cost: float
    closing_balance: float
    liquid_fraction: float
    cash_fraction: float
    liquid_assets: float

    def as_csv_row(self) -> list[str]:
        return [
            str(self.t),
            str(self.year),
            repr(self.opening_balance),
            repr(self.growth_amount),
            repr(self.cost),
            repr(self.closing_balance),
            repr(self.liquid_fraction),
            repr(self.cash_fraction),
            repr(self.liquid_assets),
        ]


@dataclass(frozen=True)
class SimOutcome:
    """Ledger of completed periods plus the first violation, if any.

    On infeasibility ``rows`` stops just before the violating period.
    """

    rows: tuple[LedgerRow, ...] = field(default_factory=tuple)
    initial_balance: float = 0.0
    violation_t: int | None = None
    violation_year: int | None = None
    reason: Shortfall | None = None

    @property
    def feasible(self) -> bool:
        return self.reason is None

    @property
    def final_balance(self) -> float:
        return self.rows[-1].closing_balance if self.rows else self.initial_balance


def liquid_percentage(
    t: int, T: int, schedule: Sequence[float] = DEFAULT_LIQUID_SCHEDULE
) -> float:
    """Liquid share of the fund in period ``t`` by horizon quartile.

    Boundaries are compared against real-valued ``T/4``, ``T/2``, ``3T/4``.
    """
    if not 1 <= t <= T:
        raise InputError(f"period {t} outside [1, {T}]")
    if t < T / 4:
        return schedule[0]
    if t < T / 2:
        return schedule[1]
    if t < 3 * T / 4:
        return schedule[2]
    return schedule[3]


def cash_percentage(
    t: int,
    cash_start: float = DEFAULT_CASH_START,
    rundown_years: int = DEFAULT_CASH_RUNDOWN_YEARS,
) -> float:
    """Cash share in period ``t``; linear run-down from ``cash_start``, floored at 0."""
    if t < 1:
        raise InputError(f"period must be >= 1, got {t}")
    return max(cash_start - (cash_start / rundown_years) * (t - 1), 0.0)


def _check_costs(costs: Sequence[float]) -> None:
    if len(costs) == 0:
        raise InputError("cost vector is empty")
    for t, c in enumerate(costs, start=1):
        if not (c >= 0 and math.isfinite(c)):
            raise InputError(f"cost in period {t} must be finite and non-negative, got {c}")


def simulate(
    params: FundParams,
    costs: Sequence[float],
    *,
    check: bool = True,
    keep_rows: bool = True,
) -> SimOutcome:
    """Run the fund forward over ``costs`` and report the ledger or first shortfall.

    Each period checks liquidity against the opening balance, applies growth,
    pays the cost, then checks for a negative closing balance.
    """
    if check:
        _check_costs(costs)
    T = len(costs)
    roi = params.roi
    drag = params.cash_mode is CashMode.CASH_DRAG
    balance = params.initial_balance
    rows = []
    for t, cost in enumerate(costs, start=1):
        year = params.start_year + t
        liquid = liquid_percentage(t, T, params.liquid_schedule)
        cash = cash_percentage(t, params.cash_start, params.cash_rundown_years)
        liquid_assets = (liquid + cash) * balance
        if params.enforce_liquidity and cost > liquid_assets:
            return SimOutcome(tuple(rows), params.initial_balance, t, year, Shortfall.LIQUIDITY)
        growth = balance * roi * (1.0 - cash) if drag else balance * roi
        closing = balance + growth - cost
        if closing < 0:
            return SimOutcome(
                tuple(rows), params.initial_balance, t, year, Shortfall.NEGATIVE_BALANCE
            )
        if keep_rows:
            rows.append(
                LedgerRow(t, year, balance, growth, cost, closing, liquid, cash, liquid_assets)
            )
        balance = closing
    return SimOutcome(tuple(rows), params.initial_balance)


def is_feasible(params: FundParams, costs: Sequence[float]) -> tuple[bool, int | None]:
    """Feasibility and violating period, skipping input checks and ledger rows."""
    outcome = simulate(params, costs, check=False, keep_rows=False)
    return outcome.feasible, outcome.violation_t


def realized_avg_growth(ledger: SimOutcome | Sequence[LedgerRow]) -> float:
    """Mean of ``(closing + cost) / opening`` over the ledger, minus one."""
    rows = ledger.rows if isinstance(ledger, SimOutcome) else tuple(ledger)
    if not rows:
        raise InputError("empty ledger")
    ratios = []
    for row in rows:
        if row.opening_balance <= 0:
            raise InputError(f"opening balance is zero in period {row.t}; growth undefined")
        ratios.append((row.closing_balance + row.cost) / row.opening_balance)
    return math.fsum(ratios) / len(rows) - 1.0


def write_ledger_csv(outcome: SimOutcome, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(LEDGER_COLUMNS)
    for row in outcome.rows:
        writer.writerow(row.as_csv_row())
