"""Scenario comparison table: total cost, required ROI, required balance, injection."""

from __future__ import annotations

import csv
import io
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Sequence

from nwm_fund.costmodel import (
    CENT,
    aggregate_annual_costs,
    load_cost_csv,
    projection_from_records,
)
from nwm_fund.errors import ConvergenceError, InputError
from nwm_fund.fund import CashMode, FundParams
from nwm_fund.scenario import ScenarioSpec, has_errors, projection_findings
from nwm_fund.solver import SolveConfig, min_initial_balance, min_roi

CSV_HEADER = (
    "scenario",
    "timeframe_until",
    "total_cost_nominal_eur",
    "required_roi_percent",
    "balance_required_eur",
    "capital_injection_eur",
)
MD_HEADER = (
    "Scenario",
    "Timeframe (until)",
    "Total Cost Projections",
    "Required Yearly ROI",
    "Balance Required",
    "Required Capital Injection",
)
BILLION = Decimal("1e9")


def cents(value: float) -> Decimal:
    return Decimal(repr(value)).quantize(CENT, rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class ComparisonRow:
    scenario: str
    timeframe_until: int | None
    total_cost_nominal: Decimal | None = None
    required_roi: float | None = None  # percent
    balance_required: Decimal | None = None
    capital_injection: Decimal | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class CompareJob:
    key: str
    spec: ScenarioSpec | None
    costs_path: Path
    current_balance: float
    target_roi: float
    cash_mode: CashMode = CashMode.FULL_GROWTH
    enforce_liquidity: bool = True
    config: SolveConfig = SolveConfig()


def solve_costs(
    costs: Sequence[float],
    *,
    current_balance: float,
    target_roi: float,
    params: FundParams,
    config: SolveConfig,
) -> tuple[float, Decimal, Decimal]:
    """ROI percent, required balance and injection (both to the cent) for one cost vector."""
    roi_res = min_roi(costs, params.with_balance(current_balance), config)
    if not roi_res.feasible:
        raise InputError(f"no ROI up to {config.roi_upper:.0%} keeps the fund solvent")
    bal_res = min_initial_balance(costs, target_roi, config, params)
    if not bal_res.feasible:
        raise InputError("no feasible opening balance found")
    roi_pct, balance = roi_res.value * 100.0, cents(bal_res.value)
    injection = max(balance - cents(current_balance), Decimal("0.00"))
    return roi_pct, balance, injection


def compare_one(job: CompareJob) -> ComparisonRow:
    spec = job.spec
    if spec is None:
        return ComparisonRow(job.key, None, error="scenario could not be loaded")
    try:
        if not job.costs_path.is_file():
            raise InputError(f"missing costs file {job.costs_path}")
        records = load_cost_csv(job.costs_path)
        projection = projection_from_records(
            records, spec.economics.base_year, spec.fdsa_completion_year
        )
        findings = projection_findings(projection, spec)
        if has_errors(findings):
            raise InputError("; ".join(f.message for f in findings))
        costs = aggregate_annual_costs(projection, spec.flags, spec.economics)
        params = FundParams(
            initial_balance=job.current_balance,
            start_year=spec.economics.base_year,
            cash_mode=job.cash_mode,
            enforce_liquidity=job.enforce_liquidity,
        )
        roi_pct, balance, injection = solve_costs(
            costs,
            current_balance=job.current_balance,
            target_roi=job.target_roi,
            params=params,
            config=job.config,
        )
    except (InputError, ConvergenceError, OSError) as exc:
        return ComparisonRow(spec.name, spec.fdsa_completion_year, error=str(exc))
    return ComparisonRow(
        scenario=spec.name,
        timeframe_until=projection.horizon_end,
        total_cost_nominal=cents(math.fsum(costs)),
        required_roi=roi_pct,
        balance_required=balance,
        capital_injection=injection,
    )


def run_compare(jobs: Sequence[CompareJob], workers: int = 1) -> list[ComparisonRow]:
    """Solve every job; output order always follows ``jobs``."""
    if workers <= 1 or len(jobs) <= 1:
        return [compare_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(compare_one, jobs))


def natural_key(text: str):
    return [int(p) if p.isdigit() else p for p in re.split(r"(\d+)", text)]


def to_csv(rows: Sequence[ComparisonRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        if not r.ok:
            writer.writerow([r.scenario, r.timeframe_until or ""] + ["ERROR"] * 4)
            continue
        writer.writerow(
            [
                r.scenario,
                r.timeframe_until,
                f"{r.total_cost_nominal:f}",
                f"{r.required_roi:.10f}",
                f"{r.balance_required:f}",
                f"{r.capital_injection:f}",
            ]
        )
    return buf.getvalue()


def _billions(x: Decimal) -> str:
    return f"€{(x / BILLION).quantize(CENT, rounding=ROUND_HALF_UP)} billion"


def to_markdown(rows: Sequence[ComparisonRow]) -> str:
    lines = [
        "| " + " | ".join(MD_HEADER) + " |",
        "|" + "|".join(["---"] + ["---:"] * (len(MD_HEADER) - 1)) + "|",
    ]
    for r in rows:
        if not r.ok:
            cells = [r.scenario, str(r.timeframe_until or ""), "ERROR", "ERROR", "ERROR", "ERROR"]
        else:
            cells = [
                r.scenario,
                str(r.timeframe_until),
                _billions(r.total_cost_nominal),
                f"{r.required_roi:.2f}%",
                _billions(r.balance_required),
                _billions(r.capital_injection),
            ]
        lines.append("| " + " | ".join(cells) + " |")
    errors = [r for r in rows if not r.ok]
    if errors:
        lines.append("")
        lines.extend(f"- {r.scenario}: ERROR: {r.error}" for r in errors)
    return "\n".join(lines) + "\n"
