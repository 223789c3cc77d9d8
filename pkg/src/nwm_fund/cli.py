"""Command-line interface.

Exit codes: 0 success, 2 infeasible or failed validation, 3 input error.
ROI flags take percent (3.70 means 3.70 %); everything internal is a fraction.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from nwm_fund.costmodel import (
    aggregate_annual_costs,
    load_cost_csv,
    projection_from_records,
)
from nwm_fund.errors import ConvergenceError, InputError
from nwm_fund.fund import CashMode, FundParams, simulate, write_ledger_csv
from nwm_fund.report import CompareJob, natural_key, run_compare, to_csv, to_markdown
from nwm_fund.scenario import (
    ScenarioSpec,
    builtin_scenario,
    builtin_scenarios,
    has_errors,
    load_scenario,
    projection_findings,
    validate_scenario,
)
from nwm_fund.solver import SolveConfig, injection_for, min_initial_balance, min_roi

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_INPUT = 3

KENFO_BALANCE_EUR = 21.41e9
KENFO_TARGET_ROI_PERCENT = 3.70

CASH_MODES = {"full": CashMode.FULL_GROWTH, "drag": CashMode.CASH_DRAG}
COMBINE_MODES = {"mult": "multiplicative", "add": "additive"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def percent_to_fraction(value: float) -> float:
    return value / 100.0


def _resolve_scenario(ref: str, combine: str, inflation: float | None) -> ScenarioSpec:
    if ref.startswith("builtin:"):
        try:
            n = int(ref.split(":", 1)[1])
        except ValueError:
            raise InputError(f"bad builtin scenario reference {ref!r}") from None
        spec = builtin_scenario(n)
    else:
        spec = load_scenario(ref, combine=combine)
    econ = replace(spec.economics, combine=combine)
    if inflation is not None:
        econ = replace(econ, inflation_rate=percent_to_fraction(inflation))
    return replace(spec, economics=econ)


def _cost_vector(args, spec: ScenarioSpec) -> list[float]:
    records = load_cost_csv(args.costs)
    projection = projection_from_records(
        records, spec.economics.base_year, spec.fdsa_completion_year
    )
    findings = projection_findings(projection, spec)
    if has_errors(findings):
        raise InputError("; ".join(f.message for f in findings))
    return aggregate_annual_costs(projection, spec.flags, spec.economics)


def _fund_params(args, spec: ScenarioSpec, balance: float = 0.0, roi: float = 0.0) -> FundParams:
    return FundParams(
        initial_balance=balance,
        roi=roi,
        start_year=spec.economics.base_year,
        cash_mode=CASH_MODES[args.cash_mode],
        enforce_liquidity=not args.no_liquidity,
    )


def _roi_arg(args) -> float:
    if args.roi < 0:
        raise InputError(f"--roi must be non-negative, got {args.roi}")
    return percent_to_fraction(args.roi)


def _setup(args) -> ScenarioSpec:
    return _resolve_scenario(args.scenario, COMBINE_MODES[args.escalation_combine], args.inflation)


def cmd_solve_roi(args) -> int:
    spec = _setup(args)
    costs = _cost_vector(args, spec)
    cfg = SolveConfig()
    if args.tolerance is not None:
        cfg = replace(cfg, tolerance_roi=percent_to_fraction(args.tolerance))
    result = min_roi(costs, _fund_params(args, spec, balance=args.initial_balance), cfg)
    if not result.feasible:
        print(
            f"infeasible: fund fails even at {cfg.roi_upper * 100:.0f}% ROI "
            f"(first shortfall in {result.binding_year})"
        )
        return EXIT_INFEASIBLE
    print(f"min_roi_percent: {result.value * 100:.6f}")
    print(f"iterations: {result.iterations}")
    print(f"binding_year: {result.binding_year if result.binding_year else '-'}")
    print(f"terminal_balance_eur: {result.terminal_balance:.2f}")
    return EXIT_OK


def _solve_balance(args, spec: ScenarioSpec):
    costs = _cost_vector(args, spec)
    cfg = SolveConfig()
    if args.tolerance is not None:
        cfg = replace(cfg, tolerance_balance=args.tolerance)
    return min_initial_balance(costs, _roi_arg(args), cfg, _fund_params(args, spec))


def cmd_solve_balance(args) -> int:
    spec = _setup(args)
    result = _solve_balance(args, spec)
    if not result.feasible:
        print(f"infeasible: no opening balance up to {result.value:.2f} suffices")
        return EXIT_INFEASIBLE
    print(f"min_initial_balance_eur: {result.value:.2f}")
    print(f"iterations: {result.iterations}")
    print(f"binding_year: {result.binding_year if result.binding_year else '-'}")
    return EXIT_OK


def cmd_inject(args) -> int:
    spec = _setup(args)
    result = _solve_balance(args, spec)
    if not result.feasible:
        print(f"infeasible: no opening balance up to {result.value:.2f} suffices")
        return EXIT_INFEASIBLE
    injection, raw_gap = injection_for(result.value, args.current_balance)
    print(f"required_balance_eur: {result.value:.2f}")
    print(f"current_balance_eur: {args.current_balance:.2f}")
    print(f"raw_gap_eur: {raw_gap:.2f}")
    print(f"injection_eur: {injection:.2f}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = _setup(args)
    costs = _cost_vector(args, spec)
    params = _fund_params(args, spec, balance=args.initial_balance, roi=_roi_arg(args))
    outcome = simulate(params, costs)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_ledger_csv(outcome, fh)
        report = sys.stdout
    else:
        write_ledger_csv(outcome, sys.stdout)
        report = sys.stderr
    if not outcome.feasible:
        print(
            f"infeasible: {outcome.reason.value} in year {outcome.violation_year} "
            f"(t={outcome.violation_t})",
            file=report,
        )
        return EXIT_INFEASIBLE
    print(f"terminal_balance_eur: {outcome.final_balance!r}", file=report)
    return EXIT_OK


def cmd_compare(args) -> int:
    combine = COMBINE_MODES[args.escalation_combine]
    costs_dir = Path(args.costs_dir)
    keyed: list[tuple[str, ScenarioSpec | None]] = []
    if args.scenarios == "builtin":
        keyed = [(str(n), s) for n, s in enumerate(builtin_scenarios(), start=1)]
    else:
        sdir = Path(args.scenarios)
        if not sdir.is_dir():
            raise InputError(f"scenario directory not found: {sdir}")
        for path in sorted(sdir.glob("*.json"), key=lambda p: natural_key(p.stem)):
            try:
                keyed.append((path.stem, load_scenario(path, combine=combine)))
            except InputError as exc:
                print(f"error: {exc}", file=sys.stderr)
                keyed.append((path.stem, None))
        if not keyed:
            raise InputError(f"no *.json scenarios in {sdir}")
    jobs = []
    for key, spec in keyed:
        if spec is not None:
            econ = replace(spec.economics, combine=combine)
            if args.inflation is not None:
                econ = replace(econ, inflation_rate=percent_to_fraction(args.inflation))
            spec = replace(spec, economics=econ)
        jobs.append(
            CompareJob(
                key=key,
                spec=spec,
                costs_path=costs_dir / f"{key}.csv",
                current_balance=args.current_balance,
                target_roi=_roi_arg(args),
                cash_mode=CASH_MODES[args.cash_mode],
                enforce_liquidity=not args.no_liquidity,
            )
        )
    rows = run_compare(jobs, workers=args.jobs)
    csv_text = to_csv(rows)
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    if args.markdown:
        Path(args.markdown).write_text(to_markdown(rows), encoding="utf-8")
    sys.stdout.write(to_markdown(rows))
    if not args.out:
        sys.stdout.write("\n" + csv_text)
    return EXIT_OK if all(r.ok for r in rows) else EXIT_INPUT


def cmd_validate(args) -> int:
    spec = _setup(args)
    findings = validate_scenario(spec)
    if not findings:
        print(f"{spec.name}: no findings")
    for f in findings:
        print(f"{spec.name}: {f}")
    return EXIT_INFEASIBLE if has_errors(findings) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--escalation-combine", choices=sorted(COMBINE_MODES), default="mult")
    common.add_argument(
        "--inflation", type=float, metavar="PERCENT", help="override the scenario inflation rate"
    )
    fund = _Parser(add_help=False)
    fund.add_argument("--cash-mode", choices=sorted(CASH_MODES), default="full")
    fund.add_argument("--no-liquidity", action="store_true", help="skip the liquid-assets check")
    scen = _Parser(add_help=False)
    scen.add_argument("--scenario", required=True, metavar="PATH|builtin:N")
    costs = _Parser(add_help=False)
    costs.add_argument("--costs", required=True, metavar="PATH")
    costs.add_argument("--tolerance", type=float)

    parser = _Parser(prog="nwm-fund", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve-roi", parents=[common, fund, scen, costs], help="minimal ROI")
    p.add_argument("--initial-balance", type=float, default=KENFO_BALANCE_EUR, metavar="EUR")
    p.set_defaults(func=cmd_solve_roi)

    for name, func, help_ in (
        ("solve-balance", cmd_solve_balance, "minimal opening balance"),
        ("inject", cmd_inject, "capital injection on top of the current balance"),
    ):
        p = sub.add_parser(name, parents=[common, fund, scen, costs], help=help_)
        p.add_argument("--roi", type=float, default=KENFO_TARGET_ROI_PERCENT, metavar="PERCENT")
        if name == "inject":
            p.add_argument(
                "--current-balance", type=float, default=KENFO_BALANCE_EUR, metavar="EUR"
            )
        p.set_defaults(func=func)

    p = sub.add_parser("simulate", parents=[common, fund, scen, costs], help="write a fund ledger")
    p.add_argument("--initial-balance", type=float, required=True, metavar="EUR")
    p.add_argument("--roi", type=float, required=True, metavar="PERCENT")
    p.add_argument("--out", metavar="PATH", help="ledger CSV (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", parents=[common, fund], help="scenario comparison table")
    p.add_argument("--scenarios", required=True, metavar="DIR|builtin")
    p.add_argument("--costs-dir", required=True, metavar="DIR", help="one <scenario>.csv each")
    p.add_argument("--current-balance", type=float, default=KENFO_BALANCE_EUR, metavar="EUR")
    p.add_argument("--roi", type=float, default=KENFO_TARGET_ROI_PERCENT, metavar="PERCENT")
    p.add_argument("--out", metavar="PATH", help="comparison CSV")
    p.add_argument("--markdown", metavar="PATH", help="comparison Markdown")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", parents=[common, scen], help="check scenario consistency")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ConvergenceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
