"""Bisection over the fund simulation for the smallest feasible ROI or opening balance.

Both searches use :func:`nwm_fund.fund.simulate` as their only feasibility
oracle, so they are exact duals of each other. Any shortfall, liquidity or
negative balance, moves the lower bound up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from nwm_fund.errors import ConvergenceError, InputError
from nwm_fund.fund import FundParams, _check_costs, is_feasible, simulate

_UPPER_WIDENINGS = 4


@dataclass(frozen=True)
class SolveConfig:
    """Search bounds and stopping rule. ROI values are fractions (1.0 == 100 %)."""

    roi_lower: float = 0.0
    roi_upper: float = 1.0
    balance_upper: float | None = None
    tolerance_roi: float = 1e-15
    tolerance_balance: float = 1e-5
    max_iterations: int = 200

    def __post_init__(self):
        if not self.roi_lower < self.roi_upper:
            raise InputError("roi_lower must be below roi_upper")
        if self.roi_lower < 0:
            raise InputError("roi_lower must be non-negative")
        if self.balance_upper is not None and self.balance_upper < 0:
            raise InputError("balance_upper must be non-negative")
        if not (self.tolerance_roi > 0 and self.tolerance_balance > 0):
            raise InputError("tolerances must be positive")
        if self.max_iterations <= 0:
            raise InputError("max_iterations must be positive")


@dataclass(frozen=True)
class SolveResult:
    value: float
    iterations: int
    feasible: bool
    binding_year: int | None
    terminal_balance: float
    lower: float = math.nan
    upper: float = math.nan


def _bisect(
    probe: Callable[[float], tuple[bool, int | None]],
    lo: float,
    hi: float,
    tol: float,
    max_iterations: int,
) -> tuple[float, float, int, int | None]:
    """Shrink ``[lo, hi]`` around the feasibility threshold.

    ``hi`` must already be feasible. Returns the final bracket, the number of
    iterations and the violating period from the last infeasible probe.
    """
    binding_t = None
    iterations = 0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if not lo < mid < hi:
            break  # bracket at float resolution
        iterations += 1
        if iterations > max_iterations:
            raise ConvergenceError(
                f"bisection did not reach tolerance {tol} in {max_iterations} iterations "
                f"(bracket [{lo!r}, {hi!r}])"
            )
        ok, t = probe(mid)
        if ok:
            hi = mid
        else:
            lo, binding_t = mid, t
    if binding_t is None:
        ok, binding_t = probe(lo)
        if ok:
            binding_t = None
    return lo, hi, iterations, binding_t


def min_roi(
    costs: Sequence[float], params: FundParams, cfg: SolveConfig | None = None
) -> SolveResult:
    """Smallest constant ROI that keeps the fund solvent from ``params.initial_balance``.

    ``params.roi`` is ignored. If even ``cfg.roi_upper`` fails, the result is
    reported with ``feasible=False`` rather than raised.
    """
    cfg = cfg or SolveConfig()
    _check_costs(costs)
    if not params.initial_balance > 0:
        raise InputError("initial balance must be positive to solve for ROI")

    def probe(roi: float) -> tuple[bool, int | None]:
        return is_feasible(params.with_roi(roi), costs)

    ok, t = probe(cfg.roi_upper)
    if not ok:
        return SolveResult(
            value=cfg.roi_upper,
            iterations=0,
            feasible=False,
            binding_year=params.start_year + t,
            terminal_balance=math.nan,
            lower=cfg.roi_lower,
            upper=cfg.roi_upper,
        )
    lo, hi, n, binding_t = _bisect(
        probe, cfg.roi_lower, cfg.roi_upper, cfg.tolerance_roi, cfg.max_iterations
    )
    terminal = simulate(params.with_roi(hi), costs, check=False).final_balance
    return SolveResult(
        value=(lo + hi) / 2,
        iterations=n,
        feasible=True,
        binding_year=None if binding_t is None else params.start_year + binding_t,
        terminal_balance=terminal,
        lower=lo,
        upper=hi,
    )


def default_balance_upper(costs: Sequence[float], params: FundParams) -> float:
    """An opening balance that is always sufficient at any ROI >= 0.

    Without the liquidity rule the undiscounted cost sum suffices. With it,
    dividing by the smallest liquid share keeps every payout covered.
    """
    total = math.fsum(costs)
    if not params.enforce_liquidity or total == 0:
        return total
    share = params.min_liquid_fraction()
    return total / share if share > 0 else math.inf


def min_initial_balance(
    costs: Sequence[float],
    roi: float,
    cfg: SolveConfig | None = None,
    params: FundParams | None = None,
) -> SolveResult:
    """Smallest opening balance that keeps the fund solvent at a constant ``roi``.

    ``params`` supplies the fund policy (cash mode, liquidity rule, start year);
    its balance and ROI are overridden.
    """
    cfg = cfg or SolveConfig()
    _check_costs(costs)
    if not roi >= 0:
        raise InputError(f"roi must be non-negative, got {roi}")
    params = (params or FundParams(initial_balance=0.0)).with_roi(roi)

    def probe(balance: float) -> tuple[bool, int | None]:
        return is_feasible(params.with_balance(balance), costs)

    upper = cfg.balance_upper
    if upper is None:
        upper = default_balance_upper(costs, params)
        ok, t = probe(upper) if math.isfinite(upper) else (False, 1)
        # the bound is exact in real arithmetic; widen past float rounding
        for _ in range(_UPPER_WIDENINGS):
            if ok or not math.isfinite(upper):
                break
            upper *= 2
            ok, t = probe(upper)
    else:
        ok, t = probe(upper)
    if not ok:
        return SolveResult(
            value=upper,
            iterations=0,
            feasible=False,
            binding_year=params.start_year + t,
            terminal_balance=math.nan,
            lower=0.0,
            upper=upper,
        )
    lo, hi, n, binding_t = _bisect(probe, 0.0, upper, cfg.tolerance_balance, cfg.max_iterations)
    terminal = simulate(params.with_balance(hi), costs, check=False).final_balance
    return SolveResult(
        value=(lo + hi) / 2,
        iterations=n,
        feasible=True,
        binding_year=None if binding_t is None else params.start_year + binding_t,
        terminal_balance=terminal,
        lower=lo,
        upper=hi,
    )


def injection_for(required: float, current_balance: float) -> tuple[float, float]:
    """``(injection, raw_gap)`` with the injection clamped at zero."""
    raw_gap = required - current_balance
    return max(raw_gap, 0.0), raw_gap


def capital_injection(
    costs: Sequence[float],
    roi: float,
    current_balance: float,
    cfg: SolveConfig | None = None,
    params: FundParams | None = None,
) -> tuple[float, float]:
    """One-time top-up needed today: required opening balance minus current balance."""
    result = min_initial_balance(costs, roi, cfg, params)
    if not result.feasible:
        raise InputError(
            f"no opening balance up to {result.value!r} covers the costs at roi={roi}"
        )
    return injection_for(result.value, current_balance)
