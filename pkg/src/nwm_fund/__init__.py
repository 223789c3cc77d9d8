"""Funding adequacy model for long-horizon nuclear waste management liabilities.

The package projects annual cost streams, simulates an external segregated
fund year by year and bisects over that simulation for the smallest return
on investment or the smallest opening balance that keeps the fund solvent.
"""

from nwm_fund.costmodel import (
    ContainerFleet,
    CostCategory,
    CostComponentKind,
    CostProjection,
    CostRecord,
    CoverageFlags,
    EscalationParams,
    StorageCostParams,
    aggregate_annual_costs,
    allocate_over_period,
    cis_total_cost,
    escalate,
    replacement_schedule,
    unit_storage_cost,
)
from nwm_fund.errors import ConvergenceError, InputError, ValidationError
from nwm_fund.fund import (
    CashMode,
    FundParams,
    LedgerRow,
    SimOutcome,
    cash_percentage,
    liquid_percentage,
    realized_avg_growth,
    simulate,
)
from nwm_fund.scenario import (
    Finding,
    ScenarioSpec,
    Timeline,
    build_timeline,
    builtin_scenarios,
    shift_costs,
    validate_scenario,
)
from nwm_fund.solver import (
    SolveConfig,
    SolveResult,
    capital_injection,
    min_initial_balance,
    min_roi,
)

__version__ = "0.1.0"
