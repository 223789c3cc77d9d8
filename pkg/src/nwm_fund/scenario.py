"""Site-selection scenarios, milestone timelines and delay-adjusted cost projections."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field, replace
from decimal import Decimal
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

from nwm_fund.costmodel import (
    CIS_CATEGORIES,
    ContainerFleet,
    CostCategory,
    CostComponentKind,
    CostGroup,
    CostProjection,
    CostRecord,
    CoverageFlags,
    EscalationParams,
    StorageCostParams,
    allocate_over_period,
    cis_total_cost,
    replacement_schedule,
    to_money,
)
from nwm_fund.errors import InputError, ValidationError

MIN_FDSA_YEARS = 49
MIN_WINDOW_YEARS = 30
DEFAULT_TRANSPORT_OFFSET = 14
DEFAULT_DISPOSAL_OFFSET = 19
DEFAULT_CIS_CAPACITY_MTHM = 10_500.0


class Phase3Method(str, Enum):
    BOREHOLES = "boreholes"
    EXPLORATORY_MINES = "exploratory_mines"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True)
class Finding:
    severity: Severity
    message: str

    def __str__(self) -> str:
        return f"{self.severity.value}: {self.message}"


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    phase1_completion: int
    phase2_duration: int
    phase3_duration: int
    phase3_method: Phase3Method
    risk_delay: int
    fdsp_year: int | None
    fdsa_completion_year: int
    cis_enabled: bool = False
    cis_delay: int = 0
    cis_site: str | None = None
    cis_capacity_mthm: float = DEFAULT_CIS_CAPACITY_MTHM
    economics: EscalationParams = field(default_factory=EscalationParams)
    flags: CoverageFlags = field(default_factory=CoverageFlags.kenfo)

    def __post_init__(self):
        object.__setattr__(self, "phase3_method", Phase3Method(self.phase3_method))
        if min(self.phase2_duration, self.phase3_duration, self.risk_delay, self.cis_delay) < 0:
            raise InputError("durations and delays must be non-negative")

    @property
    def additive_fdsp(self) -> int:
        """Site-selection year implied by summing the phase durations and risk delay."""
        return (
            self.phase1_completion + self.phase2_duration + self.phase3_duration + self.risk_delay
        )


@dataclass(frozen=True)
class Timeline:
    fdsp_year: int
    transport_start: int
    transport_end: int
    disposal_start: int
    disposal_end: int
    milestones: tuple[tuple[int, str], ...] = ()


def _row(n, p2, p3, method, risk, fdsp, cis_delay, fdsa, label):
    cis = cis_delay > 0
    return ScenarioSpec(
        name=f"{n}: {label}",
        phase1_completion=2028,
        phase2_duration=p2,
        phase3_duration=p3,
        phase3_method=method,
        risk_delay=risk,
        fdsp_year=fdsp,
        fdsa_completion_year=fdsa,
        cis_enabled=cis,
        cis_delay=cis_delay,
        cis_capacity_mthm=DEFAULT_CIS_CAPACITY_MTHM,
    )


def builtin_scenarios() -> list[ScenarioSpec]:
    """The seven reference scenarios: de jure, three de facto delays, three CIS variants."""
    B, M = Phase3Method.BOREHOLES, Phase3Method.EXPLORATORY_MINES
    return [
        _row(1, 10, 5, B, 3, 2031, 0, 2080, "de jure"),
        _row(2, 10, 5, B, 3, 2046, 0, 2095, "de facto"),
        _row(3, 10, 13, M, 4, 2057, 0, 2106, "de facto"),
        _row(4, 12, 23, M, 5, 2068, 0, 2118, "de facto"),
        _row(5, 10, 5, B, 3, 2070, 15, 2120, "consolidated interim storage"),
        _row(6, 10, 13, M, 4, None, 20, 2154, "consolidated interim storage"),
        _row(7, 12, 23, M, 5, None, 25, 2180, "consolidated interim storage"),
    ]


def builtin_scenario(n: int) -> ScenarioSpec:
    specs = builtin_scenarios()
    if not 1 <= n <= len(specs):
        raise InputError(f"no builtin scenario {n}; choose 1..{len(specs)}")
    return specs[n - 1]


def build_timeline(
    spec: ScenarioSpec,
    *,
    transport_offset: int = DEFAULT_TRANSPORT_OFFSET,
    disposal_offset: int = DEFAULT_DISPOSAL_OFFSET,
    transport_years: int = MIN_WINDOW_YEARS,
) -> Timeline:
    """Milestones from site selection; transport and disposal start at fixed offsets."""
    if spec.fdsp_year is None:
        raise InputError(
            f"scenario {spec.name!r} has no site-selection year; supply fdsp_year "
            "(e.g. via dataclasses.replace) before building a timeline"
        )
    fdsp = spec.fdsp_year
    t_start = fdsp + transport_offset
    t_end = t_start + transport_years
    d_start = fdsp + disposal_offset
    d_end = spec.fdsa_completion_year
    if t_end - t_start < MIN_WINDOW_YEARS:
        raise InputError(f"transport window {t_start}-{t_end} shorter than {MIN_WINDOW_YEARS} years")
    if d_end - d_start < MIN_WINDOW_YEARS:
        raise InputError(f"disposal window {d_start}-{d_end} shorter than {MIN_WINDOW_YEARS} years")
    if d_end < fdsp + MIN_FDSA_YEARS:
        raise InputError(f"repository closure {d_end} earlier than {fdsp + MIN_FDSA_YEARS}")
    milestones = sorted(
        [
            (fdsp, "site selected"),
            (t_start, "transport to repository begins"),
            (d_start, "disposal begins"),
            (t_end, "transport ends"),
            (d_end, "disposal complete"),
        ]
    )
    return Timeline(fdsp, t_start, t_end, d_start, d_end, tuple(milestones))


def validate_scenario(spec: ScenarioSpec) -> list[Finding]:
    findings = []
    if spec.fdsp_year is not None:
        span = spec.fdsa_completion_year - spec.fdsp_year
        if span < MIN_FDSA_YEARS:
            findings.append(
                Finding(
                    Severity.ERROR,
                    f"final disposal activities span {span} years "
                    f"({spec.fdsp_year}-{spec.fdsa_completion_year}); at least "
                    f"{MIN_FDSA_YEARS} required",
                )
            )
        if spec.fdsp_year < spec.additive_fdsp:
            findings.append(
                Finding(
                    Severity.WARNING,
                    f"site selection {spec.fdsp_year} precedes the sum of phase durations "
                    f"and risk delay ({spec.additive_fdsp})",
                )
            )
    if spec.cis_delay > 0 and not spec.cis_enabled:
        findings.append(
            Finding(Severity.ERROR, f"cis_delay {spec.cis_delay} set but CIS is disabled")
        )
    return findings


def has_errors(findings: Iterable[Finding]) -> bool:
    return any(f.severity is Severity.ERROR for f in findings)


def projection_findings(projection: CostProjection, spec: ScenarioSpec) -> list[Finding]:
    """Cross-checks between a cost projection and the scenario it is evaluated under."""
    findings = []
    if projection.base_year != spec.economics.base_year:
        findings.append(
            Finding(
                Severity.ERROR,
                f"cost base year {projection.base_year} differs from scenario base year "
                f"{spec.economics.base_year}",
            )
        )
    cis = projection.categories() & CIS_CATEGORIES
    if cis and not spec.cis_enabled:
        names = ", ".join(sorted(c.value for c in cis))
        findings.append(
            Finding(Severity.ERROR, f"CIS categories ({names}) present but CIS is disabled")
        )
    return findings


def shift_costs(
    base: CostProjection,
    from_timeline: Timeline,
    to_timeline: Timeline,
    fleets: Sequence[ContainerFleet] = (),
) -> tuple[CostProjection, list[Finding]]:
    """Move a base projection onto a delayed timeline.

    Final-disposal records move by the change in site-selection year.
    Each interim-storage series (per site and component) is extended past its
    last year by the change in transport end, repeating its last amount.
    Cask replacements due before the new transport end are added. The
    horizon follows a later repository closure and any record moved past it.
    """
    findings: list[Finding] = []
    delay = to_timeline.fdsp_year - from_timeline.fdsp_year
    extension = to_timeline.transport_end - from_timeline.transport_end

    out: list[CostRecord] = []
    last_interim: dict[tuple[str, CostComponentKind], CostRecord] = {}
    for rec in base.records:
        if rec.group is CostGroup.FINAL_DISPOSAL and delay:
            rec = replace(rec, year=rec.year + delay)
            if rec.year < base.base_year:
                raise InputError(
                    f"shift of {delay} years moves a {rec.category.value} record before "
                    f"base year {base.base_year}"
                )
        if rec.category is CostCategory.INTERIM_STORAGE:
            key = (rec.site, rec.component)
            prev = last_interim.get(key)
            if prev is None or rec.year > prev.year:
                last_interim[key] = rec
        out.append(rec)

    if extension > 0:
        same_year = defaultdict(Decimal)
        for rec in base.records:
            if rec.category is CostCategory.INTERIM_STORAGE:
                key = (rec.site, rec.component)
                if rec.year == last_interim[key].year:
                    same_year[key] += rec.amount
        for key in sorted(last_interim, key=lambda k: (k[0], k[1].value)):
            last = last_interim[key]
            for year in range(last.year + 1, last.year + extension + 1):
                out.append(replace(last, year=year, amount=same_year[key]))

    for fleet in fleets:
        for year, cost in replacement_schedule(fleet, to_timeline.transport_end):
            if year < base.base_year:
                findings.append(
                    Finding(
                        Severity.INFO,
                        f"cask replacement at {fleet.site} in {year} predates base year; skipped",
                    )
                )
                continue
            out.append(
                CostRecord(
                    year,
                    fleet.site,
                    CostCategory.CONTAINERS_TRANSPORT_OPERATIONAL_WASTE,
                    CostComponentKind.CAPITAL,
                    cost,
                )
            )

    closure_shift = max(to_timeline.disposal_end - from_timeline.disposal_end, 0)
    horizon = max([base.horizon_end + closure_shift] + [r.year for r in out])
    if horizon > base.horizon_end:
        findings.append(
            Finding(Severity.INFO, f"horizon extended from {base.horizon_end} to {horizon}")
        )
    return CostProjection(base.base_year, horizon, tuple(out)), findings


def cis_records(
    spec: ScenarioSpec,
    storage: StorageCostParams,
    start: int,
    end: int,
    *,
    site: str | None = None,
) -> list[CostRecord]:
    """Consolidated-storage cost for the scenario's waste volume spread over ``start..end``."""
    if not spec.cis_enabled:
        raise InputError(f"scenario {spec.name!r} does not use consolidated interim storage")
    total = cis_total_cost(storage, spec.cis_capacity_mthm)
    return allocate_over_period(
        to_money(round(total, 2)),
        start,
        end,
        site=site or spec.cis_site or "cis",
        category=CostCategory.CONSOLIDATED_INTERIM_STORAGE,
        component=CostComponentKind.CAPITAL,
    )


# -- JSON --------------------------------------------------------------------

_TOP_KEYS = {
    "name",
    "phase1_completion",
    "phase2_duration_years",
    "phase3_duration_years",
    "phase3_method",
    "risk_delay_years",
    "fdsp_year",
    "cis",
    "fdsa_completion_year",
    "economics",
    "flags",
}
_CIS_KEYS = {"enabled", "delay_years", "site", "capacity_mthm"}
_ECON_KEYS = {"inflation_rate", "nsci_rate", "base_year"}
_FLAG_KEYS = {"i", "j", "k"}


def _exact_keys(obj: Any, expected: set[str], where: str) -> dict:
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    unknown = set(obj) - expected
    missing = expected - set(obj)
    if unknown:
        raise ValidationError(f"{where}: unknown keys {sorted(unknown)}")
    if missing:
        raise ValidationError(f"{where}: missing keys {sorted(missing)}")
    return obj


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{where}: expected an integer, got {value!r}")
    return value


def _num(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where}: expected a number, got {value!r}")
    return float(value)


def scenario_from_dict(
    data: Any, *, where: str = "scenario", combine: str = "multiplicative"
) -> ScenarioSpec:
    d = _exact_keys(data, _TOP_KEYS, where)
    cis = _exact_keys(d["cis"], _CIS_KEYS, f"{where}.cis")
    econ = _exact_keys(d["economics"], _ECON_KEYS, f"{where}.economics")
    flags = _exact_keys(d["flags"], _FLAG_KEYS, f"{where}.flags")
    if not isinstance(d["name"], str):
        raise ValidationError(f"{where}.name: expected a string")
    if not isinstance(cis["enabled"], bool):
        raise ValidationError(f"{where}.cis.enabled: expected a boolean")
    if cis["site"] is not None and not isinstance(cis["site"], str):
        raise ValidationError(f"{where}.cis.site: expected a string or null")
    try:
        return ScenarioSpec(
            name=d["name"],
            phase1_completion=_int(d["phase1_completion"], f"{where}.phase1_completion"),
            phase2_duration=_int(d["phase2_duration_years"], f"{where}.phase2_duration_years"),
            phase3_duration=_int(d["phase3_duration_years"], f"{where}.phase3_duration_years"),
            phase3_method=Phase3Method(d["phase3_method"]),
            risk_delay=_int(d["risk_delay_years"], f"{where}.risk_delay_years"),
            fdsp_year=None
            if d["fdsp_year"] is None
            else _int(d["fdsp_year"], f"{where}.fdsp_year"),
            fdsa_completion_year=_int(d["fdsa_completion_year"], f"{where}.fdsa_completion_year"),
            cis_enabled=cis["enabled"],
            cis_delay=_int(cis["delay_years"], f"{where}.cis.delay_years"),
            cis_site=cis["site"],
            cis_capacity_mthm=_num(cis["capacity_mthm"], f"{where}.cis.capacity_mthm"),
            economics=EscalationParams(
                inflation_rate=_num(econ["inflation_rate"], f"{where}.economics.inflation_rate"),
                nsci_rate=_num(econ["nsci_rate"], f"{where}.economics.nsci_rate"),
                base_year=_int(econ["base_year"], f"{where}.economics.base_year"),
                combine=combine,
            ),
            flags=CoverageFlags(
                i=_int(flags["i"], f"{where}.flags.i"),
                j=_int(flags["j"], f"{where}.flags.j"),
                k=_int(flags["k"], f"{where}.flags.k"),
            ),
        )
    except ValidationError:
        raise
    except ValueError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def scenario_to_dict(spec: ScenarioSpec) -> dict:
    return {
        "name": spec.name,
        "phase1_completion": spec.phase1_completion,
        "phase2_duration_years": spec.phase2_duration,
        "phase3_duration_years": spec.phase3_duration,
        "phase3_method": spec.phase3_method.value,
        "risk_delay_years": spec.risk_delay,
        "fdsp_year": spec.fdsp_year,
        "cis": {
            "enabled": spec.cis_enabled,
            "delay_years": spec.cis_delay,
            "site": spec.cis_site,
            "capacity_mthm": spec.cis_capacity_mthm,
        },
        "fdsa_completion_year": spec.fdsa_completion_year,
        "economics": {
            "inflation_rate": spec.economics.inflation_rate,
            "nsci_rate": spec.economics.nsci_rate,
            "base_year": spec.economics.base_year,
        },
        "flags": {"i": spec.flags.i, "j": spec.flags.j, "k": spec.flags.k},
    }


def load_scenario(path: str | Path, *, combine: str = "multiplicative") -> ScenarioSpec:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    return scenario_from_dict(data, where=str(path), combine=combine)


def dump_scenario(spec: ScenarioSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(spec), indent=2) + "\n", encoding="utf-8")
