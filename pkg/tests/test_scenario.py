import json
from dataclasses import replace
from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nwm_fund.costmodel import (
    ContainerFleet,
    CostCategory,
    CostComponentKind,
    CostProjection,
    CostRecord,
    StorageCostParams,
)
from nwm_fund.errors import InputError, ValidationError
from nwm_fund.scenario import (
    Phase3Method,
    ScenarioSpec,
    Severity,
    build_timeline,
    builtin_scenario,
    builtin_scenarios,
    cis_records,
    has_errors,
    load_scenario,
    projection_findings,
    scenario_from_dict,
    scenario_to_dict,
    shift_costs,
    validate_scenario,
)


def clean_spec(**kw):
    base = dict(
        name="synthetic",
        phase1_completion=2028,
        phase2_duration=10,
        phase3_duration=5,
        phase3_method="boreholes",
        risk_delay=3,
        fdsp_year=2046,
        fdsa_completion_year=2095,
    )
    base.update(kw)
    return ScenarioSpec(**base)


def rec(year, category, amount, component="operation", site="A"):
    return CostRecord(year, site, CostCategory(category), CostComponentKind(component), amount)


class TestBuiltins:
    def test_seven_rows(self):
        specs = builtin_scenarios()
        assert len(specs) == 7
        assert [s.fdsp_year for s in specs] == [2031, 2046, 2057, 2068, 2070, None, None]
        assert [s.fdsa_completion_year for s in specs] == [2080, 2095, 2106, 2118, 2120, 2154, 2180]
        assert [s.cis_delay for s in specs] == [0, 0, 0, 0, 15, 20, 25]

    def test_scenario_one(self):
        s = builtin_scenario(1)
        assert (s.fdsp_year, s.fdsa_completion_year) == (2031, 2080)
        assert s.phase3_method is Phase3Method.BOREHOLES

    def test_scenario_four(self):
        s = builtin_scenario(4)
        assert (s.phase2_duration, s.phase3_duration, s.risk_delay) == (12, 23, 5)
        assert (s.fdsp_year, s.fdsa_completion_year) == (2068, 2118)
        assert s.phase3_method is Phase3Method.EXPLORATORY_MINES

    def test_scenario_five(self):
        s = builtin_scenario(5)
        assert s.cis_enabled and s.cis_delay == 15 and s.fdsa_completion_year == 2120

    def test_kenfo_defaults(self):
        for s in builtin_scenarios():
            assert (s.flags.i, s.flags.j, s.flags.k) == (1, 1, 0)
            assert s.economics.inflation_rate == 0.0172
            assert s.economics.nsci_rate == 0.0197
            assert s.economics.base_year == 2024

    def test_min_fdsa_span(self):
        for s in builtin_scenarios():
            if s.fdsp_year is not None:
                assert s.fdsa_completion_year - s.fdsp_year >= 49

    @pytest.mark.parametrize("n", [0, 8])
    def test_unknown(self, n):
        with pytest.raises(InputError):
            builtin_scenario(n)


class TestTimeline:
    def test_de_jure(self):
        tl = build_timeline(builtin_scenario(1))
        assert (tl.transport_start, tl.transport_end) == (2045, 2075)
        assert (tl.disposal_start, tl.disposal_end) == (2050, 2080)

    def test_scenario_two(self):
        tl = build_timeline(builtin_scenario(2))
        assert (tl.transport_start, tl.transport_end) == (2060, 2090)
        assert (tl.disposal_start, tl.disposal_end) == (2065, 2095)

    def test_custom_offsets(self):
        tl = build_timeline(builtin_scenario(1), transport_offset=0, disposal_offset=19)
        assert (tl.transport_start, tl.transport_end) == (2031, 2061)

    @pytest.mark.parametrize("n", [6, 7])
    def test_unknown_fdsp(self, n):
        with pytest.raises(InputError, match="fdsp_year"):
            build_timeline(builtin_scenario(n))

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_invariants_hold_for_builtins(self, n):
        spec = builtin_scenario(n)
        tl = build_timeline(spec)
        assert tl.transport_end - tl.transport_start >= 30
        assert tl.disposal_end - tl.disposal_start >= 30
        assert tl.disposal_end >= tl.fdsp_year + 49
        assert [y for y, _ in tl.milestones] == sorted(y for y, _ in tl.milestones)


class TestValidate:
    def test_scenario_three_exact_49(self):
        assert not has_errors(validate_scenario(builtin_scenario(3)))

    def test_48_years_is_error(self):
        findings = validate_scenario(clean_spec(fdsp_year=2031, fdsa_completion_year=2079))
        assert has_errors(findings)

    def test_scenario_one_advisory_only(self):
        findings = validate_scenario(builtin_scenario(1))
        assert [f.severity for f in findings] == [Severity.WARNING]
        assert "2046" in findings[0].message

    def test_clean(self):
        assert validate_scenario(clean_spec()) == []

    def test_cis_delay_without_cis(self):
        assert has_errors(validate_scenario(clean_spec(cis_delay=5)))

    def test_all_builtins_free_of_errors(self):
        for s in builtin_scenarios():
            assert not has_errors(validate_scenario(s))


BASE = CostProjection(
    2024,
    2080,
    [
        rec(2045, "haw_final_disposal", 100, "capital"),
        rec(2060, "konrad_repository", 50, "disposal"),
        rec(2074, "interim_storage", 10, site="Ahaus"),
        rec(2075, "interim_storage", 10, site="Ahaus"),
        rec(2075, "interim_storage", 3, component="regulatory", site="Ahaus"),
        rec(2030, "containers_transport_operational_waste", 7, "transport"),
    ],
)
TL1 = build_timeline(builtin_scenario(1))
TL2 = build_timeline(builtin_scenario(2))
TL4 = build_timeline(builtin_scenario(4))


class TestShiftCosts:
    def test_identity(self):
        out, findings = shift_costs(BASE, TL1, TL1, [])
        assert out == BASE
        assert findings == []

    def test_final_disposal_shift(self):
        proj = CostProjection(2024, 2080, [rec(2045, "haw_final_disposal", 1, "capital")])
        out, _ = shift_costs(proj, TL1, TL2)
        assert [r.year for r in out.records] == [2060]

    def test_interim_extension(self):
        out, findings = shift_costs(BASE, TL1, TL2)
        ahaus_op = sorted(
            r.year for r in out.records
            if r.category is CostCategory.INTERIM_STORAGE and r.component is CostComponentKind.OPERATION
        )
        assert ahaus_op == list(range(2074, 2091))
        extended = [r for r in out.records if r.category is CostCategory.INTERIM_STORAGE and r.year > 2075]
        assert all(r.amount in (Decimal(10), Decimal(3)) for r in extended)
        assert out.horizon_end == 2095
        assert any("horizon extended" in f.message for f in findings)

    def test_replacements_inserted(self):
        fleet = ContainerFleet("Biblis", 10, load_year=1992)
        out, _ = shift_costs(BASE, TL1, TL4, [fleet])
        added = [
            r.year for r in out.records
            if r.site == "Biblis" and r.category is CostCategory.CONTAINERS_TRANSPORT_OPERATIONAL_WASTE
        ]
        assert TL4.transport_end == 2112 and added == [2032, 2072]

    def test_replacements_for_2118_transfer(self):
        tl = replace(TL4, transport_end=2118)
        out, _ = shift_costs(BASE, TL1, tl, [ContainerFleet("Neckarwestheim", 10, 1992)])
        added = [r.year for r in out.records if r.site == "Neckarwestheim"]
        assert added == [2032, 2072, 2112]

    def test_past_replacements_skipped(self):
        out, findings = shift_costs(BASE, TL1, TL1, [ContainerFleet("Old", 1, 1970)])
        assert [r.year for r in out.records if r.site == "Old"] == [2050]
        assert any(f.severity is Severity.INFO and "2010" in f.message for f in findings)

    @given(delay=st.integers(0, 60), amounts=st.lists(st.integers(0, 10**6), min_size=1, max_size=10))
    def test_base_total_preserved(self, delay, amounts):
        records = [rec(2040 + i, "haw_final_disposal", a, "capital") for i, a in enumerate(amounts)]
        records += [rec(2030 + i, "interim_storage", a) for i, a in enumerate(amounts)]
        proj = CostProjection(2024, 2080, records)
        to = replace(TL1, fdsp_year=TL1.fdsp_year + delay)  # same transport end: no extension
        out, _ = shift_costs(proj, TL1, to)
        assert out.total() == proj.total()


class TestJson:
    def test_round_trip(self):
        for spec in builtin_scenarios():
            assert scenario_from_dict(json.loads(json.dumps(scenario_to_dict(spec)))) == spec

    def test_unknown_key(self):
        d = scenario_to_dict(clean_spec())
        d["colour"] = "red"
        with pytest.raises(ValidationError, match="colour"):
            scenario_from_dict(d)

    def test_unknown_nested_key(self):
        d = scenario_to_dict(clean_spec())
        d["flags"]["l"] = 1
        with pytest.raises(ValidationError, match="flags"):
            scenario_from_dict(d)

    def test_missing_key(self):
        d = scenario_to_dict(clean_spec())
        del d["fdsp_year"]
        with pytest.raises(ValidationError, match="fdsp_year"):
            scenario_from_dict(d)

    @pytest.mark.parametrize(
        "path,value",
        [(("phase3_method",), "drilling"), (("flags", "k"), 2), (("fdsp_year",), "2031"), (("cis", "enabled"), 1)],
    )
    def test_bad_values(self, path, value):
        d = scenario_to_dict(clean_spec())
        target = d
        for key in path[:-1]:
            target = target[key]
        target[path[-1]] = value
        with pytest.raises(ValidationError):
            scenario_from_dict(d)

    def test_load_file(self, tmp_path):
        p = tmp_path / "s.json"
        p.write_text(json.dumps(scenario_to_dict(builtin_scenario(2))))
        assert load_scenario(p) == builtin_scenario(2)

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "s.json"
        p.write_text("{not json")
        with pytest.raises(ValidationError):
            load_scenario(p)


class TestCisCosts:
    def test_allocation_of_offsite_pool(self):
        out = cis_records(builtin_scenario(5), StorageCostParams.offsite_pool(), 2040, 2059)
        assert len(out) == 20
        assert sum(r.amount for r in out) == Decimal("2066100000.00")
        assert all(r.category is CostCategory.CONSOLIDATED_INTERIM_STORAGE for r in out)

    def test_requires_cis(self):
        with pytest.raises(InputError):
            cis_records(builtin_scenario(1), StorageCostParams.offsite_pool(), 2040, 2059)

    def test_projection_findings(self):
        proj = CostProjection(2024, 2030, [rec(2025, "transport_to_cis", 1, "transport")])
        assert has_errors(projection_findings(proj, builtin_scenario(1)))
        assert not has_errors(projection_findings(proj, builtin_scenario(5)))
