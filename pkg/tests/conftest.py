import json

import pytest

from nwm_fund.scenario import builtin_scenario, scenario_to_dict

HEADER = "year,site,category,component,amount_eur\n"


def scenario_json(**overrides):
    """Synthetic scenario with zero escalation, base year 2024."""
    d = scenario_to_dict(builtin_scenario(2))
    d.update(name="synthetic", fdsp_year=None, fdsa_completion_year=2025)
    d["economics"] = {"inflation_rate": 0.0, "nsci_rate": 0.0, "base_year": 2024}
    d.update(overrides)
    return d


def costs_csv(amounts, start=2025, category="haw_final_disposal", component="operation"):
    lines = [f"{start + i},HAW,{category},{component},{a}" for i, a in enumerate(amounts)]
    return HEADER + "\n".join(lines) + "\n"


@pytest.fixture
def write_case(tmp_path):
    """Write a scenario/costs pair and return their paths."""

    def _write(amounts, name="case", **scenario_overrides):
        scen = tmp_path / f"{name}.json"
        scen.write_text(json.dumps(scenario_json(**scenario_overrides)))
        costs = tmp_path / f"{name}.csv"
        costs.write_text(costs_csv(amounts))
        return str(scen), str(costs)

    return _write


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
        if not any(line.startswith("criterion 8:") for line in test_acceptance.RESULTS):
            terminalreporter.write_line(
                f"criterion 8: SKIP - optional, {test_acceptance.DATASET_ENV} not set"
            )
