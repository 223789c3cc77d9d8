import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nwm_fund.errors import InputError
from nwm_fund.fund import (
    CashMode,
    FundParams,
    Shortfall,
    cash_percentage,
    liquid_percentage,
    realized_avg_growth,
    simulate,
    write_ledger_csv,
)

costs_st = st.lists(st.floats(0, 500, allow_nan=False), min_size=1, max_size=40)


def params(b0=100.0, roi=0.0, **kw):
    return FundParams(initial_balance=b0, roi=roi, **kw)


class TestSchedules:
    @pytest.mark.parametrize(
        "t,T,expected",
        [(10, 80, 0.70), (20, 80, 0.60), (79, 80, 0.40), (40, 80, 0.50), (60, 80, 0.40), (1, 1, 0.40)],
    )
    def test_liquid_points(self, t, T, expected):
        assert liquid_percentage(t, T) == expected

    def test_quartiles_use_real_boundaries(self):
        # T=10: T/4 = 2.5, so t=2 is still first quarter and t=3 second
        assert [liquid_percentage(t, 10) for t in range(1, 11)] == [
            0.70, 0.70, 0.60, 0.60, 0.50, 0.50, 0.50, 0.40, 0.40, 0.40
        ]

    @pytest.mark.parametrize("t", [0, 81])
    def test_liquid_out_of_range(self, t):
        with pytest.raises(InputError):
            liquid_percentage(t, 80)

    @pytest.mark.parametrize(
        "t,expected", [(1, 0.08), (2, 0.064), (3, 0.048), (4, 0.032), (5, 0.016), (6, 0.0), (7, 0.0)]
    )
    def test_cash_points(self, t, expected):
        assert cash_percentage(t) == pytest.approx(expected, abs=1e-15)

    def test_cash_exactly_zero_from_sixth_year(self):
        assert cash_percentage(6) == 0.0

    def test_cash_bad_period(self):
        with pytest.raises(InputError):
            cash_percentage(0)


class TestSimulate:
    def test_pure_compounding(self):
        out = simulate(params(roi=0.10, enforce_liquidity=False), [0, 0, 0])
        assert out.feasible
        assert out.final_balance == pytest.approx(133.1, rel=1e-12)

    def test_two_payments(self):
        out = simulate(params(roi=0.10, enforce_liquidity=False), [50, 60])
        assert [r.closing_balance for r in out.rows] == pytest.approx([60, 6])

    def test_liquidity_shortfall(self):
        # T=1: liquid 0.40 + cash 0.08 -> 48 available < 90
        out = simulate(params(), [90])
        assert not out.feasible
        assert out.reason is Shortfall.LIQUIDITY
        assert out.violation_t == 1
        assert out.violation_year == 2025
        assert out.rows == ()

    def test_negative_balance_reported(self):
        out = simulate(params(enforce_liquidity=False), [60, 60])
        assert out.reason is Shortfall.NEGATIVE_BALANCE
        assert out.violation_t == 2
        assert len(out.rows) == 1

    def test_cash_drag(self):
        out = simulate(params(roi=0.05, cash_mode=CashMode.CASH_DRAG, enforce_liquidity=False), [0])
        assert out.rows[0].growth_amount == pytest.approx(100 * 0.05 * 0.92)

    def test_ledger_identities(self):
        out = simulate(params(b0=1000, roi=0.04), [10, 80, 30, 0, 200, 5])
        for r in out.rows:
            assert r.closing_balance == r.opening_balance + r.growth_amount - r.cost
            assert r.liquid_assets == pytest.approx((r.liquid_fraction + r.cash_fraction) * r.opening_balance)
        for a, b in zip(out.rows, out.rows[1:]):
            assert b.opening_balance == a.closing_balance

    @pytest.mark.parametrize("costs", [[], [1, -1], [float("nan")]])
    def test_bad_costs(self, costs):
        with pytest.raises(InputError):
            simulate(params(), costs)

    def test_ledger_csv(self):
        buf = io.StringIO()
        write_ledger_csv(simulate(params(roi=0.1), [1, 2]), buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == (
            "t,year,opening_eur,growth_eur,cost_eur,closing_eur,"
            "liquid_fraction,cash_fraction,liquid_assets_eur"
        )
        assert len(lines) == 3

    @given(b0=st.floats(0, 1e9), roi=st.floats(0, 0.5), T=st.integers(1, 120))
    def test_zero_cost_closed_form(self, b0, roi, T):
        out = simulate(params(b0=b0, roi=roi), [0.0] * T)
        assert out.final_balance == pytest.approx(b0 * (1 + roi) ** T, rel=1e-12)

    @given(costs=costs_st, r1=st.floats(0, 0.5), dr=st.floats(0, 0.5), drag=st.booleans(), liq=st.booleans())
    def test_monotone_in_roi(self, costs, r1, dr, drag, liq):
        mode = CashMode.CASH_DRAG if drag else CashMode.FULL_GROWTH
        lo = simulate(params(b0=1000, roi=r1, cash_mode=mode, enforce_liquidity=liq), costs)
        hi = simulate(params(b0=1000, roi=r1 + dr, cash_mode=mode, enforce_liquidity=liq), costs)
        if lo.feasible:
            assert hi.feasible
            for a, b in zip(lo.rows, hi.rows):
                assert b.closing_balance >= a.closing_balance

    @given(costs=costs_st, b1=st.floats(0, 5000), db=st.floats(0, 5000), roi=st.floats(0, 0.3), liq=st.booleans())
    def test_monotone_in_balance(self, costs, b1, db, roi, liq):
        lo = simulate(params(b0=b1, roi=roi, enforce_liquidity=liq), costs)
        hi = simulate(params(b0=b1 + db, roi=roi, enforce_liquidity=liq), costs)
        if lo.feasible:
            assert hi.feasible

    @given(costs=costs_st, roi=st.floats(0, 0.3), liq=st.booleans())
    def test_reports_earliest_violation(self, costs, roi, liq):
        p = params(b0=800, roi=roi, enforce_liquidity=liq)
        out = simulate(p, costs)
        if out.feasible:
            return
        assert len(out.rows) == out.violation_t - 1
        for r in out.rows:
            assert r.closing_balance >= 0
            assert not liq or r.cost <= r.liquid_assets
        t = out.violation_t
        opening = out.rows[-1].closing_balance if out.rows else p.initial_balance
        share = liquid_percentage(t, len(costs)) + cash_percentage(t)
        if out.reason is Shortfall.LIQUIDITY:
            assert costs[t - 1] > share * opening
        else:
            assert opening * (1 + roi) - costs[t - 1] < 1e-9 * max(opening, 1)


class TestRealizedGrowth:
    @settings(max_examples=50)
    @given(costs=costs_st, roi=st.floats(0, 0.3))
    def test_equals_roi_on_full_growth(self, costs, roi):
        out = simulate(params(b0=1e5, roi=roi, enforce_liquidity=False), costs)
        if out.feasible and all(r.opening_balance > 0 for r in out.rows):
            assert realized_avg_growth(out) == pytest.approx(roi, abs=1e-12)

    def test_cash_drag_single_year(self):
        out = simulate(params(roi=0.05, cash_mode="cash_drag", enforce_liquidity=False), [0])
        assert realized_avg_growth(out) == pytest.approx(0.046, abs=1e-15)

    def test_zero(self):
        assert realized_avg_growth(simulate(params(), [0, 0])) == 0

    def test_zero_opening_undefined(self):
        out = simulate(params(b0=0.0, enforce_liquidity=False), [0])
        with pytest.raises(InputError):
            realized_avg_growth(out)
