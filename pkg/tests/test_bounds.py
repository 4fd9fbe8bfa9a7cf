import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covqec.bounds import (EXACT_CHECKS, BoundInputError, charge_fluctuation_check, check_report,
                           corollary_gate_bound, theorem1, theorem2, theorem4)
from covqec.channels import erasure_channel
from covqec.codes import reed_muller_code, thermodynamic_code, trivial_code
from covqec.measures import MeasureReport, analyze


def fake(eps=0.0, dg=0.5, dp=2.0, dc=1.0, chi=0.0, j=7.0, f=48.0, dhl=1.0, dhs=7.0):
    return MeasureReport(eps, dg, dp, dc, chi, j, f, eps, eps + dg, dhl, dhs)


@pytest.fixture(scope="module")
def reports():
    out = {}
    for key, (code, sym) in {"rm3": reed_muller_code(3), "thermo0": thermodynamic_code(10, 2, 0.0),
                             "thermo20": thermodynamic_code(20, 2, 0.0), "trivial": trivial_code(2)}.items():
        out[key] = analyze(code, erasure_channel(code.physical_shape), sym, grid_size=256, gamma_grid=2)
    return out


class TestTheorem1:
    def test_rm3(self, reports):
        chk = theorem1(reports["rm3"])
        assert chk.rhs == pytest.approx(math.sqrt(1 / 7), abs=1e-6)
        assert chk.satisfied and chk.lhs >= chk.rhs

    def test_covariant_rearrangement(self, reports):
        r = reports["thermo0"]
        assert r.delta_group <= 1e-8
        # delta_G = 0 leaves epsilon >= (Delta H_L - delta_G^2 Delta H_S) / (2 J)
        assert r.epsilon >= (r.delta_h_logical - r.delta_group**2 * r.delta_h_physical) / (2 * r.j_min)
        chk = theorem1(r)
        assert chk.rhs == 0 and chk.satisfied

    def test_clipped(self):
        chk = theorem1(fake(eps=0.2, dg=0.0, j=7.0))
        assert chk.rhs == 0 and chk.satisfied and "clipped" in chk.notes

    def test_errors(self):
        with pytest.raises(BoundInputError):
            theorem1(fake(j=None))
        with pytest.raises(BoundInputError):
            theorem1(fake(), delta_hs=0.0)

    def test_slack(self):
        # lhs just below rhs passes only through the quadratic slack
        rhs = math.sqrt(1 / 7)
        r = fake(dg=rhs - 0.5 * rhs**2)
        assert theorem1(r, c=1).satisfied
        assert not theorem1(r, c=0).satisfied
        assert theorem1(r, c=1).tolerance == pytest.approx(rhs**2)


class TestTheorem2:
    def test_thermo_n20(self, reports):
        r = reports["thermo20"]
        chk = theorem2(r)
        assert chk.lhs == pytest.approx(r.epsilon, abs=1e-8)
        assert chk.rhs == pytest.approx(r.delta_h_logical / math.sqrt(4 * r.f_reg))
        assert chk.satisfied

    def test_rm3_dominated_by_delta_g(self, reports):
        r = reports["rm3"]
        chk = theorem2(r)
        assert chk.lhs == pytest.approx(r.delta_group, abs=1e-6) and chk.satisfied

    def test_vacuous(self):
        for f in (None, math.inf):
            chk = theorem2(fake(f=f))
            assert chk.vacuous and chk.satisfied and "carries no information" in chk.notes


class TestTheorem4:
    def test_rm3(self, reports):
        point, charge = theorem4(reports["rm3"])
        assert point.satisfied and charge.satisfied
        assert point.lhs >= 1 and charge.lhs >= 1 - 1e-9
        assert point.tolerance == 1e-4

    def test_trivial(self, reports):
        _, charge = theorem4(reports["trivial"])
        assert charge.lhs >= 1 - 1e-9 and charge.satisfied

    @pytest.mark.parametrize("q", [0.0, 0.25, 0.5, 0.75, 1.0])
    def test_thermo_sweep(self, q):
        code, sym = thermodynamic_code(10, 2, q)
        r = analyze(code, erasure_channel(code.physical_shape), sym, grid_size=64, gamma_grid=2)
        assert all(c.satisfied for c in theorem4(r))
        assert charge_fluctuation_check(r).satisfied

    def test_violation_detected(self):
        point, charge = theorem4(fake(eps=0.0, dp=0.5, dc=0.5))
        assert not point.satisfied and not charge.satisfied
        assert point.residual < 0


class TestCheckReport:
    def test_names(self, reports):
        names = [c.name for c in check_report(reports["rm3"])]
        assert names == ["theorem1", "theorem2", "theorem4_point", "theorem4_charge", "chi_bound"]
        assert set(EXACT_CHECKS) <= set(names)

    def test_undefined_rows_vacuous(self):
        rows = check_report(fake(j=None, f=None))
        assert len(rows) == 5
        assert all(r.vacuous for r in rows)

    def test_serializable(self, reports):
        for chk in check_report(fake(f=math.inf)):
            d = chk.to_dict()
            assert set(d) >= {"name", "lhs", "rhs", "satisfied", "slack", "tolerance", "residual", "notes"}


class TestCorollary:
    def test_rm3(self):
        rep = corollary_gate_bound(7, [2] * 7, 2, 8)
        assert rep.bound == pytest.approx(14**1.5 / math.sqrt(2))
        assert rep.ratio == pytest.approx(8 / rep.bound)

    def test_rm_family_ratio_shrinks(self):
        ratios = [corollary_gate_bound(2**t - 1, [2] * (2**t - 1), 2, 2 ** (t - 1) * 2).ratio for t in (3, 4, 5)]
        assert ratios[0] > ratios[1] > ratios[2]

    def test_maximal_logical_charge(self):
        rep = corollary_gate_bound(1, [1.0], 4.0, 4)
        assert rep.bound >= 4

    @given(st.lists(st.integers(0, 6), min_size=1, max_size=6), st.integers(1, 8), st.integers(1, 5))
    @settings(max_examples=50, deadline=None)
    def test_linear_scaling(self, ts, tl, c):
        a = corollary_gate_bound(len(ts), ts, tl, 1)
        b = corollary_gate_bound(len(ts), [c * x for x in ts], c * tl, 1)
        assert b.bound == pytest.approx(c * a.bound, rel=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError):
            corollary_gate_bound(2, [1, 1], 0, 2)
        with pytest.raises(ValueError):
            corollary_gate_bound(3, [1, 1], 1, 2)
