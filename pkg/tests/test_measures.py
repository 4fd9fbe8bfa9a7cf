import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covqec.channels import KrausChannel, compose, dephasing_channel, erasure_channel, identity_channel
from covqec.codes import CodeInstance, SymmetryPair, reed_muller_code, thermodynamic_code, trivial_code
from covqec.measures import (analyze, charge_fluctuation, charge_violation, gate_error_bounds, global_violation,
                             global_violation_details, optimal_recovery, point_violation, qec_inaccuracy)
from covqec.measures.covariance import physical_frame
from covqec.symmetric import LocalSum
from covqec.tensor import X, Z, SystemShape, random_isometry

import oracles

# frozen from the dense grid oracles below
RM3_DELTA_G = math.sqrt(7) / 4
RM3_DELTA_P = 2 * math.sqrt(2)
RM3_DELTA_C = 1.0


@pytest.fixture(scope="module")
def rm3():
    return reed_muller_code(3)


def repetition(n=3):
    v = np.zeros((2**n, 2))
    v[0, 0] = v[-1, 1] = 1
    return CodeInstance(v, SystemShape.qubits(n), f"rep{n}")


class TestQecInaccuracy:
    def test_rm3_erasure_exact(self, rm3):
        assert qec_inaccuracy(rm3[0], erasure_channel(rm3[0].physical_shape)) <= 1e-6

    @pytest.mark.parametrize("make", [lambda: reed_muller_code(3)[0], lambda: thermodynamic_code(10, 2, 0.3)[0],
                                      lambda: repetition()])
    def test_identity_noise(self, make):
        code = make()
        assert qec_inaccuracy(code, identity_channel(code.physical_shape)) == pytest.approx(0, abs=1e-9)

    def test_single_qubit_dephasing(self):
        code, _ = trivial_code(1)
        for p in (0.01, 0.1, 0.3, 0.5):
            assert qec_inaccuracy(code, dephasing_channel(p, 1)) == pytest.approx(math.sqrt(p), abs=1e-5)

    def test_repetition_dephasing_closed_form(self):
        # Z errors are logical; the code sees dephasing with the odd-parity probability
        for p in (0.05, 0.1, 0.2, 0.3):
            p_odd = (1 - (1 - 2 * p) ** 3) / 2
            assert qec_inaccuracy(repetition(), dephasing_channel(p, 3)) == pytest.approx(math.sqrt(p_odd), abs=1e-5)

    def test_monotone_under_extra_noise(self):
        code = repetition()
        vals = [qec_inaccuracy(code, dephasing_channel(p, 3)) for p in np.linspace(0, 0.5, 8)]
        assert all(b >= a - 1e-6 for a, b in zip(vals, vals[1:]))

    def test_data_processing(self, rng):
        # appending noise after the channel can only hurt
        code = CodeInstance(random_isometry(4, 2, rng), SystemShape((2, 2)), "random")
        base = dephasing_channel(0.1, 2)
        extra = compose(KrausChannel([math.sqrt(0.8) * np.eye(4), math.sqrt(0.2) * np.kron(X, np.eye(2))]), base)
        assert qec_inaccuracy(code, extra) >= qec_inaccuracy(code, base) - 1e-6

    def test_bounds_and_certificate(self):
        code, _ = thermodynamic_code(10, 2, 0.5)
        res = optimal_recovery(code, erasure_channel(code.physical_shape))
        assert res.status == "converged"
        assert res.epsilon_lower <= res.epsilon + 1e-9
        assert res.epsilon - res.epsilon_lower <= 1e-4
        assert 0 <= res.epsilon <= 1

    def test_thermo_endpoints(self):
        c0, _ = thermodynamic_code(20, 2, 0.0)
        c1, _ = thermodynamic_code(10, 2, 1.0)
        e0 = qec_inaccuracy(c0, erasure_channel(c0.physical_shape))
        assert abs(e0 - 0.05) <= 0.25 * 0.05
        assert qec_inaccuracy(c1, erasure_channel(c1.physical_shape)) <= 1e-6

    def test_trivial_erasure(self):
        code, _ = trivial_code(2)
        # the erased qubit is fully lost: worst fidelity is that of the maximally mixed output
        assert qec_inaccuracy(code, erasure_channel(code.physical_shape)) == pytest.approx(math.sqrt(3) / 2, abs=1e-5)


class TestGlobalViolation:
    def test_rm3_grid_oracle(self, rm3):
        code, sym = rm3
        lam, v = physical_frame(code, sym)
        thetas = np.linspace(0, 2 * math.pi, 256, endpoint=False)
        grid = oracles.delta_group_grid(v, lam, sym.h_logical, thetas, oracles.bloch_ball(8, 300))
        assert grid == pytest.approx(RM3_DELTA_G, abs=1e-6)
        assert global_violation(code, sym) == pytest.approx(RM3_DELTA_G, abs=1e-8)

    def test_covariant_q0(self):
        code, sym = thermodynamic_code(10, 2, 0.0)
        assert global_violation(code, sym) <= 1e-9

    def test_trivial_same_generators(self):
        code, _ = trivial_code(2)
        h = LocalSum(Z / 2, 2)
        assert global_violation(code, SymmetryPair(h.dense(), h)) <= 1e-9

    def test_rm_scaling(self, rm3):
        code4, sym4 = reed_muller_code(4)
        for (code, sym), n in ((rm3, 7), ((code4, sym4), 15)):
            scaled = global_violation(code, sym) * math.sqrt(n)
            assert 1.4 <= scaled <= 2.6

    def test_details(self, rm3):
        d = global_violation_details(*rm3, grid_size=64)
        assert d.profile.shape == (64,) and d.period == pytest.approx(2 * math.pi)
        assert d.value >= d.profile.max() - 1e-12
        with pytest.raises(ValueError):
            global_violation_details(*rm3, grid_size=2)


class TestPointAndCharge:
    def test_rm3_point_oracle(self, rm3):
        code, sym = rm3
        lam, v = physical_frame(code, sym)
        grid = math.sqrt(oracles.point_qfi_grid(v, lam, sym.h_logical, oracles.bloch_ball(8, 300)))
        assert grid == pytest.approx(RM3_DELTA_P, abs=1e-6)
        assert point_violation(code, sym) == pytest.approx(RM3_DELTA_P, abs=1e-7)

    def test_rm3_charge_oracle(self, rm3):
        code, sym = rm3
        lam, v = physical_frame(code, sym)
        grid = oracles.charge_offset_grid(v, lam, sym.h_logical, np.linspace(-8, 8, 3201), oracles.bloch_ball(4, 100))
        assert grid == pytest.approx(RM3_DELTA_C, abs=1e-9)
        assert charge_violation(code, sym) == pytest.approx(RM3_DELTA_C, abs=1e-9)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_trivial_equals_spectral_range(self, n):
        code, sym = trivial_code(n)
        # Delta(H_S - H_L) by enumerating the diagonal
        diag = [sum((1 - 2 * ((i >> b) & 1)) / 2 for b in range(n)) - (1 - 2 * (i >> (n - 1))) / 2
                for i in range(2**n)]
        expected = max(diag) - min(diag)
        assert expected == n - 1
        assert charge_violation(code, sym) == pytest.approx(expected, abs=1e-9)
        assert point_violation(code, sym) == pytest.approx(expected, abs=1e-6)

    def test_covariant_zero(self):
        code, sym = thermodynamic_code(10, 2, 0.0)
        assert point_violation(code, sym) <= 1e-6
        assert charge_violation(code, sym) <= 1e-9

    def test_point_bounds_charge(self):
        # the point violation of an isometry dominates the charge violation
        for q in (0.25, 0.5, 0.75, 1.0):
            code, sym = thermodynamic_code(10, 2, q)
            assert point_violation(code, sym) >= charge_violation(code, sym) - 1e-6

    def test_non_diagonal_hamiltonian(self, rm3):
        # rotating every qubit and H_S together leaves the measures unchanged
        code, sym = thermodynamic_code(8, 2, 0.4)
        dense = code.to_dense()
        h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
        u = h
        for _ in range(7):
            u = np.kron(u, h)
        rot = CodeInstance(u @ dense.encoder, dense.physical_shape, "rot")
        rsym = SymmetryPair(sym.h_logical, LocalSum(h @ (Z / 2) @ h, 8))
        assert charge_violation(rot, rsym) == pytest.approx(charge_violation(code, sym), abs=1e-8)
        assert point_violation(rot, rsym) == pytest.approx(point_violation(code, sym), abs=1e-6)
        assert global_violation(rot, rsym, 128) == pytest.approx(global_violation(code, sym, 128), abs=1e-7)


class TestChargeFluctuation:
    def test_exact_code_zero(self, rm3):
        assert abs(charge_fluctuation(*rm3)) <= 1e-8

    def test_covariant_equals_delta_hl(self):
        code, sym = thermodynamic_code(10, 2, 0.0)
        assert charge_fluctuation(code, sym) == pytest.approx(sym.delta_logical, abs=1e-6)

    @pytest.mark.parametrize("q", [0.25, 0.5, 0.75])
    def test_interior_window(self, q):
        code, sym = thermodynamic_code(10, 2, q)
        rep = analyze(code, erasure_channel(code.physical_shape), sym, grid_size=128, gamma_grid=2)
        w = 2 * rep.epsilon * rep.j_min
        assert -w - 1e-6 <= rep.chi <= sym.delta_logical + w + 1e-6

    def test_degenerate_trivial(self):
        code, sym = trivial_code(5)
        # the canonical vectors are computational basis states |00000> and |10000>
        assert charge_fluctuation(code, sym) == pytest.approx(1.0)


class TestGateErrorBounds:
    def test_covariant_noiseless(self):
        code, sym = thermodynamic_code(10, 2, 0.0)
        lo, hi, _ = gate_error_bounds(code, identity_channel(code.physical_shape), sym)
        assert lo == pytest.approx(0, abs=1e-8) and hi == pytest.approx(0, abs=1e-8)

    def test_rm3_upper(self, rm3):
        code, sym = rm3
        lo, hi, diag = gate_error_bounds(code, erasure_channel(code.physical_shape), sym)
        assert hi == pytest.approx(RM3_DELTA_G, abs=1e-6)
        assert lo <= hi + 1e-9
        assert len(diag["thetas"]) == 8

    @pytest.mark.parametrize("n", [8, 10])
    def test_thermo_q0_lower_vs_f_reg(self, n):
        code, sym = thermodynamic_code(n, 2, 0.0)
        rep = analyze(code, erasure_channel(code.physical_shape), sym, grid_size=128)
        rhs = sym.delta_logical / math.sqrt(4 * rep.f_reg)
        assert rep.gamma_lower >= rhs - rhs**2
        assert rep.gamma_lower <= rep.gamma_upper + 1e-9

    @given(st.floats(0.05, 0.95))
    @settings(max_examples=5, deadline=None)
    def test_interval_ordered(self, q):
        code, sym = thermodynamic_code(8, 2, q)
        lo, hi, _ = gate_error_bounds(code, erasure_channel(code.physical_shape), sym, grid=4)
        assert 0 <= lo <= hi + 1e-9


class TestAnalyze:
    def test_rm3_report(self, rm3):
        code, sym = rm3
        rep = analyze(code, erasure_channel(code.physical_shape), sym)
        assert rep.epsilon <= 1e-6 and abs(rep.chi) <= 1e-6
        assert rep.delta_group == pytest.approx(RM3_DELTA_G, abs=1e-8)
        assert rep.j_min == pytest.approx(7, abs=1e-5)
        assert rep.f_reg == pytest.approx(48, abs=1e-4)
        d = rep.to_dict()
        assert d["diagnostics"]["epsilon"]["method"] == "transpose"

    def test_noiseless_metrology_markers(self):
        code, sym = thermodynamic_code(8, 2, 0.5)
        d = analyze(code, identity_channel(code.physical_shape), sym, grid_size=64, gamma_grid=2).to_dict()
        assert d["j_min"] == "infeasible" and d["f_reg"] == "divergent"
        assert d["epsilon"] == 0.0
