import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covqec.channels import erasure_channel, identity_channel
from covqec.codes import (CodeInstance, IsometryError, SymmetryPair, code_to_descriptor, custom_code,
                          reed_muller_code, thermodynamic_code, trivial_code)
from covqec.measures import kl_residual, qec_inaccuracy
from covqec.schemas import SchemaError
from covqec.symmetric import LocalSum, dicke_basis
from covqec.tensor import Z, SystemShape, local_operator

import oracles


def kl_oracle(v, n):
    """max over sites and k, k' of ||V^dag |k><k'|_l V - c I||_F, from dense local operators."""
    worst = 0.0
    for l in range(n):
        for k, kk in itertools.product(range(2), repeat=2):
            e = np.zeros((2, 2))
            e[k, kk] = 1
            m = v.conj().T @ local_operator(e, l, (2,) * n) @ v
            worst = max(worst, float(np.linalg.norm(m - np.trace(m) / m.shape[0] * np.eye(m.shape[0]))))
    return worst


def enc(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def descriptor(name, v, dims, h_l, h_s):
    return {"name": name, "logical_dim": v.shape[1], "physical_dims": list(dims), "isometry": enc(v),
            "h_logical": enc(h_l), "h_physical": enc(h_s)}


class TestReedMuller:
    def test_t3_codewords_from_linear_code(self):
        code, _ = reed_muller_code(3)
        words, n = oracles.punctured_rm1_even_subcode(3)
        assert n == 7 and len(words) == 8
        support = {format(i, "07b") for i in np.nonzero(np.abs(code.encoder[:, 0]) > 0)[0]}
        assert support == {"".join(map(str, w)) for w in words}
        assert all(s.count("1") % 2 == 0 for s in support)
        assert np.allclose(np.abs(code.encoder[list(map(lambda s: int(s, 2), support)), 0]), 1 / math.sqrt(8))

    def test_t3_knill_laflamme(self):
        code, _ = reed_muller_code(3)
        assert kl_oracle(code.encoder, 7) < 1e-9
        assert kl_residual(code, erasure_channel(code.physical_shape)) < 1e-9

    def test_t4_transversal_gate(self):
        code, _ = reed_muller_code(4)
        n = 15
        z = np.array([bin(i).count("1") for i in range(2**n)])
        # (x)_l e^{i pi Z_l / 8} is diagonal with phase e^{i pi (n - 2 wt) / 8}
        phases = np.exp(1j * math.pi * (n - 2 * z) / 8)
        got = code.encoder.conj().T @ (phases[:, None] * code.encoder)
        assert np.allclose(got, np.diag(np.exp(-1j * math.pi * np.array([1, -1]) / 8)), atol=1e-8)

    @pytest.mark.parametrize("t", [3, 4])
    def test_discrete_covariance(self, t):
        code, sym = reed_muller_code(t)
        n = 2**t - 1
        hs = np.array([bin(i).count("1") for i in range(2**n)], dtype=float)
        # the transversal phase is e^{-i theta H_S} up to a global phase at theta = 2 pi / 2^(t-1)
        for k in range(1, 4):
            theta = 2 * k * math.pi / 2 ** (t - 1)
            lhs = np.exp(-1j * theta * hs)[:, None] * code.encoder
            rhs = code.encoder @ np.diag(np.exp(-1j * theta * np.diag(sym.h_logical)))
            phase = np.vdot(rhs.reshape(-1), lhs.reshape(-1))
            phase /= abs(phase)
            assert np.allclose(lhs, phase * rhs, atol=1e-8)

    def test_symmetry_pair(self):
        _, sym = reed_muller_code(3)
        assert sym.delta_logical == pytest.approx(1)
        assert sym.delta_physical == pytest.approx(7)
        assert sym.period == pytest.approx(2 * math.pi)

    def test_unsupported(self):
        with pytest.raises(ValueError):
            reed_muller_code(5)


class TestThermodynamic:
    def test_q0_is_dicke_pair_and_covariant(self):
        code, sym = thermodynamic_code(10, 2, 0.0)
        v = code.dense_encoder()
        assert np.allclose(v[:, 0], oracles.dicke_dense(10, 4))
        assert np.allclose(v[:, 1], oracles.dicke_dense(10, 6))
        hs = np.real(np.diag(oracles.local_sum(Z / 2, 10)))
        for theta in np.linspace(0, 2 * math.pi, 25):
            lhs = np.exp(-1j * theta * hs)[:, None] * v
            rhs = v @ np.diag(np.exp(-1j * theta * np.diag(sym.h_logical)))
            assert np.abs(lhs - rhs).max() < 1e-9

    def test_q1_knill_laflamme(self):
        code, _ = thermodynamic_code(10, 2, 1.0)
        assert kl_oracle(code.dense_encoder(), 10) < 1e-8
        assert kl_residual(code, erasure_channel(code.physical_shape)) < 1e-8

    def test_interior_not_exact(self):
        code, _ = thermodynamic_code(10, 2, 0.5)
        assert kl_oracle(code.dense_encoder(), 10) > 1e-3

    @given(st.floats(0, 1), st.floats(0, 1))
    @settings(max_examples=40, deadline=None)
    def test_hoelder_continuity(self, q1, q2):
        n, m = 12, 2
        a, _ = thermodynamic_code(n, m, q1)
        b, _ = thermodynamic_code(n, m, q2)
        assert np.linalg.norm(a.encoder - b.encoder) <= 2 * math.sqrt(m * abs(q1 - q2) / (n + m)) + 1e-12

    def test_dicke_normalization(self):
        b = dicke_basis(12)
        assert np.allclose(np.linalg.norm(b, axis=0), 1, atol=1e-12)

    @pytest.mark.parametrize("n,m,q", [(9, 2, 0.0), (10, 3, 0.0), (10, 6, 0.0), (4, 2, 0.0), (10, 2, 1.5)])
    def test_bad_parameters(self, n, m, q):
        with pytest.raises(ValueError):
            thermodynamic_code(n, m, q)


class TestTrivial:
    def test_defaults(self):
        code, sym = trivial_code(3)
        assert np.allclose(code.projector(), np.eye(8))
        assert sym.delta_logical == pytest.approx(1)
        assert sym.delta_physical == pytest.approx(3)

    def test_identity_noise(self):
        code, _ = trivial_code(2)
        assert qec_inaccuracy(code, identity_channel(2)) == pytest.approx(0, abs=1e-9)


class TestCustom:
    def test_repetition_code(self):
        v = np.zeros((8, 2))
        v[0, 0] = v[7, 1] = 1
        code, sym = custom_code(descriptor("rep3", v, (2, 2, 2), 1.5 * Z, oracles.local_sum(Z / 2, 3)))
        assert code.logical_dim == 2 and code.n == 3
        assert sym.delta_physical == pytest.approx(3)
        # site marginals differ between codewords, so erasure is not correctable
        assert kl_oracle(code.encoder, 3) == pytest.approx(1 / math.sqrt(2))
        assert qec_inaccuracy(code, erasure_channel(code.physical_shape)) > 0.1

    def test_four_qubit_erasure_code(self):
        v = np.zeros((16, 2))
        v[[0b0000, 0b1111], 0] = 1 / math.sqrt(2)
        v[[0b0011, 0b1100], 1] = 1 / math.sqrt(2)
        code, _ = custom_code(json.dumps(descriptor("c4", v, (2,) * 4, Z / 2, oracles.local_sum(Z / 2, 4))))
        # by hand: V^dag |k><k'|_l V = (delta_kk' / 2) I for every site
        for l in range(4):
            for k, kk in itertools.product(range(2), repeat=2):
                e = np.zeros((2, 2))
                e[k, kk] = 1
                m = v.T @ local_operator(e, l, (2,) * 4) @ v
                assert np.allclose(m, (k == kk) / 2 * np.eye(2))
        assert kl_residual(code, erasure_channel(code.physical_shape)) < 1e-12
        assert qec_inaccuracy(code, erasure_channel(code.physical_shape)) < 1e-6

    def test_non_isometry_reports_residual(self):
        v = np.zeros((4, 2))
        v[0, 0] = v[1, 1] = 2
        with pytest.raises(IsometryError) as info:
            custom_code(descriptor("bad", v, (2, 2), Z, np.eye(4)))
        assert info.value.residual == pytest.approx(3 * math.sqrt(2))  # ||4I - I||_F

    def test_schema_violation(self):
        with pytest.raises(SchemaError):
            custom_code({"name": "x"})

    def test_file_and_round_trip(self, tmp_path):
        code, sym = thermodynamic_code(8, 2, 0.3)
        path = tmp_path / "code.json"
        path.write_text(json.dumps(code_to_descriptor(code, sym)))
        back, back_sym = custom_code(str(path))
        assert np.allclose(back.encoder, code.dense_encoder())
        assert back_sym.delta_physical == pytest.approx(sym.delta_physical)


class TestInvariants:
    def test_encoders_are_isometries(self):
        for code, _ in (reed_muller_code(3), thermodynamic_code(10, 2, 0.4), trivial_code(2)):
            v = code.encoder
            assert np.linalg.norm(v.conj().T @ v - np.eye(2 if code.name != "trivial(n=2)" else 4)) < 1e-10
            p = code.projector()
            assert np.allclose(p @ p, p, atol=1e-9) and np.allclose(p, p.conj().T)

    def test_phase_convention(self, rng):
        u = np.linalg.qr(rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2)))[0]
        code = CodeInstance(u, SystemShape((2, 2)), "w")
        flat = code.encoder.reshape(-1)
        k = np.argmax(np.abs(flat))
        assert flat[k].imag == pytest.approx(0) and flat[k].real > 0

    def test_symmetric_basis_needs_local_sum_rows(self):
        with pytest.raises(Exception):
            CodeInstance(np.eye(4, 2), SystemShape.qubits(2), "x", "symmetric")

    def test_symmetry_validation(self):
        with pytest.raises(ValueError):
            SymmetryPair(np.array([[0, 1], [0, 0]]), LocalSum(Z, 2))
