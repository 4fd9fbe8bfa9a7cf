import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covqec.symmetric import (LocalSum, collective_block, dicke_basis, dicke_state, erasure_maps, spin_sectors,
                              symmetric_sum)
from covqec.tensor import X, Y, Z, DimensionError, random_hermitian

import oracles


@pytest.mark.parametrize("n,w", [(1, 0), (3, 1), (4, 2), (5, 5)])
def test_dicke_matches_weight_enumeration(n, w):
    assert np.allclose(dicke_state(n, w), oracles.dicke_dense(n, w))


def test_dicke_basis_is_isometry():
    b = dicke_basis(6)
    assert np.allclose(b.conj().T @ b, np.eye(7))


def test_bad_inputs():
    with pytest.raises(ValueError):
        dicke_state(3, 4)
    with pytest.raises(DimensionError):
        dicke_state(0, 0)
    with pytest.raises(DimensionError):
        LocalSum(np.eye(1), 3)
    with pytest.raises(ValueError):
        LocalSum(np.array([[0, 1], [0, 0]]), 2)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
@settings(max_examples=25, deadline=None)
def test_symmetric_sum_is_restriction(seed, n):
    t = random_hermitian(2, np.random.default_rng(seed))
    b = dicke_basis(n)
    assert np.allclose(symmetric_sum(t, n), b.conj().T @ oracles.local_sum(t, n) @ b, atol=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_spin_sector_dimensions(n):
    sectors = spin_sectors(n)
    assert sum((2 * j + 1) * m for j, m in sectors) == 2**n


@pytest.mark.parametrize("n", [3, 4, 5])
def test_collective_blocks_reproduce_spectrum(n):
    rng = np.random.default_rng(n)
    t = random_hermitian(2, rng)
    full = np.linalg.eigvalsh(oracles.local_sum(t, n))
    blocks = []
    for j, mult in spin_sectors(n):
        blocks.extend(list(np.linalg.eigvalsh(collective_block(t, n, j))) * mult)
    assert np.allclose(np.sort(blocks), full, atol=1e-10)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_erasure_maps(n):
    b_n, b_m = dicke_basis(n), dicke_basis(n - 1)
    for k, m in enumerate(erasure_maps(n)):
        bra = np.zeros((1, 2))
        bra[0, k] = 1
        for site in range(n):
            # <k|_site acting on the dense Dicke basis
            mats = [np.eye(2)] * n
            mats[site] = bra
            op = mats[0]
            for a in mats[1:]:
                op = np.kron(op, a)
            assert np.allclose(b_m.conj().T @ op @ b_n, m)
            assert np.allclose(op @ b_n, b_m @ m)


class TestLocalSum:
    def test_dense_and_range(self):
        h = LocalSum(Z / 2, 3)
        assert np.allclose(h.dense(), oracles.local_sum(Z / 2, 3))
        assert h.spectral_range() == pytest.approx(3)
        assert h.dims == (2, 2, 2) and h.dim == 8

    def test_diagonal_and_apply(self, rng):
        h = LocalSum(np.diag([0.0, 1.0]), 4)
        assert np.allclose(h.diagonal(), [bin(i).count("1") for i in range(16)])
        v = rng.standard_normal((16, 3))
        assert np.allclose(h.apply(v), h.dense() @ v)
        g = LocalSum(X + 0.3 * Y, 4)
        assert np.allclose(g.apply(v), g.dense() @ v)
        with pytest.raises(ValueError):
            g.diagonal()

    def test_shifted(self):
        h = LocalSum(Z, 3).shifted(1.5)
        assert np.allclose(h.dense(), oracles.local_sum(Z, 3) + 1.5 * np.eye(8))

    def test_qutrit_term(self):
        t = np.diag([0.0, 1.0, 2.0])
        assert LocalSum(t, 2).spectral_range() == pytest.approx(4)
        assert math.isclose(LocalSum(t, 2).local_range(), 2)
