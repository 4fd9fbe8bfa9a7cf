"""Permutation-symmetric qubit registers.

Dicke states ``|D^n_w>`` (uniform superposition of weight-``w`` strings) are
indexed by ``w = 0..n``. Collective operators ``sum_l T_l`` act on the
symmetric subspace as (n+1)-dimensional matrices and on each spin-``j``
sector of the full register as (2j+1)-dimensional ones.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .tensor import DimensionError, apply_local, kron

DENSE_QUBIT_CAP = 15


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise DimensionError(f"number of qubits must be a positive integer, got {n}")
    return int(n)


def dicke_state(n: int, w: int) -> np.ndarray:
    """Dense ``2^n`` vector of ``|D^n_w>``; qubit 0 is the most significant bit."""
    n = _check_n(n)
    if not 0 <= w <= n:
        raise ValueError(f"weight {w} outside [0, {n}]")
    if n > DENSE_QUBIT_CAP:
        raise DimensionError(f"dense Dicke state capped at {DENSE_QUBIT_CAP} qubits")
    v = np.zeros(2**n, dtype=complex)
    for ones in itertools.combinations(range(n), w):
        v[sum(1 << (n - 1 - l) for l in ones)] = 1
    return v / math.sqrt(comb(n, w, exact=True))


def dicke_basis(n: int) -> np.ndarray:
    """Isometry ``2^n x (n+1)`` whose column ``w`` is ``|D^n_w>``."""
    return np.stack([dicke_state(n, w) for w in range(n + 1)], axis=1)


def symmetric_sum(term: np.ndarray, n: int) -> np.ndarray:
    """Matrix of ``sum_l T_l`` on the symmetric subspace of ``n`` qubits."""
    n = _check_n(n) if n else 0
    t = np.asarray(term, dtype=complex)
    if t.shape != (2, 2):
        raise DimensionError("collective operators are defined for qubit terms")
    w = np.arange(n + 1)
    out = np.diag(t[0, 0] * (n - w) + t[1, 1] * w).astype(complex)
    up = np.sqrt((w[:-1] + 1) * (n - w[:-1]))  # |D_w> -> |D_{w+1}>
    out[w[1:], w[:-1]] = t[1, 0] * up
    out[w[:-1], w[1:]] = t[0, 1] * up
    return out


def spin_sectors(n: int) -> list[tuple[float, int]]:
    """Spin values ``j`` and multiplicities in ``(C^2)^{otimes n}``."""
    n = _check_n(n)
    out = []
    for k in range(n // 2 + 1):
        j = n / 2 - k
        mult = comb(n, k, exact=True) - (comb(n, k - 1, exact=True) if k else 0)
        out.append((j, mult))
    return out


def collective_block(term: np.ndarray, n: int, j: float) -> np.ndarray:
    """``sum_l T_l`` restricted to one spin-``j`` copy, in its Dicke basis."""
    two_j = int(round(2 * j))
    t = np.asarray(term, dtype=complex)
    return symmetric_sum(t, two_j) + (n - two_j) * (np.trace(t) / 2) * np.eye(two_j + 1)


def erasure_maps(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Maps ``M_k = <k|_l`` from Sym(n) to Sym(n-1), identical for every site l.

    ``<k|_l |D^n_w> = sqrt(C(n-1, w-k) / C(n, w)) |D^{n-1}_{w-k}>``.
    """
    n = _check_n(n)
    out = []
    for k in (0, 1):
        m = np.zeros((n, n + 1))
        for w in range(n + 1):
            if 0 <= w - k <= n - 1:
                m[w - k, w] = math.sqrt(comb(n - 1, w - k) / comb(n, w))
        out.append(m.astype(complex))
    return out[0], out[1]


@dataclass(frozen=True)
class LocalSum:
    """``H = sum_l T_l``: the same single-site term on each of ``n`` sites."""

    term: np.ndarray
    n: int

    def __post_init__(self):
        t = np.asarray(self.term, dtype=complex)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] < 2:
            raise DimensionError(f"local term must be square of size >= 2, got {t.shape}")
        if not np.allclose(t, t.conj().T, atol=1e-10):
            raise ValueError("local term is not Hermitian")
        object.__setattr__(self, "term", (t + t.conj().T) / 2)
        object.__setattr__(self, "n", _check_n(self.n))

    @property
    def d(self) -> int:
        return self.term.shape[0]

    @property
    def dim(self) -> int:
        return self.d**self.n

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.d,) * self.n

    def local_range(self) -> float:
        w = np.linalg.eigvalsh(self.term)
        return float(w[-1] - w[0])

    def spectral_range(self) -> float:
        return self.n * self.local_range()

    def is_diagonal(self) -> bool:
        return not np.any(self.term - np.diag(np.diag(self.term)))

    def diagonal(self) -> np.ndarray:
        """Energies of computational basis states (diagonal terms only)."""
        if not self.is_diagonal():
            raise ValueError("local term is not diagonal")
        e = np.real(np.diag(self.term))
        out = np.zeros(1)
        for _ in range(self.n):
            out = (out[:, None] + e[None, :]).reshape(-1)
        return out

    def dense(self) -> np.ndarray:
        if self.d**self.n > 2**12:
            raise DimensionError("dense local sum capped at dimension 4096")
        eye = np.eye(self.d, dtype=complex)
        return sum(kron(*[self.term if k == l else eye for k in range(self.n)]) for l in range(self.n))

    def apply(self, v: np.ndarray) -> np.ndarray:
        """``H @ v`` for ``v`` of shape (d^n, k) without forming ``H``."""
        v = np.asarray(v, dtype=complex)
        if self.is_diagonal():
            return self.diagonal()[:, None] * v
        return sum(apply_local(self.term, l, self.dims, v) for l in range(self.n))

    def symmetric(self) -> np.ndarray:
        return symmetric_sum(self.term, self.n)

    def shifted(self, c: float) -> "LocalSum":
        """``H + c I`` spread evenly over the sites."""
        return LocalSum(self.term + (c / self.n) * np.eye(self.d), self.n)
