"""Dense linear algebra and state primitives on multipartite Hilbert spaces.

Operators are plain complex ``numpy`` arrays. Where subsystem structure matters
the caller passes the list of subsystem dimensions (``dims``) or a
:class:`SystemShape`; subsystem 0 is the most significant tensor factor.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
MAX_DIM = 2**62

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, X, Y, Z)


class DimensionError(ValueError):
    """Raised when operator shapes or subsystem metadata are inconsistent."""


@dataclass(frozen=True)
class SystemShape:
    """Ordered subsystem dimensions with unique labels."""

    dims: tuple[int, ...]
    labels: tuple = field(default=None)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if any(d < 2 for d in dims):
            raise DimensionError(f"subsystem dimensions must be >= 2, got {dims}")
        labels = tuple(range(len(dims))) if self.labels is None else tuple(self.labels)
        if len(labels) != len(dims):
            raise DimensionError("one label per subsystem required")
        if len(set(labels)) != len(labels):
            raise DimensionError(f"labels must be unique, got {labels}")
        if math.prod(dims) > MAX_DIM:
            raise DimensionError(f"total dimension {math.prod(dims)} overflows")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def qubits(cls, n: int) -> "SystemShape":
        return cls((2,) * n)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return math.prod(self.dims)

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DimensionError(f"unknown subsystem label {label!r}") from None

    def __add__(self, other: "SystemShape") -> "SystemShape":
        labels = self.labels + tuple(
            lab if lab not in self.labels else (lab, "'") for lab in other.labels
        )
        return SystemShape(self.dims + other.dims, labels)


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of operators (or vectors)."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    total = math.prod(np.shape(op)[0] for op in ops)
    if total > MAX_DIM:
        raise DimensionError(f"product dimension {total} overflows")
    return functools.reduce(np.kron, ops)


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.allclose(a, a.conj().T, atol=tol, rtol=0)


def _require_hermitian(a: np.ndarray, tol: float) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if not np.allclose(a, a.conj().T, atol=tol * scale, rtol=0):
        raise ValueError("operator is not Hermitian")
    return (a + a.conj().T) / 2


def hermitian_eig(a: np.ndarray, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix."""
    return np.linalg.eigh(_require_hermitian(a, tol))


def spectral_range(a: np.ndarray) -> float:
    """Difference between the largest and smallest eigenvalue."""
    a = np.asarray(a)
    if a.ndim == 2 and _is_diagonal(a):
        d = np.real(np.diag(a))
        if np.abs(np.imag(np.diag(a))).max(initial=0.0) > 1e-8:
            raise ValueError("operator is not Hermitian")
        return float(d.max() - d.min())
    w = np.linalg.eigvalsh(_require_hermitian(a, 1e-8))
    return float(w[-1] - w[0])


def _is_diagonal(a: np.ndarray) -> bool:
    return a.shape[0] == a.shape[1] and not np.any(a - np.diag(np.diag(a)))


def sqrtm_psd(a: np.ndarray) -> np.ndarray:
    """Square root of a PSD matrix; tiny negative eigenvalues are clamped to 0."""
    w, v = np.linalg.eigh(_require_hermitian(a, 1e-8))
    if w.size and w[0] < -PSD_TOL * max(1.0, abs(w[-1])):
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def check_density(rho: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    """Validate and return a density matrix (Hermitian, PSD, unit trace)."""
    rho = _require_hermitian(rho, tol)
    if abs(np.trace(rho).real - 1) > tol:
        raise ValueError(f"density matrix trace is {np.trace(rho).real}")
    if np.linalg.eigvalsh(rho)[0] < -tol:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Root fidelity Tr sqrt(rho^1/2 sigma rho^1/2), in [0, 1]."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise DimensionError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    s = sqrtm_psd(rho)
    w = np.linalg.eigvalsh(_require_hermitian(s @ sigma @ s, 1e-8))
    return float(min(1.0, np.sqrt(np.clip(w, 0, None)).sum()))


def purified_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    f = fidelity(rho, sigma)
    return float(np.sqrt(max(0.0, 1.0 - f * f)))


def partial_trace(a: np.ndarray, dims: Sequence[int] | SystemShape, keep: Iterable) -> np.ndarray:
    """Trace out every subsystem not in ``keep``.

    ``keep`` holds labels when ``dims`` is a :class:`SystemShape`, otherwise
    positional indices. The kept subsystems stay in their original order.
    """
    shape = dims if isinstance(dims, SystemShape) else SystemShape(tuple(dims))
    keep_idx = sorted({shape.index(k) for k in keep})
    a = np.asarray(a)
    if a.shape != (shape.total, shape.total):
        raise DimensionError(f"operator shape {a.shape} does not match dims {shape.dims}")
    n = shape.n
    t = a.reshape(shape.dims + shape.dims)
    traced = [i for i in range(n) if i not in keep_idx]
    # einsum subscripts: row index i -> letter i, column -> letter n + i unless traced
    letters = [chr(ord("a") + i) for i in range(2 * n)]
    rows = [letters[i] for i in range(n)]
    cols = [letters[i] if i in traced else letters[n + i] for i in range(n)]
    out = [letters[i] for i in keep_idx] + [letters[n + i] for i in keep_idx]
    res = np.einsum("".join(rows + cols) + "->" + "".join(out), t)
    d = math.prod(shape.dims[i] for i in keep_idx)
    return res.reshape(d, d)


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1
    return v


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def local_operator(op: np.ndarray, site: int, dims: Sequence[int]) -> np.ndarray:
    """Embed a single-site operator at ``site`` of a register with ``dims``."""
    mats = [np.eye(d, dtype=complex) for d in dims]
    mats[site] = np.asarray(op, dtype=complex)
    return kron(*mats)


def apply_local(op: np.ndarray, site: int, dims: Sequence[int], v: np.ndarray) -> np.ndarray:
    """Apply a single-site operator to the rows of ``v`` (shape dim x k) without
    building the full matrix."""
    dims = tuple(dims)
    k = v.shape[1]
    t = v.reshape(dims + (k,))
    t = np.moveaxis(np.tensordot(op, t, axes=([1], [site])), 0, site)
    return t.reshape(v.shape[0], k)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (a + a.conj().T) / 2


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    g = rng.standard_normal((dim, rank or dim)) + 1j * rng.standard_normal((dim, rank or dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return random_unitary(rows, rng)[:, :cols]
