"""Encoders and symmetry generators for the code families studied here.

Encoders are stored in one of two bases:

``computational``
    ``V`` has ``prod(dims)`` rows indexed by computational basis strings.
``symmetric``
    ``V`` has ``n + 1`` rows indexed by Dicke states ``|D^n_w>`` of ``n``
    qubits; the physical Hamiltonian must then be a :class:`LocalSum`.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .symmetric import LocalSum, dicke_basis
from .tensor import Z, DimensionError, SystemShape, kron, spectral_range

ISOMETRY_TOL = 1e-10
DENSE_CAP = 2**15


class IsometryError(ValueError):
    """Raised when a supplied encoder is not an isometry."""

    def __init__(self, residual: float):
        super().__init__(f"encoder is not an isometry: ||V^dag V - I|| = {residual:.3e}")
        self.residual = residual


def _fix_phase(v: np.ndarray) -> np.ndarray:
    flat = v.reshape(-1)
    k = int(np.argmax(np.abs(flat).round(12)))
    if abs(flat[k]) == 0:
        return v
    return v * (abs(flat[k]) / flat[k])


@dataclass(frozen=True)
class CodeInstance:
    encoder: np.ndarray
    physical_shape: SystemShape
    name: str
    basis: str = "computational"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.encoder, dtype=complex)
        if v.ndim != 2 or v.shape[1] < 1 or v.shape[0] < v.shape[1]:
            raise DimensionError(f"encoder must be a tall matrix, got shape {v.shape}")
        if self.basis not in ("computational", "symmetric"):
            raise ValueError(f"unknown basis {self.basis!r}")
        rows = self.physical_shape.n + 1 if self.basis == "symmetric" else self.physical_shape.total
        if self.basis == "symmetric" and any(d != 2 for d in self.physical_shape.dims):
            raise DimensionError("symmetric-basis codes live on qubits")
        if v.shape[0] != rows:
            raise DimensionError(f"encoder has {v.shape[0]} rows, expected {rows}")
        res = float(np.linalg.norm(v.conj().T @ v - np.eye(v.shape[1])))
        if res > ISOMETRY_TOL:
            raise IsometryError(res)
        object.__setattr__(self, "encoder", _fix_phase(v))

    @property
    def logical_dim(self) -> int:
        return self.encoder.shape[1]

    @property
    def n(self) -> int:
        return self.physical_shape.n

    def projector(self) -> np.ndarray:
        """``Pi = V V^dag`` in the storage basis."""
        return self.encoder @ self.encoder.conj().T

    def dense_encoder(self) -> np.ndarray:
        if self.basis == "computational":
            return self.encoder
        return dicke_basis(self.n) @ self.encoder

    def to_dense(self) -> "CodeInstance":
        if self.basis == "computational":
            return self
        return CodeInstance(self.dense_encoder(), self.physical_shape, self.name, "computational", dict(self.params))


def _period(spectra: list[np.ndarray], max_multiple: int = 12) -> float | None:
    diffs = np.concatenate([s - s.min() for s in spectra])
    for q in range(1, max_multiple + 1):
        x = q * diffs
        if np.all(np.abs(x - np.round(x)) < 1e-8):
            return 2 * math.pi * q
    return None


@dataclass(frozen=True)
class SymmetryPair:
    """Generators ``H_L`` (logical) and ``H_S`` (physical) of ``U_theta = e^{-i H theta}``."""

    h_logical: np.ndarray
    h_physical: object  # ndarray or LocalSum
    period: float | None = None

    def __post_init__(self):
        hl = np.asarray(self.h_logical, dtype=complex)
        if not np.allclose(hl, hl.conj().T, atol=1e-10):
            raise ValueError("H_L is not Hermitian")
        object.__setattr__(self, "h_logical", (hl + hl.conj().T) / 2)
        hs = self.h_physical
        if not isinstance(hs, LocalSum):
            hs = np.asarray(hs, dtype=complex)
            if not np.allclose(hs, hs.conj().T, atol=1e-10):
                raise ValueError("H_S is not Hermitian")
            object.__setattr__(self, "h_physical", (hs + hs.conj().T) / 2)
        if self.period is None:
            object.__setattr__(self, "period", _period([self.logical_spectrum(), self._physical_generators()]))

    def logical_spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.h_logical)

    def _physical_generators(self) -> np.ndarray:
        """Eigenvalues whose integer differences decide periodicity."""
        hs = self.h_physical
        if isinstance(hs, LocalSum):
            return np.linalg.eigvalsh(hs.term)
        if not np.any(hs - np.diag(np.diag(hs))):
            return np.real(np.diag(hs))
        return np.linalg.eigvalsh(hs)

    @property
    def delta_logical(self) -> float:
        return spectral_range(self.h_logical)

    @property
    def delta_physical(self) -> float:
        hs = self.h_physical
        return hs.spectral_range() if isinstance(hs, LocalSum) else spectral_range(hs)


# Reed-Muller family

def simplex_codewords(t: int) -> np.ndarray:
    """Rows are the ``2^t`` codewords ``x -> (x.p mod 2)_p`` over nonzero points p."""
    points = [p for p in itertools.product([0, 1], repeat=t) if any(p)]
    xs = np.array(list(itertools.product([0, 1], repeat=t)))
    return (xs @ np.array(points).T) % 2


def reed_muller_code(t: int) -> tuple[CodeInstance, SymmetryPair]:
    """The ``[[2^t - 1, 1, 3]]`` quantum Reed-Muller code for t in {3, 4}.

    ``|0_L>`` is the uniform superposition of the even subcode of punctured
    RM(1, t) and ``|1_L>`` its complement coset. ``H_S`` counts excitations and
    ``H_L = -(I - Z_L)/2``, the sign for which the transversal phase
    ``(x)_l exp(i pi Z_l / 2^(t-1))`` acts as ``exp(-i pi Z_L / 2^(t-1))``.
    """
    if t not in (3, 4):
        raise ValueError(f"Reed-Muller codes are supported for t in {{3, 4}}, got {t}")
    n = 2**t - 1
    words = simplex_codewords(t)
    weights = 1 << np.arange(n - 1, -1, -1)
    v = np.zeros((2**n, 2), dtype=complex)
    v[words @ weights, 0] = 1
    v[(1 - words) @ weights, 1] = 1
    v /= math.sqrt(len(words))
    code = CodeInstance(v, SystemShape.qubits(n), f"rm{t}", params={"t": t})
    sym = SymmetryPair(np.diag([0.0, -1.0]), LocalSum((np.eye(2) - Z) / 2, n))
    return code, sym


# modified thermodynamic family

def thermodynamic_mixing(n: int, m: int, q: float) -> float:
    """Weight ``p(q) = q m / (n + m)`` moved onto the far Dicke states."""
    return q * m / (n + m)


def thermodynamic_code(n: int, m: int, q: float) -> tuple[CodeInstance, SymmetryPair]:
    """Permutation-invariant code interpolating covariance (q=0) and erasure correction (q=1).

        |0_L> = sqrt(1-p) |D_{(n-m)/2}> + sqrt(p) |D_n>
        |1_L> = sqrt(1-p) |D_{(n+m)/2}> + sqrt(p) |D_0>

    with ``p = q m / (n + m)``. At ``p = m / (n + m)`` both codewords have the
    same single-site marginals, so single erasures are exactly correctable.
    Stored in the symmetric basis. The encoder is Hoelder continuous,
    ``||V(q) - V(q')||_F <= 2 sqrt(m |q - q'| / (n + m))``.
    """
    if not (isinstance(n, (int, np.integer)) and n % 2 == 0 and n > 0):
        raise ValueError(f"n must be a positive even integer, got {n}")
    if not (isinstance(m, (int, np.integer)) and m % 2 == 0 and 2 <= m <= n // 2):
        raise ValueError(f"m must be even with 2 <= m <= n/2, got m={m}, n={n}")
    if n < m + 4:
        raise ValueError(f"need n >= m + 4 so the four Dicke levels are distinct, got n={n}, m={m}")
    if not (0 <= q <= 1):
        raise ValueError(f"q must lie in [0, 1], got {q}")
    p = thermodynamic_mixing(n, m, q)
    v = np.zeros((n + 1, 2), dtype=complex)
    v[(n - m) // 2, 0] = math.sqrt(1 - p)
    v[n, 0] = math.sqrt(p)
    v[(n + m) // 2, 1] = math.sqrt(1 - p)
    v[0, 1] = math.sqrt(p)
    code = CodeInstance(v, SystemShape.qubits(n), f"thermo(n={n},m={m},q={q:g})", "symmetric",
                        {"n": n, "m": m, "q": float(q)})
    sym = SymmetryPair((m / 2) * Z, LocalSum(Z / 2, n))
    return code, sym


# trivial and custom codes

def trivial_code(shape: SystemShape | int, h_physical=None, h_logical=None) -> tuple[CodeInstance, SymmetryPair]:
    """``V = I``. Defaults: ``H_S = sum_l Z_l / 2`` and ``H_L = Z_0 / 2``."""
    shape = SystemShape.qubits(shape) if isinstance(shape, (int, np.integer)) else shape
    if shape.total > 2**10:
        raise DimensionError("trivial code capped at dimension 1024")
    code = CodeInstance(np.eye(shape.total, dtype=complex), shape, f"trivial(n={shape.n})", params={"n": shape.n})
    if h_physical is None:
        if any(d != 2 for d in shape.dims):
            raise ValueError("default generators need qubits")
        h_physical = LocalSum(Z / 2, shape.n)
    if h_logical is None:
        h_logical = kron(Z / 2, np.eye(shape.total // 2))
    return code, SymmetryPair(h_logical, h_physical)


def _matrix(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def custom_code(descriptor: dict | str | Path) -> tuple[CodeInstance, SymmetryPair]:
    """Build a code from a JSON descriptor (dict, JSON text or file path)."""
    from .schemas import validate

    if isinstance(descriptor, Path) or (isinstance(descriptor, str) and not descriptor.lstrip().startswith("{")):
        descriptor = json.loads(Path(descriptor).read_text())
    elif isinstance(descriptor, str):
        descriptor = json.loads(descriptor)
    validate(descriptor, "code")
    shape = SystemShape(tuple(descriptor["physical_dims"]))
    v = _matrix(descriptor["isometry"])
    if v.shape != (shape.total, descriptor["logical_dim"]):
        raise DimensionError(f"isometry shape {v.shape} != ({shape.total}, {descriptor['logical_dim']})")
    code = CodeInstance(v, shape, descriptor["name"])
    return code, SymmetryPair(_matrix(descriptor["h_logical"]), _matrix(descriptor["h_physical"]))


def code_to_descriptor(code: CodeInstance, sym: SymmetryPair) -> dict:
    def enc(m):
        return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]

    hs = sym.h_physical.dense() if isinstance(sym.h_physical, LocalSum) else sym.h_physical
    return {
        "name": code.name,
        "logical_dim": code.logical_dim,
        "physical_dims": list(code.physical_shape.dims),
        "isometry": enc(code.dense_encoder()),
        "h_logical": enc(sym.h_logical),
        "h_physical": enc(hs),
    }
