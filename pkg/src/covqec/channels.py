"""Kraus-form channels, noise models and the Hamiltonian-in-Kraus-span test.

A channel stores its Kraus operators as ``(d_out, d_in)`` arrays together with
input and output subsystem dimensions. The single-erasure channel is kept in
structured form: its Kraus operators are only materialized on request, and
everything downstream (products ``K_i^dag K_j``, encoded blocks) is computed
from the structure.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .symmetric import LocalSum
from .tensor import DimensionError, SystemShape, kron, partial_trace

TP_TOL = 1e-8
MAX_DENSE_OUTPUT = 2**14
MAX_PRODUCT_ENTRIES = 2**26
MAX_KRAUS_ENTRIES = 2**24


def _as_matrix(k) -> np.ndarray:
    k = np.asarray(k, dtype=complex)
    if k.ndim != 2:
        raise DimensionError(f"Kraus operator must be a matrix, got shape {k.shape}")
    return k


class KrausChannel:
    """A CPTP map ``rho -> sum_i K_i rho K_i^dag``."""

    def __init__(self, kraus: Sequence[np.ndarray], in_dims=None, out_dims=None, name: str = "custom",
                 check: bool = True):
        ks = [_as_matrix(k) for k in kraus]
        if not ks:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ks[0].shape
        if any(k.shape != shape for k in ks):
            raise DimensionError("Kraus operators must share one shape")
        self._kraus = ks
        self.in_shape = _shape(in_dims, shape[1])
        self.out_shape = _shape(out_dims, shape[0])
        self.name = name
        if check:
            self._check_tp()

    def _check_tp(self) -> None:
        s = sum(k.conj().T @ k for k in self._kraus)
        err = float(np.abs(s - np.eye(s.shape[0])).max())
        if err > TP_TOL:
            raise ValueError(f"Kraus operators are not trace preserving (max |sum K^dag K - I| = {err:.2e})")

    @property
    def kraus(self) -> list[np.ndarray]:
        return self._kraus

    @property
    def input_dim(self) -> int:
        return self.in_shape.total

    @property
    def output_dim(self) -> int:
        return self.out_shape.total

    @property
    def num_kraus(self) -> int:
        return len(self.kraus)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.input_dim, self.input_dim):
            raise DimensionError(f"input shape {rho.shape} does not match channel input {self.input_dim}")
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    __call__ = apply

    def products(self) -> np.ndarray:
        """Array ``P[i, j] = K_i^dag K_j`` of shape (r, r, d_in, d_in)."""
        if (self.num_kraus * self.input_dim) ** 2 > MAX_PRODUCT_ENTRIES:
            raise DimensionError("Kraus product tensor exceeds the dense budget")
        k = np.stack(self.kraus)
        return np.einsum("iab,jac->ijbc", k.conj(), k)

    def encoded(self, v: np.ndarray) -> list[np.ndarray]:
        """``K_i V`` for an encoder ``V`` (d_in x k)."""
        v = np.asarray(v, dtype=complex)
        if v.shape[0] != self.input_dim:
            raise DimensionError(f"encoder has {v.shape[0]} rows, channel input is {self.input_dim}")
        return [k @ v for k in self.kraus]

    def encoded_blocks(self, v: np.ndarray) -> list[list[np.ndarray]]:
        """Group ``K_i V`` into sets with mutually orthogonal output supports.

        Two Kraus operators are linked when ``(K_i V)^dag K_j V != 0``; each
        connected component is one block.
        """
        kv = self.encoded(v)
        r = len(kv)
        scale = max(float(np.abs(x).max(initial=0)) for x in kv) or 1.0
        parent = list(range(r))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        live = [i for i in range(r) if np.abs(kv[i]).max(initial=0) > 1e-14 * scale]
        for a_i, i in enumerate(live):
            for j in live[a_i + 1:]:
                if np.abs(kv[i].conj().T @ kv[j]).max() > 1e-12 * scale**2:
                    parent[find(i)] = find(j)
        groups: dict[int, list[int]] = {}
        for i in live:
            groups.setdefault(find(i), []).append(i)
        return [[kv[i] for i in idx] for _, idx in sorted(groups.items(), key=lambda kv_: kv_[1][0])]

    def to_dict(self) -> dict:
        return {
            "type": "custom",
            "name": self.name,
            "dims": list(self.in_shape.dims),
            "output_dims": list(self.out_shape.dims),
            "kraus": [[[[float(z.real), float(z.imag)] for z in row] for row in k] for k in self.kraus],
        }

    def __repr__(self) -> str:
        return f"KrausChannel({self.name!r}, {self.input_dim}->{self.output_dim}, r={self.num_kraus})"


def _shape(dims, total: int) -> SystemShape:
    if dims is None:
        return SystemShape((total,)) if total >= 2 else _trivial_shape()
    shape = dims if isinstance(dims, SystemShape) else SystemShape(tuple(dims))
    if shape.total != total:
        raise DimensionError(f"dims {shape.dims} do not multiply to {total}")
    return shape


def _trivial_shape():
    raise DimensionError("one-dimensional spaces are not supported")


class ErasureChannel(KrausChannel):
    """Erase one subsystem chosen uniformly at random.

    The erased slot is replaced by a flag level ``|e>`` appended to its local
    space and the location is written to a classical register of dimension n
    (padded to 2 when n = 1).
    Kraus operators are ``K_{l,k} = n^{-1/2} |e><k|_l (x) |l>_loc``, ordered
    with ``l`` major.
    """

    def __init__(self, shape: SystemShape):
        if shape.n < 1:
            raise ValueError("erasure needs at least one subsystem")
        self.in_shape = shape
        self.out_shape = SystemShape(tuple(d + 1 for d in shape.dims) + ((shape.n,) if shape.n >= 2 else (2,)))
        self.name = "erasure"
        self._dense = None

    @property
    def n(self) -> int:
        return self.in_shape.n

    @property
    def index(self) -> list[tuple[int, int]]:
        return [(l, k) for l in range(self.n) for k in range(self.in_shape.dims[l])]

    @property
    def num_kraus(self) -> int:
        return len(self.index)

    @property
    def kraus(self) -> list[np.ndarray]:
        if self._dense is None:
            if self.output_dim > MAX_DENSE_OUTPUT:
                raise DimensionError(f"dense erasure Kraus operators capped at output dimension {MAX_DENSE_OUTPUT}")
            dims = self.in_shape.dims
            loc_dim = self.out_shape.dims[-1]
            embeds = [np.eye(d + 1, d, dtype=complex) for d in dims]
            ks = []
            for l, k in self.index:
                flag = np.zeros((dims[l] + 1, dims[l]), dtype=complex)
                flag[dims[l], k] = 1
                loc = np.zeros((loc_dim, 1), dtype=complex)
                loc[l, 0] = 1
                mats = [flag if m == l else embeds[m] for m in range(self.n)]
                ks.append(kron(*mats, loc) / math.sqrt(self.n))
            self._dense = ks
        return self._dense

    def products(self) -> np.ndarray:
        """``K_{l,k}^dag K_{l',k'} = delta_{l l'} |k><k'|_l / n``."""
        dims = self.in_shape.dims
        d_in = self.in_shape.total
        r = self.num_kraus
        if (r * d_in) ** 2 > MAX_PRODUCT_ENTRIES:
            raise DimensionError("Kraus product tensor exceeds the dense budget")
        out = np.zeros((r, r, d_in, d_in), dtype=complex)
        for a, (l, k) in enumerate(self.index):
            for b, (l2, k2) in enumerate(self.index):
                if l == l2:
                    e = np.zeros((dims[l], dims[l]), dtype=complex)
                    e[k, k2] = 1 / self.n
                    out[a, b] = _embed_local(e, l, dims)
        return out

    def site_slices(self, v: np.ndarray, site: int) -> list[np.ndarray]:
        """``<k|_site V`` for each local level k, shape (d_in / d_site, cols)."""
        dims = self.in_shape.dims
        v = np.asarray(v, dtype=complex)
        t = np.moveaxis(v.reshape(dims + (v.shape[1],)), site, 0)
        return [t[k].reshape(-1, v.shape[1]) for k in range(dims[site])]

    def encoded_blocks(self, v: np.ndarray) -> list[list[np.ndarray]]:
        """One block per erased site; the flag and location factors are dropped
        because they are fixed within a block."""
        v = np.asarray(v, dtype=complex)
        if v.shape[0] != self.input_dim:
            raise DimensionError(f"encoder has {v.shape[0]} rows, channel input is {self.input_dim}")
        s = 1 / math.sqrt(self.n)
        return [[s * a for a in self.site_slices(v, l)] for l in range(self.n)]

    def to_dict(self) -> dict:
        return {"type": "erasure", "dims": list(self.in_shape.dims)}

    def __repr__(self) -> str:
        return f"ErasureChannel(dims={self.in_shape.dims})"


def _embed_local(op: np.ndarray, site: int, dims: Sequence[int]) -> np.ndarray:
    mats = [np.eye(d, dtype=complex) for d in dims]
    mats[site] = op
    return kron(*mats)


# constructors

def erasure_channel(shape: SystemShape | Sequence[int]) -> ErasureChannel:
    shape = shape if isinstance(shape, SystemShape) else SystemShape(tuple(shape))
    return ErasureChannel(shape)


def dephasing_channel(p: float, shape: SystemShape | Sequence[int] | int) -> KrausChannel:
    """Independent Z-dephasing with probability ``p`` on every qubit."""
    if not (isinstance(p, (int, float, np.floating)) and 0 <= p <= 1):
        raise ValueError(f"dephasing probability must lie in [0, 1], got {p}")
    if isinstance(shape, (int, np.integer)):
        shape = SystemShape.qubits(int(shape))
    shape = shape if isinstance(shape, SystemShape) else SystemShape(tuple(shape))
    if any(d != 2 for d in shape.dims):
        raise DimensionError("dephasing noise is defined on qubits")
    single = [math.sqrt(1 - p) * np.eye(2, dtype=complex), math.sqrt(p) * np.diag([1, -1]).astype(complex)]
    if p in (0, 1):
        single = [single[0]] if p == 0 else [single[1]]
    if len(single) ** shape.n * shape.total**2 > MAX_KRAUS_ENTRIES:
        raise DimensionError(f"dense dephasing Kraus list on {shape.n} qubits exceeds the budget")
    ks = [kron(*c) for c in itertools.product(single, repeat=shape.n)]
    ch = KrausChannel(ks, shape, shape, name="dephasing")
    ch.p = float(p)
    return ch


class IdentityChannel(KrausChannel):
    """The noiseless channel; its single Kraus operator is built only on demand."""

    def __init__(self, shape: SystemShape):
        self.in_shape = self.out_shape = shape
        self.name = "identity"
        self._dense = None

    @property
    def num_kraus(self) -> int:
        return 1

    @property
    def kraus(self) -> list[np.ndarray]:
        if self._dense is None:
            if self.input_dim > MAX_DENSE_OUTPUT:
                raise DimensionError(f"dense identity capped at dimension {MAX_DENSE_OUTPUT}")
            self._dense = [np.eye(self.input_dim, dtype=complex)]
        return self._dense

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.input_dim, self.input_dim):
            raise DimensionError(f"input shape {rho.shape} does not match channel input {self.input_dim}")
        return rho.copy()

    __call__ = apply

    def encoded_blocks(self, v: np.ndarray) -> list[list[np.ndarray]]:
        v = np.asarray(v, dtype=complex)
        if v.shape[0] != self.input_dim:
            raise DimensionError(f"encoder has {v.shape[0]} rows, channel input is {self.input_dim}")
        return [[v]]


def is_noiseless(ch: KrausChannel) -> bool:
    if isinstance(ch, IdentityChannel):
        return True
    if isinstance(ch, ErasureChannel) or ch.num_kraus != 1:
        return False
    k = ch.kraus[0]
    return k.shape[0] == k.shape[1] and np.allclose(k, np.eye(k.shape[0]), atol=1e-14)


def identity_channel(shape: SystemShape | Sequence[int] | int) -> IdentityChannel:
    if isinstance(shape, (int, np.integer)):
        shape = SystemShape.qubits(int(shape))
    shape = shape if isinstance(shape, SystemShape) else SystemShape(tuple(shape))
    return IdentityChannel(shape)


def unitary_channel(u: np.ndarray, dims=None, name: str = "unitary") -> KrausChannel:
    u = _as_matrix(u)
    return KrausChannel([u], dims, dims, name=name)


def compose(after: KrausChannel, before: KrausChannel) -> KrausChannel:
    """The channel ``after o before``."""
    if after.input_dim != before.output_dim:
        raise DimensionError(f"cannot compose: {before.output_dim} -> {after.input_dim}")
    ks = [a @ b for a in after.kraus for b in before.kraus]
    return KrausChannel(ks, before.in_shape, after.out_shape, name=f"{after.name}.{before.name}")


def dual(ch: KrausChannel) -> Callable[[np.ndarray], np.ndarray]:
    """Heisenberg-picture map ``X -> sum_i K_i^dag X K_i``."""
    ks = list(ch.kraus)

    def heisenberg(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (ch.output_dim, ch.output_dim):
            raise DimensionError(f"observable shape {x.shape} does not match channel output {ch.output_dim}")
        return sum(k.conj().T @ x @ k for k in ks)

    return heisenberg


def stinespring(ch: KrausChannel) -> np.ndarray:
    """Isometry ``W = sum_i K_i (x) |i>_env`` into output (x) environment."""
    k = np.stack(ch.kraus)  # (r, d_out, d_in)
    return np.transpose(k, (1, 0, 2)).reshape(ch.output_dim * ch.num_kraus, ch.input_dim)


def complementary(ch: KrausChannel) -> KrausChannel:
    """Channel to the environment: ``rho -> sum_ij Tr(K_i rho K_j^dag) |i><j|``."""
    k = np.stack(ch.kraus)
    r = ch.num_kraus
    if r < 2:
        k = np.concatenate([k, np.zeros_like(k)])  # pad the environment to a qubit
        r = 2
    comp = [k[:, m, :] for m in range(ch.output_dim)]
    return KrausChannel(comp, ch.in_shape, (r,), name=f"comp.{ch.name}")


def choi(ch: KrausChannel) -> np.ndarray:
    """``sum_ij |i><j| (x) N(|i><j|)`` with the input factor first."""
    vs = [k.T.reshape(-1) for k in ch.kraus]
    return sum(np.outer(v, v.conj()) for v in vs)


def choi_distance(a: KrausChannel, b: KrausChannel) -> float:
    return float(np.linalg.norm(choi(a) - choi(b)))


# Hamiltonian-in-Kraus-span

@dataclass(frozen=True)
class HksReport:
    holds: bool
    residual: float
    span_dimension: int
    projection: np.ndarray | None = None


def _dense_h(h, dim: int) -> np.ndarray:
    if isinstance(h, LocalSum):
        h = h.dense()
    h = np.asarray(h, dtype=complex)
    if h.shape != (dim, dim):
        raise DimensionError(f"H_S shape {h.shape} does not match channel input {dim}")
    if not np.allclose(h, h.conj().T, atol=1e-10 * max(1.0, float(np.abs(h).max(initial=0)))):
        raise ValueError("H_S is not Hermitian")
    return (h + h.conj().T) / 2


def one_local_projection(h: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Orthogonal (Hilbert-Schmidt) projection onto sums of 1-local operators."""
    dims = tuple(dims)
    total = math.prod(dims)
    out = np.zeros_like(h)
    for l, d in enumerate(dims):
        red = partial_trace(h, dims, [l]) * (d / total)
        out = out + _embed_local(red, l, dims)
    return out - (len(dims) - 1) * np.trace(h) / total * np.eye(total)


def check_hks(h_s, noise: KrausChannel) -> HksReport:
    """Project ``H_S`` onto span{K_i^dag K_j} and report the residual."""
    if isinstance(noise, ErasureChannel):
        dims = noise.in_shape.dims
        span_dim = 1 + sum(d * d - 1 for d in dims)
        if isinstance(h_s, LocalSum):
            if h_s.dims != dims:
                raise DimensionError("H_S and channel act on different registers")
            return HksReport(True, 0.0, span_dim)
        h = _dense_h(h_s, noise.input_dim)
        proj = one_local_projection(h, dims)
    else:
        h = _dense_h(h_s, noise.input_dim)
        prods = noise.products()
        r, d = prods.shape[0], prods.shape[2]
        rows = prods.reshape(r * r, d * d)
        u, s, vh = np.linalg.svd(rows, full_matrices=False)
        rank = int((s > max(rows.shape) * np.finfo(float).eps * (s[0] if s.size else 0) * 10).sum())
        basis = vh[:rank]  # orthonormal rows spanning the product span
        hv = h.reshape(-1)
        proj = (basis.T @ (basis.conj() @ hv)).reshape(d, d)
        span_dim = rank
    residual = float(np.linalg.norm(h - proj))
    holds = residual <= 1e-8 * max(float(np.linalg.norm(h)), 1e-300)
    return HksReport(holds, residual, span_dim, proj)


# JSON descriptor

def channel_to_dict(ch: KrausChannel) -> dict:
    if isinstance(ch, ErasureChannel):
        return ch.to_dict()
    if ch.name == "dephasing" and hasattr(ch, "p"):
        return {"type": "dephasing", "dims": list(ch.in_shape.dims), "p": ch.p}
    if ch.name == "identity":
        return {"type": "identity", "dims": list(ch.in_shape.dims)}
    return ch.to_dict()


def channel_from_dict(d: dict) -> KrausChannel:
    from .schemas import validate

    validate(d, "channel")
    kind = d["type"]
    dims = tuple(d["dims"])
    if kind == "erasure":
        return erasure_channel(dims)
    if kind == "dephasing":
        return dephasing_channel(float(d["p"]), dims)
    if kind == "identity":
        return identity_channel(dims)
    ks = [np.array([[complex(re, im) for re, im in row] for row in k]) for k in d["kraus"]]
    return KrausChannel(ks, dims, tuple(d.get("output_dims", dims)), name=d.get("name", "custom"))
