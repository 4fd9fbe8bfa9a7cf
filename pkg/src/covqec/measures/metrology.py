"""Noise-limited metrology quantities 𝔍 and 𝔉 as semidefinite programs.

Write ``beta(h) = sum_ij h_ij K_i^dag K_j`` for a Hermitian ``h`` on the Kraus
index. The feasible gauges are ``{h : beta(h) = H_S}``; they exist exactly when
``H_S`` lies in the span of the Kraus products.

* ``j_min = min Delta(h)`` over feasible gauges.
* ``f_reg = 4 min lambda_max(beta(h^2) - H_S^2)`` over feasible gauges, the
  regularized QFI of ``N o U_theta`` with ``dK_i/dtheta = -i K_i H_S``. Because
  ``beta`` is completely positive, the relaxation ``X >= h^2`` with
  ``beta(X)`` in place of ``beta(h^2)`` is tight.

Two formulations are provided. The generic one works with dense Kraus
products. For single erasure on qubits with ``H_S = sum_l T`` the gauges can
be taken permutation symmetric, ``h = I (x) A + (J - I) (x) B`` on
(site, level), which splits every constraint into two site sectors and, via
Schur-Weyl duality, one block per total spin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..channels import ErasureChannel, KrausChannel, check_hks, is_noiseless
from ..convex import INFEASIBLE, OPTIMAL, SdpProblem, SolverError, solve
from ..symmetric import LocalSum, collective_block, spin_sectors
from ..tensor import DimensionError

GENERIC_DIM_CAP = 64
GENERIC_KRAUS_CAP = 24


@dataclass
class MetrologyResult:
    value: float | None  # None: infeasible (j_min); math.inf: divergent (f_reg)
    status: str
    method: str
    iterations: int = 0
    gap: float = math.nan
    extra: dict = field(default_factory=dict)

    @property
    def finite(self) -> bool:
        return self.value is not None and math.isfinite(self.value)

    def diagnostics(self) -> dict:
        return {"status": self.status, "method": self.method, "iterations": self.iterations,
                "gap": None if math.isnan(self.gap) else self.gap}


def symmetric_applicable(h_s, noise: KrausChannel, qubits_only: bool = False) -> bool:
    if not (isinstance(noise, ErasureChannel) and isinstance(h_s, LocalSum)):
        return False
    if h_s.dims != noise.in_shape.dims:
        raise DimensionError("H_S and the erasure channel act on different registers")
    return h_s.d == 2 or not qubits_only


def _dense_inputs(h_s, noise: KrausChannel):
    if noise.input_dim > GENERIC_DIM_CAP or noise.num_kraus > GENERIC_KRAUS_CAP:
        raise DimensionError(
            f"generic program capped at dimension {GENERIC_DIM_CAP} and {GENERIC_KRAUS_CAP} Kraus operators")
    h = h_s.dense() if isinstance(h_s, LocalSum) else np.asarray(h_s, dtype=complex)
    if h.shape != (noise.input_dim, noise.input_dim):
        raise DimensionError(f"H_S shape {h.shape} does not match channel input {noise.input_dim}")
    return (h + h.conj().T) / 2, noise.products()


def _beta(products: np.ndarray) -> callable:
    return lambda e: np.einsum("ij,ijab->ab", e, products)


def _psd_lmi(prob: SdpProblem, var, sign: float = 1.0, const=None, scalar=None, scalar_sign=0.0):
    """LMI ``const + sign * var + scalar_sign * scalar * I >= 0``."""
    k = var.dim
    lmi = prob.add_lmi(k, const=const)
    for p, e in zip(var.indices, var.basis()):
        lmi.add(p, sign * e)
    if scalar is not None:
        lmi.add(scalar, scalar_sign * np.eye(k))
    return lmi


# generic programs

def j_min_problem(h: np.ndarray, products: np.ndarray) -> tuple[SdpProblem, dict]:
    r = products.shape[0]
    prob = SdpProblem("j_min")
    hv = prob.add_hermitian(r)
    a, b = prob.add_scalar(), prob.add_scalar()
    _psd_lmi(prob, hv, -1.0, scalar=a, scalar_sign=1.0)  # a I - h
    _psd_lmi(prob, hv, 1.0, scalar=b, scalar_sign=-1.0)  # h - b I
    prob.add_matrix_equality([(hv, _beta(products))], h)
    prob.minimize({a: 1.0, b: -1.0})
    return prob, {"h": hv, "a": a, "b": b}


def f_reg_problem(h: np.ndarray, products: np.ndarray) -> tuple[SdpProblem, dict]:
    r, d = products.shape[0], products.shape[2]
    prob = SdpProblem("f_reg")
    hv = prob.add_hermitian(r)
    xv = prob.add_hermitian(r)
    t = prob.add_scalar()
    # [[X, h], [h, I]] >= 0
    const = np.zeros((2 * r, 2 * r), dtype=complex)
    const[r:, r:] = np.eye(r)
    lmi = prob.add_lmi(2 * r, const=const)
    for p, e in zip(xv.indices, xv.basis()):
        m = np.zeros((2 * r, 2 * r), dtype=complex)
        m[:r, :r] = e
        lmi.add(p, m)
    for p, e in zip(hv.indices, hv.basis()):
        m = np.zeros((2 * r, 2 * r), dtype=complex)
        m[:r, r:] = e
        m[r:, :r] = e
        lmi.add(p, m)
    # t I + H_S^2 - beta(X) >= 0
    beta = _beta(products)
    lmi2 = prob.add_lmi(d, const=h @ h)
    lmi2.add(t, np.eye(d))
    for p, e in zip(xv.indices, xv.basis()):
        lmi2.add(p, -beta(e))
    prob.add_matrix_equality([(hv, beta)], h)
    prob.minimize({t: 1.0})
    return prob, {"h": hv, "X": xv, "t": t}


# permutation-symmetric programs for single erasure

def _sectors(n: int):
    return [(1.0 * (n - 1), "sym")] + ([(-1.0, "std")] if n >= 2 else [])


def j_min_symmetric_problem(h_s: LocalSum) -> tuple[SdpProblem, dict]:
    n, d = h_s.n, h_s.d
    a_fixed = n * h_s.term
    prob = SdpProblem("j_min_symmetric")
    bv = prob.add_hermitian(d)
    a, b = prob.add_scalar(), prob.add_scalar()
    for coef, _ in _sectors(n):
        # sector operator S = A + coef * B
        _psd_lmi(prob, bv, -coef, const=-a_fixed, scalar=a, scalar_sign=1.0)
        _psd_lmi(prob, bv, coef, const=a_fixed, scalar=b, scalar_sign=-1.0)
    prob.minimize({a: 1.0, b: -1.0})
    return prob, {"B": bv, "a": a, "b": b}


def f_reg_symmetric_problem(h_s: LocalSum) -> tuple[SdpProblem, dict]:
    if h_s.d != 2:
        raise DimensionError("the spin-sector program is for qubits")
    n = h_s.n
    a_fixed = n * h_s.term
    prob = SdpProblem("f_reg_symmetric")
    bv = prob.add_hermitian(2)
    xd = prob.add_hermitian(2)
    xo = prob.add_hermitian(2)
    t = prob.add_scalar()
    for coef, _ in _sectors(n):
        # [[Xd + coef Xo, A + coef B], [., I]] >= 0
        const = np.zeros((4, 4), dtype=complex)
        const[:2, 2:] = const[2:, :2] = a_fixed
        const[2:, 2:] = np.eye(2)
        lmi = prob.add_lmi(4, const=const)
        for scale, var in ((1.0, xd), (coef, xo)):
            for p, e in zip(var.indices, var.basis()):
                m = np.zeros((4, 4), dtype=complex)
                m[:2, :2] = scale * e
                lmi.add(p, m)
        for p, e in zip(bv.indices, bv.basis()):
            m = np.zeros((4, 4), dtype=complex)
            m[:2, 2:] = m[2:, :2] = coef * e
            lmi.add(p, m)
    for j, _ in spin_sectors(n):
        hj = collective_block(h_s.term, n, j)
        k = hj.shape[0]
        lmi = prob.add_lmi(k, const=hj @ hj)
        lmi.add(t, np.eye(k))
        for p, e in zip(xd.indices, xd.basis()):
            lmi.add(p, -collective_block(e, n, j) / n)
    prob.minimize({t: 1.0})
    return prob, {"B": bv, "Xd": xd, "Xo": xo, "t": t}


# public entry points

def _scalar_hamiltonian(h_s) -> bool:
    m = h_s.term if isinstance(h_s, LocalSum) else np.asarray(h_s)
    return bool(np.allclose(m, m[0, 0] * np.eye(m.shape[0]), atol=1e-12))


def build_problem(kind: str, h_s, noise: KrausChannel) -> SdpProblem:
    """The SDP behind ``j_min`` or ``f_reg`` (used for debug dumps)."""
    if kind not in ("j_min", "f_reg"):
        raise ValueError(f"unknown program {kind!r}")
    if symmetric_applicable(h_s, noise, qubits_only=(kind == "f_reg")):
        builder = j_min_symmetric_problem if kind == "j_min" else f_reg_symmetric_problem
        return builder(h_s)[0]
    h, prods = _dense_inputs(h_s, noise)
    return (j_min_problem if kind == "j_min" else f_reg_problem)(h, prods)[0]


def j_min(h_s, noise: KrausChannel) -> MetrologyResult:
    """``min Delta(h)`` over gauges with ``sum h_ij K_i^dag K_j = H_S``."""
    if is_noiseless(noise):
        # the only products are multiples of I
        if _scalar_hamiltonian(h_s):
            return MetrologyResult(0.0, "optimal", "noiseless")
        return MetrologyResult(None, "infeasible", "noiseless")
    if symmetric_applicable(h_s, noise):
        prob, _ = j_min_symmetric_problem(h_s)
        method = "symmetric"
    else:
        h, prods = _dense_inputs(h_s, noise)
        prob, _ = j_min_problem(h, prods)
        method = "generic"
    sol = solve(prob)
    if sol.status == INFEASIBLE:
        return MetrologyResult(None, "infeasible", method, sol.iterations)
    if sol.status != OPTIMAL:
        raise SolverError(f"j_min SDP ended with status {sol.status}")
    return MetrologyResult(max(0.0, sol.primal_value), "optimal", method, sol.iterations, sol.gap)


def f_reg(h_s, noise: KrausChannel) -> MetrologyResult:
    """Regularized channel QFI of ``N o e^{-i H_S theta}``; divergent without HKS."""
    if is_noiseless(noise):
        if _scalar_hamiltonian(h_s):
            return MetrologyResult(0.0, "optimal", "noiseless")
        return MetrologyResult(math.inf, "divergent", "noiseless")
    if symmetric_applicable(h_s, noise, qubits_only=True):
        prob, _ = f_reg_symmetric_problem(h_s)
        method = "symmetric"
    else:
        if not check_hks(h_s, noise).holds:
            return MetrologyResult(math.inf, "divergent", "hks")
        h, prods = _dense_inputs(h_s, noise)
        prob, _ = f_reg_problem(h, prods)
        method = "generic"
    sol = solve(prob)
    if sol.status == INFEASIBLE:
        return MetrologyResult(math.inf, "divergent", method, sol.iterations)
    if sol.status != OPTIMAL:
        raise SolverError(f"f_reg SDP ended with status {sol.status}")
    return MetrologyResult(4 * max(0.0, sol.primal_value), "optimal", method, sol.iterations, 4 * sol.gap)


def growth_exponent(ns, values) -> float:
    """Least-squares slope of ``log value`` against ``log n``."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    return float(np.polyfit(x, y, 1)[0])
