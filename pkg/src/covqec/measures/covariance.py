"""Covariance-violation measures of an isometric encoder.

Everything here works with the ``dim_S x L`` matrix ``V`` written in an
eigenbasis of ``H_S`` (the *frame*), so that only diagonal phases
``exp(-i lambda_k theta)`` ever act on the physical side.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from ..codes import CodeInstance, SymmetryPair
from ..convex import OPTIMAL, SdpProblem, SolverError, numerical_range_distance, solve
from ..symmetric import LocalSum
from ..tensor import DimensionError, apply_local, hermitian_eig, spectral_range

DEFAULT_GRID = 1024
EIGH_CAP = 4096


def _is_diag(a: np.ndarray) -> bool:
    return not np.any(a - np.diag(np.diag(a)))


def physical_frame(code: CodeInstance, sym: SymmetryPair) -> tuple[np.ndarray, np.ndarray]:
    """Energies ``lambda`` and ``V`` in a basis where ``H_S = diag(lambda)``."""
    hs = sym.h_physical
    v = code.encoder
    if code.basis == "symmetric":
        if not isinstance(hs, LocalSum) or hs.n != code.n or hs.d != 2:
            raise DimensionError("symmetric-basis codes need a qubit LocalSum Hamiltonian on the same register")
        hs = hs.symmetric()
    elif isinstance(hs, LocalSum):
        if hs.dims != code.physical_shape.dims:
            raise DimensionError("Hamiltonian and code act on different registers")
        if hs.is_diagonal():
            return hs.diagonal(), v
        e, p = np.linalg.eigh(hs.term)
        for l in range(hs.n):
            v = apply_local(p.conj().T, l, hs.dims, v)
        return LocalSum(np.diag(e), hs.n).diagonal(), v
    hs = np.asarray(hs)
    if hs.shape[0] != v.shape[0]:
        raise DimensionError(f"H_S dimension {hs.shape[0]} does not match encoder rows {v.shape[0]}")
    if _is_diag(hs):
        return np.real(np.diag(hs)).copy(), v
    if hs.shape[0] > EIGH_CAP:
        raise DimensionError("dense non-diagonal H_S above the eigensolver cap")
    lam, q = hermitian_eig(hs)
    return lam, q.conj().T @ v


def physical_unitary_apply(code: CodeInstance, sym: SymmetryPair, theta: float) -> np.ndarray:
    """``U_{S,theta} V`` in the code's storage basis."""
    hs = sym.h_physical
    v = code.encoder
    if code.basis == "computational" and isinstance(hs, LocalSum):
        e, p = np.linalg.eigh(hs.term)
        u = (p * np.exp(-1j * e * theta)) @ p.conj().T
        for l in range(hs.n):
            v = apply_local(u, l, hs.dims, v)
        return v
    mat = hs.symmetric() if code.basis == "symmetric" else np.asarray(hs)
    if _is_diag(mat):
        return np.exp(-1j * np.real(np.diag(mat)) * theta)[:, None] * v
    lam, q = hermitian_eig(mat)
    return q @ (np.exp(-1j * lam * theta)[:, None] * (q.conj().T @ v))


class _Overlap:
    """``W(theta) = U_L^dag V^dag U_S V`` in the eigenbasis of ``H_L``."""

    def __init__(self, code: CodeInstance, sym: SymmetryPair):
        lam, vf = physical_frame(code, sym)
        mu, ul = np.linalg.eigh(sym.h_logical)
        vl = vf @ ul
        keys = np.round(lam, 9)
        uniq, inv = np.unique(keys, return_inverse=True)
        m = np.zeros((len(uniq), vl.shape[1], vl.shape[1]), dtype=complex)
        np.add.at(m, inv, np.einsum("ka,kb->kab", vl.conj(), vl))
        self.lam = np.array([lam[inv == k].mean() for k in range(len(uniq))])
        self.mu = mu
        self.m = m

    def __call__(self, theta: float) -> np.ndarray:
        # W_ab = sum_k exp(-i (lambda_k - mu_a) theta) M_k[a, b]
        ph = np.exp(-1j * (self.lam[:, None] - self.mu[None, :]) * theta)
        return np.einsum("ka,kab->ab", ph, self.m)


@dataclass
class GlobalViolation:
    value: float
    theta: float
    grid_size: int
    period: float
    profile: np.ndarray


def _violation(f: float) -> float:
    f = min(1.0, max(0.0, f))
    return math.sqrt(max(0.0, (1 - f) * (1 + f)))


def global_violation_details(code: CodeInstance, sym: SymmetryPair, grid_size: int = DEFAULT_GRID,
                             refine: int = 4) -> GlobalViolation:
    """``max_theta P(U_S V, V U_L)`` for an isometric encoder.

    At each angle the stabilized worst-case fidelity of the two isometric
    channels is the distance from the origin to the numerical range of
    ``W(theta)``. The angle is scanned on a grid over one period and the
    largest grid values are refined by a bounded scalar search.
    """
    if grid_size < 4:
        raise ValueError("grid_size must be at least 4")
    period = sym.period or 2 * math.pi
    w = _Overlap(code, sym)
    thetas = np.linspace(0, period, grid_size, endpoint=False)
    prof = np.array([_violation(numerical_range_distance(w(t))) for t in thetas])
    best_val, best_theta = float(prof.max()), float(thetas[int(prof.argmax())])
    step = period / grid_size
    for k in np.argsort(prof)[::-1][:refine]:
        res = minimize_scalar(lambda t: -_violation(numerical_range_distance(w(t))),
                              bounds=(thetas[k] - step, thetas[k] + step), method="bounded",
                              options={"xatol": 1e-8})
        if -res.fun > best_val:
            best_val, best_theta = float(-res.fun), float(res.x % period)
    return GlobalViolation(best_val, best_theta, grid_size, period, prof)


def global_violation(code: CodeInstance, sym: SymmetryPair, grid_size: int = DEFAULT_GRID) -> float:
    return global_violation_details(code, sym, grid_size).value


def isometric_channel_qfi(v: np.ndarray, a: np.ndarray) -> float:
    """QFI at theta=0 of the one-Kraus family ``K(theta)`` with ``K(0) = V`` and
    ``dK/dtheta = -i A``.

    Minimizes ``4 lambda_max((A - hV)^dag (A - hV))`` over real ``h`` as a
    two-variable SDP on logical-sized matrices.
    """
    v = np.asarray(v, dtype=complex)
    a = np.asarray(a, dtype=complex)
    L = v.shape[1]
    p = a.conj().T @ a
    g = v.conj().T @ a
    g = (g + g.conj().T) / 2
    p = (p + p.conj().T) / 2
    shift = float(np.trace(g).real / L)  # centre h for conditioning
    p = p - 2 * shift * g + shift**2 * np.eye(L)
    g = g - shift * np.eye(L)
    prob = SdpProblem("channel_qfi")
    t, h = prob.add_scalar(), prob.add_scalar()
    const = np.zeros((2 * L, 2 * L), dtype=complex)
    const[:L, :L] = -p
    const[L:, L:] = np.eye(L)
    lmi = prob.add_lmi(2 * L, const=const)
    et = np.zeros((2 * L, 2 * L))
    et[:L, :L] = np.eye(L)
    lmi.add(t, et)
    eh = np.zeros((2 * L, 2 * L), dtype=complex)
    eh[:L, :L] = 2 * g
    eh[:L, L:] = eh[L:, :L] = np.eye(L)
    lmi.add(h, eh)
    prob.minimize({t: 1.0})
    sol = solve(prob)
    if sol.status != OPTIMAL:
        raise SolverError(f"channel QFI SDP ended with status {sol.status}")
    hv = sol.x[h]
    exact = np.linalg.eigvalsh(p - 2 * hv * g + hv**2 * np.eye(L))[-1]
    return 4 * float(max(exact, 0.0))


def unitary_qfi(h: np.ndarray) -> float:
    """Channel QFI of ``exp(-i H theta)``; analytically ``(Delta H)^2``."""
    h = np.asarray(h, dtype=complex)
    return isometric_channel_qfi(np.eye(h.shape[0]), h)


def _pulled_back(code: CodeInstance, sym: SymmetryPair):
    lam, vf = physical_frame(code, sym)
    return lam, vf, vf.conj().T @ (lam[:, None] * vf)


def point_violation(code: CodeInstance, sym: SymmetryPair) -> float:
    """Square root of the channel QFI of ``U_S V U_L^dag`` at theta = 0."""
    lam, vf = physical_frame(code, sym)
    a = lam[:, None] * vf - vf @ sym.h_logical
    return math.sqrt(isometric_channel_qfi(vf, a))


def charge_violation(code: CodeInstance, sym: SymmetryPair) -> float:
    """``Delta(H_L - V^dag H_S V)``."""
    _, _, pulled = _pulled_back(code, sym)
    return spectral_range(sym.h_logical - pulled)


@dataclass
class ChargeFluctuation:
    value: float
    ambiguous: bool
    top: np.ndarray
    bottom: np.ndarray


def _canonical_vector(u: np.ndarray) -> np.ndarray:
    """First nonzero column of the eigenspace projector, normalized.

    Independent of the basis the eigensolver returns; for a coordinate
    eigenspace it is the lowest-index basis vector.
    """
    proj = u @ u.conj().T
    norms = np.linalg.norm(proj, axis=0)
    k = int(np.argmax(norms > 1e-8))
    v = proj[:, k] / norms[k]
    return v * (abs(v[k]) / v[k])


def charge_fluctuation_details(code: CodeInstance, sym: SymmetryPair, tol: float = 1e-9) -> ChargeFluctuation:
    """Difference of ``<V^dag H_S V>`` between the top and bottom eigenvectors of ``H_L``.

    When an extremal eigenvalue is degenerate a canonical vector of the
    eigenspace is used and ``ambiguous`` is set.
    """
    _, _, pulled = _pulled_back(code, sym)
    mu, u = hermitian_eig(sym.h_logical)
    top_space = u[:, mu[-1] - mu < tol]
    bottom_space = u[:, mu - mu[0] < tol]
    ambiguous = bool(top_space.shape[1] > 1 or bottom_space.shape[1] > 1)
    top, bottom = _canonical_vector(top_space), _canonical_vector(bottom_space)
    val = float(np.real(top.conj() @ pulled @ top - bottom.conj() @ pulled @ bottom))
    return ChargeFluctuation(val, ambiguous, top, bottom)


def charge_fluctuation(code: CodeInstance, sym: SymmetryPair) -> float:
    return charge_fluctuation_details(code, sym).value
