"""Optimal recovery: QEC inaccuracy and the fixed-angle gate error.

The noisy encoded map ``N o E`` is reduced to *blocks*: groups of Kraus
operators whose outputs are orthogonal to every other group. Inside block s
the operators are written in an orthonormal basis of their joint range, so
``A_si`` has shape ``(r_s, L)``. A recovery is one CPTP map per block, stored
by its Choi matrix ``J_s`` on ``L (x) C^{r_s}`` with ``Tr_L J_s = I``.

For an input purifying the logical state ``rho`` the squared fidelity of
``R o N o E`` with the identity is

    q(rho) = sum_{s,i} g_si^dag J_s g_si,   g_si = vec(rho A_si^dag),

linear in ``J`` and a convex quadratic in ``rho``. The optimal worst case
``max_J min_rho q`` is found by cutting planes: a master SDP over ``J``
against a growing set of states, and an exact inner SDP for the worst state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..channels import ErasureChannel, KrausChannel, is_noiseless
from ..codes import CodeInstance
from ..convex import OPTIMAL, HermitianVariable, SdpProblem, SolverError, solve
from ..symmetric import erasure_maps
from ..tensor import DimensionError

TOL = 1e-6
MAX_ITER = 40
EXACT_TOL = 1e-12
MAX_LOGICAL = 8
MAX_CHOI_VARS = 6000


# blocks

def raw_blocks(code: CodeInstance, noise: KrausChannel) -> list[list[np.ndarray]]:
    """Uncompressed ``K_i V`` grouped into orthogonal blocks."""
    v = code.encoder
    if code.basis == "symmetric":
        if is_noiseless(noise):
            if noise.input_dim != 2**code.n:
                raise DimensionError("identity channel does not match the code register")
            return [[v]]
        if isinstance(noise, ErasureChannel):
            if noise.in_shape.dims != code.physical_shape.dims:
                raise DimensionError("erasure channel does not match the code register")
            # all erasure locations are equivalent on a symmetric code
            return [[m @ v for m in erasure_maps(code.n)]]
        code = code.to_dense()
        v = code.encoder
    if v.shape[0] != noise.input_dim:
        raise DimensionError(f"code dimension {v.shape[0]} does not match channel input {noise.input_dim}")
    return noise.encoded_blocks(v)


def compress(block: list[np.ndarray], tol: float = 1e-12) -> list[np.ndarray]:
    """Coordinates of each operator in an orthonormal basis of the block range."""
    big = np.hstack(block)
    gram = big.conj().T @ big
    w, u = np.linalg.eigh((gram + gram.conj().T) / 2)
    keep = w > tol * max(1.0, w[-1])
    coords = np.sqrt(w[keep])[:, None] * u[:, keep].conj().T  # = Q^dag big
    cols = block[0].shape[1]
    return [coords[:, i * cols:(i + 1) * cols] for i in range(len(block))]


def code_blocks(code: CodeInstance, noise: KrausChannel) -> list[list[np.ndarray]]:
    return [compress(b) for b in raw_blocks(code, noise)]


def kl_residual(code: CodeInstance, noise: KrausChannel) -> float:
    """Largest ``||V^dag K_i^dag K_j V - c_ij I||_F`` over Kraus pairs."""
    L = code.logical_dim
    worst = 0.0
    for block in code_blocks(code, noise):
        for a in block:
            for b in block:
                m = a.conj().T @ b
                worst = max(worst, float(np.linalg.norm(m - np.trace(m) / L * np.eye(L))))
    return worst


# fidelity form

class FidelityForm:
    """The map ``(rho, J) -> q`` for a fixed block structure."""

    def __init__(self, blocks: list[list[np.ndarray]], logical_dim: int):
        self.blocks = blocks
        self.L = logical_dim
        self.ranks = [b[0].shape[0] for b in blocks]
        self.rho_var = HermitianVariable(logical_dim, 0)
        basis = self.rho_var.basis()  # (P, L, L)
        # G[s]: (k_s, P, L*r_s) with G[s][i, p] = vec(E_p A_si^dag)
        self.G = [np.stack([np.einsum("pab,cb->pac", basis, a.conj()).reshape(len(basis), -1) for a in b])
                  for b in blocks]

    def vectors(self, rho: np.ndarray, s: int) -> np.ndarray:
        return np.stack([(rho @ a.conj().T).reshape(-1) for a in self.blocks[s]])

    def cut(self, rho: np.ndarray) -> list[np.ndarray]:
        """``C_s(rho) = sum_i g_si g_si^dag`` so that ``q = sum_s Tr(J_s C_s)``."""
        out = []
        for s in range(len(self.blocks)):
            g = self.vectors(rho, s)
            out.append(g.T @ g.conj())
        return out

    def value(self, rho: np.ndarray, js: list[np.ndarray]) -> float:
        return float(sum(np.real(np.sum(j * c.T)) for j, c in zip(js, self.cut(rho))))

    def quadratic(self, js: list[np.ndarray]) -> np.ndarray:
        """Real PSD matrix ``Q`` with ``q = x^T Q x`` over Hermitian coordinates of rho."""
        q = 0
        for g, j in zip(self.G, js):
            q = q + np.real(np.einsum("ipa,ab,iqb->pq", g.conj(), j, g))
        return (q + q.T) / 2


def transpose_recovery(blocks: list[list[np.ndarray]], logical_dim: int) -> list[np.ndarray]:
    """Choi matrices of ``R_j = A_j^dag P^{-1/2}``, ``P = sum_i A_i A_i^dag``."""
    js = []
    for b in blocks:
        p = sum(a @ a.conj().T for a in b)
        w, u = np.linalg.eigh((p + p.conj().T) / 2)
        inv_sqrt = (u / np.sqrt(w)) @ u.conj().T
        vs = [(a.conj().T @ inv_sqrt).reshape(-1) for a in b]
        js.append(sum(np.outer(v, v.conj()) for v in vs))
    return js


def _ptrace_logical(m: np.ndarray, L: int, r: int) -> np.ndarray:
    return np.einsum("acad->cd", m.reshape(L, r, L, r))


def _basis_states(L: int) -> list[np.ndarray]:
    out = [np.eye(L, dtype=complex) / L]
    for a in range(L):
        e = np.zeros((L, L), dtype=complex)
        e[a, a] = 1
        out.append(e)
    for a in range(L):
        for b in range(a + 1, L):
            for ph in (1, 1j):
                v = np.zeros(L, dtype=complex)
                v[a], v[b] = 1, ph
                out.append(np.outer(v, v.conj()) / 2)
    return out


def _project_density(rho: np.ndarray) -> np.ndarray:
    rho = (rho + rho.conj().T) / 2
    w, u = np.linalg.eigh(rho)
    w = np.clip(w, 0, None)
    w = w / w.sum()
    return (u * w) @ u.conj().T


def worst_state(form: FidelityForm, js: list[np.ndarray]) -> tuple[np.ndarray, float]:
    """Exact ``min_rho q(rho)`` through the epigraph SDP ``s >= ||R x||^2``."""
    L = form.L
    q = form.quadratic(js)
    w, u = np.linalg.eigh(q)
    keep = w > 1e-13 * max(1.0, w[-1])
    r = np.sqrt(w[keep])[:, None] * u[:, keep].T  # Q = r^T r
    k = r.shape[0]
    prob = SdpProblem("worst_state")
    rho = prob.add_hermitian(L)
    s = prob.add_scalar()
    basis = rho.basis()
    pos = prob.add_lmi(L)
    for p, e in zip(rho.indices, basis):
        pos.add(p, e)
    const = np.zeros((k + 1, k + 1))
    const[1:, 1:] = np.eye(k)
    epi = prob.add_lmi(k + 1, is_complex=False, const=const)
    e00 = np.zeros((k + 1, k + 1))
    e00[0, 0] = 1
    epi.add(s, e00)
    for col, p in enumerate(rho.indices):
        m = np.zeros((k + 1, k + 1))
        m[0, 1:] = m[1:, 0] = r[:, col]
        epi.add(p, m)
    prob.add_equality({p: np.real(np.trace(e)) for p, e in zip(rho.indices, basis)}, 1.0)
    prob.minimize({s: 1.0})
    sol = solve(prob)
    if sol.status != OPTIMAL:
        raise SolverError(f"inner worst-state SDP ended with status {sol.status}")
    state = _project_density(rho.value(sol.x))
    return state, form.value(state, js)


def _master(form: FidelityForm, cuts: list[list[np.ndarray]]):
    L = form.L
    prob = SdpProblem("recovery_master")
    jvars = [prob.add_hermitian(L * r) for r in form.ranks]
    t = prob.add_scalar()
    bases = [v.basis() for v in jvars]
    for v, basis, r in zip(jvars, bases, form.ranks):
        lmi = prob.add_lmi(L * r)
        for p, e in zip(v.indices, basis):
            lmi.add(p, e)
        prob.add_matrix_equality([(v, lambda e, r=r: _ptrace_logical(e, L, r))], np.eye(r))
    for cut in cuts:
        lmi = prob.add_lmi(1, is_complex=False)
        lmi.add(t, [[-1.0]])
        for v, basis, c in zip(jvars, bases, cut):
            coef = np.real(np.einsum("pab,ba->p", basis, c))
            for p, x in zip(v.indices, coef):
                if x != 0:
                    lmi.add(p, [[x]])
    prob.minimize({t: -1.0})
    sol = solve(prob)
    if sol.status != OPTIMAL:
        raise SolverError(f"recovery master SDP ended with status {sol.status}")
    js = [v.value(sol.x) for v in jvars]
    return js, float(sol.x[t])


@dataclass
class RecoveryResult:
    epsilon: float
    epsilon_lower: float
    fidelity_sq: float
    iterations: int
    status: str
    method: str
    choi: list = field(default_factory=list, repr=False)
    worst_input: np.ndarray | None = field(default=None, repr=False)
    history: list = field(default_factory=list, repr=False)

    def diagnostics(self) -> dict:
        return {
            "epsilon_lower": self.epsilon_lower,
            "iterations": self.iterations,
            "status": self.status,
            "method": self.method,
        }


def optimal_recovery(code: CodeInstance, noise: KrausChannel, tol: float = TOL,
                     max_iter: int = MAX_ITER) -> RecoveryResult:
    """Cutting-plane search for the recovery minimizing the worst-case purified distance."""
    blocks = code_blocks(code, noise)
    L = code.logical_dim
    if not blocks:
        raise SolverError("noisy code has no support")
    if L > MAX_LOGICAL:
        if kl_residual(code, noise) <= EXACT_TOL:
            return RecoveryResult(0.0, 0.0, 1.0, 0, "converged", "knill-laflamme")
        raise DimensionError(f"recovery optimization supports logical dimension <= {MAX_LOGICAL}")
    form = FidelityForm(blocks, L)
    js = transpose_recovery(blocks, L)
    rho, v = worst_state(form, js)
    if 1 - v <= EXACT_TOL:
        return RecoveryResult(0.0, 0.0, min(v, 1.0), 0, "converged", "transpose", js, rho)
    if sum((L * r) ** 2 for r in form.ranks) > MAX_CHOI_VARS:
        raise DimensionError("recovery Choi matrices exceed the dense solver budget")
    best_v, best_js, best_rho = v, js, rho
    cuts = [form.cut(x) for x in _basis_states(L)] + [form.cut(rho)]
    history = [("transpose", math.nan, v)]
    status, t = "max_iterations", 1.0
    it = 0
    for it in range(1, max_iter + 1):
        js, t = _master(form, cuts)
        rho, v = worst_state(form, js)
        history.append(("cut", t, v))
        if v > best_v:
            best_v, best_js, best_rho = v, js, rho
        if t - best_v <= tol:
            status = "converged"
            break
        cuts.append(form.cut(rho))
    eps = math.sqrt(max(0.0, 1 - best_v))
    return RecoveryResult(eps, math.sqrt(max(0.0, 1 - t)), best_v, it, status, "cutting-plane",
                          best_js, best_rho, history)


def qec_inaccuracy(code: CodeInstance, noise: KrausChannel, **kw) -> float:
    """Worst-case purified distance of the best recovery from the logical identity."""
    return optimal_recovery(code, noise, **kw).epsilon


def rotated_code(code: CodeInstance, sym, theta: float) -> CodeInstance:
    """The code with encoder ``U_{S,theta} V``."""
    from .covariance import physical_unitary_apply

    v = physical_unitary_apply(code, sym, theta)
    return CodeInstance(v, code.physical_shape, f"{code.name}@{theta:.6g}", code.basis, dict(code.params))
