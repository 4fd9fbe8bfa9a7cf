"""Small dense semidefinite programs and numerical-range geometry.

Problems are stated over a real parameter vector ``x`` (free variables)::

    minimize    c . x
    subject to  F_b(x) = F_b0 + sum_p x_p F_bp  >= 0     (one LMI per block)
                A x = b

Blocks are real symmetric or complex Hermitian. Complex blocks of size k are
passed to the cone solver through the real embedding
``[[Re M, -Im M], [Im M, Re M]]`` of size 2k; real 1x1 blocks go to the
linear cone. Hermitian *matrix* variables are a convenience layer that maps a
k x k Hermitian matrix onto k^2 real parameters.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize_scalar

import cvxopt
from cvxopt import solvers

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
MAX_ITERATIONS = "max_iterations"

DEFAULT_OPTIONS = {"abstol": 1e-9, "reltol": 1e-9, "feastol": 1e-9, "maxiters": 100}
# tolerance ladder tried in order when the interior-point method stalls
RETRY_TOLERANCES = (1e-9, 1e-8, 1e-7)


class SolverError(RuntimeError):
    """Raised on ill-posed problem data."""


@dataclass
class HermitianVariable:
    """A k x k Hermitian (or real symmetric) matrix of problem parameters."""

    dim: int
    offset: int
    is_complex: bool = True

    @property
    def size(self) -> int:
        k = self.dim
        return k * k if self.is_complex else k * (k + 1) // 2

    @property
    def indices(self) -> range:
        return range(self.offset, self.offset + self.size)

    def basis(self) -> np.ndarray:
        """Basis matrices ``E_p`` with X = sum_p x_p E_p, shape (size, k, k)."""
        k = self.dim
        out = np.zeros((self.size, k, k), dtype=complex)
        p = 0
        for a in range(k):
            out[p, a, a] = 1
            p += 1
        for a in range(k):
            for b in range(a + 1, k):
                out[p, a, b] = out[p, b, a] = 1
                p += 1
        if self.is_complex:
            for a in range(k):
                for b in range(a + 1, k):
                    out[p, a, b] = -1j
                    out[p, b, a] = 1j
                    p += 1
        return out

    def value(self, x: np.ndarray) -> np.ndarray:
        return np.tensordot(x[self.offset : self.offset + self.size], self.basis(), axes=1)


@dataclass
class Lmi:
    dim: int
    is_complex: bool
    const: np.ndarray
    terms: dict = field(default_factory=dict)  # parameter index -> coefficient matrix

    def add(self, index: int, coef) -> None:
        coef = np.asarray(coef, dtype=complex)
        if coef.shape != (self.dim, self.dim):
            raise SolverError(f"LMI coefficient shape {coef.shape} != ({self.dim}, {self.dim})")
        if index in self.terms:
            self.terms[index] = self.terms[index] + coef
        else:
            self.terms[index] = coef

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        out = self.const.astype(complex).copy()
        for p, coef in self.terms.items():
            out = out + x[p] * coef
        return out


@dataclass
class SdpSolution:
    status: str
    primal_value: float
    dual_value: float
    x: np.ndarray | None
    iterations: int = 0
    gap: float = math.nan
    primal_residual: float = math.nan
    message: str = ""

    def blocks(self, problem: "SdpProblem") -> list[np.ndarray]:
        """LMI values F_b(x) at the returned point."""
        if self.x is None:
            return []
        return [lmi.evaluate(self.x) for lmi in problem.lmis]


class SdpProblem:
    """Builder for an LMI-form SDP. See the module docstring for the form."""

    def __init__(self, name: str = "sdp"):
        self.name = name
        self.num_vars = 0
        self.objective: dict[int, float] = {}
        self.lmis: list[Lmi] = []
        self.eq_rows: list[tuple[dict[int, float], float]] = []

    # variables
    def add_scalar(self) -> int:
        self.num_vars += 1
        return self.num_vars - 1

    def add_hermitian(self, dim: int, is_complex: bool = True) -> HermitianVariable:
        var = HermitianVariable(dim, self.num_vars, is_complex)
        self.num_vars += var.size
        return var

    # objective / constraints
    def minimize(self, coeffs: dict[int, float]) -> None:
        self.objective = {int(k): float(v) for k, v in coeffs.items()}

    def add_lmi(self, dim: int, is_complex: bool = True, const=None) -> Lmi:
        const = np.zeros((dim, dim), dtype=complex) if const is None else np.asarray(const, dtype=complex)
        lmi = Lmi(dim, is_complex, const)
        self.lmis.append(lmi)
        return lmi

    def add_equality(self, coeffs: dict[int, float], rhs: float) -> None:
        self.eq_rows.append(({int(k): float(v) for k, v in coeffs.items() if v != 0}, float(rhs)))

    def add_matrix_equality(self, terms: list[tuple[HermitianVariable, Callable]], rhs: np.ndarray,
                            scalar_terms: dict[int, np.ndarray] | None = None) -> None:
        """Impose sum_v L_v(X_v) + sum_s x_s M_s = rhs for Hermitian-valued maps.

        Each ``L_v`` maps a basis matrix of ``X_v`` to a Hermitian matrix of the
        shape of ``rhs``. One real equation is generated per real degree of
        freedom of ``rhs``; dependent rows are removed at solve time.
        """
        rhs = np.asarray(rhs, dtype=complex)
        cols: dict[int, np.ndarray] = {}
        for var, fn in terms:
            for p, e in zip(var.indices, var.basis()):
                cols[p] = cols.get(p, 0) + _herm_coords(fn(e))
        for s, m in (scalar_terms or {}).items():
            cols[s] = cols.get(s, 0) + _herm_coords(np.asarray(m, dtype=complex))
        target = _herm_coords(rhs)
        for r in range(target.size):
            row = {p: c[r] for p, c in cols.items() if abs(c[r]) > 0}
            if row or target[r] != 0:
                self.eq_rows.append((row, float(target[r])))

    # serialization
    def to_dict(self) -> dict:
        def trip(m):
            m = sp.coo_matrix(np.asarray(m))
            return [[int(i), int(j), [float(v.real), float(v.imag)]] for i, j, v in zip(m.row, m.col, m.data)]

        return {
            "name": self.name,
            "num_vars": self.num_vars,
            "objective": [[k, v] for k, v in sorted(self.objective.items())],
            "blocks": [
                {
                    "dim": lmi.dim,
                    "complex": lmi.is_complex,
                    "const": trip(lmi.const),
                    "terms": [[p, trip(c)] for p, c in sorted(lmi.terms.items())],
                }
                for lmi in self.lmis
            ],
            "equalities": [[[[k, v] for k, v in sorted(row.items())], rhs] for row, rhs in self.eq_rows],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "SdpProblem":
        def untrip(t, dim):
            m = np.zeros((dim, dim), dtype=complex)
            for i, j, (re, im) in t:
                m[i, j] += re + 1j * im
            return m

        prob = cls(d.get("name", "sdp"))
        prob.num_vars = int(d["num_vars"])
        prob.objective = {int(k): float(v) for k, v in d["objective"]}
        for blk in d["blocks"]:
            lmi = prob.add_lmi(blk["dim"], blk["complex"], untrip(blk["const"], blk["dim"]))
            for p, t in blk["terms"]:
                lmi.add(int(p), untrip(t, blk["dim"]))
        for row, rhs in d["equalities"]:
            prob.add_equality({int(k): float(v) for k, v in row}, rhs)
        return prob

    @classmethod
    def from_json(cls, text: str) -> "SdpProblem":
        return cls.from_dict(json.loads(text))


def _herm_coords(m: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix: diagonal, Re and Im of upper part."""
    iu = np.triu_indices(m.shape[0], 1)
    return np.concatenate([np.real(np.diag(m)), np.real(m[iu]), np.imag(m[iu])])


def _embed(m: np.ndarray, complex_block: bool) -> np.ndarray:
    if not complex_block:
        return np.real(m)
    re, im = np.real(m), np.imag(m)
    return np.block([[re, -im], [im, re]])


def _reduce_equalities(prob: SdpProblem):
    """Row-compress A x = b. Returns (A, b, consistent)."""
    if not prob.eq_rows:
        return None, None, True
    a = np.zeros((len(prob.eq_rows), prob.num_vars))
    b = np.zeros(len(prob.eq_rows))
    for r, (row, rhs) in enumerate(prob.eq_rows):
        for p, v in row.items():
            a[r, p] = v
        b[r] = rhs
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    tol = max(a.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0) * 10
    rank = int((s > tol).sum())
    u, s, vt = u[:, :rank], s[:rank], vt[:rank]
    resid = b - u @ (u.T @ b)
    consistent = np.linalg.norm(resid) <= 1e-9 * (1 + np.linalg.norm(b))
    return s[:, None] * vt, u.T @ b, consistent


def solve(prob: SdpProblem, **options) -> SdpSolution:
    """Solve an :class:`SdpProblem` with a primal-dual interior-point method."""
    n = prob.num_vars
    if n == 0 or not prob.lmis:
        raise SolverError("problem needs at least one variable and one LMI block")
    c = np.zeros(n)
    for k, v in prob.objective.items():
        c[k] = v
    data = [c] + [lmi.const for lmi in prob.lmis] + [m for lmi in prob.lmis for m in lmi.terms.values()]
    if not all(np.all(np.isfinite(np.asarray(m))) for m in data):
        raise SolverError("non-finite problem data")
    for lmi in prob.lmis:
        if not lmi.is_complex and any(np.abs(np.imag(m)).max(initial=0) > 0 for m in [lmi.const, *lmi.terms.values()]):
            raise SolverError("real LMI block has complex coefficients")

    a, b, consistent = _reduce_equalities(prob)
    if not consistent:
        return SdpSolution(INFEASIBLE, math.inf, math.inf, None,
                           message="equality constraints are inconsistent")

    lin = [lmi for lmi in prob.lmis if lmi.dim == 1 and not lmi.is_complex]
    sdp = [lmi for lmi in prob.lmis if not (lmi.dim == 1 and not lmi.is_complex)]
    rows, cols, vals, h = [], [], [], []
    offset = 0
    for lmi in lin:
        h.append(float(np.real(lmi.const[0, 0])))
        for p, coef in lmi.terms.items():
            rows.append(offset)
            cols.append(p)
            vals.append(-float(np.real(coef[0, 0])))
        offset += 1
    sizes = []
    for lmi in sdp:
        k = 2 * lmi.dim if lmi.is_complex else lmi.dim
        sizes.append(k)
        h.extend(_embed(lmi.const, lmi.is_complex).reshape(-1, order="F"))
        for p, coef in lmi.terms.items():
            e = _embed(coef, lmi.is_complex).reshape(-1, order="F")
            nz = np.nonzero(e)[0]
            rows.extend(offset + nz)
            cols.extend([p] * nz.size)
            vals.extend(-e[nz])
        offset += k * k
    g = sp.csc_matrix((np.asarray(vals, dtype=float), (np.asarray(rows, dtype=int), np.asarray(cols, dtype=int))),
                      shape=(offset, n))
    # directions invisible to every constraint would make the KKT system singular
    gram = (g.T @ g).toarray() + (a.T @ a if a is not None else 0)
    w, u = np.linalg.eigh(gram)
    keep = w > 1e-12 * max(1.0, float(w[-1]))
    basis = None
    if not keep.all():
        basis = u[:, keep]
        if np.linalg.norm(c - basis @ (basis.T @ c)) > 1e-12 * max(1.0, np.linalg.norm(c)):
            return SdpSolution(UNBOUNDED, -math.inf, -math.inf, None,
                               message="objective depends on an unconstrained direction")
        c = basis.T @ c
        gm = cvxopt.matrix(np.asarray(g @ basis))
        a = a @ basis if a is not None else None
    else:
        coo = g.tocoo()
        gm = cvxopt.spmatrix(coo.data.tolist(), coo.row.tolist(), coo.col.tolist(), (offset, n))
    dims = {"l": len(lin), "q": [], "s": sizes}
    args = [cvxopt.matrix(c), gm, cvxopt.matrix(np.asarray(h, dtype=float)), dims]
    if a is not None and a.shape[0]:
        args += [cvxopt.matrix(a), cvxopt.matrix(b)]
    sol = None
    user_tol = {k: options[k] for k in ("abstol", "reltol", "feastol") if k in options}
    ladder = [None] if user_tol else RETRY_TOLERANCES
    failure = None
    for tol in ladder:
        opts = dict(DEFAULT_OPTIONS)
        if tol is not None:
            opts.update(abstol=tol, reltol=tol, feastol=tol)
        opts.update(options)
        opts["show_progress"] = False
        try:
            sol = _run(prob, args, opts, basis)
        except _Breakdown as exc:
            # numerical breakdown near the optimum; a looser target usually clears it
            failure = exc
            continue
        if sol.status != MAX_ITERATIONS:
            break
    if sol is None:
        raise SolverError(f"cone solver rejected the problem: {failure}") from failure
    return sol


class _Breakdown(ArithmeticError):
    pass


def _run(prob: SdpProblem, args: list, opts: dict, basis=None) -> SdpSolution:
    try:
        res = solvers.conelp(*args, options=opts)
    except ArithmeticError as exc:
        raise _Breakdown(str(exc) or type(exc).__name__) from exc
    except ValueError as exc:
        raise SolverError(f"cone solver rejected the problem: {exc}") from exc

    status = {
        "optimal": OPTIMAL,
        "primal infeasible": INFEASIBLE,
        "dual infeasible": UNBOUNDED,
    }.get(res["status"], MAX_ITERATIONS)
    x = np.array(res["x"]).reshape(-1) if res["x"] is not None else None
    if x is not None and basis is not None:
        x = basis @ x
    pv = res["primal objective"] if res["primal objective"] is not None else math.nan
    dv = res["dual objective"] if res["dual objective"] is not None else math.nan
    if status == INFEASIBLE:
        pv = dv = math.inf
    elif status == UNBOUNDED:
        pv = dv = -math.inf
    sol = SdpSolution(status, float(pv), float(dv), x, int(res.get("iterations", 0)))
    if x is not None and status in (OPTIMAL, MAX_ITERATIONS):
        sol.gap = abs(sol.primal_value - sol.dual_value)
        sol.primal_residual = primal_residual(prob, x)
        if status == MAX_ITERATIONS:
            # near-optimal exits are accepted when the certificates are tight
            if sol.gap <= 1e-7 * (1 + abs(sol.primal_value)) and sol.primal_residual <= 1e-8:
                sol.status = OPTIMAL
    return sol


def primal_residual(prob: SdpProblem, x: np.ndarray) -> float:
    """Largest violation of the equalities and LMIs at ``x``."""
    worst = 0.0
    for row, rhs in prob.eq_rows:
        worst = max(worst, abs(sum(v * x[p] for p, v in row.items()) - rhs))
    for lmi in prob.lmis:
        m = lmi.evaluate(x)
        m = (m + m.conj().T) / 2
        worst = max(worst, -float(np.linalg.eigvalsh(m)[0]))
    return worst


def _support_min(w: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """lambda_min(Re(e^{-i phi} W)) for each phi."""
    ph = np.exp(-1j * np.asarray(phis))[:, None, None]
    m = ph * w[None]
    m = (m + np.conj(np.swapaxes(m, 1, 2))) / 2
    return np.linalg.eigvalsh(m)[:, 0]


def numerical_range_distance(w: np.ndarray, n_phi: int = 720, tol: float = 1e-10) -> float:
    """Distance from the origin to the numerical range of ``w``.

    Equals min_rho |Tr(w rho)| over density matrices. The support function
    lambda_min(Re(e^{-i phi} w)) is scanned on a uniform grid and the best
    point refined by a bounded scalar search.
    """
    w = np.asarray(w, dtype=complex)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {w.shape}")
    phis = np.linspace(0, 2 * np.pi, n_phi, endpoint=False)
    extra = [np.angle(np.trace(w))] + list(np.angle(np.linalg.eigvals(w)))
    phis = np.concatenate([phis, np.mod(extra, 2 * np.pi)])
    vals = _support_min(w, phis)
    k = int(np.argmax(vals))
    best = float(vals[k])
    step = 2 * np.pi / n_phi
    res = minimize_scalar(lambda p: -_support_min(w, [p])[0],
                          bounds=(phis[k] - step, phis[k] + step), method="bounded",
                          options={"xatol": tol})
    best = max(best, -float(res.fun))
    return max(0.0, best)
