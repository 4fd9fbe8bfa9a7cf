"""All measures for one (code, noise, symmetry) triple."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..channels import KrausChannel, channel_to_dict
from ..codes import CodeInstance, SymmetryPair
from . import covariance, metrology, recovery


@dataclass
class MeasureReport:
    epsilon: float
    delta_group: float
    delta_point: float
    delta_charge: float
    chi: float
    j_min: float | None
    f_reg: float | None
    gamma_lower: float
    gamma_upper: float
    delta_h_logical: float
    delta_h_physical: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def num(x):
            return None if x is None else float(x)

        j_status = self.diagnostics.get("j_min", {}).get("status")
        f_status = self.diagnostics.get("f_reg", {}).get("status")
        return {
            "epsilon": num(self.epsilon),
            "delta_group": num(self.delta_group),
            "delta_point": num(self.delta_point),
            "delta_charge": num(self.delta_charge),
            "chi": num(self.chi),
            "j_min": "infeasible" if j_status == "infeasible" else num(self.j_min),
            "f_reg": "divergent" if f_status == "divergent" else num(self.f_reg),
            "gamma_lower": num(self.gamma_lower),
            "gamma_upper": num(self.gamma_upper),
            "delta_h_logical": num(self.delta_h_logical),
            "delta_h_physical": num(self.delta_h_physical),
            "diagnostics": _clean(self.diagnostics),
        }


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def gate_error_bounds(code: CodeInstance, noise: KrausChannel, sym: SymmetryPair, grid: int = 8,
                      epsilon: float | None = None, delta_group: float | None = None,
                      tol: float = recovery.TOL) -> tuple[float, float, dict]:
    """Lower and upper bounds on the gate implementation error.

    ``upper = delta_G + epsilon``. ``lower`` is the largest fixed-angle
    optimum ``min_R P(R o N o U_S E, U_L)`` over ``grid`` equally spaced angles;
    a logical unitary after the recovery can be absorbed, so each term is the
    QEC inaccuracy of the rotated encoder ``U_S V``.
    """
    eps = recovery.qec_inaccuracy(code, noise, tol=tol) if epsilon is None else epsilon
    dg = covariance.global_violation(code, sym) if delta_group is None else delta_group
    period = sym.period or 2 * math.pi
    thetas = [k * period / grid for k in range(grid)]
    values = [eps]
    for th in thetas[1:]:
        values.append(recovery.qec_inaccuracy(recovery.rotated_code(code, sym, th), noise, tol=tol))
    lower = max(values)
    return lower, dg + eps, {"thetas": thetas, "fixed_angle_epsilon": values}


def _metrology(fn, sym: SymmetryPair, noise: KrausChannel):
    try:
        res = fn(sym.h_physical, noise)
    except metrology.DimensionError as exc:
        return None, {"status": "skipped", "reason": str(exc)}
    value = None if res.value is None else (None if math.isinf(res.value) else res.value)
    return value, res.diagnostics()


def analyze(code: CodeInstance, noise: KrausChannel, sym: SymmetryPair, grid_size: int = covariance.DEFAULT_GRID,
            gamma_grid: int = 8, tol: float = recovery.TOL) -> MeasureReport:
    rec = recovery.optimal_recovery(code, noise, tol=tol)
    dg = covariance.global_violation_details(code, sym, grid_size)
    dp = covariance.point_violation(code, sym)
    dc = covariance.charge_violation(code, sym)
    chi = covariance.charge_fluctuation_details(code, sym)
    jv, jd = _metrology(metrology.j_min, sym, noise)
    fv, fd = _metrology(metrology.f_reg, sym, noise)
    lo, hi, gd = gate_error_bounds(code, noise, sym, gamma_grid, rec.epsilon, dg.value, tol)
    diag = {
        "code": code.name,
        "noise": channel_to_dict(noise)["type"] if noise is not None else None,
        "epsilon": rec.diagnostics(),
        "delta_group": {"theta": dg.theta, "grid_size": dg.grid_size, "period": dg.period},
        "chi": {"ambiguous": chi.ambiguous},
        "j_min": jd,
        "f_reg": fd,
        "gamma": gd,
    }
    if fd.get("status") == "divergent":
        fv = math.inf
    return MeasureReport(rec.epsilon, dg.value, dp, dc, chi.value, jv, fv, lo, hi,
                         sym.delta_logical, sym.delta_physical, diag)
