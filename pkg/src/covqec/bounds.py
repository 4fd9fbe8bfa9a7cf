"""Symmetry versus error-correction trade-off inequalities, checked on reports.

The asymptotic bounds ``x >~ y`` are tested in the leading-order form
``x >= y - c y^2``; the exact ones (charge and point violation) use an
absolute tolerance only.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .measures.report import MeasureReport

EXACT_TOL = 1e-4
DEFAULT_SLACK = 1.0


class BoundInputError(ValueError):
    """A bound is undefined for the supplied report (e.g. infeasible 𝔍)."""


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    satisfied: bool
    slack: float  # lhs - rhs
    tolerance: float  # allowed shortfall
    vacuous: bool = False
    notes: str = ""

    @property
    def residual(self) -> float:
        """``lhs - rhs + tolerance``; negative means violated."""
        return self.slack + self.tolerance

    def to_dict(self) -> dict:
        out = asdict(self)
        out["residual"] = self.residual
        for k in ("lhs", "rhs", "slack", "tolerance", "residual"):
            if not math.isfinite(out[k]):
                out[k] = str(out[k])
        return out


def _check(name, lhs, rhs, tol, notes="") -> BoundCheck:
    return BoundCheck(name, float(lhs), float(rhs), bool(lhs >= rhs - tol), float(lhs - rhs), float(tol), False, notes)


def _needs_j(report: MeasureReport) -> float:
    if report.j_min is None:
        raise BoundInputError("j_min is infeasible or unavailable; the bound is undefined")
    return float(report.j_min)


def theorem1(report: MeasureReport, delta_hl: float | None = None, delta_hs: float | None = None,
             c: float = DEFAULT_SLACK) -> BoundCheck:
    """``delta_G >~ sqrt((Delta H_L - 2 eps J) / Delta H_S)`` for isometric codes."""
    dhl = report.delta_h_logical if delta_hl is None else delta_hl
    dhs = report.delta_h_physical if delta_hs is None else delta_hs
    if dhs <= 0:
        raise BoundInputError("Delta H_S must be positive")
    j = _needs_j(report)
    rhs = math.sqrt(max(0.0, dhl - 2 * report.epsilon * j) / dhs)
    note = "rhs clipped at 0" if dhl - 2 * report.epsilon * j <= 0 else ""
    return _check("theorem1", report.delta_group, rhs, c * rhs**2, note)


def theorem2(report: MeasureReport, delta_hl: float | None = None, c: float = DEFAULT_SLACK) -> BoundCheck:
    """``eps + delta_G >~ Delta H_L / sqrt(4 F)``; vacuous when F diverges."""
    dhl = report.delta_h_logical if delta_hl is None else delta_hl
    lhs = report.epsilon + report.delta_group
    f = report.f_reg
    if f is None or math.isinf(f):
        return BoundCheck("theorem2", lhs, 0.0, True, lhs, 0.0, True,
                          "f_reg divergent or unavailable: the bound carries no information")
    rhs = math.inf if f <= 0 else dhl / math.sqrt(4 * f)
    if math.isinf(rhs):
        rhs = math.inf if dhl > 0 else 0.0
        return BoundCheck("theorem2", lhs, rhs, rhs == 0.0, lhs - rhs if rhs == 0.0 else -math.inf, 0.0, False,
                          "f_reg is zero")
    return _check("theorem2", lhs, rhs, c * rhs**2)


def theorem4(report: MeasureReport, delta_hl: float | None = None,
             tol: float = EXACT_TOL) -> tuple[BoundCheck, BoundCheck]:
    """``delta_P + 2 eps J >= Delta H_L`` and ``delta_C + 2 eps J >= Delta H_L``."""
    dhl = report.delta_h_logical if delta_hl is None else delta_hl
    j = _needs_j(report)
    extra = 2 * report.epsilon * j
    return (_check("theorem4_point", report.delta_point + extra, dhl, tol),
            _check("theorem4_charge", report.delta_charge + extra, dhl, tol))


def charge_fluctuation_check(report: MeasureReport, tol: float = EXACT_TOL) -> BoundCheck:
    """``|chi| <= 2 eps J``."""
    j = _needs_j(report)
    return _check("chi_bound", 2 * report.epsilon * j, abs(report.chi), tol)


@dataclass(frozen=True)
class CorollaryReport:
    n: int
    sum_delta_t: float
    delta_t_logical: float
    d: int
    bound: float
    ratio: float

    def to_dict(self) -> dict:
        return asdict(self)


def corollary_gate_bound(n: int, delta_ts, delta_tl: float, d: int) -> CorollaryReport:
    """``B = max{(sum Delta T_S)^{3/2} / Delta T_L^{1/2}, Delta T_L}`` and ``D / B``.

    The order of a transversal logical phase is at most ``O(B)``; only the
    ratio is reported because the constant is not fixed.
    """
    ts = [float(x) for x in delta_ts]
    if len(ts) != n:
        raise ValueError(f"expected {n} local charge ranges, got {len(ts)}")
    if delta_tl <= 0:
        raise ValueError("Delta T_L must be positive")
    if any(x < 0 for x in ts) or d < 1:
        raise ValueError("charge ranges must be non-negative and D positive")
    s = sum(ts)
    b = max(s**1.5 / math.sqrt(delta_tl), float(delta_tl))
    return CorollaryReport(n, s, float(delta_tl), int(d), b, d / b)


def check_report(report: MeasureReport, c: float = DEFAULT_SLACK) -> list[BoundCheck]:
    """Every applicable check; undefined ones are returned as vacuous rows."""
    out: list[BoundCheck] = []
    for name, fn in (("theorem1", lambda: [theorem1(report, c=c)]),
                     ("theorem2", lambda: [theorem2(report, c=c)]),
                     ("theorem4", lambda: list(theorem4(report))),
                     ("chi_bound", lambda: [charge_fluctuation_check(report)])):
        try:
            out.extend(fn())
        except BoundInputError as exc:
            names = ["theorem4_point", "theorem4_charge"] if name == "theorem4" else [name]
            out.extend(BoundCheck(nm, math.nan, math.nan, True, math.nan, 0.0, True, str(exc)) for nm in names)
    return out


EXACT_CHECKS = ("theorem4_point", "theorem4_charge", "chi_bound")
