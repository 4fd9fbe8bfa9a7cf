"""Code-level measures: recovery, covariance violation, metrology."""
from .covariance import (charge_fluctuation, charge_violation, global_violation, global_violation_details,
                         isometric_channel_qfi, point_violation, unitary_qfi)
from .metrology import MetrologyResult, f_reg, growth_exponent, j_min
from .recovery import RecoveryResult, kl_residual, optimal_recovery, qec_inaccuracy, rotated_code
from .report import MeasureReport, analyze, gate_error_bounds

__all__ = [
    "MeasureReport", "MetrologyResult", "RecoveryResult", "analyze", "charge_fluctuation", "charge_violation",
    "f_reg", "gate_error_bounds", "global_violation", "global_violation_details", "growth_exponent",
    "isometric_channel_qfi", "j_min", "kl_residual", "optimal_recovery", "point_violation", "qec_inaccuracy",
    "rotated_code", "unitary_qfi",
]
