"""Approximate covariance and error correction for quantum codes."""
from .channels import (ErasureChannel, KrausChannel, dephasing_channel, erasure_channel, identity_channel,
                       unitary_channel)
from .codes import CodeInstance, SymmetryPair, custom_code, reed_muller_code, thermodynamic_code, trivial_code
from .symmetric import LocalSum
from .tensor import DimensionError, SystemShape

__version__ = "0.1.0"

__all__ = [
    "CodeInstance", "DimensionError", "ErasureChannel", "KrausChannel", "LocalSum", "SymmetryPair",
    "SystemShape", "custom_code", "dephasing_channel", "erasure_channel", "identity_channel",
    "reed_muller_code", "thermodynamic_code", "trivial_code", "unitary_channel",
]
