"""Double-cage induction motor parameter estimation from nameplate data.

Submodules: :mod:`circuit` (equivalent circuit), :mod:`formulation`
(nameplate targets and residuals), :mod:`descent` (NR, LM, damped NR),
:mod:`evolution` (real-coded GA), :mod:`hybrid` (GA over descent),
:mod:`corpus` (CSV ingestion, synthetic motors, results files),
:mod:`batch` (corpus runs and reports) and :mod:`cli`.
"""

from .circuit import CircuitParams, OperatingPoint, breakdown_torque, input_impedance, operating_point
from .descent import DampingConfig, DescentConfig, Method, RestrictionConfig, SolveOutcome, Strategy, solve
from .errors import (
    DegenerateError,
    DomainError,
    MotorParamsError,
    MultimodalWarning,
    NonFiniteError,
    ParseError,
    ResourceError,
    ValidationError,
)
from .evolution import GaConfig, solve_ga
from .formulation import NameplateData, TargetVector, jacobian, residuals, to_targets
from .hybrid import HybridConfig, solve_hybrid

__version__ = "0.1.0"

__all__ = [
    "CircuitParams", "OperatingPoint", "breakdown_torque", "input_impedance", "operating_point",
    "DampingConfig", "DescentConfig", "Method", "RestrictionConfig", "SolveOutcome", "Strategy", "solve",
    "DegenerateError", "DomainError", "MotorParamsError", "MultimodalWarning", "NonFiniteError",
    "ParseError", "ResourceError", "ValidationError",
    "GaConfig", "solve_ga",
    "NameplateData", "TargetVector", "jacobian", "residuals", "to_targets",
    "HybridConfig", "solve_hybrid",
]
