"""Desk-scale numerics for invariant subspaces: truncated operators, shift
representation matrices, Hankel rationality tests, asymmetric growth and
Krylov cyclicity checks."""

from .errors import HorizonError, HypothesisWarning, PreconditionError, ScenarioError
from .operators import OperatorSpec, TruncatedOperator, WeightSequence, build_truncation
from .sequences import CoefficientSequence

__all__ = [
    "CoefficientSequence", "HorizonError", "HypothesisWarning", "OperatorSpec",
    "PreconditionError", "ScenarioError", "TruncatedOperator", "WeightSequence",
    "build_truncation",
]

__version__ = "0.1.0"
