"""Long-time asymptotics toolkit for focusing NLS with step-like oscillating initial data."""
from .errors import DomainError, SolverError, StepNLSError
from .spectral import ProblemParams, symmetric_shock

__all__ = ["DomainError", "ProblemParams", "SolverError", "StepNLSError", "symmetric_shock"]
__version__ = "0.1.0"
