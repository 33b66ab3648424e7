"""Finite-key secret-key rates for permutation-invariant QKD protocols."""
from .errors import DomainError, InfeasibleError, InvalidStateError
from .protocol import AttackModel, Protocol, ProtocolSpec

__version__ = "0.1.0"
