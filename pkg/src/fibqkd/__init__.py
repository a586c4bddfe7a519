"""Simulation of a Fibonacci-valued OAM key distribution protocol."""

from .engine import EveModel, JointProbabilityMatrix, joint_prob_no_eve, joint_prob_with_eve, mix
from .hilbert import ContractError, DomainError
from .infometrics import SecurityMetrics, security_metrics, sweep
from .protocol import Basis, Outcome, ProtocolConfig

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "ContractError",
    "DomainError",
    "EveModel",
    "JointProbabilityMatrix",
    "Outcome",
    "ProtocolConfig",
    "SecurityMetrics",
    "joint_prob_no_eve",
    "joint_prob_with_eve",
    "mix",
    "security_metrics",
    "sweep",
]
