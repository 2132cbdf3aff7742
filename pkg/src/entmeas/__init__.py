"""Certifying entangled two-qubit measurements from outcome statistics."""
from .scenario import (Scenario, UnsupportedScenarioError, ValidationError, Witness,
                       evaluate_probabilities, witness_value)
from .sdp import SdpConvergenceError

__version__ = "0.1.0"
