"""Certified recurrence bounds and simulators for a frog model on the 3,2-alternating tree."""

from .certificate import Certificate, run_certificate, verify_certificate
from .interval import Interval
from .operators import ExponentialPGF, op_A, op_H, op_L

__all__ = [
    "Certificate",
    "ExponentialPGF",
    "Interval",
    "op_A",
    "op_H",
    "op_L",
    "run_certificate",
    "verify_certificate",
]

__version__ = "0.1.0"
