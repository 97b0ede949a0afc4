"""Continuous-variable quantum memory: record and upload protocols.

Modules
-------
gaussian_core
    Gaussian states, symplectic maps and the deterministic record.
protocols
    Record applied to concrete inputs (single-photon upload).
wigner
    Phase-space engine for the post-selected upload of non-Gaussian states.
fock_oracle
    Truncated-Fock brute-force simulator used for cross-checks.
cli
    Command-line front end.
"""

from .errors import (
    ConvergenceError,
    DomainError,
    NumericalError,
    ParameterError,
    RegimeWarning,
    TruncationWarning,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DomainError",
    "NumericalError",
    "ParameterError",
    "RegimeWarning",
    "TruncationWarning",
    "__version__",
]
