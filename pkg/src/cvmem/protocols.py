"""Protocol-level results of the deterministic record applied to concrete inputs."""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError, ParameterError
from .gaussian_core import (
    composed_transmission,
    matched_kappa_prime,
    postcorrection_params,
    solve_record_gains,
)


@dataclass(frozen=True)
class DeterministicUploadResult:
    """Single photon sent through the record: ``T |1><1| + (1 - T) |0><0|``."""

    T_total: float
    rho_diag: tuple
    mandel_q: float
    params: dict

    def to_fock(self, n_trunc=4):
        """The state as a :class:`~cvmem.fock_oracle.FockDensity` (empty levels above 1)."""
        from .fock_oracle import FockDensity

        pops = np.zeros(max(n_trunc, 1) + 1)
        pops[:2] = self.rho_diag
        return FockDensity.diagonal(pops)

    def mandel_q_from_moments(self):
        p0, p1 = self.rho_diag
        mean = p1
        if mean == 0:
            return 0.0
        var = p1 - mean * mean
        return (var - mean) / mean


def deterministic_photon_upload(kappa, c=1.0):
    """Record a single photon with the matched post-correction.

    ``kappa = 0`` is accepted as the limit in which nothing is transferred.
    """
    kappa, c = float(kappa), float(c)
    if not (math.isfinite(kappa) and kappa >= 0):
        raise ParameterError(f"kappa must be finite and >= 0, got {kappa}")
    if not (math.isfinite(c) and c > 0):
        raise ParameterError(f"c must be finite and > 0, got {c}")
    g, a, _ = solve_record_gains(kappa, c)
    kp = matched_kappa_prime(kappa, c)
    _, b, _ = postcorrection_params(kp)
    T = composed_transmission(kappa, c)
    params = {"kappa": kappa, "c": c, "kappa_prime": kp, "g": g, "a": a, "b": b}
    # pure loss on |1>: <n> = T, var(n) = T(1 - T), so Q = -T
    return DeterministicUploadResult(T, (1.0 - T, T), -T, params)


def optimal_pre_squeezing(kappa):
    """Pre-squeezing ``c`` that maximises the transmission (``c kappa = 1``)."""
    kappa = float(kappa)
    if not math.isfinite(kappa) or kappa < 0:
        raise ParameterError(f"kappa must be finite and >= 0, got {kappa}")
    if kappa == 0:
        raise DomainError("no pre-squeezing reaches T = 1/4 without coupling")
    return 1.0 / kappa
