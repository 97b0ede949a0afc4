"""Symplectic algebra for the deterministic light-to-atom record.

Phase-space vectors are stacked per mode as ``(X_1, P_1, X_2, P_2, ...)``.
The native vacuum convention is ``UNIT`` (vacuum variance 1); ``QUARTER``
(vacuum variance 1/4) is what the Wigner-function code uses.
"""

from dataclasses import dataclass, field
from enum import Enum
import math

import numpy as np

from .errors import DomainError, NumericalError, ParameterError

SYMPLECTIC_TOL = 1e-12
NOISE_TOL = 1e-9


class Convention(Enum):
    UNIT = 1.0
    QUARTER = 0.25

    @property
    def vacuum_variance(self):
        return self.value


class QNDKind(Enum):
    TYPE1 = "type1"  # X_L += k P_A,  X_A += k P_L
    TYPE2 = "type2"  # X_L += k X_A,  P_A -= k P_L


class Squeeze(Enum):
    X_DOWN_P_UP = "x_down_p_up"  # X -> X/f, P -> f P
    X_UP_P_DOWN = "x_up_p_down"  # X -> f X, P -> P/f


def omega(n_modes):
    """Standard symplectic form for ``n_modes`` modes."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _check_real(name, value, *, positive=False, nonnegative=False):
    value = float(value)
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value}")
    if positive and value <= 0:
        raise ParameterError(f"{name} must be > 0, got {value}")
    if nonnegative and value < 0:
        raise ParameterError(f"{name} must be >= 0, got {value}")
    return value


@dataclass(frozen=True)
class GaussianState:
    modes: tuple
    mean: np.ndarray
    cov: np.ndarray
    convention: Convention = Convention.UNIT

    def __post_init__(self):
        modes = tuple(self.modes)
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.cov, dtype=float)
        n = 2 * len(modes)
        if mean.shape != (n,) or cov.shape != (n, n):
            raise ParameterError(
                f"{len(modes)} modes need mean ({n},) and cov ({n},{n}), "
                f"got {mean.shape} and {cov.shape}"
            )
        if np.max(np.abs(cov - cov.T), initial=0.0) > 1e-12:
            raise ParameterError("covariance matrix is not symmetric")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def vacuum(cls, modes=("L",), convention=Convention.UNIT):
        modes = tuple(modes)
        n = 2 * len(modes)
        return cls(modes, np.zeros(n), convention.vacuum_variance * np.eye(n), convention)

    @classmethod
    def two_mode_squeezed(cls, r, modes=("A", "B"), convention=Convention.UNIT):
        v = convention.vacuum_variance
        ch, sh = math.cosh(2 * r), math.sinh(2 * r)
        z = np.diag([1.0, -1.0])
        cov = v * np.block([[ch * np.eye(2), sh * z], [sh * z, ch * np.eye(2)]])
        return cls(modes, np.zeros(4), cov, convention)

    @property
    def n_modes(self):
        return len(self.modes)

    def index(self, mode):
        try:
            return self.modes.index(mode)
        except ValueError:
            raise ParameterError(f"unknown mode {mode!r}; have {self.modes}") from None

    def heisenberg_min_eig(self):
        """Smallest eigenvalue of ``cov + i v Omega`` (>= 0 for physical states)."""
        v = self.convention.vacuum_variance
        m = self.cov + 1j * v * omega(self.n_modes)
        return float(np.min(np.linalg.eigvalsh(m)))

    def is_physical(self, tol=1e-10):
        return self.heisenberg_min_eig() >= -tol

    def reduced(self, modes):
        idx = np.concatenate([[2 * self.index(m), 2 * self.index(m) + 1] for m in modes])
        return GaussianState(
            tuple(modes), self.mean[idx], self.cov[np.ix_(idx, idx)], self.convention
        )

    def tensor(self, other):
        if other.convention is not self.convention:
            other = convention_convert(other, self.convention)
        n, m = len(self.mean), len(other.mean)
        cov = np.zeros((n + m, n + m))
        cov[:n, :n] = self.cov
        cov[n:, n:] = other.cov
        return GaussianState(
            self.modes + other.modes,
            np.concatenate([self.mean, other.mean]),
            cov,
            self.convention,
        )

    def variance(self, mode, quadrature):
        k = 2 * self.index(mode) + (0 if quadrature.upper() == "X" else 1)
        return float(self.cov[k, k])


@dataclass(frozen=True)
class SymplecticMap:
    matrix: np.ndarray
    displacement: np.ndarray = None
    label: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ParameterError(f"symplectic matrix must be square and even, got {m.shape}")
        d = np.zeros(m.shape[0]) if self.displacement is None else np.array(self.displacement, float)
        m.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "displacement", d)

    @property
    def n_modes(self):
        return self.matrix.shape[0] // 2

    def symplectic_error(self):
        w = omega(self.n_modes)
        return float(np.max(np.abs(self.matrix @ w @ self.matrix.T - w)))

    def is_symplectic(self, tol=SYMPLECTIC_TOL):
        return self.symplectic_error() <= tol

    def then(self, other):
        """Map that applies ``self`` first and ``other`` second."""
        return SymplecticMap(
            other.matrix @ self.matrix,
            other.matrix @ self.displacement + other.displacement,
            f"{other.label}∘{self.label}",
        )

    @classmethod
    def identity(cls, n_modes):
        return cls(np.eye(2 * n_modes), label="id")

    def embed(self, positions, n_modes):
        """Lift this map onto modes ``positions`` of an ``n_modes`` system."""
        if len(positions) != self.n_modes:
            raise ParameterError("positions must match the map's mode count")
        idx = np.concatenate([[2 * p, 2 * p + 1] for p in positions])
        m = np.eye(2 * n_modes)
        m[np.ix_(idx, idx)] = self.matrix
        d = np.zeros(2 * n_modes)
        d[idx] = self.displacement
        return SymplecticMap(m, d, self.label)


def qnd_map(kind, kappa):
    """Two-mode QND coupling on (light, atom), ordered ``(X_L, P_L, X_A, P_A)``."""
    kappa = _check_real("kappa", kappa)
    kind = QNDKind(kind)
    m = np.eye(4)
    if kind is QNDKind.TYPE1:
        m[0, 3] = kappa  # X_L += k P_A
        m[2, 1] = kappa  # X_A += k P_L
    else:
        m[0, 2] = kappa  # X_L += k X_A
        m[3, 1] = -kappa  # P_A -= k P_L
    return SymplecticMap(m, label=f"QND-{kind.name}({kappa:g})")


def feed_forward_map(source_quadrature, target_quadrature, gain):
    """Displace a target quadrature by ``gain`` times a measured one.

    Ordered ``(X_src, P_src, X_tgt, P_tgt)``.  The back-action lands on the
    measured mode's conjugate quadrature, which is discarded afterwards.
    """
    gain = _check_real("gain", gain)
    s = 0 if source_quadrature.upper() == "X" else 1
    t = 2 + (0 if target_quadrature.upper() == "X" else 1)
    m = np.eye(4)
    m[t, s] = gain
    # back-action keeps the map symplectic: conjugate of s picks up the conjugate of t
    s_conj = 1 - s
    t_conj = 2 + (1 - (t - 2))
    sign = -1.0 if (s == t - 2) else 1.0
    m[s_conj, t_conj] = sign * gain
    return SymplecticMap(m, label=f"FF({source_quadrature}->{target_quadrature},{gain:g})")


def squeeze_map(factor, which=Squeeze.X_DOWN_P_UP):
    """Single-mode squeezer; ``X_DOWN_P_UP`` maps X -> X/f, P -> f P."""
    factor = _check_real("factor", factor, positive=True)
    which = Squeeze(which)
    if which is Squeeze.X_DOWN_P_UP:
        m = np.diag([1.0 / factor, factor])
    else:
        m = np.diag([factor, 1.0 / factor])
    return SymplecticMap(m, label=f"S({factor:g},{which.name})")


def apply_map(state, smap, modes=None):
    """Push ``state`` through ``smap`` acting on ``modes`` (default: all)."""
    if modes is not None:
        smap = smap.embed([state.index(m) for m in modes], state.n_modes)
    if smap.matrix.shape[0] != len(state.mean):
        raise ParameterError(
            f"map acts on {smap.n_modes} modes but state has {state.n_modes}"
        )
    m = smap.matrix
    # displacements are given in UNIT quadratures
    scale = math.sqrt(state.convention.vacuum_variance)
    return GaussianState(
        state.modes,
        m @ state.mean + scale * smap.displacement,
        m @ state.cov @ m.T,
        state.convention,
    )


def convention_convert(state, target):
    target = Convention(target)
    if target is state.convention:
        return state
    ratio = target.vacuum_variance / state.convention.vacuum_variance
    return GaussianState(state.modes, state.mean * math.sqrt(ratio), state.cov * ratio, target)


def homodyne_condition(state, mode, quadrature, outcome):
    """Condition on a sharp homodyne outcome; the measured mode is removed.

    Returns ``(conditional_state, pdf)``.
    """
    k = 2 * state.index(mode) + (0 if quadrature.upper() == "X" else 1)
    keep_modes = tuple(m for m in state.modes if m != mode)
    keep = np.concatenate([[2 * state.index(m), 2 * state.index(m) + 1] for m in keep_modes]) \
        if keep_modes else np.array([], dtype=int)
    var = state.cov[k, k]
    if not var > 1e-300:
        raise NumericalError(f"measured variance {var} is singular")
    b = state.cov[keep, k]
    resid = float(outcome) - state.mean[k]
    mean = state.mean[keep] + b * resid / var
    cov = state.cov[np.ix_(keep, keep)] - np.outer(b, b) / var
    pdf = math.exp(-0.5 * resid * resid / var) / math.sqrt(2 * math.pi * var)
    return GaussianState(keep_modes, mean, cov, state.convention), pdf


def symplectic_eigenvalues(cov):
    n = cov.shape[0] // 2
    ev = np.linalg.eigvals(1j * omega(n) @ cov)
    return np.sort(np.abs(ev))[::2]


def log_negativity(state):
    """Logarithmic negativity (base 2) of a two-mode Gaussian state."""
    if state.n_modes != 2:
        raise DomainError(f"log-negativity needs exactly two modes, got {state.n_modes}")
    if not state.is_physical():
        raise DomainError("covariance matrix violates the uncertainty relation")
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    nu = symplectic_eigenvalues(flip @ state.cov @ flip) / state.convention.vacuum_variance
    e = -math.log2(float(nu[0]))
    # separable states sit at nu = 1 up to round-off
    return e if e > 1e-12 else 0.0


# --- deterministic record -------------------------------------------------


def solve_record_gains(kappa, c=1.0):
    """Feed-forward gain, residual squeezing and transmission of the record.

    Returns ``(g, a, T_R)`` with ``g = -c^2 k / (1 + c^2 k^2)``,
    ``a = 1/sqrt(1 + c^2 k^2)`` and ``T_R = c^2 k^2 / (1 + c^2 k^2)``.
    """
    kappa = _check_real("kappa", kappa, nonnegative=True)
    c = _check_real("c", c, positive=True)
    ck2 = (c * kappa) ** 2
    g = -c * c * kappa / (1.0 + ck2)
    a = 1.0 / math.sqrt(1.0 + ck2)
    return g, a, ck2 / (1.0 + ck2)


def postcorrection_params(kappa_prime):
    """Gain, squeezing factor and loss of the lossy squeezing post-correction.

    Returns ``(g, b, T_C)`` with ``g = -k'``, ``b = sqrt(1 - k'^2)``, ``T_C = b^2``.
    """
    kp = _check_real("kappa_prime", kappa_prime, nonnegative=True)
    if kp >= 1.0:
        raise DomainError(f"post-correction needs kappa' < 1 (b^2 = {1 - kp * kp:g} <= 0)")
    return -kp, math.sqrt(1.0 - kp * kp), 1.0 - kp * kp


def matched_kappa_prime(kappa, c=1.0):
    """Post-correction coupling that exactly undoes the record's squeezing."""
    _, a, _ = solve_record_gains(kappa, c)
    return math.sqrt(1.0 - a * a)


def composed_transmission(kappa, c=1.0):
    """Total transmission of record plus matched post-correction."""
    kappa = _check_real("kappa", kappa, nonnegative=True)
    c = _check_real("c", c, positive=True)
    ck2 = (c * kappa) ** 2
    return ck2 / (1.0 + ck2) ** 2


@dataclass(frozen=True)
class ChannelReport:
    T_x: float
    T_p: float
    V_Nx: float
    V_Np: float
    noise_excess_free: bool
    frame: str
    gains: dict = field(default_factory=dict)

    @property
    def T(self):
        return 0.5 * (self.T_x + self.T_p)

    def as_dict(self):
        return {
            "T_x": self.T_x,
            "T_p": self.T_p,
            "V_Nx": self.V_Nx,
            "V_Np": self.V_Np,
            "noise_excess_free": self.noise_excess_free,
            "frame": self.frame,
            "gains": dict(self.gains),
        }


RECORD_MODES = ("L", "A", "L0")


def record_pipeline(kappa, c=1.0, with_postcorrection=True, gain=None):
    """Heisenberg-picture map of the whole record on modes ``(L, A, L0)``.

    ``L`` is the input light, ``A`` the atomic memory (starts in vacuum) and
    ``L0`` the vacuum light pulse used by the post-correction.  Without
    post-correction the residual squeezing ``a`` is undone by an ideal
    squeezer, so the map describes the record "up to the squeezing".

    Returns ``(map, params)``.
    """
    g_opt, a, _ = solve_record_gains(kappa, c)
    g = g_opt if gain is None else _check_real("gain", gain)
    n = len(RECORD_MODES)
    L, A, L0 = 0, 1, 2
    steps = [
        squeeze_map(c, Squeeze.X_DOWN_P_UP).embed([L], n),
        qnd_map(QNDKind.TYPE1, kappa).embed([L, A], n),
        feed_forward_map("X", "P", g).embed([L, A], n),
    ]
    params = {"kappa": float(kappa), "c": float(c), "g": g, "a": a}
    if with_postcorrection:
        kp = math.sqrt(1.0 - a * a)
        g2, b, t_c = postcorrection_params(kp)
        steps += [
            qnd_map(QNDKind.TYPE2, kp).embed([L0, A], n),
            feed_forward_map("X", "X", g2).embed([L0, A], n),
        ]
        params.update(kappa_prime=kp, g_post=g2, b=b, T_C=t_c)
    else:
        steps.append(squeeze_map(1.0 / a, Squeeze.X_DOWN_P_UP).embed([A], n))
    total = steps[0]
    for s in steps[1:]:
        total = total.then(s)
    return total, params


def record_channel_report(kappa, c=1.0, with_postcorrection=True, gain=None):
    """Transmission and added noise of the record, per atomic quadrature.

    The record exchanges quadratures: the atomic ``X`` carries the light ``P``
    and the atomic ``P`` carries ``-X`` of the light (a quarter-turn phase
    rotation).  Added noise is output-referred in vacuum units, so the
    channel is noise-excess free when ``V_N <= 1 - T`` in both quadratures.
    """
    smap, params = record_pipeline(kappa, c, with_postcorrection, gain)
    m = smap.matrix
    xl, pl, xa, pa = 0, 1, 2, 3
    row_x, row_p = m[xa], m[pa]
    t_x = row_x[pl] ** 2
    t_p = row_p[xl] ** 2
    v_x = float(np.sum(row_x ** 2) - t_x)
    v_p = float(np.sum(row_p ** 2) - t_p)
    free = bool(v_x <= 1.0 - t_x + NOISE_TOL and v_p <= 1.0 - t_p + NOISE_TOL)
    frame = "X_A <- +P_L, P_A <- -X_L (quarter-turn exchange)"
    if not with_postcorrection:
        frame += f"; up to squeezing X_A -> a X_A, P_A -> P_A/a with a={params['a']:.12g}"
    return ChannelReport(float(t_x), float(t_p), v_x, v_p, free, frame, params)
