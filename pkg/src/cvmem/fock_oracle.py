"""Brute-force truncated-Fock simulation of the windowed upload.

Independent of the phase-space code: the QND coupling is an explicit unitary
on ``light (x) atom`` (light index first), the homodyne window is a POVM
element built from oscillator wavefunctions, and the atomic state is a
density matrix.  Quadratures follow ``X = (a + a^dag)/2``,
``P = (a - a^dag)/(2i)``, so ``[X, P] = i/2`` and the vacuum variance is 1/4.

The generator is fixed by the Heisenberg maps it must reproduce: with
``U = exp(-2i k G_L (x) G_A)`` one has ``U^dag X_L U = X_L + k G_A`` whenever
``G_L = P_L``, and ``U^dag P_A U = P_A - k G_L`` whenever ``G_A = X_A``.
TYPE1 uses ``(P_L, P_A)``, TYPE2 uses ``(P_L, X_A)``.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy.special import erf, gammaln

from .errors import DomainError, NumericalError, ParameterError, TruncationWarning
from .gaussian_core import QNDKind
from .quadrature import composite_rule

DEFAULT_NTRUNC_PHOTON = 40


def default_ntrunc_cat(x0):
    return 50 + math.ceil(8 * x0 * x0)


# --- single-mode building blocks -------------------------------------------


def annihilation(n_trunc):
    return np.diag(np.sqrt(np.arange(1, n_trunc + 1, dtype=float)), 1)


def quadrature_ops(n_trunc):
    a = annihilation(n_trunc)
    x = (a + a.T) / 2
    p = (a - a.T) / 2j
    return x, p


def oscillator_wavefunctions(n_trunc, x):
    """``psi_n(x)`` for n = 0..n_trunc, scaled so that vacuum <x^2> = 1/4.

    Returns an array of shape ``(n_trunc + 1, len(x))``.
    """
    xi = math.sqrt(2.0) * np.asarray(x, float)
    out = np.empty((n_trunc + 1, xi.size))
    out[0] = math.pi ** -0.25 * np.exp(-xi * xi / 2)
    if n_trunc >= 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for n in range(1, n_trunc):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * xi * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out * 2 ** 0.25


def fock_state(n, n_trunc):
    v = np.zeros(n_trunc + 1, complex)
    v[n] = 1.0
    return v


def state_from_wavefunction(psi, n_trunc, half_width, nodes=2048):
    """Project a position wavefunction onto the truncated number basis.

    Returns ``(vector, leakage)``: the vector is renormalised and ``leakage``
    is the norm that fell outside the truncation.
    """
    xs, ws = composite_rule(-half_width, half_width, nodes // 32, 32)
    vals = psi(xs)
    norm = float(np.sum(ws * np.abs(vals) ** 2))
    coeffs = oscillator_wavefunctions(n_trunc, xs) @ (ws * vals) / math.sqrt(norm)
    kept = float(np.sum(np.abs(coeffs) ** 2))
    leakage = max(0.0, 1.0 - kept)
    if leakage > 1e-8:
        warnings.warn(f"truncation at N={n_trunc} drops norm {leakage:.2e} of the input state",
                      TruncationWarning, stacklevel=2)
    return coeffs / math.sqrt(kept), leakage


def squeezed_photon_state(a, n_trunc):
    """Single photon with ``X -> a X`` (matches ``wigner_squeezed_photon``)."""
    def psi(x):
        u = x / a
        return 2 ** 0.25 * math.pi ** -0.25 * 2 * u * np.exp(-u * u) / math.sqrt(a)

    vec, _ = state_from_wavefunction(psi, n_trunc, 12.0 * max(a, 1.0))
    return vec


def cat_state(x0, a, n_trunc):
    """Pre-squeezed even cat in the physical frame (coherent parts along ``P``).

    Its Wigner function is ``wigner_cat(x0, a).quarter_turn()``.
    """
    def psi(x):
        u = x / a
        return np.exp(-u * u) * np.cos(2 * x0 * u) / math.sqrt(a)

    vec, _ = state_from_wavefunction(psi, n_trunc, 12.0 * max(a, 1.0))
    return vec


def coherent_state(alpha, n_trunc):
    n = np.arange(n_trunc + 1)
    logf = np.cumsum(np.concatenate([[0.0], np.log(np.arange(1, n_trunc + 1))]))
    mag = np.exp(-abs(alpha) ** 2 / 2 + n * np.log(abs(alpha) + 1e-300) - 0.5 * logf)
    if alpha == 0:
        mag = (n == 0).astype(float)
    return mag * np.exp(1j * n * np.angle(alpha))


# --- density matrices ------------------------------------------------------


@dataclass(frozen=True)
class FockDensity:
    matrix: np.ndarray
    label: str = "A"

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ParameterError("density matrix must be square")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def pure(cls, vector, label="A"):
        v = np.asarray(vector, complex)
        return cls(np.outer(v, v.conj()), label)

    @classmethod
    def diagonal(cls, populations, label="A"):
        return cls(np.diag(np.asarray(populations, float)), label)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def n_trunc(self):
        return self.dim - 1

    @property
    def trace(self):
        return float(np.real(np.trace(self.matrix)))

    def populations(self):
        return np.real(np.diag(self.matrix)).copy()

    def hermiticity_error(self):
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self):
        h = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.min(np.linalg.eigvalsh(h)))


# --- coupling ----------------------------------------------------------------


class QNDUnitary:
    """``exp(-2i k G_L (x) G_A)`` stored through the generators' eigenbases."""

    def __init__(self, kind, kappa, n_trunc):
        kappa = float(kappa)
        if not math.isfinite(kappa):
            raise ParameterError(f"kappa must be finite, got {kappa}")
        self.kind = QNDKind(kind)
        self.kappa = kappa
        self.n_trunc = n_trunc
        x, p = quadrature_ops(n_trunc)
        g_l = p
        g_a = p if self.kind is QNDKind.TYPE1 else x
        self.ev_l, self.V_l = np.linalg.eigh(g_l)
        self.ev_a, self.V_a = np.linalg.eigh(g_a)
        self.phase = np.exp(-2j * kappa * np.outer(self.ev_l, self.ev_a))

    def apply(self, psi):
        """Act on a joint state stored as a matrix ``psi[n_light, m_atom]``."""
        t = self.V_l.conj().T @ psi @ self.V_a.conj()
        return self.V_l @ (self.phase * t) @ self.V_a.T

    @property
    def matrix(self):
        v = np.kron(self.V_l, self.V_a)
        return (v * self.phase.ravel()[None, :]) @ v.conj().T

    def leakage(self, inner=None):
        """Largest weight that low basis states push into the top 5 levels."""
        n = self.n_trunc
        inner = n // 2 if inner is None else inner
        inner = max(0, min(inner, n - 5))
        worst = 0.0
        for k in range(inner + 1):
            for m in range(inner + 1):
                psi = np.zeros((n + 1, n + 1), complex)
                psi[k, m] = 1.0
                out = np.abs(self.apply(psi)) ** 2
                edge = out[n - 4:, :].sum() + out[:, n - 4:].sum()
                worst = max(worst, float(edge))
        return worst


def qnd_unitary(kind, kappa, n_trunc, check_leakage=True):
    """Full ``(N+1)^2`` unitary matrix of the QND coupling (light index first)."""
    u = QNDUnitary(kind, kappa, n_trunc)
    if check_leakage:
        leak = u.leakage(inner=min(5, n_trunc // 2))
        if leak > 1e-6:
            warnings.warn(f"QND coupling leaks {leak:.2e} into the truncation edge",
                          TruncationWarning, stacklevel=2)
    return u.matrix


# --- measurement ---------------------------------------------------------------


def window_povm(B, n_trunc, eta=1.0, order=32):
    """POVM element for accepting ``|x| <= B`` on the measured light quadrature.

    ``eta < 1`` models detector loss: the window indicator is smeared by the
    added vacuum noise and rescaled.  ``B = inf`` gives the identity.
    """
    if not B > 0:
        raise ParameterError(f"B must be > 0, got {B}")
    if not (0 < eta <= 1):
        raise ParameterError(f"eta must lie in (0, 1], got {eta}")
    if math.isinf(B):
        return np.eye(n_trunc + 1)
    if eta >= 1.0:
        lo, hi = -B, B
    else:
        half = (B + 4.0 * math.sqrt(1 - eta)) / math.sqrt(eta)
        lo, hi = -half, half
    panels = max(1, math.ceil((hi - lo) / 0.5))
    xs, ws = composite_rule(lo, hi, panels, order)
    if eta < 1.0:
        se, sr = math.sqrt(eta), math.sqrt(1 - eta)
        ws = ws * 0.5 * (erf(math.sqrt(2) * (B - se * xs) / sr) + erf(math.sqrt(2) * (B + se * xs) / sr))
    psi = oscillator_wavefunctions(n_trunc, xs)
    return (psi * ws[None, :]) @ psi.T


def _joint_after_coupling(light_vec, kappa, n_trunc, kind):
    psi = np.zeros((n_trunc + 1, n_trunc + 1), complex)
    psi[:, 0] = light_vec
    return QNDUnitary(kind, kappa, n_trunc).apply(psi)


def _edge_population(rho_or_psi, n_trunc, axis):
    w = np.abs(rho_or_psi) ** 2
    return float(w.sum(axis=1 - axis)[n_trunc - 2:].sum())


def upload_oracle(light, kappa, B, n_trunc=DEFAULT_NTRUNC_PHOTON, eta=1.0, kind=QNDKind.TYPE2):
    """Condition the atom (initially vacuum) on the light's window outcome.

    ``light`` is a state vector or a :class:`FockDensity` on the light mode.
    Returns ``(FockDensity, S)`` with the atomic state normalised.
    """
    if isinstance(light, FockDensity):
        evals, evecs = np.linalg.eigh(0.5 * (light.matrix + light.matrix.conj().T))
        comps = [(float(w), evecs[:, i]) for i, w in enumerate(evals) if w > 1e-14]
    else:
        comps = [(1.0, np.asarray(light, complex))]
    dim = n_trunc + 1
    if any(len(v) != dim for _, v in comps):
        raise ParameterError(f"light state must live in dimension {dim}")
    E = window_povm(B, n_trunc, eta)
    rho = np.zeros((dim, dim), complex)
    edge = 0.0
    for w, vec in comps:
        psi = _joint_after_coupling(vec, kappa, n_trunc, kind)
        edge = max(edge, _edge_population(psi, n_trunc, 0), _edge_population(psi, n_trunc, 1))
        rho += w * (psi.T @ E @ psi.conj())
    if edge > 1e-8:
        warnings.warn(f"coupled state has population {edge:.2e} in the top Fock levels",
                      TruncationWarning, stacklevel=2)
    s = float(np.real(np.trace(rho)))
    if not s >= 1e-14:
        raise NumericalError(f"success probability {s:.3e} is too small to condition on")
    return FockDensity(rho / s, "A"), s


def conditional_atom_vector(light_vec, kappa, x, n_trunc, kind=QNDKind.TYPE2):
    """Unnormalised atomic vector for the sharp light outcome ``X_L = x``."""
    psi = _joint_after_coupling(np.asarray(light_vec, complex), kappa, n_trunc, kind)
    phi_x = oscillator_wavefunctions(n_trunc, np.array([x]))[:, 0]
    return phi_x @ psi


def joint_quadrature_means(light_vec, atom_vec, kappa, n_trunc, kind=QNDKind.TYPE2):
    """``(<X_L>, <P_L>, <X_A>, <P_A>)`` after the coupling, for product inputs."""
    psi = np.outer(light_vec, atom_vec)
    out = QNDUnitary(kind, kappa, n_trunc).apply(psi)
    x, p = quadrature_ops(n_trunc)
    rho_l = out @ out.conj().T
    rho_a = out.T @ out.conj()
    return tuple(float(np.real(np.trace(r @ op))) for r, op in
                 ((rho_l, x), (rho_l, p), (rho_a, x), (rho_a, p)))


# --- metrics -------------------------------------------------------------------


def fidelity_with(rho, target_vec):
    v = np.asarray(target_vec, complex)
    v = v[: rho.dim] if len(v) >= rho.dim else np.pad(v, (0, rho.dim - len(v)))
    return float(np.real(v.conj() @ rho.matrix @ v))


def parity_negativity(rho):
    """``W(0, 0) = (2/pi) sum_n (-1)^n rho_nn``."""
    pops = rho.populations()
    return float(2 / math.pi * np.sum(pops * (-1.0) ** np.arange(len(pops))))


def mandel_q(rho):
    pops = rho.populations()
    n = np.arange(len(pops))
    mean = float(pops @ n)
    if mean <= 0:
        return float("nan")
    var = float(pops @ n ** 2) - mean * mean
    return (var - mean) / mean


@dataclass(frozen=True)
class FockMetrics:
    fidelity: float
    negativity: float
    mandel_q: float


def fock_metrics(rho):
    """Fidelity with ``|1>``, parity negativity and Mandel Q."""
    f = float(np.real(rho.matrix[1, 1])) if rho.dim > 1 else 0.0
    return FockMetrics(f, parity_negativity(rho), mandel_q(rho))


def displacement_elements(gamma, n_trunc):
    """``<m|D(gamma)|n>`` for every ``gamma``; shape ``(len(gamma), N+1, N+1)``.

    Uses ``<k+d|D|k> = sqrt(k!/(k+d)!) gamma^d e^{-|gamma|^2/2} L_k^(d)(|gamma|^2)``
    with the Laguerre polynomials from their forward recurrence and the
    prefactor in log form.  The textbook column recurrence for ``D`` itself
    loses all accuracy once ``|gamma|`` is a few units and ``N`` is a few tens.
    """
    g = np.atleast_1d(np.asarray(gamma, complex))
    dim = n_trunc + 1
    x = np.abs(g) ** 2
    r = np.abs(g)
    with np.errstate(divide="ignore"):
        logr = np.log(r)
    ph_lo = np.where(r > 0, g / np.where(r > 0, r, 1.0), 1.0)
    ph_up = -np.conj(ph_lo)
    lf = gammaln(np.arange(dim + 1, dtype=float))
    D = np.zeros((g.size, dim, dim), complex)
    for d in range(dim):
        nk = dim - d
        L = np.empty((nk, g.size))
        L[0] = 1.0
        if nk > 1:
            L[1] = 1.0 + d - x
        for k in range(1, nk - 1):
            L[k + 1] = ((2 * k + 1 + d - x) * L[k] - (k + d) * L[k - 1]) / (k + 1)
        k = np.arange(nk)
        logpref = 0.5 * (lf[k + 1] - lf[k + d + 1])[:, None] - 0.5 * x[None, :]
        if d:
            logpref = logpref + d * logr[None, :]
        mag = (np.exp(logpref) * L).T
        D[:, k + d, k] = mag * (ph_lo ** d)[:, None]
        if d:
            D[:, k, k + d] = mag * (ph_up ** d)[:, None]
    return D


def wigner_from_fock(rho, xs, ps):
    """Displaced-parity Wigner function on the grid ``xs x ps`` (``[i_x, i_p]``)."""
    top = float(np.real(rho.matrix[-1, -1]))
    if top > 1e-8:
        warnings.warn(f"top Fock population {top:.2e} exceeds 1e-8", TruncationWarning, stacklevel=2)
    X, P = np.meshgrid(np.asarray(xs, float), np.asarray(ps, float), indexing="ij")
    beta = (X + 1j * P).ravel()
    parity = (-1.0) ** np.arange(rho.dim)
    # W = (2/pi) Tr[rho D(2 beta) Pi]
    weighted = rho.matrix.T * parity[None, :]
    out = np.empty(beta.size)
    step = max(1, 4_000_000 // rho.dim ** 2)
    for i in range(0, beta.size, step):
        D = displacement_elements(2 * beta[i:i + step], rho.n_trunc)
        out[i:i + step] = np.real(np.einsum("kmn,mn->k", D, weighted))
    return (2 / math.pi) * out.reshape(X.shape)


def wigner_from_fock_checked(rho, xs, ps):
    if abs(rho.trace - 1) > 1e-9:
        raise DomainError("density matrix must be normalised")
    return wigner_from_fock(rho, xs, ps)
