"""Single-mode Wigner functions and the post-selected light-to-atom upload.

Everything here uses the QUARTER convention (vacuum variance 1/4, so the
vacuum is ``(2/pi) exp(-2x^2 - 2p^2)``).

Upload geometry (the "physical frame"): the light and the atomic memory are
coupled by the TYPE2 QND map ``X_L += k X_A, P_A -= k P_L``; the light
quadrature ``X_L`` is then measured and kept only when the outcome lies in
``[-B, B]``.  An inefficient detector (efficiency ``eta``) sees
``sqrt(eta) X_L + sqrt(1 - eta) X_vac``.

Cat states are presented in a frame rotated by a quarter turn, with the two
coherent components along ``x`` and the interference fringes along ``p``.
Only in the physical frame, where the fringes lie along the measured
quadrature, does the window accept a non-negligible fraction of the cat.
"""

from dataclasses import dataclass, field
from functools import cached_property
import csv
import math
import warnings

import numpy as np
from scipy.special import erf

from . import quadrature
from .errors import ConvergenceError, NumericalError, ParameterError, RegimeWarning
from .gaussian_core import (
    Convention,
    GaussianState,
    QNDKind,
    apply_map,
    convention_convert,
    homodyne_condition,
    qnd_map,
)
from .special import scaled_erf

SQRT2 = math.sqrt(2.0)
TWO_OVER_PI = 2.0 / math.pi


@dataclass(frozen=True)
class WignerFunction:
    """Real scalar field on phase space with a rectangle that holds its mass.

    ``func`` must accept broadcastable arrays ``x, p``.  ``support`` is
    ``(x_min, x_max, p_min, p_max)`` and is used for quadrature only.
    """

    func: object
    support: tuple
    label: str = ""

    def __call__(self, x, p):
        x, p = np.broadcast_arrays(np.asarray(x, float), np.asarray(p, float))
        out = np.asarray(self.func(x.ravel(), p.ravel()), dtype=float)
        return out.reshape(x.shape) if x.shape else out[()]

    def sample(self, xs, ps):
        """Values on the grid ``xs x ps`` (indexing ``[i_x, i_p]``)."""
        X, P = np.meshgrid(np.asarray(xs, float), np.asarray(ps, float), indexing="ij")
        return self(X, P)

    @cached_property
    def normalization(self):
        value, _ = quadrature.integrate_2d(self, self.support, atol=1e-11, order=24)
        return value

    def squeezed(self, sx, sp):
        """``W(x*sx, p*sp)``; area preserving when ``sx*sp == 1``."""
        x0, x1, p0, p1 = self.support
        f = self.func
        return WignerFunction(
            lambda x, p: f(x * sx, p * sp),
            (x0 / sx, x1 / sx, p0 / sp, p1 / sp),
            self.label,
        )

    def quarter_turn(self):
        """Relabel ``(x, p) -> (p, x)``.

        Every state handled here is even in each quadrature, so this equals a
        quarter-turn phase rotation.
        """
        x0, x1, p0, p1 = self.support
        f = self.func
        return WignerFunction(lambda x, p: f(p, x), (p0, p1, x0, x1), self.label)

    def write_csv(self, path, xs, ps):
        """Grid dump with header ``x,p,w``."""
        values = self.sample(xs, ps)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x", "p", "w"])
            for i, x in enumerate(xs):
                for j, p in enumerate(ps):
                    writer.writerow([repr(float(x)), repr(float(p)), repr(float(values[i, j]))])


@dataclass(frozen=True)
class PostSelectParams:
    kappa: float
    B: float
    a: float = 1.0
    x0: float = 0.0
    eta: float = 1.0

    def __post_init__(self):
        for name in ("kappa", "B", "a"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be finite and > 0, got {v}")
        if not (math.isfinite(self.x0) and self.x0 >= 0):
            raise ParameterError(f"x0 must be >= 0, got {self.x0}")
        if not (0.0 < self.eta <= 1.0):
            raise ParameterError(f"eta must lie in (0, 1], got {self.eta}")

    @property
    def d(self):
        return math.hypot(self.a, self.kappa)

    @property
    def x0_prime(self):
        return self.kappa * self.x0 / self.d

    # detector inefficiency = Gaussian smearing of X_L with variance (1-eta)/(4 eta)
    # and a window widened to B/sqrt(eta)
    @property
    def A(self):
        return math.sqrt(self.a ** 2 + (1.0 - self.eta) / self.eta)

    @property
    def D(self):
        return math.hypot(self.A, self.kappa)

    @property
    def B_eff(self):
        return self.B / math.sqrt(self.eta)


@dataclass(frozen=True)
class UploadReport:
    S: float
    F: float
    N: float
    params: PostSelectParams
    x0_prime: float = 0.0
    post_corrected: bool = False
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        p = self.params
        return {
            "kappa": p.kappa,
            "a": p.a,
            "B": p.B,
            "x0": p.x0,
            "eta": p.eta,
            "S": self.S,
            "F": self.F,
            "N": self.N,
            "x0_prime": self.x0_prime,
        }


# --- states ---------------------------------------------------------------


def wigner_vacuum():
    return WignerFunction(
        lambda x, p: TWO_OVER_PI * np.exp(-2 * x * x - 2 * p * p), (-6.0, 6.0, -6.0, 6.0), "vacuum"
    )


def wigner_squeezed_vacuum(a):
    """``(2/pi) exp(-2x^2/a^2 - 2a^2p^2)``."""
    if not a > 0:
        raise ParameterError(f"a must be > 0, got {a}")
    return WignerFunction(
        lambda x, p: TWO_OVER_PI * np.exp(-2 * (x / a) ** 2 - 2 * (a * p) ** 2),
        (-7 * a, 7 * a, -7 / a, 7 / a),
        f"sqvac(a={a:g})",
    )


def wigner_squeezed_photon(a=1.0):
    """Single photon squeezed so that ``X -> a X``, ``P -> P/a``."""
    if not a > 0:
        raise ParameterError(f"a must be > 0, got {a}")

    def f(x, p):
        r2 = (x / a) ** 2 + (a * p) ** 2
        return TWO_OVER_PI * np.exp(-2 * r2) * (4 * r2 - 1)

    return WignerFunction(f, (-7 * a, 7 * a, -7 / a, 7 / a), f"photon(a={a:g})")


def wigner_single_photon():
    return wigner_squeezed_photon(1.0)


def wigner_cat(x0, a=1.0):
    """Even cat ``|alpha> + |-alpha>`` with ``alpha = x0``, pre-squeezed by ``a``.

    Coherent components sit at ``x = +-x0/a``; fringes ``cos(4 x0 p / a)``
    run along ``p`` under the envelope ``exp(-2p^2/a^2)``.
    """
    if not (x0 >= 0 and math.isfinite(x0)):
        raise ParameterError(f"x0 must be >= 0, got {x0}")
    if not a > 0:
        raise ParameterError(f"a must be > 0, got {a}")
    norm = 1.0 / (math.pi * (1.0 + math.exp(-2 * x0 * x0)))

    def f(x, p):
        env = np.exp(-2 * (p / a) ** 2)
        peaks = np.exp(-2 * (a * x - x0) ** 2) + np.exp(-2 * (a * x + x0) ** 2)
        fringe = 2 * np.exp(-2 * (a * x) ** 2) * np.cos(4 * x0 * p / a)
        return norm * env * (peaks + fringe)

    hx, hp = (x0 + 5.5) / a, 5.5 * a
    return WignerFunction(f, (-hx, hx, -hp, hp), f"cat(x0={x0:g},a={a:g})")


# --- closed forms -----------------------------------------------------------


def _atom_support(params, shift=0.0):
    hp = 7.0 * params.d / params.a + shift
    return (-6.0, 6.0, -hp, hp)


def photon_success_rate(params):
    p = params
    be, D = p.B_eff, p.D
    return float(
        erf(SQRT2 * be / D) - math.sqrt(2 / math.pi) * 2 * p.a ** 2 * be / D ** 3 * math.exp(-2 * be * be / D ** 2)
    )


def _photon_unnormalized(params):
    p = params
    a, k, d, A, be = p.a, p.kappa, p.d, p.A, p.B_eff
    c1 = a ** 3 / (math.pi * d ** 5)
    c2 = 2 * SQRT2 * a ** 3 / (math.pi ** 1.5 * A ** 3 * d)

    def q(x, pp):
        gauss = np.exp(-2 * x * x - 2 * (a * pp / d) ** 2)
        lo, hi = be - k * x, be + k * x
        window = erf(SQRT2 * lo / A) + erf(SQRT2 * hi / A)
        # cosh/sinh boundary terms folded into two bounded exponentials
        edge = lo * np.exp(-2 * (lo / A) ** 2) + hi * np.exp(-2 * (hi / A) ** 2)
        return gauss * (c1 * (d * d + 4 * k * k * pp * pp) * window - c2 * edge)

    return q


def cat_success_rate(params):
    p = params
    be, D, a, x0 = p.B_eff, p.D, p.a, p.x0
    z = SQRT2 * (be + 1j * x0 * a) / D
    # the conjugate pair is summed explicitly so a lost cancellation is visible
    pair = scaled_erf(z, -2 * x0 * x0) + scaled_erf(np.conj(z), -2 * x0 * x0)
    if abs(pair.imag) > 1e-8 * max(1.0, abs(pair.real)):
        raise NumericalError(f"complex erf lost cancellation: residual {pair.imag:.2e}")
    fringe = 0.5 * float(pair.real)
    s = (erf(SQRT2 * be / D) + fringe) / (1.0 + math.exp(-2 * x0 * x0))
    return float(s)


def _cat_unnormalized(params):
    """Cat upload in the physical frame (fringes along the measured x)."""
    p = params
    a, k, d, A, be, x0 = p.a, p.kappa, p.d, p.A, p.B_eff, p.x0
    pref = (a / d) / (math.pi * (1.0 + math.exp(-2 * x0 * x0)))
    shift = k * x0

    def q(x, pp):
        lo, hi = be - k * x, be + k * x
        window = erf(SQRT2 * lo / A) + erf(SQRT2 * hi / A)
        peaks = 0.5 * (np.exp(-2 * ((a * pp + shift) / d) ** 2) + np.exp(-2 * ((a * pp - shift) / d) ** 2))
        z1 = SQRT2 * (lo + 1j * x0 * a) / A
        z2 = SQRT2 * (hi + 1j * x0 * a) / A
        fringe = np.real(scaled_erf(z1, -2 * x0 * x0) + scaled_erf(z2, -2 * x0 * x0))
        return pref * np.exp(-2 * x * x) * (peaks * window + np.exp(-2 * (a * pp / d) ** 2) * fringe)

    return q


def post_correction(W, params):
    """Ideal squeezer undoing the upload's squeezing (physical frame)."""
    r = params.d / params.a
    return W.squeezed(1.0 / r, r)


def closed_form_photon_state(params, post_correct=False):
    """Uploaded squeezed photon as a :class:`WignerFunction` plus ``S``."""
    s = photon_success_rate(params)
    if not s > 1e-300:
        raise NumericalError(f"success rate {s} underflows")
    q = _photon_unnormalized(params)
    W = WignerFunction(lambda x, p: q(x, p) / s, _atom_support(params), "photon upload")
    if post_correct:
        W = post_correction(W, params)
    return W, s


def closed_form_photon_upload(params, post_correct=False):
    """Closed-form upload of the squeezed photon.

    Returns ``(W, UploadReport)`` where the report's ``F`` is the fidelity
    with the unsqueezed single photon.
    """
    W, s = closed_form_photon_state(params, post_correct)
    F = fidelity(W, wigner_single_photon())
    N = negativity(W)
    return W, UploadReport(s, F, N, params, 0.0, post_correct)


def closed_form_cat_state(params, post_correct=False, frame="display"):
    """Uploaded cat state; ``frame`` is ``"display"`` (fringes along p) or ``"physical"``."""
    s = cat_success_rate(params)
    if not s > 1e-300:
        raise NumericalError(f"success rate {s} underflows")
    q = _cat_unnormalized(params)
    shift = params.kappa * params.x0 / params.a
    W = WignerFunction(lambda x, p: q(x, p) / s, _atom_support(params, shift), "cat upload")
    if post_correct:
        W = post_correction(W, params)
    if frame == "display":
        W = W.quarter_turn()
    elif frame != "physical":
        raise ParameterError(f"unknown frame {frame!r}")
    return W, s


def closed_form_cat_upload(params, post_correct=False):
    """Closed-form upload of the pre-squeezed cat (display frame).

    ``F`` is the fidelity with an unsqueezed cat of the reduced amplitude
    ``x0' = kappa x0 / d``.
    """
    W, s = closed_form_cat_state(params, post_correct)
    target = wigner_cat(params.x0_prime, 1.0)
    F = fidelity(W, target)
    return W, UploadReport(s, F, negativity(W), params, params.x0_prime, post_correct)


def closed_form_vacuum_state(params):
    """Squeezed vacuum ``(a)`` uploaded; the ``x0 = 0`` cat in the physical frame."""
    return closed_form_cat_state(PostSelectParams(params.kappa, params.B, params.a, 0.0, params.eta),
                                 frame="physical")


# --- generic numerical conditioning ---------------------------------------


class _ConditionedField:
    """Atomic Wigner function after coupling and windowed homodyne, by quadrature.

    ``Q(x, p) = int dy acc(y) int dt W_L(y - k x, t) W_A(x, p + k t)`` with
    the atom starting in vacuum.  ``acc`` is the window indicator, smeared by
    detector inefficiency.
    """

    def __init__(self, light, kappa, B, eta=1.0, tol=1e-8, order=16, max_level=9):
        self.light = light
        self.kappa = float(kappa)
        self.B = float(B)
        self.eta = float(eta)
        self.tol = tol
        self.order = order
        self.max_level = max_level
        if eta >= 1.0:
            self.y_range = (-self.B, self.B)
        else:
            spread = 8.0 * math.sqrt(1.0 - eta) / 2.0
            half = (self.B + spread) / math.sqrt(eta)
            self.y_range = (-half, half)
        self.t_range = tuple(light.support[2:])
        self._level = 0
        self.S, self.S_error = self._success_rate()
        if not self.S > 1e-14:
            raise NumericalError(f"success rate {self.S:.3e} is below the noise floor")

    def acceptance(self, y):
        if self.eta >= 1.0:
            return np.ones_like(y)
        se, sr = math.sqrt(self.eta), math.sqrt(1.0 - self.eta)
        return 0.5 * (erf(SQRT2 * (self.B - se * y) / sr) + erf(SQRT2 * (self.B + se * y) / sr))

    def _rules(self, level):
        y, wy = quadrature.composite_rule(*self.y_range, 2 ** level, self.order)
        t, wt = quadrature.composite_rule(*self.t_range, 4 * 2 ** level, self.order)
        return y, wy * self.acceptance(y), t, wt

    def _light_marginal(self, s):
        t0, t1 = self.t_range
        out = np.empty(len(s))
        step = 20000
        for i in range(0, len(s), step):
            si = s[i:i + step]
            out[i:i + step], _ = quadrature.integrate(
                lambda t: self.light(si[:, None], t[None, :]), t0, t1, atol=1e-15, rtol=1e-12, order=self.order, panels=4
            )
        return out

    def _success_rate(self):
        """``S = int dy acc(y) int dx m_A(x) m_L(y - k x)`` with x-marginals m."""
        k = self.kappa

        def inner(y):
            def over_x(x):
                s = (y[:, None] - k * x[None, :]).ravel()
                ml = self._light_marginal(s).reshape(len(y), len(x))
                return ml * (math.sqrt(TWO_OVER_PI) * np.exp(-2 * x * x))[None, :]

            val, _ = quadrature.integrate(over_x, -6.0, 6.0, atol=1e-15, rtol=1e-12, order=self.order, panels=4)
            return val * self.acceptance(y)

        try:
            val, err = quadrature.integrate(inner, *self.y_range, atol=1e-15, rtol=1e-12,
                                            order=self.order, max_panels=256)
        except ConvergenceError as exc:
            raise ConvergenceError("success-rate quadrature did not converge", exc.estimate) from exc
        return float(val), float(err)

    def _q(self, x, p, level):
        y, wy, t, wt = self._rules(level)
        k = self.kappa
        ux, inv = np.unique(x, return_inverse=True)
        out = np.empty(len(x))
        chunk = max(1, 2_000_000 // (len(y) * len(t)))
        G = np.empty((len(ux), len(t)))
        for i in range(0, len(ux), chunk):
            u = ux[i:i + chunk]
            wl = self.light((y[None, :, None] - k * u[:, None, None]), t[None, None, :])
            G[i:i + chunk] = np.einsum("j,ijk->ik", wy, wl)
        step = max(1, 2_000_000 // len(t))
        for i in range(0, len(x), step):
            xs, ps, gi = x[i:i + step], p[i:i + step], G[inv[i:i + step]]
            wa = TWO_OVER_PI * np.exp(-2 * xs[:, None] ** 2 - 2 * (ps[:, None] + k * t[None, :]) ** 2)
            out[i:i + step] = np.sum(wa * gi * wt[None, :], axis=1)
        return out

    def __call__(self, x, p):
        x = np.asarray(x, float).ravel()
        p = np.asarray(p, float).ravel()
        if x.size == 0:
            return np.empty(0)
        level = max(0, self._level - 1)
        prev = self._q(x, p, level)
        err = np.inf
        while level + 1 < self.max_level:
            level += 1
            cur = self._q(x, p, level)
            err = float(np.max(np.abs(cur - prev))) / self.S
            if err <= self.tol:
                self._level = max(self._level, level)
                return cur / self.S
            prev = cur
        raise ConvergenceError(f"conditioning quadrature reached error {err:.2e}", estimate=err)


def postselect_upload_numeric(light, kappa, B, eta=1.0, tol=1e-8):
    """Upload an arbitrary light Wigner function by direct quadrature.

    Returns ``(W_A, S)`` in the physical frame.
    """
    if not (kappa > 0 and B > 0):
        raise ParameterError("kappa and B must be > 0")
    if not (0 < eta <= 1):
        raise ParameterError(f"eta must lie in (0, 1], got {eta}")
    fieldfn = _ConditionedField(light, kappa, B, eta, tol)
    lx = max(abs(light.support[0]), abs(light.support[1]))
    hp = 6.0 + kappa * max(abs(light.support[2]), abs(light.support[3]))
    W = WignerFunction(fieldfn, (-min(6.0, 6.0 + lx), min(6.0, 6.0 + lx), -hp, hp), "numeric upload")
    return W, fieldfn.S


def gaussian_window_upload(light, kappa, B, nodes=64):
    """Windowed upload of a Gaussian light state via exact Gaussian conditioning.

    ``light`` is a single-mode :class:`GaussianState` (any convention).  The
    conditional atom state is Gaussian for each sharp outcome; the window
    average is done by Gauss-Legendre over the outcome.  Returns ``(W, S)``.
    """
    light = convention_convert(light, Convention.QUARTER)
    light = GaussianState(("L",), light.mean, light.cov, Convention.QUARTER)
    joint = light.tensor(GaussianState.vacuum(("A",), Convention.QUARTER))
    joint = apply_map(joint, qnd_map(QNDKind.TYPE2, kappa))
    ys, ws = quadrature.composite_rule(-B, B, 1, nodes)
    comps = []
    for y, w in zip(ys, ws):
        cond, pdf = homodyne_condition(joint, "L", "X", y)
        comps.append((w * pdf, cond.mean, np.linalg.inv(cond.cov), np.linalg.det(cond.cov)))
    s = sum(c[0] for c in comps)

    def f(x, p):
        z = np.stack([x, p], axis=-1)
        out = np.zeros(np.shape(x))
        for weight, mu, icov, det in comps:
            dz = z - mu
            quad = np.einsum("...i,ij,...j->...", dz, icov, dz)
            out = out + weight * np.exp(-0.5 * quad) / (2 * math.pi * math.sqrt(det))
        return out / s

    return WignerFunction(f, (-6.0, 6.0, -6.0, 6.0), "gaussian upload"), float(s)


# --- metrics ----------------------------------------------------------------


def _union(a, b):
    return (min(a[0], b[0]), max(a[1], b[1]), min(a[2], b[2]), max(a[3], b[3]))


def fidelity(W, target, atol=1e-10):
    """``pi * int int W W_target`` (overlap with a pure target)."""
    rect = _union(W.support, target.support)
    value, _ = quadrature.integrate_2d(lambda x, p: W(x, p) * target(x, p), rect, atol=atol / math.pi, order=24)
    return math.pi * value


def negativity(W):
    """Value of the Wigner function at the phase-space origin."""
    return float(np.ravel(W(0.0, 0.0))[0])


class Marginal:
    """``P(p) = int W(x, p) dx`` evaluated by quadrature over the x-support."""

    def __init__(self, W, atol=1e-11):
        self.W = W
        self.atol = atol

    def __call__(self, p):
        p = np.atleast_1d(np.asarray(p, float))
        x0, x1 = self.W.support[:2]
        val, _ = quadrature.integrate(lambda x: self.W(x[None, :], p[:, None]), x0, x1,
                                      atol=self.atol, order=24, panels=2)
        return val


def marginal_p(W):
    return Marginal(W)


def approx_marginal(params, form="SMALL_B"):
    """Small-window approximations of the uploaded cat's ``p`` marginal.

    ``SMALL_B`` is written with the input amplitude ``x0``; ``REDUCED_AMPLITUDE``
    uses the uploaded amplitude ``x0' = kappa x0 / d``.  Both describe the
    state without post-correction, in the display frame.
    """
    a, d = params.a, params.d
    if form == "SMALL_B":
        freq = 4 * params.x0 * params.kappa / a
        damp = math.exp(-2 * (params.kappa * params.x0 / d) ** 2)
    elif form == "REDUCED_AMPLITUDE":
        xp = params.x0_prime
        freq = 4 * d * xp / a
        damp = math.exp(-2 * xp * xp)
    else:
        raise ParameterError(f"unknown approximation {form!r}")
    pref = (d / a) * math.sqrt(2 / math.pi) / (1.0 + damp)

    def f(p):
        p = np.asarray(p, float)
        return pref * np.exp(-2 * (d * p / a) ** 2) * (1.0 + np.cos(freq * p))

    return f


def fringe_period(params):
    """Fringe period of the uploaded cat's ``p`` marginal."""
    return math.pi * params.a / (2 * params.d * params.x0_prime)


# --- loss -------------------------------------------------------------------

_GH_X, _GH_W = np.polynomial.hermite.hermgauss(64)


def apply_loss(W, eta):
    """Pure loss of transmissivity ``eta`` (beam splitter with vacuum)."""
    if not (0 < eta <= 1):
        raise ParameterError(f"eta must lie in (0, 1], got {eta}")
    if eta == 1.0:
        return W
    se = math.sqrt(eta)
    x0, x1, p0, p1 = W.support
    support = (se * x0 - 4, se * x1 + 4, se * p0 - 4, se * p1 + 4)

    if eta > 0.5:
        # narrow kernel: Gauss-Hermite over the added vacuum noise
        s = math.sqrt((1 - eta) / 2)
        hx = s * _GH_X
        hw = _GH_W / math.sqrt(math.pi)

        def f(x, p):
            xs = (x[:, None, None] - hx[None, :, None]) / se
            ps = (p[:, None, None] - hx[None, None, :]) / se
            vals = W(xs, ps)
            return np.einsum("ijk,j,k->i", vals, hw, hw) / eta

    else:
        # wide kernel: integrate the input over its own support
        var = (1 - eta) / 4
        kern = 1.0 / (2 * math.pi * var)
        us, wu = quadrature.composite_rule(x0, x1, 16, 16)
        vs, wv = quadrature.composite_rule(p0, p1, 16, 16)
        wvals = W(us[:, None], vs[None, :]) * wu[:, None] * wv[None, :]

        def f(x, p):
            out = np.empty(len(x))
            for i in range(0, len(x), 64):
                gx = np.exp(-((x[i:i + 64, None] - se * us[None, :]) ** 2) / (2 * var))
                gp = np.exp(-((p[i:i + 64, None] - se * vs[None, :]) ** 2) / (2 * var))
                out[i:i + 64] = kern * np.einsum("iu,uv,iv->i", gx, wvals, gp)
            return out

    return WignerFunction(f, support, f"{W.label} loss({eta:g})")


# --- expansions -------------------------------------------------------------


@dataclass(frozen=True)
class Asymptotics:
    F_expansion: float
    N_expansion: float
    P_S_leading: float
    F_max: float
    F_coefficient: float
    N_coefficient: float


def fidelity_max(a, kappa):
    """Fidelity with the single photon as ``B -> 0``, no post-correction."""
    return 8 * a ** 3 * (a * a + kappa * kappa) ** 1.5 / (2 * a * a + kappa * kappa) ** 3


def asymptotics(params):
    """Leading small-``B`` behaviour of fidelity, negativity and success rate."""
    k, a, B = params.kappa, params.a, params.B
    if B * B / (k * k) > 0.1:
        warnings.warn(f"B^2/kappa^2 = {B * B / (k * k):.3g} is outside the small-window regime",
                      RegimeWarning, stacklevel=2)
    cf = 4 / (3 * k * k) + k * k / (2 * a ** 4)
    cn = 16 / (3 * math.pi * k * k) + 4 * k * k / (math.pi * a ** 4)
    ps = 2 * SQRT2 * k * k / (math.sqrt(math.pi) * a ** 3) * B
    return Asymptotics(1 - cf * B * B, -2 / math.pi + cn * B * B, ps, fidelity_max(a, k), cf, cn)
