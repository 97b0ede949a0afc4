"""Error function of complex argument, with an explicit exponential scale.

The cat-state formulas need ``exp(s) * erf(z)`` where ``Im z`` is large and
``s`` is a large negative number that cancels the growth of ``erf``.  Both
factors overflow on their own, so the product is assembled from the Faddeeva
function ``w(z) = exp(-z**2) erfc(-i z)`` (scipy's ``wofz``, relative accuracy
about 1e-13 over the whole plane).
"""

import numpy as np
from scipy.special import erf, wofz

_SMALL = 0.5


def scaled_erf(z, log_scale=0.0):
    """Return ``exp(log_scale) * erf(z)`` without intermediate overflow."""
    z = np.asarray(z, dtype=complex)
    log_scale = np.asarray(log_scale, dtype=float)
    z, log_scale = np.broadcast_arrays(z, log_scale)
    out = np.empty(z.shape, dtype=complex)

    small = np.abs(z) < _SMALL
    if np.any(small):
        out[small] = np.exp(log_scale[small]) * erf(z[small])

    big = ~small
    if np.any(big):
        zb = z[big]
        sb = log_scale[big]
        # erf is odd; reflect so that w() is evaluated in the upper half plane
        sign = np.where(zb.real < 0.0, -1.0, 1.0)
        zr = sign * zb
        out[big] = sign * (np.exp(sb) - np.exp(sb - zr * zr) * wofz(1j * zr))
    return out if out.ndim else out[()]


def erf_complex(z):
    """Plain complex error function (may overflow for very large ``|Im z|``)."""
    return scaled_erf(z, 0.0)
