"""Real-argument Bessel and Hankel functions of orders 0 and 1.

Implemented in-repo so the scattering kernel is bit-reproducible across
platforms.  Small arguments (x < 8) use the classical power series; large
arguments use the modulus/phase decomposition with frozen Chebyshev tables
(see ``_bessel_tables``).  Also exposes the entire auxiliary series needed
by the kernel's singular/regular decomposition:

* ``j1_over_x(x)`` = J1(x)/x,
* ``y0_regular(x)`` = Y0(x) - (2/pi) log(x/2) J0(x),
* ``y1_regular_over_x(x)`` = (Y1(x) - (2/pi) log(x/2) J1(x) + 2/(pi x))/x,

all entire functions of x**2, finite at x = 0.

All functions accept scalars or numpy arrays and are vectorized.
"""

from __future__ import annotations

import numpy as np

from ._bessel_tables import P0, P1, XQ0, XQ1

__all__ = [
    "bessel_j0",
    "bessel_j1",
    "bessel_y0",
    "bessel_y1",
    "hankel1_0",
    "hankel1_1",
    "j1_over_x",
    "y0_regular",
    "y1_regular_over_x",
]

_SWITCH = 8.0
_EULER_GAMMA = 0.5772156649015328606
_TWO_OVER_PI = 2.0 / np.pi
# Number of power-series terms: at x=8 the J-series term (x^2/4)^k/(k!)^2
# drops below 1e-18 of the leading scale around k=30.
_NSERIES = 36

# Precomputed harmonic numbers H_0..H_{NSERIES+1}.
_HARMONIC = np.concatenate(([0.0], np.cumsum(1.0 / np.arange(1, _NSERIES + 2))))


def _clenshaw(coeffs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Evaluate a Chebyshev series at u in [-1, 1] (Clenshaw recurrence)."""
    b1 = np.zeros_like(u)
    b2 = np.zeros_like(u)
    for c in coeffs[:0:-1]:
        b1, b2 = 2.0 * u * b1 - b2 + c, b1
    return u * b1 - b2 + coeffs[0]


def _check_domain(x, allow_zero: bool):
    x = np.asarray(x, dtype=float)
    if allow_zero:
        if np.any(x < 0):
            raise ValueError("argument must be non-negative")
    else:
        if np.any(x <= 0):
            raise ValueError("argument must be positive")
    return x


def _series_sum(x2_over4: np.ndarray, term0: float, update) -> np.ndarray:
    """Sum an entire series sum_k a_k * (x^2/4)^k with a_{k} from `update`."""
    acc = np.full_like(x2_over4, term0)
    term = np.full_like(x2_over4, term0)
    for k in range(1, _NSERIES + 1):
        term = term * (-x2_over4) * update(k)
        acc = acc + term
    return acc


def _j0_series(x: np.ndarray) -> np.ndarray:
    q = 0.25 * x * x
    return _series_sum(q, 1.0, lambda k: 1.0 / (k * k))


def _j1_over_x_series(x: np.ndarray) -> np.ndarray:
    q = 0.25 * x * x
    return _series_sum(q, 0.5, lambda k: 1.0 / (k * (k + 1)))


def _y0_regular_series(x: np.ndarray) -> np.ndarray:
    # V0(x) = (2/pi) * (gamma*J0(x) + sum_{k>=1} (-1)^{k+1} H_k q^k/(k!)^2)
    q = 0.25 * x * x
    acc = np.zeros_like(q)
    term = np.ones_like(q)  # (-1)^{k+1} partial: track q^k/(k!)^2 with sign
    for k in range(1, _NSERIES + 1):
        term = term * q / (k * k)
        sign = 1.0 if (k % 2 == 1) else -1.0
        acc = acc + sign * _HARMONIC[k] * term
    return _TWO_OVER_PI * (_EULER_GAMMA * _j0_series(x) + acc)


def _y1_regular_over_x_series(x: np.ndarray) -> np.ndarray:
    # W1(x)/x with W1 = Y1 - (2/pi)log(x/2)J1 + 2/(pi x):
    # W1(x)/x = -(1/(2 pi)) sum_k (-1)^k (H_k + H_{k+1} - 2 gamma) q^k/(k!(k+1)!)
    q = 0.25 * x * x
    acc = np.zeros_like(q)
    term = np.ones_like(q)
    for k in range(0, _NSERIES + 1):
        if k > 0:
            term = term * q / (k * (k + 1))
        sign = 1.0 if (k % 2 == 0) else -1.0
        coef = _HARMONIC[k] + _HARMONIC[k + 1] - 2.0 * _EULER_GAMMA
        acc = acc + sign * coef * term
    return -acc / (2.0 * np.pi)


def _modulus_phase(x: np.ndarray, order: int):
    """P_n(x), Q_n(x), chi_n(x) and amplitude for x >= 8."""
    v = (8.0 / x) ** 2
    u = 2.0 * v - 1.0
    if order == 0:
        p = _clenshaw(P0, u)
        q = _clenshaw(XQ0, u) / x
    else:
        p = _clenshaw(P1, u)
        q = _clenshaw(XQ1, u) / x
    chi = x - (2 * order + 1) * np.pi / 4.0
    amp = np.sqrt(2.0 / (np.pi * x))
    return p, q, chi, amp


def _bessel_pair(x: np.ndarray, order: int):
    """(J_n, Y_n) for x > 0 via series/asymptotic split."""
    x = np.atleast_1d(x)
    j = np.empty_like(x)
    y = np.empty_like(x)
    small = x < _SWITCH
    if np.any(small):
        xs = x[small]
        logfac = _TWO_OVER_PI * np.log(0.5 * xs)
        if order == 0:
            j0 = _j0_series(xs)
            j[small] = j0
            y[small] = logfac * j0 + _y0_regular_series(xs)
        else:
            j1 = xs * _j1_over_x_series(xs)
            j[small] = j1
            y[small] = logfac * j1 + xs * _y1_regular_over_x_series(xs) - _TWO_OVER_PI / xs
    if np.any(~small):
        xl = x[~small]
        p, q, chi, amp = _modulus_phase(xl, order)
        c, s = np.cos(chi), np.sin(chi)
        j[~small] = amp * (p * c - q * s)
        y[~small] = amp * (p * s + q * c)
    return j, y


def _wrap_real(x, order: int, want: str, allow_zero: bool):
    xarr = _check_domain(x, allow_zero)
    scalar = xarr.ndim == 0
    xarr = np.atleast_1d(xarr)
    if allow_zero and np.any(xarr == 0):
        # J_n(0) is finite; handle exactly.
        out = np.empty_like(xarr)
        nz = xarr > 0
        out[~nz] = 1.0 if order == 0 else 0.0
        if np.any(nz):
            out[nz] = _bessel_pair(xarr[nz], order)[0]
        res = out
    else:
        pair = _bessel_pair(xarr, order)
        res = pair[0] if want == "j" else pair[1]
    return res[0] if scalar else res


def bessel_j0(x):
    """Bessel function J0 for x >= 0."""
    return _wrap_real(x, 0, "j", allow_zero=True)


def bessel_j1(x):
    """Bessel function J1 for x >= 0."""
    return _wrap_real(x, 1, "j", allow_zero=True)


def bessel_y0(x):
    """Bessel function Y0 for x > 0."""
    return _wrap_real(x, 0, "y", allow_zero=False)


def bessel_y1(x):
    """Bessel function Y1 for x > 0."""
    return _wrap_real(x, 1, "y", allow_zero=False)


def hankel1_0(x):
    """Hankel function H1^(1)... of order 0: J0(x) + i Y0(x), x > 0."""
    xarr = _check_domain(x, allow_zero=False)
    scalar = xarr.ndim == 0
    j, y = _bessel_pair(np.atleast_1d(xarr), 0)
    h = j + 1j * y
    return h[0] if scalar else h


def hankel1_1(x):
    """Hankel function of the first kind, order 1: J1(x) + i Y1(x), x > 0."""
    xarr = _check_domain(x, allow_zero=False)
    scalar = xarr.ndim == 0
    j, y = _bessel_pair(np.atleast_1d(xarr), 1)
    h = j + 1j * y
    return h[0] if scalar else h


def _wrap_entire(x, fun):
    xarr = _check_domain(x, allow_zero=True)
    scalar = xarr.ndim == 0
    res = fun(np.atleast_1d(xarr))
    return res[0] if scalar else res


def j1_over_x(x):
    """J1(x)/x, entire, equal to 1/2 at x = 0.  Valid for x < 8 by series,
    larger x by direct division."""

    def fun(xa):
        out = np.empty_like(xa)
        small = xa < _SWITCH
        out[small] = _j1_over_x_series(xa[small])
        if np.any(~small):
            out[~small] = _bessel_pair(xa[~small], 1)[0] / xa[~small]
        return out

    return _wrap_entire(x, fun)


def y0_regular(x):
    """Y0(x) - (2/pi) log(x/2) J0(x), entire in x**2."""

    def fun(xa):
        out = np.empty_like(xa)
        small = xa < _SWITCH
        out[small] = _y0_regular_series(xa[small])
        if np.any(~small):
            xl = xa[~small]
            j, y = _bessel_pair(xl, 0)
            out[~small] = y - _TWO_OVER_PI * np.log(0.5 * xl) * j
        return out

    return _wrap_entire(x, fun)


def y1_regular_over_x(x):
    """(Y1(x) - (2/pi) log(x/2) J1(x) + 2/(pi x)) / x, entire in x**2."""

    def fun(xa):
        out = np.empty_like(xa)
        small = xa < _SWITCH
        out[small] = _y1_regular_over_x_series(xa[small])
        if np.any(~small):
            xl = xa[~small]
            j, y = _bessel_pair(xl, 1)
            out[~small] = (y - _TWO_OVER_PI * np.log(0.5 * xl) * j + _TWO_OVER_PI / xl) / xl
        return out

    return _wrap_entire(x, fun)
