"""Trilogarithm Li_3 and zeta(3) for the asymptotic force formulas."""

import math

import numpy as np
from scipy.special import zeta

ZETA3 = float(zeta(3.0))

_SERIES_TOL = 1e-17


def _li3_series(x):
    # direct power series, |x| <= 0.5
    total = np.zeros_like(x)
    term = x.copy()
    m = 1
    while True:
        contrib = term / m**3
        total += contrib
        if np.all(np.abs(contrib) <= _SERIES_TOL * np.maximum(np.abs(total), 1e-300)):
            return total
        m += 1
        term = term * x


def _li3_near_one(x):
    # expansion in mu = ln x about x = 1, valid for |mu| < 2 pi
    mu = np.log(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = np.where(mu < 0, mu * mu / 2 * (1.5 - np.log(-mu)), 0.0)
    total = ZETA3 + (math.pi**2 / 6) * mu + log_term
    # terms scale like (mu / 2 pi)**k; |mu| <= ln 2 here, 30 terms is ample
    power = mu**2 / 2.0
    for k in range(3, 31):
        power = power * mu / k
        total = total + float(zeta(3.0 - k)) * power
    return total


def polylog3(x):
    """Li_3(x) = sum_{m>=1} x**m / m**3 for real x <= 1."""
    x = np.asarray(x, dtype=float)
    if np.any(x > 1) or np.any(np.isnan(x)):
        raise ValueError("polylog3 is implemented for real x <= 1")
    if np.any(x < -1):
        raise ValueError("polylog3 is implemented for x >= -1")
    flat = np.atleast_1d(x).ravel()
    out = np.empty_like(flat)
    small = np.abs(flat) <= 0.5
    big = flat > 0.5
    neg = flat < -0.5
    if small.any():
        out[small] = _li3_series(flat[small])
    if big.any():
        out[big] = _li3_near_one(flat[big])
    if neg.any():
        # Li3(x) + Li3(-x) = Li3(x^2) / 4
        xn = flat[neg]
        out[neg] = _li3_near_one(xn * xn) / 4 - _li3_near_one(-xn)
    out = out.reshape(np.shape(x))
    return out if out.ndim else float(out)
