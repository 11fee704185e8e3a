"""Folded normal moments, the inverse of the folded mean, and helpers.

A folded normal variable is ``T = |R|`` with ``R ~ N(mu, sigma^2)``.  Every
function here broadcasts over numpy arrays and returns a plain ``float``
when all arguments are scalars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import NoConvergence, NonFinite, OutOfDomain, SigmaZero

SQRT2 = math.sqrt(2.0)
SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# below this |x| the ratio M(x) is replaced by its Taylor expansion
_M_SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class EvalAccuracy:
    """Numerical budgets for the special-function layer.

    ``phi_abs_tol`` documents the error budget assumed for the normal CDF
    (scipy's ``erfc`` is accurate to a few ulp, far inside 1e-12).
    """

    phi_abs_tol: float = 1e-12
    inverse_rel_tol: float = 1e-10
    max_iters: int = 200

    def __post_init__(self):
        if not (self.phi_abs_tol > 0 and self.inverse_rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


DEFAULT_ACCURACY = EvalAccuracy()


@dataclass(frozen=True)
class FoldedParams:
    mu: float
    sigma: float

    def __post_init__(self):
        _check_finite(self.mu, self.sigma)
        if self.sigma < 0:
            raise OutOfDomain(f"sigma must be >= 0, got {self.sigma}")

    def mean(self) -> float:
        return folded_mean(self.mu, self.sigma)

    def var(self) -> float:
        return folded_var(self.mu, self.sigma)

    def square_var(self) -> float:
        return folded_square_var(self.mu, self.sigma)


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFinite("non-finite argument")


def _check_sigma(sigma):
    if np.any(np.asarray(sigma) < 0):
        raise OutOfDomain("sigma must be >= 0")


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def norm_cdf(x):
    """Standard normal CDF, evaluated through ``erfc`` for tail accuracy."""
    return _out(0.5 * special.erfc(-np.asarray(x, dtype=float) / SQRT2))


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    return _out(INV_SQRT_2PI * np.exp(-0.5 * x * x))


def _mean_gap(a, sigma):
    """Return ``a - f(a, sigma)`` for ``a >= 0``, ``sigma > 0``.

    ``a*erfc(a/(sigma*sqrt2)) - sigma*sqrt(2/pi)*exp(-a^2/(2 sigma^2))``; both
    terms decay together, so the difference keeps relative accuracy where
    ``f`` itself is indistinguishable from ``a``.
    """
    # tiny sigma sends x to inf; both terms then vanish, which is the right limit
    with np.errstate(over="ignore"):
        x = a / sigma
        return a * special.erfc(x / SQRT2) - sigma * SQRT_2_OVER_PI * np.exp(-0.5 * x * x)


def _mean_and_gap(mu, sigma):
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    a = np.abs(mu)
    pos = sigma > 0
    safe = np.where(pos, sigma, 1.0)
    gap = np.where(pos, _mean_gap(a, safe), 0.0)
    return a - gap, a, gap


def folded_mean(mu, sigma):
    """Mean ``f(mu, sigma) = E|N(mu, sigma^2)|``; equals ``|mu|`` at ``sigma = 0``."""
    _check_finite(mu, sigma)
    _check_sigma(sigma)
    f, _, _ = _mean_and_gap(mu, sigma)
    return _out(f)


def folded_var(mu, sigma):
    """Variance ``g = mu^2 + sigma^2 - f^2``, computed without cancellation."""
    _check_finite(mu, sigma)
    _check_sigma(sigma)
    sigma = np.asarray(sigma, dtype=float)
    _, a, gap = _mean_and_gap(mu, sigma)
    # mu^2 - f^2 = (a - f)(a + f) = gap * (2a - gap)
    g = sigma * sigma + gap * (2.0 * a - gap)
    return _out(np.clip(g, 0.0, sigma * sigma))


def folded_square_var(mu, sigma):
    """``Var(T^2) = 4 mu^2 sigma^2 + 2 sigma^4`` (fourth minus squared second moment)."""
    _check_finite(mu, sigma)
    _check_sigma(sigma)
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    return _out(4.0 * mu**2 * sigma**2 + 2.0 * sigma**4)


def folded_mean_dmu(mu, sigma):
    """Partial derivative of the folded mean in ``mu``: ``2 Phi(mu/sigma) - 1``."""
    _check_finite(mu, sigma)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0):
        raise SigmaZero("derivative undefined at sigma = 0")
    return _out(special.erf(np.asarray(mu, dtype=float) / (sigma * SQRT2)))


def folded_mean_dsigma(mu, sigma):
    """Partial derivative of the folded mean in ``sigma``: ``sqrt(2/pi) exp(-mu^2/(2 sigma^2))``."""
    _check_finite(mu, sigma)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0):
        raise SigmaZero("derivative undefined at sigma = 0")
    x = np.asarray(mu, dtype=float) / sigma
    return _out(SQRT_2_OVER_PI * np.exp(-0.5 * x * x))


def inverse_partials(mu, sigma):
    """Partials of ``mu = f^{-1}(u, sigma)`` expressed at the solution ``mu``.

    Returns ``(d mu/d u, d mu/d sigma)`` from the inverse function theorem.
    """
    slope = folded_mean_dmu(mu, sigma)
    return _out(1.0 / np.asarray(slope)), _out(-np.asarray(folded_mean_dsigma(mu, sigma)) / slope)


def inverse_lipschitz(sigma: float, eta: float) -> float:
    """Lipschitz constant of ``u -> f^{-1}(u, sigma)`` on ``u >= f(eta, sigma)``."""
    if sigma == 0:
        return 1.0
    return 1.0 / float(folded_mean_dmu(eta, sigma))


def _bisect_inverse(u, sigma, eta, acc):
    lo = np.maximum(eta, u - sigma)
    hi = u.copy()
    width_tol = acc.inverse_rel_tol * np.maximum(1.0, u)
    active = hi - lo > width_tol
    for _ in range(acc.max_iters):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        l, h = lo[idx], hi[idx]
        mid = 0.5 * (l + h)
        f_mid, _, _ = _mean_and_gap(mid, sigma)
        below = f_mid < u[idx]
        lo[idx] = np.where(below, mid, l)
        hi[idx] = np.where(below, h, mid)
        stalled = (mid == l) | (mid == h)
        active[idx] = (hi[idx] - lo[idx] > width_tol[idx]) & ~stalled
    else:
        if active.any():
            raise NoConvergence(
                f"inverse folded mean did not converge in {acc.max_iters} iterations"
            )
    return 0.5 * (lo + hi)


def folded_mean_inverse(u, sigma: float, eta: float, acc: EvalAccuracy = DEFAULT_ACCURACY):
    """Solve ``f(mu, sigma) = u`` for ``mu >= eta`` by bisection.

    The bracket ``[max(eta, u - sigma), u]`` always contains the root
    because ``f(mu) >= mu`` and ``f(mu)^2 <= mu^2 + sigma^2``.  ``u`` may be
    an array; each entry must satisfy ``u >= f(eta, sigma)`` up to the
    tolerance (callers clamp first).  At ``sigma = 0`` the inverse is the
    identity.
    """
    _check_finite(u, sigma, eta)
    if sigma < 0:
        raise OutOfDomain("sigma must be >= 0")
    if eta <= 0:
        raise OutOfDomain("eta must be > 0")
    scalar = np.ndim(u) == 0
    u = np.array(u, dtype=float, ndmin=1)
    floor = eta if sigma == 0 else folded_mean(eta, sigma)
    slack = acc.inverse_rel_tol * np.maximum(1.0, u)
    if np.any(u < floor - slack):
        bad = float(u[np.argmin(u - floor)])
        raise OutOfDomain(f"u={bad!r} is below f(eta, sigma)={floor!r}")
    u = np.maximum(u, floor)
    if sigma == 0:
        mu = u
    else:
        mu = _bisect_inverse(u, float(sigma), float(eta), acc)
    return float(mu[0]) if scalar else mu


def normal_ratio(x):
    """``M(x) = x phi(x) / (2 Phi(x) - 1)`` for ``x >= 0``, with ``M(0) = 1/2``.

    Decreasing from 1/2 towards 0.
    """
    x = np.asarray(x, dtype=float)
    small = x < _M_SERIES_CUTOFF
    xs = np.where(small, 1.0, x)
    direct = xs * INV_SQRT_2PI * np.exp(-0.5 * xs * xs) / special.erf(xs / SQRT2)
    series = 0.5 - x * x / 6.0
    return _out(np.where(small, series, direct))


def j_sigma(sigma, eta: float):
    """``J(sigma) = sigma (1/2 - M(eta/sigma))``, zero at ``sigma = 0``.

    Lower bound on the slope of the second-moment map used by the estimator.
    """
    _check_finite(sigma, eta)
    _check_sigma(sigma)
    if eta <= 0:
        raise OutOfDomain("eta must be > 0")
    sigma = np.asarray(sigma, dtype=float)
    pos = sigma > 0
    safe = np.where(pos, sigma, 1.0)
    val = np.where(pos, safe * (0.5 - np.asarray(normal_ratio(eta / safe))), 0.0)
    return _out(val)


def j_sigma_interval_floor(sigma_lo: float, sigma_hi: float, eta: float) -> float:
    """Lower bound for ``min J`` over ``[sigma_lo, sigma_hi]``: ``sigma_lo (1/2 - M(eta/sigma_hi))``."""
    if not 0 < sigma_lo <= sigma_hi:
        raise OutOfDomain("need 0 < sigma_lo <= sigma_hi")
    return sigma_lo * (0.5 - float(normal_ratio(eta / sigma_hi)))
