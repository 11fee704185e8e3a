"""The ASCIFIT estimator for sign-corrupted isotonic regression.

Pipeline on responses ``r``:

1. ``t = |r|`` and ``t_hat = pava(t)``; ``t_hat`` estimates the folded
   means ``f(mu_i, sigma)``.
2. ``sigma_hat`` solves ``G(sigma) = mean(t^2)`` where
   ``G(sigma) = sigma^2 + mean(f^{-1}(max(t_hat, f(eta, sigma)), sigma)^2)``.
   ``G`` is increasing, so bisection on ``[0, sqrt(mean(t^2))]`` suffices.
3. ``mu_hat = f^{-1}(max(t_hat, f(eta, sigma_hat)), sigma_hat)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import EmptyInput, LengthMismatch, NonFinite
from .folded_normal import DEFAULT_ACCURACY, EvalAccuracy, folded_mean, folded_mean_inverse
from .isotonic import pava

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EstimatorConfig:
    eta: float
    sigma_bracket_floor: float = 0.0
    sigma_bracket_ceiling: Optional[float] = None
    root_tol: float = 1e-9
    root_max_iters: int = 200
    accuracy: EvalAccuracy = field(default_factory=lambda: DEFAULT_ACCURACY)

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if not self.root_tol > 0:
            raise ValueError("root_tol must be > 0")
        if self.root_max_iters < 1:
            raise ValueError("root_max_iters must be >= 1")
        if self.sigma_bracket_floor < 0:
            raise ValueError("sigma_bracket_floor must be >= 0")
        ceil = self.sigma_bracket_ceiling
        if ceil is not None and ceil < self.sigma_bracket_floor:
            raise ValueError("sigma_bracket_ceiling must be >= sigma_bracket_floor")


@dataclass(frozen=True)
class RootDiagnostics:
    g_at_zero: float
    g_at_ceiling: float
    iterations: int
    bracket_valid: bool
    residual: float
    converged: bool = True


@dataclass(frozen=True)
class FitResult:
    t: np.ndarray
    t_hat: np.ndarray
    sigma_hat: float
    mu_hat: np.ndarray
    mu_naive: np.ndarray
    diagnostics: RootDiagnostics


@dataclass(frozen=True)
class RateBoundConfig:
    """Constants for the risk-rate diagnostic; C2 is unknown, 1 by convention."""

    c2: float = 1.0
    delta: float = 20.0
    gamma: float = 10.0

    def __post_init__(self):
        if not self.c2 > 0:
            raise ValueError("c2 must be > 0")
        if not (self.delta > 1 and self.gamma > 1):
            raise ValueError("delta and gamma must exceed 1")

    @property
    def coverage(self) -> float:
        return 1.0 - 1.0 / self.delta - 2.0 / self.gamma**2


def preprocess(r) -> np.ndarray:
    """Absolute values of the responses; discards the adversary's signs."""
    r = np.asarray(r, dtype=float).ravel()
    if r.size == 0:
        raise EmptyInput("no responses")
    if not np.all(np.isfinite(r)):
        raise NonFinite("responses contain NaN or inf")
    return np.abs(r)


def _levels(t_hat):
    levels, counts = np.unique(np.asarray(t_hat, dtype=float), return_counts=True)
    return levels, counts / counts.sum()


def _inverted_levels(sigma, levels, cfg):
    floor = cfg.eta if sigma == 0 else folded_mean(cfg.eta, sigma)
    return folded_mean_inverse(np.maximum(levels, floor), sigma, cfg.eta, cfg.accuracy)


def _g_levels(sigma, levels, weights, cfg):
    mu = _inverted_levels(sigma, levels, cfg)
    return sigma * sigma + float(np.dot(weights, mu * mu))


def big_g(sigma: float, t_hat, cfg: EstimatorConfig) -> float:
    """Model-implied second moment ``G(sigma)`` for a fitted sequence ``t_hat``."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    levels, weights = _levels(t_hat)
    return _g_levels(float(sigma), levels, weights, cfg)


def _clamp_sigma(sigma, cfg):
    sigma = max(sigma, cfg.sigma_bracket_floor)
    if cfg.sigma_bracket_ceiling is not None:
        sigma = min(sigma, cfg.sigma_bracket_ceiling)
    return sigma


def solve_sigma(t, t_hat, cfg: EstimatorConfig) -> tuple[float, RootDiagnostics]:
    """Second-moment matching for the noise scale.

    Bisects ``G(sigma) - mean(t^2)`` on ``[0, sqrt(mean(t^2))]``.  When
    ``G(0)`` already exceeds the target there is no sign change; the
    nearest endpoint is returned with ``bracket_valid=False``.  An optional
    ``[floor, ceiling]`` clamp from the config is applied last.
    """
    t = np.asarray(t, dtype=float).ravel()
    t_hat = np.asarray(t_hat, dtype=float).ravel()
    if t.size == 0:
        raise EmptyInput("no observations")
    if t.size != t_hat.size:
        raise LengthMismatch(f"t has {t.size} entries, t_hat has {t_hat.size}")

    levels, weights = _levels(t_hat)

    def g(s):
        return _g_levels(s, levels, weights, cfg)

    target = float(np.mean(t * t))
    ceiling = math.sqrt(target)
    g0 = g(0.0)
    g_top = g(ceiling)

    iterations = 0
    converged = True
    if g0 <= target <= g_top:
        bracket_valid = True
        lo, hi = 0.0, ceiling
        if target - g0 <= g_top - target:
            best, best_res = 0.0, target - g0
        else:
            best, best_res = ceiling, g_top - target
        while best_res > cfg.root_tol:
            if iterations >= cfg.root_max_iters:
                converged = False
                break
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                # bracket exhausted at float resolution
                converged = False
                break
            iterations += 1
            g_mid = g(mid)
            if abs(g_mid - target) < best_res:
                best, best_res = mid, abs(g_mid - target)
            if g_mid < target:
                lo = mid
            else:
                hi = mid
        sigma_hat = best
        if not converged:
            log.warning("sigma root not within root_tol: residual %.3g", best_res)
    else:
        bracket_valid = False
        sigma_hat = 0.0 if g0 > target else ceiling

    clamped = _clamp_sigma(sigma_hat, cfg)
    if clamped != sigma_hat:
        sigma_hat = clamped
        residual = abs(g(sigma_hat) - target)
    elif sigma_hat == 0.0:
        residual = abs(g0 - target)
    elif sigma_hat == ceiling:
        residual = abs(g_top - target)
    else:
        residual = best_res
    diag = RootDiagnostics(
        g_at_zero=g0,
        g_at_ceiling=g_top,
        iterations=iterations,
        bracket_valid=bracket_valid,
        residual=residual,
        converged=converged,
    )
    return sigma_hat, diag


def fit(r, cfg: EstimatorConfig) -> FitResult:
    """Run all three steps on raw (possibly sign-corrupted) responses."""
    t = preprocess(r)
    iso = pava(t)
    t_hat = iso.values
    sigma_hat, diag = solve_sigma(t, t_hat, cfg)
    mu_levels = _inverted_levels(sigma_hat, iso.levels, cfg)
    mu_hat = np.repeat(mu_levels, iso.counts)
    mu_naive = np.maximum(t_hat, cfg.eta)
    return FitResult(
        t=t,
        t_hat=t_hat,
        sigma_hat=sigma_hat,
        mu_hat=mu_hat,
        mu_naive=mu_naive,
        diagnostics=diag,
    )


def rate_bound_r_n2(n: int, mu_first: float, mu_last: float, sigma: float,
                    rb: RateBoundConfig = RateBoundConfig()) -> float:
    """Rate quantity ``r_{n,2}`` bounding the isotonic risk on the folded means.

    ``min(2 s^2, 27/4 (V/n)^{2/3} s^{4/3} + 2 s^2 (1 + log n)/n)`` with
    ``s = sigma * C2`` and ``V = mu_last - mu_first``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if mu_last < mu_first:
        raise ValueError("mu_last must be >= mu_first")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if not all(math.isfinite(x) for x in (mu_first, mu_last, sigma)):
        raise NonFinite("non-finite argument")
    s2 = (sigma * rb.c2) ** 2
    variation = (mu_last - mu_first) / n
    smooth = 27.0 / 4.0 * variation ** (2.0 / 3.0) * (sigma * rb.c2) ** (4.0 / 3.0)
    return min(2.0 * s2, smooth + 2.0 * s2 * (1.0 + math.log(n)) / n)


def mse_envelope(n: int, mu_first: float, mu_last: float, sigma: float,
                 rb: RateBoundConfig = RateBoundConfig()) -> float:
    """``delta * r_{n,2} + gamma^2 / n``; holds w.p. ``rb.coverage`` up to constants."""
    return rb.delta * rate_bound_r_n2(n, mu_first, mu_last, sigma, rb) + rb.gamma**2 / n
