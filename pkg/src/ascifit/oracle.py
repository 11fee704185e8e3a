"""Brute-force references for checking the fast paths.

Nothing here reuses the estimator's numerical kernels except the normal
CDF: the folded mean is re-derived from its reflected form, its inverse is
computed by Newton iteration rather than bisection, the root of the
second-moment equation is found by exhaustive grid scan, and the floored
isotonic projection by enumerating block partitions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import TooLarge
from .folded_normal import FoldedParams, norm_cdf
from .isotonic import maxmin_oracle  # noqa: F401  (re-exported oracle)

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class GridScanSpec:
    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("need lo < hi")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if (self.hi - self.lo) / self.step > 1e8:
            raise ValueError("grid too fine")

    def grid(self) -> np.ndarray:
        k = int(math.floor((self.hi - self.lo) / self.step + 1e-9))
        pts = self.lo + self.step * np.arange(k + 1)
        if pts[-1] < self.hi:
            pts = np.append(pts, self.hi)
        return pts


def _fold_mean_reflected(mu, sigma):
    # sigma sqrt(2/pi) exp(-mu^2 / 2 sigma^2) + mu (1 - 2 Phi(-mu / sigma)), sigma > 0
    x = mu / sigma
    return sigma * _SQRT_2_OVER_PI * np.exp(-0.5 * x * x) + mu * (1.0 - 2.0 * norm_cdf(-x))


def _newton_inverse(u, sigma, eta, iters=100):
    """Invert the folded mean in mu by Newton from the right.

    f is convex and increasing on mu > 0 and f(u) >= u, so iterates started
    at u decrease monotonically onto the root without overshooting.
    """
    mu = np.array(u, dtype=float)
    tol = 1e-14 * np.maximum(1.0, u)
    for _ in range(iters):
        resid = _fold_mean_reflected(mu, sigma) - u
        slope = 2.0 * norm_cdf(mu / sigma) - 1.0
        step = np.where(resid > tol, resid / slope, 0.0)
        if not np.any(step):
            break
        mu = np.maximum(eta, mu - step)
    return mu


def g_scan_values(sigmas, t_hat, eta: float, chunk: int = 4096) -> np.ndarray:
    """Second-moment map evaluated on a grid of sigma values."""
    levels, counts = np.unique(np.asarray(t_hat, dtype=float), return_counts=True)
    weights = counts / counts.sum()
    sigmas = np.asarray(sigmas, dtype=float)
    out = np.empty(sigmas.size)
    for start in range(0, sigmas.size, chunk):
        s = sigmas[start:start + chunk, None]
        pos = s > 0
        s_safe = np.where(pos, s, 1.0)
        floor = np.where(pos, _fold_mean_reflected(eta, s_safe), eta)
        u = np.maximum(levels[None, :], floor)
        mu = np.where(pos, _newton_inverse(u, s_safe, eta), u)
        out[start:start + chunk] = s[:, 0] ** 2 + (mu * mu) @ weights
    return out


def root_scan(target: float, t_hat, cfg, spec: GridScanSpec) -> float:
    """Grid point minimizing ``|G(sigma) - target|`` (exhaustive scan)."""
    sigmas = spec.grid()
    vals = g_scan_values(sigmas, t_hat, cfg.eta)
    return float(sigmas[np.argmin(np.abs(vals - target))])


class MCMoments(NamedTuple):
    mean: float
    var: float
    square_var: float
    se_mean: float
    se_var: float
    se_square_var: float


def mc_folded_moments(p: FoldedParams, draws: int = 1_000_000, seed: int = 0) -> MCMoments:
    """Sample moments of ``|N(mu, sigma^2)|`` with their standard errors."""
    if draws < 10_000:
        raise ValueError("draws must be >= 1e4")
    rng = np.random.default_rng(seed)
    t = np.abs(p.mu + p.sigma * rng.standard_normal(draws))
    m = t.mean()
    dev2 = (t - m) ** 2
    t2 = t * t
    sq_dev = (t2 - t2.mean()) ** 2
    root_n = math.sqrt(draws)
    return MCMoments(
        mean=float(m),
        var=float(t.var(ddof=1)),
        square_var=float(t2.var(ddof=1)),
        se_mean=float(t.std(ddof=1) / root_n),
        se_var=float(dev2.std(ddof=1) / root_n),
        se_square_var=float(sq_dev.std(ddof=1) / root_n),
    )


def projection_qp_oracle(y, floor: float) -> np.ndarray:
    """Exact projection onto ``{floor <= x_1 <= ... <= x_n}`` by enumeration.

    Every contiguous block partition is tried with levels ``max(block mean,
    floor)``; the feasible candidate closest to ``y`` is the projection.
    """
    y = np.asarray(y, dtype=float).ravel()
    n = y.size
    if n > 10:
        raise TooLarge(f"enumeration limited to n <= 10, got {n}")
    if n == 0:
        raise ValueError("empty input")
    best, best_dist = None, math.inf
    for cuts in itertools.product((False, True), repeat=n - 1):
        bounds = [0] + [i + 1 for i, c in enumerate(cuts) if c] + [n]
        cand = np.empty(n)
        for a, b in zip(bounds[:-1], bounds[1:]):
            cand[a:b] = max(y[a:b].mean(), floor)
        if np.any(np.diff(cand) < -1e-12):
            continue
        dist = float(np.sum((y - cand) ** 2))
        if dist < best_dist:
            best, best_dist = cand, dist
    return best
