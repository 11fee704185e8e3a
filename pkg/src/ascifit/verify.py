"""Oracle-equivalence checks runnable outside the test suite (``ascifit verify``)."""

from __future__ import annotations

import numpy as np

from . import oracle
from .datagen import example1_model, generate, linear_signal
from .estimator import EstimatorConfig, fit
from .folded_normal import FoldedParams, folded_mean, folded_mean_inverse, folded_square_var, folded_var
from .isotonic import maxmin_oracle, pava, pava_lower_bounded


def check_pava_maxmin(trials=1000, max_n=12, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        y = rng.normal(size=rng.integers(1, max_n + 1)) * rng.uniform(0.1, 10)
        worst = max(worst, float(np.max(np.abs(pava(y).values - maxmin_oracle(y)))))
    return worst <= 1e-9, worst


def check_lower_bounded(trials=500, max_n=6, seed=1):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        y = rng.normal(size=rng.integers(1, max_n + 1))
        floor = rng.normal()
        got = pava_lower_bounded(y, floor).values
        worst = max(worst, float(np.max(np.abs(got - oracle.projection_qp_oracle(y, floor)))))
    return worst <= 1e-9, worst


def check_roundtrip(eta=0.2, tol=1e-8):
    worst = 0.0
    for sigma in np.linspace(0.1, 5.0, 50):
        mu = np.linspace(eta, eta + 10.0, 50)
        back = folded_mean_inverse(folded_mean(mu, sigma), sigma, eta)
        worst = max(worst, float(np.max(np.abs(back - mu))))
    return worst <= tol, worst


def check_moments(draws=1_000_000, seed=2):
    points = [(0.0, 1.0), (1.0, 1.0), (0.5, 0.5), (2.0, 1.0), (0.2, 2.0),
              (3.0, 1.0), (1.0, 3.0), (5.0, 0.1), (0.1, 0.3), (10.0, 4.0)]
    worst = 0.0
    for i, (mu, sigma) in enumerate(points):
        p = FoldedParams(mu, sigma)
        mc = oracle.mc_folded_moments(p, draws, seed + i)
        z = max(abs(mc.mean - folded_mean(mu, sigma)) / mc.se_mean,
                abs(mc.var - folded_var(mu, sigma)) / mc.se_var,
                abs(mc.square_var - folded_square_var(mu, sigma)) / mc.se_square_var)
        worst = max(worst, z)
    return worst <= 4.0, worst


def check_root_scan(datasets=50, n=2000, eta=0.2, step=1e-4, seed=3):
    worst = 0.0
    cfg = EstimatorConfig(eta=eta)
    sigmas = (0.5, 1.0, 2.0)
    for k in range(datasets):
        sigma = sigmas[k % 3]
        sample = generate(example1_model(linear_signal(n, eta), eta, sigma, 0.5), n, seed * 1000 + k)
        res = fit(sample.r, cfg)
        target = float(np.mean(res.t**2))
        hi = float(np.sqrt(target))
        scanned = oracle.root_scan(target, res.t_hat, cfg, oracle.GridScanSpec(0.0, hi, step))
        worst = max(worst, abs(scanned - res.sigma_hat))
    return worst <= 2 * step, worst


CHECKS = {
    "pava_vs_maxmin": check_pava_maxmin,
    "lower_bounded_vs_enumeration": check_lower_bounded,
    "inverse_roundtrip": check_roundtrip,
    "moments_vs_monte_carlo": check_moments,
    "sigma_root_vs_grid_scan": check_root_scan,
}


def run_all(seed: int = 0, quick: bool = False):
    """Yield ``(name, passed, worst_deviation)`` for each check."""
    for name, check in CHECKS.items():
        kwargs = {}
        if quick and name == "sigma_root_vs_grid_scan":
            kwargs["datasets"] = 6
        if quick and name == "moments_vs_monte_carlo":
            kwargs["draws"] = 200_000
        if "seed" in check.__code__.co_varnames:
            kwargs["seed"] = seed + check.__defaults__[-1]
        passed, worst = check(**kwargs)
        yield name, passed, worst
