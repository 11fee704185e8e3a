"""Simulation grid runner, summaries and rate checks.

A grid cell is ``(eta, p, sigma, n)``; each replication draws data from the
Rademacher-sign model with its own Philox substream seeded from
``(master_seed, cell, rep)``, so results do not depend on how replications
are scheduled across worker processes.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import os
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .datagen import derive_seed, example1_model, generate, linear_signal
from .errors import AscifitError, EmptyInput, InputError, InsufficientPoints
from .estimator import EstimatorConfig, RateBoundConfig, fit, mse_envelope

log = logging.getLogger(__name__)

RECORD_COLUMNS = ("eta", "p", "sigma", "n", "rep", "seed", "mse_ascifit", "mse_naive",
                  "sigma_hat", "bracket_valid", "runtime_ms")
SUMMARY_COLUMNS = ("eta", "p", "sigma", "n", "reps", "failures", "mean_mse_ascifit",
                   "se_mse_ascifit", "mean_mse_naive", "se_mse_naive", "mean_sigma_hat")
SIGNALS = ("linear", "step")


@dataclass
class SimConfig:
    etas: list = field(default_factory=lambda: [0.2])
    ps: list = field(default_factory=lambda: [0.5])
    sigmas: list = field(default_factory=lambda: [0.5, 1.0, 1.5, 2.0])
    ns: list = field(default_factory=lambda: [100, 250, 500, 1000])
    reps: int = 50
    master_seed: int = 20220101
    signal: str = "linear"
    parallelism: Optional[int] = None
    record_timing: bool = False

    def __post_init__(self):
        for name in ("etas", "ps", "sigmas", "ns"):
            if not getattr(self, name):
                raise InputError(f"{name} must be non-empty")
        if self.reps < 1:
            raise InputError("reps must be >= 1")
        if self.signal not in SIGNALS:
            raise InputError(f"unknown signal {self.signal!r}; choose from {SIGNALS}")
        if any(not 0 < e < 1 for e in self.etas):
            raise InputError("etas must lie in (0, 1)")
        if any(not 0 <= p <= 1 for p in self.ps):
            raise InputError("ps must lie in [0, 1]")
        if any(s < 0 for s in self.sigmas) or any(int(n) < 1 for n in self.ns):
            raise InputError("sigmas must be >= 0 and ns >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "SimConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                return cls.from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}: invalid JSON ({exc})") from exc

    def cells(self):
        return sorted(itertools.product(map(float, self.etas), map(float, self.ps),
                                        map(float, self.sigmas), map(int, self.ns)))

    def workers(self) -> int:
        return self.parallelism if self.parallelism else (os.cpu_count() or 1)


@dataclass(frozen=True)
class SimRecord:
    eta: float
    p: float
    sigma: float
    n: int
    rep: int
    seed: int
    mse_ascifit: float
    mse_naive: float
    sigma_hat: float
    bracket_valid: bool
    runtime_ms: int = 0
    error: Optional[str] = None

    @property
    def key(self):
        return (self.eta, self.p, self.sigma, self.n, self.rep)


def make_signal(kind: str, n: int, eta: float) -> np.ndarray:
    if kind == "linear":
        return linear_signal(n, eta)
    if kind == "step":
        return np.where(np.arange(n) < n // 2, eta, 1.0)
    raise InputError(f"unknown signal {kind!r}")


def run_replication(eta: float, p: float, sigma: float, n: int, rep: int,
                    master_seed: int, signal: str = "linear",
                    record_timing: bool = False) -> SimRecord:
    seed = derive_seed(master_seed, eta, p, sigma, n, rep)
    start = time.perf_counter()
    try:
        mu = make_signal(signal, n, eta)
        sample = generate(example1_model(mu, eta, sigma, p), n, seed)
        res = fit(sample.r, EstimatorConfig(eta=eta))
    except (AscifitError, ValueError) as exc:
        log.warning("cell %s rep %d failed: %s", (eta, p, sigma, n), rep, exc)
        nan = float("nan")
        return SimRecord(eta, p, sigma, n, rep, seed, nan, nan, nan, False, 0,
                         error=f"{type(exc).__name__}: {exc}")
    elapsed = int(round(1000 * (time.perf_counter() - start))) if record_timing else 0
    return SimRecord(
        eta=eta, p=p, sigma=sigma, n=n, rep=rep, seed=seed,
        mse_ascifit=float(np.mean((res.mu_hat - mu) ** 2)),
        mse_naive=float(np.mean((res.mu_naive - mu) ** 2)),
        sigma_hat=float(res.sigma_hat),
        bracket_valid=bool(res.diagnostics.bracket_valid),
        runtime_ms=elapsed,
    )


def _run_task(args):
    return run_replication(*args)


def run_grid(cfg: SimConfig) -> list[SimRecord]:
    """One record per (cell, rep), sorted by cell then rep."""
    tasks = [(eta, p, sigma, n, rep, cfg.master_seed, cfg.signal, cfg.record_timing)
             for (eta, p, sigma, n) in cfg.cells() for rep in range(cfg.reps)]
    workers = min(cfg.workers(), len(tasks))
    if workers <= 1:
        records = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    records.sort(key=lambda r: r.key)
    return records


# --- summaries -------------------------------------------------------------


@dataclass(frozen=True)
class SummaryRow:
    eta: float
    p: float
    sigma: float
    n: int
    reps: int
    failures: int
    mean_mse_ascifit: float
    se_mse_ascifit: float
    mean_mse_naive: float
    se_mse_naive: float
    mean_sigma_hat: float


def _mean_se(values):
    v = np.asarray([x for x in values if math.isfinite(x)], dtype=float)
    if v.size == 0:
        return float("nan"), float("nan")
    if v.size == 1:
        return float(v[0]), 0.0
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def summarize(records: Iterable[SimRecord]) -> list[SummaryRow]:
    """Per-cell mean and standard error of both MSEs (SE = 0 for a single rep)."""
    groups = defaultdict(list)
    for r in records:
        groups[(r.eta, r.p, r.sigma, r.n)].append(r)
    if not groups:
        raise EmptyInput("no records to summarize")
    rows = []
    for key in sorted(groups):
        recs = groups[key]
        m_a, se_a = _mean_se(r.mse_ascifit for r in recs)
        m_n, se_n = _mean_se(r.mse_naive for r in recs)
        m_s, _ = _mean_se(r.sigma_hat for r in recs)
        rows.append(SummaryRow(*key, reps=len(recs), failures=sum(r.error is not None for r in recs),
                               mean_mse_ascifit=m_a, se_mse_ascifit=se_a,
                               mean_mse_naive=m_n, se_mse_naive=se_n, mean_sigma_hat=m_s))
    return rows


@dataclass(frozen=True)
class RateFit:
    eta: float
    p: float
    sigma: float
    slope: float
    intercept: float
    ns: tuple
    residuals: tuple

    @property
    def max_abs_residual(self) -> float:
        return max(abs(x) for x in self.residuals)


def fit_loglog(ns: Sequence[float], mses: Sequence[float]) -> tuple[float, float, np.ndarray]:
    """Least-squares line through ``(log n, log mse)``; returns slope, intercept, residuals."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(mses, dtype=float))
    if np.unique(x).size < 3:
        raise InsufficientPoints("rate check needs at least 3 distinct n")
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(slope), float(intercept), y - (slope * x + intercept)


def rate_check(summary: Sequence[SummaryRow], sigma: float,
               eta: Optional[float] = None, p: Optional[float] = None) -> RateFit:
    """Log-log slope of mean ASCIFIT MSE against n at fixed sigma."""
    rows = [r for r in summary if r.sigma == sigma
            and (eta is None or r.eta == eta) and (p is None or r.p == p)]
    if len({(r.eta, r.p) for r in rows}) > 1:
        raise InputError("several (eta, p) groups match; pass eta and p")
    if not rows:
        raise InsufficientPoints(f"no summary rows for sigma={sigma}")
    rows.sort(key=lambda r: r.n)
    slope, intercept, resid = fit_loglog([r.n for r in rows], [r.mean_mse_ascifit for r in rows])
    return RateFit(rows[0].eta, rows[0].p, sigma, slope, intercept,
                   tuple(r.n for r in rows), tuple(float(e) for e in resid))


def rate_check_all(summary: Sequence[SummaryRow]) -> list[RateFit]:
    groups = sorted({(r.eta, r.p, r.sigma) for r in summary})
    return [rate_check(summary, s, eta=e, p=p) for e, p, s in groups]


def envelope_coverage(records: Sequence[SimRecord], signal: str = "linear",
                      rb: RateBoundConfig = RateBoundConfig()) -> float:
    """Fraction of valid-bracket records whose MSE sits under the risk envelope."""
    hits = total = 0
    for r in records:
        if not r.bracket_valid or not math.isfinite(r.mse_ascifit):
            continue
        mu = make_signal(signal, r.n, r.eta)
        total += 1
        hits += r.mse_ascifit <= mse_envelope(r.n, float(mu[0]), float(mu[-1]), r.sigma, rb)
    return hits / total if total else float("nan")


# --- CSV -------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_rows(rows, columns, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        d = asdict(row)
        w.writerow([_fmt(d[c]) for c in columns])


def records_to_csv(records: Sequence[SimRecord]) -> str:
    buf = io.StringIO()
    _write_rows(records, RECORD_COLUMNS, buf)
    return buf.getvalue()


def summary_to_csv(rows: Sequence[SummaryRow]) -> str:
    buf = io.StringIO()
    _write_rows(rows, SUMMARY_COLUMNS, buf)
    return buf.getvalue()


def write_outputs(records, rows, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rec_path, sum_path = out / "records.csv", out / "summary.csv"
    rec_path.write_text(records_to_csv(records), encoding="utf-8")
    sum_path.write_text(summary_to_csv(rows), encoding="utf-8")
    return rec_path, sum_path


def _parse_bool(s):
    return s.strip().lower() in ("true", "1")


def read_records_csv(path) -> list[SimRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    try:
        return [SimRecord(eta=float(r["eta"]), p=float(r["p"]), sigma=float(r["sigma"]),
                          n=int(r["n"]), rep=int(r["rep"]), seed=int(r["seed"]),
                          mse_ascifit=float(r["mse_ascifit"]), mse_naive=float(r["mse_naive"]),
                          sigma_hat=float(r["sigma_hat"]),
                          bracket_valid=_parse_bool(r["bracket_valid"]),
                          runtime_ms=int(r["runtime_ms"]))
                for r in rows]
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: malformed records CSV ({exc})") from exc


def read_summary_csv(path) -> list[SummaryRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise EmptyInput(f"{path}: no summary rows")
    try:
        return [SummaryRow(eta=float(r["eta"]), p=float(r["p"]), sigma=float(r["sigma"]),
                           n=int(r["n"]), reps=int(r["reps"]), failures=int(r["failures"]),
                           mean_mse_ascifit=float(r["mean_mse_ascifit"]),
                           se_mse_ascifit=float(r["se_mse_ascifit"]),
                           mean_mse_naive=float(r["mean_mse_naive"]),
                           se_mse_naive=float(r["se_mse_naive"]),
                           mean_sigma_hat=float(r["mean_sigma_hat"]))
                for r in rows]
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: malformed summary CSV ({exc})") from exc
