"""Command line interface.

    ascifit fit --eta 0.2 data.txt
    ascifit simulate --config configs/default.json --out-dir results/
    ascifit rate-check results/summary.csv

Exit status: 0 on success, 1 on bad input, 2 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import AscifitError, InputError, NumericalError
from .estimator import EstimatorConfig, fit
from .folded_normal import EvalAccuracy
from .harness import SimConfig, rate_check_all, read_summary_csv, run_grid, summarize, write_outputs

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2

log = logging.getLogger("ascifit")


def read_responses(path: str, column=None) -> np.ndarray:
    """One number per line, or one column of a headed CSV file when ``column`` is given."""
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if column is not None:
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise InputError(f"column {column!r} not found in {path}")
        raw = [row[column] for row in reader]
    else:
        raw = [ln.strip() for ln in text.splitlines()]
        raw = [ln for ln in raw if ln and not ln.startswith("#")]
    try:
        # accept unicode minus as well as ASCII
        values = np.array([float(v.replace("−", "-")) for v in raw], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if values.size == 0:
        raise InputError(f"{path}: no responses found")
    return values


def cmd_fit(args) -> int:
    r = read_responses(args.data, args.column)
    acc = EvalAccuracy()
    cfg = EstimatorConfig(eta=args.eta, sigma_bracket_floor=args.sigma_floor,
                          sigma_bracket_ceiling=args.sigma_ceiling,
                          root_tol=args.tol, accuracy=acc)
    res = fit(r, cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "r", "t_hat", "mu_hat", "mu_naive", "sigma_hat"])
    for i in range(r.size):
        w.writerow([i, repr(float(r[i])), repr(float(res.t_hat[i])), repr(float(res.mu_hat[i])),
                    repr(float(res.mu_naive[i])), repr(float(res.sigma_hat))])
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    d = res.diagnostics
    if not d.bracket_valid:
        log.warning("no sign change on [0, sqrt(mean T^2)]; sigma_hat clamped to %g", res.sigma_hat)
    if not d.converged:
        log.error("sigma root finding did not reach tol (residual %.3g)", d.residual)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = SimConfig.from_json(args.config) if args.config else SimConfig()
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.parallelism is not None:
        cfg.parallelism = args.parallelism
    if args.timing:
        cfg.record_timing = True
    records = run_grid(cfg)
    rows = summarize(records)
    rec_path, sum_path = write_outputs(records, rows, args.out_dir)
    failed = sum(r.error is not None for r in records)
    print(f"wrote {len(records)} records to {rec_path} and {len(rows)} cells to {sum_path}",
          file=sys.stderr)
    if failed:
        log.error("%d replications failed", failed)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_rate_check(args) -> int:
    fits = rate_check_all(read_summary_csv(args.summary))
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["eta", "p", "sigma", "n_points", "slope", "intercept", "max_abs_residual"])
    for f in fits:
        w.writerow([f.eta, f.p, f.sigma, len(f.ns), f"{f.slope:.6f}", f"{f.intercept:.6f}",
                    f"{f.max_abs_residual:.6f}"])
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_all

    ok = True
    for name, passed, worst in run_all(seed=args.seed or 0, quick=args.quick):
        print(f"{'PASS' if passed else 'FAIL'} {name} worst={worst:.3g}")
        ok &= passed
    return EXIT_OK if ok else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ascifit", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=None, help="override the master seed")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{fit,simulate,rate-check}")

    p = sub.add_parser("fit", help="estimate the monotone signal from responses")
    p.add_argument("data", help="text file with one response per line, CSV with --column, or -")
    p.add_argument("--eta", type=float, required=True, help="known lower bound on the signal")
    p.add_argument("--column", default=None, help="CSV column holding the responses")
    p.add_argument("--sigma-floor", type=float, default=0.0)
    p.add_argument("--sigma-ceiling", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-9, help="root tolerance on G(sigma)")
    p.add_argument("--out", default=None, help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="run the simulation grid")
    p.add_argument("--config", default=None, help="SimConfig JSON (default: built-in grid)")
    p.add_argument("--out-dir", default=".", help="directory for records.csv and summary.csv")
    p.add_argument("--parallelism", type=int, default=None)
    p.add_argument("--timing", action="store_true", help="fill runtime_ms (breaks byte-determinism)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("rate-check", help="log-log slope of mean MSE vs n per sigma")
    p.add_argument("summary", help="summary.csv written by simulate")
    p.set_defaults(func=cmd_rate_check)

    p = sub.add_parser("verify", help=argparse.SUPPRESS)
    p.add_argument("--quick", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, ValueError, OSError) as exc:
        print(f"ascifit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, ArithmeticError, AscifitError) as exc:
        print(f"ascifit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
