"""Command line entry point: ``sparsescale {rates,sweep,bayes-check,selftest}``.

Settings come from three layers, later ones winning: a flat ``key = value``
config file (``--config``), environment variables ``SPARSESCALE_<KEY>``, and
command line flags.

Exit codes: 0 success, 1 usage or config error, 2 failed check, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import rates
from .bayes import verify_lower_bound
from .estimators import make_estimator
from .exceptions import InvalidInputError, NumericalFailureError
from .gaussian import abs_moment_q
from .montecarlo import sweep
from .problem import ProblemConfig
from .selftest import run_selftest

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK = 2
EXIT_IO = 3

ENV_PREFIX = "SPARSESCALE_"
OUT_OF_DOMAIN = "out-of-domain"
SCHEMA_VERSION = 1

SWEEP_HEADER = (
    "a,regime,estimator,q,p,s,sigma,reps,seed,risk_mean,risk_stderr,hamming_mean,"
    "hamming_stderr,exact_recovery,phi,phi_plus,phi_o,phi_ad,ratio_to_phi_o"
).split(",")
RATES_HEADER = [
    "a", "t_of_a", "t_star", "a_q0", "a_q1", "psi", "psi_plus",
    "phi", "phi_plus", "phi_o", "phi_ad", "regime",
]
BAYES_HEADER = [
    "a", "s_prime", "rule", "scaled_threshold", "matched_threshold", "oracle_risk",
    "matched_oracle_risk", "bound", "margin", "ok",
]

_CASTS = {
    "p": int,
    "s": int,
    "sigma": float,
    "q": float,
    "a_min": float,
    "a_max": float,
    "a_steps": int,
    "a_spacing": str,
    "a_grid": str,
    "estimator": str,
    "reps": int,
    "seed": int,
    "out": str,
    "format": str,
    "jobs": int,
    "s_prime": float,
}

DEFAULTS = {
    "p": 2**14,
    "s": 16,
    "sigma": 1.0,
    "q": 2.0,
    "a_steps": 12,
    "a_spacing": "log",
    "estimator": "scaled,adaptive,oracle",
    "reps": 200,
    "seed": 20240601,
    "out": "-",
    "format": "csv",
    "jobs": os.cpu_count() or 1,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class ExperimentConfig:
    cfg: ProblemConfig
    a_grid: list
    estimators: list
    reps: int
    seed: int
    output_path: str = "-"
    format: str = "csv"
    jobs: int = 1
    s_prime: Optional[float] = None
    extras: dict = field(default_factory=dict)


def load_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc.strerror}") from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        if not sep or not key:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        if key not in _CASTS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def _env_settings(environ) -> dict:
    out = {}
    for key in _CASTS:
        name = ENV_PREFIX + key.upper()
        if name in environ:
            out[key] = environ[name]
    return out


def _cast(settings: dict) -> dict:
    out = {}
    for key, value in settings.items():
        if value is None:
            continue
        try:
            out[key] = _CASTS[key](value)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad value for {key}: {value!r}") from exc
    return out


def _default_grid_bounds(cfg: ProblemConfig) -> tuple[float, float]:
    ts = rates.t_star(cfg)
    try:
        upper = 3.0 * rates.a_eps(1.0, cfg)
    except InvalidInputError:
        upper = 3.0 * ts
    return 0.5 * ts, upper


def build_grid(settings: dict, cfg: ProblemConfig) -> list:
    if "a_grid" in settings:
        try:
            grid = [float(x) for x in settings["a_grid"].split(",") if x.strip()]
        except ValueError as exc:
            raise UsageError(f"bad a_grid {settings['a_grid']!r}") from exc
        if not grid:
            raise UsageError("a-grid is empty")
        return sorted(grid)
    steps = settings.get("a_steps", DEFAULTS["a_steps"])
    if steps < 1:
        raise UsageError("a-grid is empty (a_steps must be >= 1)")
    lo_default, hi_default = _default_grid_bounds(cfg)
    lo = settings.get("a_min", lo_default)
    hi = settings.get("a_max", hi_default)
    if not (lo > 0 and hi > 0 and math.isfinite(lo) and math.isfinite(hi)):
        raise UsageError("a-grid bounds must be positive")
    if lo > hi:
        raise UsageError(f"a_min={lo} exceeds a_max={hi}")
    spacing = settings.get("a_spacing", DEFAULTS["a_spacing"])
    if steps == 1:
        return [float(lo)]
    if spacing == "log":
        grid = np.geomspace(lo, hi, steps)
    elif spacing == "linear":
        grid = np.linspace(lo, hi, steps)
    else:
        raise UsageError(f"a_spacing must be 'linear' or 'log', got {spacing!r}")
    return [float(x) for x in grid]


def resolve_config(args, environ=None) -> ExperimentConfig:
    """Merge config file, environment and flags into an :class:`ExperimentConfig`."""
    environ = os.environ if environ is None else environ
    layered = {}
    if getattr(args, "config", None):
        layered.update(load_config_file(args.config))
    layered.update(_env_settings(environ))
    flags = {k: getattr(args, k, None) for k in _CASTS}
    if flags.get("estimator"):
        flags["estimator"] = ",".join(flags["estimator"])
    layered.update({k: v for k, v in flags.items() if v is not None})
    settings = dict(DEFAULTS)
    settings.update(_cast(layered))

    try:
        cfg = ProblemConfig(settings["p"], settings["s"], settings["sigma"], settings["q"])
        # every rate needs log(p/s - 1) > 0
        cfg.log_ratio()
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from exc
    if settings["format"] not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {settings['format']!r}")
    if settings["reps"] < 2:
        raise UsageError("reps must be >= 2")
    if not 0 <= settings["seed"] < 2**64:
        raise UsageError("seed must fit in 64 unsigned bits")
    tokens = [t for t in settings["estimator"].split(",") if t.strip()]
    try:
        for token in tokens:
            make_estimator(token)
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from exc
    if not tokens:
        raise UsageError("no estimators given")
    return ExperimentConfig(
        cfg=cfg,
        a_grid=build_grid(settings, cfg),
        estimators=tokens,
        reps=settings["reps"],
        seed=settings["seed"],
        output_path=settings["out"],
        format=settings["format"],
        jobs=max(1, settings["jobs"]),
        s_prime=settings.get("s_prime"),
    )


def fmt(value) -> str:
    """17 significant digits for floats, out-of-domain marker for None."""
    if value is None:
        return OUT_OF_DOMAIN
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return OUT_OF_DOMAIN
        return f"{value:.17g}"
    return str(value)


def _json_value(value):
    if value is None:
        return OUT_OF_DOMAIN
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else OUT_OF_DOMAIN
    return str(value)


def render(header, rows, fmt_name: str, kind: str) -> str:
    if fmt_name == "json":
        doc = {
            "schema": kind,
            "version": SCHEMA_VERSION,
            "rows": [{k: _json_value(v) for k, v in zip(header, row)} for row in rows],
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def emit(text: str, path: str):
    if path in (None, "", "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def rates_rows(exp: ExperimentConfig) -> list:
    rows = []
    for a in exp.a_grid:
        rep = rates.rate_report(exp.cfg, a)
        rows.append([
            rep.a, rep.t_of_a, rep.t_star, rep.a_q0, rep.a_q1, rep.psi, rep.psi_plus,
            rep.phi, rep.phi_plus, rep.phi_o, rep.phi_ad,
            None if rep.regime is None else str(rep.regime),
        ])
    return rows


def sweep_rows(exp: ExperimentConfig) -> list:
    cfg = exp.cfg
    specs = [make_estimator(t) for t in exp.estimators]
    out = []
    for row in sweep(cfg, specs, exp.a_grid, exp.reps, exp.seed, n_jobs=exp.jobs):
        out.append([
            row.a, None if row.regime is None else str(row.regime), row.estimator,
            cfg.q, cfg.p, cfg.s, cfg.sigma, exp.reps, exp.seed,
            row.risk.mean, row.risk.std_err, row.hamming.mean, row.hamming.std_err,
            row.exact_recovery.mean, row.phi, row.phi_plus, row.phi_o, row.phi_ad,
            row.ratio_to_phi_o,
        ])
    return out


def bayes_rows(exp: ExperimentConfig) -> tuple[list, bool]:
    cfg = exp.cfg
    s_prime = exp.s_prime if exp.s_prime is not None else cfg.s / 2.0
    rows, ok = [], True
    for a in exp.a_grid:
        rec = verify_lower_bound(cfg, a, s_prime)
        ok &= rec.ok
        rows.append([
            rec.a, rec.s_prime, rec.rule_form, rec.scaled_threshold, rec.matched_threshold,
            rec.oracle_risk, rec.matched_oracle_risk, rec.bound, rec.margin, rec.ok,
        ])
    return rows, ok


def cmd_rates(exp: ExperimentConfig) -> int:
    emit(render(RATES_HEADER, rates_rows(exp), exp.format, "rates"), exp.output_path)
    return EXIT_OK


def cmd_sweep(exp: ExperimentConfig) -> int:
    emit(render(SWEEP_HEADER, sweep_rows(exp), exp.format, "sweep"), exp.output_path)
    return EXIT_OK


def cmd_bayes_check(exp: ExperimentConfig) -> int:
    rows, ok = bayes_rows(exp)
    emit(render(BAYES_HEADER, rows, exp.format, "bayes-check"), exp.output_path)
    if not ok:
        print("bayes-check: oracle risk fell below the closed-form bound", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_selftest(corrupt_moment: bool = False) -> int:
    moment = abs_moment_q
    if corrupt_moment:
        moment = lambda q, sigma=1.0: 1.01 * abs_moment_q(q, sigma)  # noqa: E731
    results = run_selftest(moment)
    for res in results:
        print(f"[{'PASS' if res.passed else 'FAIL'}] {res.name}: {res.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"selftest: {len(failed)} check(s) failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK
    print(f"selftest: all {len(results)} checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value settings file")
    common.add_argument("--p", type=int)
    common.add_argument("--s", type=int)
    common.add_argument("--sigma", type=float)
    common.add_argument("--q", type=float)
    common.add_argument("--a-min", dest="a_min", type=float)
    common.add_argument("--a-max", dest="a_max", type=float)
    common.add_argument("--a-steps", dest="a_steps", type=int)
    common.add_argument("--a-spacing", dest="a_spacing", choices=["linear", "log"])
    common.add_argument("--a-grid", dest="a_grid", help="explicit comma-separated scales")
    common.add_argument(
        "--estimator", action="append",
        help="scaled[:a] | adaptive | oracle | universal[:tau]; repeatable",
    )
    common.add_argument("--reps", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output path, '-' for stdout")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--jobs", type=int, help="worker threads for Monte Carlo")
    common.add_argument("--s-prime", dest="s_prime", type=float, help="prior sparsity for bayes-check")

    parser = _Parser(prog="sparsescale", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("rates", parents=[common], help="tabulate thresholds and rate functions")
    sub.add_parser("sweep", parents=[common], help="Monte Carlo risk sweep over a scale grid")
    sub.add_parser("bayes-check", parents=[common], help="oracle Bayes risk vs closed-form bound")
    st = sub.add_parser("selftest", help="internal consistency checks")
    st.add_argument("--corrupt-moment", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None, environ=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "selftest":
            return cmd_selftest(args.corrupt_moment)
        exp = resolve_config(args, environ)
        if args.command == "rates":
            return cmd_rates(exp)
        if args.command == "sweep":
            return cmd_sweep(exp)
        return cmd_bayes_check(exp)
    except (UsageError, InvalidInputError) as exc:
        print(f"sparsescale: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailureError as exc:
        print(f"sparsescale: numerical failure: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except OSError as exc:
        print(f"sparsescale: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
