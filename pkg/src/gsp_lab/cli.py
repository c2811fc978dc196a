"""Batch front end: verification suites, detection, sweeps, and sampling.

Four subcommands share one flag vocabulary::

    gsp-lab verify  --family power --p 2
    gsp-lab detect  --csv table.csv --out verdict.json
    gsp-lab sweep   --family perturbed --p 1 --eps 0.1 --a-min 0.1 --a-max 10
    gsp-lab sample  --family power --p 1 --a 1 --n 100000 --seed 7 --estimate

Config files are flat JSON whose keys mirror the long flags (dashes as
underscores); values given on the command line override the file.  Data is
written to --out, or stdout when --out is absent; human-readable summaries
always go to stderr so the data stream stays parseable.

Exit codes: 0 pass / power law, 1 residual failure / not a power law,
2 config error, 3 inadmissible spec, 4 inconclusive.  They depend on
nothing besides the config and the verdict.

The per-scale work inside verify/detect/sweep is independent across scales
and runs on a thread pool; GSP_LAB_THREADS caps the pool size (1 forces
sequential).  Results are merged in grid order, so the output does not
depend on scheduling.  Numbers are serialized with 17 significant digits,
which makes reruns byte-diffable.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

from .detector import ScaleGrid, Verdict, classify, fit_lambda, gsp_residual_sweep
from .errors import (
    CsvFormatError,
    GspLabError,
    NonPositiveInput,
    NonPositiveValue,
)
from .functions import (
    PerturbedPowerLaw,
    PowerLaw,
    load_tabulated_csv,
    validate,
)
from .identities import identity_report, variance_functional
from .moments import moment_bundle
from .sampler import SamplerState, mc_estimates, sample

__all__ = ["RunConfig", "ConfigError", "main"]

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_INADMISSIBLE = 3
EXIT_INCONCLUSIVE = 4

# verify thresholds (per row; fixed so reports are comparable across runs)
_RED_TOL = 1e-7
_ABC_ABS = 1e-5
_ABC_REL = 1e-4
_WM_TOL = 1e-9
_VAR_TOL = 1e-12

_MIN_ESTIMATE_N = 100


class ConfigError(GspLabError):
    """Bad flags, bad config file, or an impossible grid."""


@dataclass
class RunConfig:
    """Everything a run needs; round-trips losslessly through flat JSON."""

    command: str
    family: str = "power"
    p: float = 1.0
    amp: float = 1.0
    eps: float = 0.1
    csv: str | None = None
    a_min: float = 0.1
    a_max: float = 10.0
    a_count: int = 17
    tol: float = 1e-10
    seed: int = 0
    a: float = 1.0
    n: int = 1000
    estimate: bool = False
    out: str | None = None
    format: str | None = None

    def to_dict(self):
        d = asdict(self)
        d.pop("command")
        return d

    def merged_with(self, overrides):
        d = asdict(self)
        d.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(**d)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_FLOAT_KEYS = {"p", "amp", "eps", "a_min", "a_max", "tol", "a"}
_INT_KEYS = {"a_count", "seed", "n"}
_STR_KEYS = {"family", "csv", "out", "format"}
_BOOL_KEYS = {"estimate"}


def _load_config_file(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    out = {}
    for key, val in raw.items():
        if key == "command" or key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        if val is None:
            continue
        try:
            if key in _FLOAT_KEYS:
                out[key] = float(val)
            elif key in _INT_KEYS:
                out[key] = int(val)
            elif key in _BOOL_KEYS:
                if not isinstance(val, bool):
                    raise ValueError("expected true/false")
                out[key] = val
            else:
                out[key] = str(val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    return out


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="gsp-lab",
        description="Scaling-identity verification, power-law detection, "
        "scale sweeps, and reproducible sampling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("verify", "run the identity suite over a scale grid"),
        ("detect", "classify the function as power law / not / inconclusive"),
        ("sweep", "emit per-scale moments and residuals as plot-ready data"),
        ("sample", "draw from the normalized measure at one scale"),
    ):
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("--family", choices=("power", "perturbed"))
        cmd.add_argument("--p", type=float)
        cmd.add_argument("--amp", type=float)
        cmd.add_argument("--eps", type=float)
        cmd.add_argument("--csv", help="tabulated spec from a two-column CSV")
        cmd.add_argument("--a-min", dest="a_min", type=float)
        cmd.add_argument("--a-max", dest="a_max", type=float)
        cmd.add_argument("--a-count", dest="a_count", type=int)
        cmd.add_argument("--tol", type=float)
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--out")
        cmd.add_argument("--format", choices=("csv", "json"))
        cmd.add_argument("--config", help="flat JSON config file")
        if name == "sample":
            cmd.add_argument("--a", type=float, help="truncation scale")
            cmd.add_argument("--n", type=int, help="number of draws")
            cmd.add_argument(
                "--estimate", action="store_true", default=None,
                help="emit Monte Carlo means instead of raw draws",
            )
    return parser


def _config_from_args(args):
    overrides = {
        k: getattr(args, k, None)
        for k in _FIELD_TYPES
        if k not in ("command",)
    }
    cfg = RunConfig(command=args.command)
    if args.config:
        cfg = cfg.merged_with(_load_config_file(args.config))
    cfg = cfg.merged_with(overrides)
    _check_config(cfg)
    return cfg


def _check_config(cfg):
    if cfg.csv is None and cfg.family not in ("power", "perturbed"):
        raise ConfigError(f"unknown family {cfg.family!r}")
    if cfg.format not in (None, "csv", "json"):
        raise ConfigError(f"unknown format {cfg.format!r}")
    if not (math.isfinite(cfg.a_min) and math.isfinite(cfg.a_max)):
        raise ConfigError("grid bounds must be finite")
    if cfg.a_min <= 0.0 or cfg.a_max <= cfg.a_min:
        raise ConfigError("need 0 < a-min < a-max")
    if cfg.a_count < 5:
        raise ConfigError("grid needs at least 5 scales")
    if not (math.isfinite(cfg.tol) and cfg.tol > 0.0):
        raise ConfigError("tolerance must be positive")
    if cfg.command == "sample":
        if not (math.isfinite(cfg.a) and cfg.a > 0.0):
            raise ConfigError("sample scale a must be positive")
        if cfg.n < 1:
            raise ConfigError("need at least 1 draw")
        if cfg.estimate and cfg.n < _MIN_ESTIMATE_N:
            raise ConfigError(
                f"estimates need n >= {_MIN_ESTIMATE_N}, got {cfg.n}"
            )


def _build_spec(cfg):
    if cfg.csv is not None:
        return load_tabulated_csv(cfg.csv)
    if cfg.family == "power":
        return PowerLaw(p=cfg.p, amp=cfg.amp)
    return PerturbedPowerLaw(p=cfg.p, eps=cfg.eps, amp=cfg.amp)


def _grid_for(cfg, spec):
    try:
        grid = ScaleGrid.log_spaced(cfg.a_min, cfg.a_max, cfg.a_count)
        return grid.clipped_to(spec)
    except NonPositiveInput as exc:
        raise ConfigError(str(exc)) from exc


def _max_workers():
    raw = os.environ.get("GSP_LAB_THREADS", "").strip()
    if not raw:
        return min(8, os.cpu_count() or 1)
    try:
        workers = int(raw)
    except ValueError as exc:
        raise ConfigError(f"GSP_LAB_THREADS={raw!r} is not an integer") from exc
    if workers < 1:
        raise ConfigError("GSP_LAB_THREADS must be >= 1")
    return workers


def _scale_map(fn, scales):
    """Apply fn to each scale, in parallel, preserving grid order."""
    workers = _max_workers()
    if workers == 1 or len(scales) == 1:
        return [fn(a) for a in scales]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, scales))


def _g17(v):
    return f"{float(v):.17g}"


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _say(msg):
    print(msg, file=sys.stderr)


def _csv_lines(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_g17(v) if not isinstance(v, str) else v for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- commands


def _row_passes(report):
    red_ok = max(report.reduction) <= _RED_TOL
    closed = report.closed.as_array()
    fin = report.finite_diff.as_array()
    abc_ok = bool(
        (abs(closed - fin) <= _ABC_ABS + _ABC_REL * abs(closed)).all()
    )
    wm_ok = abs(report.wm) <= _WM_TOL
    var_ok = report.variance <= _VAR_TOL
    return red_ok, abc_ok, wm_ok, var_ok


_VERIFY_HEADER = (
    "a", "red_i1", "red_i2", "red_i3",
    "dA_closed", "dB_closed", "dC_closed", "dtheta_closed",
    "dA_fd", "dB_fd", "dC_fd", "dtheta_fd",
    "wm_residual", "variance", "weight_normalizer", "row_pass",
)


def _verify_row(report, ok):
    c, f = report.closed, report.finite_diff
    return (
        report.a, *report.reduction,
        c.dA, c.dB, c.dC, c.dtheta,
        f.dA, f.dB, f.dC, f.dtheta,
        report.wm, report.variance, report.weight_normalizer,
        1.0 if ok else 0.0,
    )


def cmd_verify(cfg, spec):
    grid = _grid_for(cfg, spec)
    reports = _scale_map(lambda a: identity_report(spec, a, cfg.tol), list(grid))
    failures = []
    rows = []
    for rep in reports:
        red_ok, abc_ok, wm_ok, var_ok = _row_passes(rep)
        ok = red_ok and abc_ok and wm_ok and var_ok
        rows.append(_verify_row(rep, ok))
        if not ok:
            bad = [
                name
                for name, good in (
                    ("reduction", red_ok),
                    ("derivative-match", abc_ok),
                    ("weighted-mean", wm_ok),
                    ("variance", var_ok),
                )
                if not good
            ]
            failures.append((rep.a, bad))
    if cfg.format == "json":
        payload = [dict(zip(_VERIFY_HEADER, row)) for row in rows]
        _emit(json.dumps(payload, indent=2) + "\n", cfg.out)
    else:
        _emit(_csv_lines(_VERIFY_HEADER, rows), cfg.out)
    if failures:
        for a, bad in failures:
            _say(f"verify: FAIL at a={a:g}: {', '.join(bad)}")
        return EXIT_FAIL
    _say(f"verify: PASS ({len(rows)} scales)")
    return EXIT_PASS


def cmd_detect(cfg, spec):
    grid = _grid_for(cfg, spec)
    result = classify(spec, grid=grid, tol=cfg.tol)
    if cfg.format == "csv":
        rows = list(zip(result.scales, result.gsp_residuals, result.variances))
        _emit(_csv_lines(("a", "gsp_residual", "variance"), rows), cfg.out)
    else:
        _emit(json.dumps(result.to_dict(), indent=2) + "\n", cfg.out)
    _say(
        f"detect: {result.verdict.value} "
        f"(p_theta={result.p_theta:.6g}, lambda_hat={result.lambda_hat:.6g})"
    )
    if result.verdict is Verdict.POWER_LAW:
        return EXIT_PASS
    if result.verdict is Verdict.NOT_POWER_LAW:
        return EXIT_FAIL
    return EXIT_INCONCLUSIVE


def cmd_sweep(cfg, spec):
    grid = _grid_for(cfg, spec)
    scales = list(grid)
    bundles = _scale_map(lambda a: moment_bundle(spec, a, cfg.tol), scales)
    variances = _scale_map(
        lambda a_b: variance_functional(spec, a_b[0], bundle=a_b[1]),
        list(zip(scales, bundles)),
    )
    lam_hat = fit_lambda(spec, grid, cfg.tol, bundles=bundles)
    residuals = gsp_residual_sweep(spec, grid, lam_hat, cfg.tol, bundles=bundles)
    header = ("a", "xbar", "ybar", "theta", "A", "B", "C",
              "gsp_residual", "variance")
    rows = [
        (b.a, b.xbar, b.ybar, b.theta, b.A, b.B, b.C, r, v)
        for b, r, v in zip(bundles, residuals, variances)
    ]
    if cfg.format == "json":
        payload = {
            "lambda_hat": lam_hat,
            "rows": [dict(zip(header, row)) for row in rows],
        }
        _emit(json.dumps(payload, indent=2) + "\n", cfg.out)
    else:
        _emit(_csv_lines(header, rows), cfg.out)
    _say(f"sweep: {len(rows)} scales, lambda_hat={lam_hat:.10g}")
    return EXIT_PASS


def cmd_sample(cfg, spec):
    state = SamplerState(spec, cfg.a, cfg.seed, tol=cfg.tol)
    if cfg.estimate:
        est = mc_estimates(state, cfg.n)
        payload = {
            "mean_x": est.mean_x,
            "mean_fx": est.mean_fx,
            "stderr_x": est.stderr_x,
            "stderr_fx": est.stderr_fx,
            "n": est.n,
        }
        _emit(json.dumps(payload, indent=2) + "\n", cfg.out)
        _say(f"sample: n={est.n} mean_x={est.mean_x:.10g}")
        return EXIT_PASS
    draws = sample(state, cfg.n)
    lines = ["x"] + [_g17(v) for v in draws]
    _emit("\n".join(lines) + "\n", cfg.out)
    _say(f"sample: wrote {cfg.n} draws (seed={cfg.seed})")
    return EXIT_PASS


_COMMANDS = {
    "verify": cmd_verify,
    "detect": cmd_detect,
    "sweep": cmd_sweep,
    "sample": cmd_sample,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
    except ConfigError as exc:
        _say(f"config error: {exc}")
        return EXIT_CONFIG

    try:
        spec = _build_spec(cfg)
    except FileNotFoundError as exc:
        _say(f"config error: {exc}")
        return EXIT_CONFIG
    except (CsvFormatError, NonPositiveInput, NonPositiveValue) as exc:
        _say(f"inadmissible spec: {exc}")
        return EXIT_INADMISSIBLE

    report = validate(spec)
    if not report.ok:
        _say(f"inadmissible spec: {report.failed} ({report.detail})")
        return EXIT_INADMISSIBLE

    try:
        return _COMMANDS[cfg.command](cfg, spec)
    except ConfigError as exc:
        _say(f"config error: {exc}")
        return EXIT_CONFIG
    except GspLabError as exc:
        _say(f"error: {exc}")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
