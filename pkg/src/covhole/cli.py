"""Command-line front end.

Subcommands: ``bounds`` (MC estimate with lower/upper bounds), ``mc`` (MC
estimate and residual term only), ``detect`` (one deployment file),
``campaign`` (many sampled deployments, scored against the oracle) and
``gen`` (write deployment fixtures). Data goes to stdout or ``--out``;
progress and errors go to stderr.

Exit codes: 0 on success, 1 if any run or evaluation failed, 2 on bad
configuration or input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

from .bounds import RESIDUAL_CAP, BoundSpec, NumericalError, bounds_sweep, estimate_proportion, residual_term_mc
from .campaign import CAMPAIGN_COLUMNS, RunSpec, run_once, summarize
from .complexes import build_rips
from .detector import BOUNDARY_VARIANTS, PreconditionError, run_hba
from .fixtures import dense_deployment, square_hole_deployment
from .geometry import ConfigurationError, Deployment, DeploymentFormatError, RngStream, sample_deployment
from .oracle import NON_TRIANGULAR, TRIANGULAR, extract_holes, match_cycles, rasterize

log = logging.getLogger("covhole")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2

BOUNDS_COLUMNS = ("gamma", "lambda", "p_mc", "ci95", "p_lower", "p_upper", "trials", "quad_n")
MC_COLUMNS = ("gamma", "lambda", "p_mc", "ci95", "residual", "residual_ci95", "trials")


# configuration ----------------------------------------------------------------


@dataclass
class ExperimentConfig:
    kind: str
    gamma: list[float] = field(default_factory=lambda: [2.0])
    lam: list[float] = field(default_factory=lambda: [0.010])
    trials: int = 1_000_000
    runs: int = 100
    seed: list[int] = field(default_factory=lambda: [0])
    r_s: float = 10.0
    r_c: float | None = None
    field_size: tuple[float, float] = (100.0, 100.0)
    fence_spacing: float = 20.0
    resolution: float = 0.25
    quad: int = 64
    residual: str = "cap"
    variant: str = "templates"
    workers: int = 1
    out: str | None = None
    format: str = "csv"

    def validate(self) -> ExperimentConfig:
        if not self.gamma:
            raise ConfigurationError("gamma grid is empty")
        if not self.lam:
            raise ConfigurationError("lambda grid is empty")
        if not self.seed:
            raise ConfigurationError("seed list is empty")
        for g in self.gamma:
            if not (g > 0 and math.isfinite(g)):
                raise ConfigurationError(f"gamma must be positive, got {g}")
        for lam in self.lam:
            if not (lam > 0 and math.isfinite(lam)):
                raise ConfigurationError(f"lambda must be positive, got {lam}")
        if self.trials < 1 or self.runs < 1 or self.workers < 1:
            raise ConfigurationError("trials, runs and workers must be at least 1")
        if self.quad < 8:
            raise ConfigurationError("quadrature needs at least 8 subdivisions")
        if self.residual not in ("cap", "mc"):
            raise ConfigurationError(f"residual must be 'cap' or 'mc', got {self.residual!r}")
        if self.variant not in BOUNDARY_VARIANTS:
            raise ConfigurationError(f"variant must be one of {BOUNDARY_VARIANTS}")
        if self.format not in ("csv", "json"):
            raise ConfigurationError(f"format must be csv or json, got {self.format!r}")
        if not (self.r_s > 0) or (self.r_c is not None and not self.r_c > 0):
            raise ConfigurationError("radii must be positive")
        return self

    def radius_c(self, gamma: float | None = None) -> float:
        """Explicit r_c wins; otherwise gamma times r_s."""
        if self.r_c is not None:
            return self.r_c
        return (gamma if gamma is not None else self.gamma[0]) * self.r_s


def parse_grid(text: str, kind=float) -> list:
    """Comma list, with ``start:stop:step`` items expanded inclusively."""
    out = []
    for item in str(text).split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            try:
                a, b, step = (float(x) for x in item.split(":"))
            except ValueError:
                raise ConfigurationError(f"bad range {item!r}; expected start:stop:step") from None
            if step <= 0 or b < a:
                raise ConfigurationError(f"bad range {item!r}")
            n = int(round((b - a) / step))
            out.extend(kind(round(a + i * step, 12)) for i in range(n + 1))
        else:
            try:
                out.append(kind(item))
            except ValueError:
                raise ConfigurationError(f"not a number: {item!r}") from None
    return out


def parse_field(text) -> tuple[float, float]:
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return float(text[0]), float(text[1])
    if isinstance(text, dict) and {"w", "h"} <= text.keys():
        return float(text["w"]), float(text["h"])
    try:
        w, h = str(text).lower().split("x")
        return float(w), float(h)
    except ValueError:
        raise ConfigurationError(f"field must look like WxH, got {text!r}") from None


# JSON config key -> (config attribute, converter)
_KEYS = {
    "gamma": ("gamma", lambda v: v if isinstance(v, list) else parse_grid(v)),
    "lambda": ("lam", lambda v: v if isinstance(v, list) else parse_grid(v)),
    "trials": ("trials", int),
    "runs": ("runs", int),
    "seed": ("seed", lambda v: v if isinstance(v, list) else parse_grid(v, int)),
    "rs": ("r_s", float),
    "rc": ("r_c", float),
    "field": ("field_size", parse_field),
    "fence_spacing": ("fence_spacing", float),
    "resolution": ("resolution", float),
    "quad": ("quad", int),
    "residual": ("residual", str),
    "variant": ("variant", str),
    "workers": ("workers", int),
    "out": ("out", str),
    "format": ("format", str),
}


def build_config(kind: str, args: argparse.Namespace) -> ExperimentConfig:
    """Defaults, then the JSON config file, then explicit flags."""
    values: dict = {}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigurationError("config must be a JSON object")
        unknown = set(data) - set(_KEYS) - {"kind"}
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        for key, raw in data.items():
            if key != "kind":
                attr, conv = _KEYS[key]
                values[attr] = conv(raw)
    for key, (attr, conv) in _KEYS.items():
        flag = getattr(args, key, None)
        if flag is not None:
            values[attr] = conv(flag)
    names = {f.name for f in fields(ExperimentConfig)}
    return ExperimentConfig(kind=kind, **{k: v for k, v in values.items() if k in names}).validate()


# output -------------------------------------------------------------------------


def render(rows: list[dict], columns, fmt: str, extra: dict | None = None) -> str:
    if fmt == "json":
        payload = {"rows": rows, **(extra or {})} if extra else rows
        return json.dumps(payload, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _pool_map(fn, items, workers: int):
    """Order-preserving map, in-process for one worker."""
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# bounds / mc ----------------------------------------------------------------------


def _bounds_rows(task) -> list[dict]:
    cfg, gamma, seed = task
    q = (cfg.quad,) * 3
    lower, main = bounds_sweep(cfg.lam, gamma, cfg.r_s, q)
    rows = []
    for lam, pl, pu in zip(cfg.lam, lower, main):
        spec = BoundSpec(lam, gamma, cfg.r_s, q, cfg.trials, seed, cfg.residual)
        est = estimate_proportion(spec)
        if gamma * gamma <= 3.0:
            upper = 0.0
        elif cfg.residual == "cap":
            upper = float(pu) + RESIDUAL_CAP
        else:
            upper = float(pu) + residual_term_mc(spec).p_hat
        rows.append(
            {
                "gamma": gamma,
                "lambda": lam,
                "p_mc": est.p_hat,
                "ci95": est.ci95_halfwidth,
                "p_lower": float(pl),
                "p_upper": upper,
                "trials": cfg.trials,
                "quad_n": cfg.quad,
            }
        )
        log.info("bounds gamma=%g lambda=%g done", gamma, lam)
    return rows


def _mc_rows(task) -> list[dict]:
    cfg, gamma, seed = task
    rows = []
    for lam in cfg.lam:
        spec = BoundSpec(lam, gamma, cfg.r_s, (cfg.quad,) * 3, cfg.trials, seed)
        est, res = estimate_proportion(spec), residual_term_mc(spec)
        rows.append(
            {
                "gamma": gamma,
                "lambda": lam,
                "p_mc": est.p_hat,
                "ci95": est.ci95_halfwidth,
                "residual": res.p_hat,
                "residual_ci95": res.ci95_halfwidth,
                "trials": cfg.trials,
            }
        )
        log.info("mc gamma=%g lambda=%g done", gamma, lam)
    return rows


def sandwich_flags(rows: list[dict]) -> dict:
    """Bound ordering and lower-bound monotonicity checks over the emitted rows."""
    ok = all(r["p_lower"] <= r["p_mc"] + 3 * r["ci95"] and r["p_mc"] <= r["p_upper"] + 3 * r["ci95"] for r in rows)
    ordered = all(r["p_lower"] <= r["p_upper"] for r in rows)
    return {"sandwich": ok, "lower_le_upper": ordered}


def cmd_bounds(cfg: ExperimentConfig) -> int:
    tasks = [(cfg, g, s) for s in cfg.seed for g in cfg.gamma]
    try:
        rows = [r for chunk in _pool_map(_bounds_rows, tasks, cfg.workers) for r in chunk]
    except NumericalError as exc:
        log.error("quadrature did not converge: %s", exc)
        return EXIT_FAILED
    flags = sandwich_flags(rows)
    if not flags["sandwich"]:
        log.warning("some Monte Carlo estimates fall outside their bounds by more than 3 ci95")
    emit(render(rows, BOUNDS_COLUMNS, cfg.format, {"checks": flags}), cfg.out)
    return EXIT_OK


def cmd_mc(cfg: ExperimentConfig) -> int:
    tasks = [(cfg, g, s) for s in cfg.seed for g in cfg.gamma]
    rows = [r for chunk in _pool_map(_mc_rows, tasks, cfg.workers) for r in chunk]
    emit(render(rows, MC_COLUMNS, cfg.format), cfg.out)
    return EXIT_OK


# detection ----------------------------------------------------------------------


def cmd_detect(args: argparse.Namespace) -> int:
    try:
        dep = Deployment.load(args.deployment)
    except OSError as exc:
        log.error("cannot read %s: %s", args.deployment, exc)
        return EXIT_CONFIG
    except (DeploymentFormatError, ConfigurationError) as exc:
        log.error("bad deployment file %s: %s", args.deployment, exc)
        return EXIT_CONFIG
    rips = build_rips(dep)
    try:
        report = run_hba(dep, rips, variant=args.variant or "templates")
    except PreconditionError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    out = report.to_dict()
    if args.oracle:
        grid = rasterize(dep, args.resolution or 0.25)
        holes = extract_holes(grid, dep, rips)
        out["oracle"] = {
            "triangular": sum(h.kind == TRIANGULAR for h in holes),
            "nontriangular": sum(h.kind == NON_TRIANGULAR for h in holes),
            "match": match_cycles(holes, report.cycle_lists(), dep, grid).to_dict(),
        }
    emit(json.dumps(out, indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_campaign(cfg: ExperimentConfig, summary_path: str | None) -> int:
    specs = [
        RunSpec(lam, k, seed, cfg.field_size, cfg.r_s, cfg.radius_c(), cfg.fence_spacing, cfg.resolution, cfg.variant)
        for seed in cfg.seed
        for lam in cfg.lam
        for k in range(cfg.runs)
    ]
    results = []
    for i, res in enumerate(_pool_map(run_once, specs, cfg.workers) if cfg.workers > 1 else map(run_once, specs)):
        results.append(res)
        log.info("campaign run %d/%d (lambda=%g) matched %d/%d", i + 1, len(specs), res.lam, res.matched, res.nontriangular)
    summary = summarize(results)
    rows = [r.row() for r in results]
    if cfg.format == "json":
        emit(render(rows, CAMPAIGN_COLUMNS, "json", {"summary": summary}), cfg.out)
    else:
        emit(render(rows, CAMPAIGN_COLUMNS, "csv"), cfg.out)
    text = json.dumps(summary, indent=1) + "\n"
    if summary_path:
        Path(summary_path).write_text(text)
    elif cfg.format == "csv":
        sys.stderr.write(text)
    return EXIT_FAILED if summary["errors"] else EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    r_s = args.rs if args.rs is not None else 10.0
    gamma = parse_grid(args.gamma)[0] if args.gamma is not None else 2.0
    r_c = args.rc if args.rc is not None else gamma * r_s
    fld = parse_field(args.field) if args.field is not None else (100.0, 100.0)
    spacing = args.fence_spacing if args.fence_spacing is not None else 20.0
    if args.fixture == "dense":
        dep = dense_deployment(fld, r_s, r_c, fence_spacing=spacing)
    elif args.fixture == "square":
        dep, _ = square_hole_deployment(r_s=r_s, r_c=r_c)
    else:
        lam = parse_grid(args.lam)[0] if args.lam is not None else 0.010
        seed = parse_grid(args.seed, int)[0] if args.seed is not None else 0
        dep = sample_deployment(fld, lam, r_s, r_c, spacing, RngStream(seed))
    emit(dep.to_json(indent=1) + "\n", args.out)
    return EXIT_OK


# argument parsing ---------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, *names: str) -> None:
    add = {
        "gamma": lambda: p.add_argument("--gamma", help="gamma = r_c/r_s; list or start:stop:step"),
        "lambda": lambda: p.add_argument("--lambda", dest="lambda", metavar="LAMBDA", help="intensity list (nodes/m^2)"),
        "trials": lambda: p.add_argument("--trials", type=int, help="Monte Carlo trials per grid point"),
        "runs": lambda: p.add_argument("--runs", type=int, help="runs per intensity"),
        "seed": lambda: p.add_argument("--seed", help="master seed(s)"),
        "rs": lambda: p.add_argument("--rs", type=float, help="sensing radius r_s (m)"),
        "rc": lambda: p.add_argument("--rc", type=float, help="communication radius r_c (m)"),
        "field": lambda: p.add_argument("--field", help="field size WxH (m)"),
        "fence_spacing": lambda: p.add_argument("--fence-spacing", dest="fence_spacing", type=float),
        "resolution": lambda: p.add_argument("--resolution", type=float, help="oracle cell size (m)"),
        "quad": lambda: p.add_argument("--quad", type=int, help="quadrature subdivisions per axis"),
        "residual": lambda: p.add_argument("--residual", choices=("cap", "mc")),
        "variant": lambda: p.add_argument("--variant", choices=BOUNDARY_VARIANTS, help="detector boundary rules"),
        "workers": lambda: p.add_argument("--workers", type=int),
        "out": lambda: p.add_argument("--out", metavar="PATH"),
        "format": lambda: p.add_argument("--format", choices=("csv", "json")),
        "config": lambda: p.add_argument("--config", metavar="JSON", help="config file; flags override it"),
    }
    for n in names:
        add[n]()


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="covhole", description=__doc__.split("\n\n")[0])
    ap.add_argument("-q", "--quiet", action="store_true", help="no progress on stderr")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    grid = ("gamma", "lambda", "trials", "seed", "rs", "quad", "workers", "out", "format", "config")
    _common(sub.add_parser("bounds", help="MC estimate with lower and upper bounds"), *grid, "residual")
    _common(sub.add_parser("mc", help="MC estimate and residual term"), *grid)
    p = sub.add_parser("detect", help="run the detector on a deployment file")
    p.add_argument("deployment")
    p.add_argument("--oracle", action="store_true", help="add the ground-truth match report")
    _common(p, "variant", "resolution", "out")
    _common(
        sub.add_parser("campaign", help="detection campaign on sampled deployments"),
        "gamma", "lambda", "runs", "seed", "rs", "rc", "field", "fence_spacing", "resolution", "variant",
        "workers", "out", "format", "config",
    )
    sub.choices["campaign"].add_argument("--summary", metavar="PATH", help="write the JSON summary here")
    p = sub.add_parser("gen", help="write a deployment fixture")
    p.add_argument(
        "--fixture",
        choices=("random", "dense", "square"),
        default="random",
        help="square: 45x45 block with one 15 m pocket (ignores --field)",
    )
    _common(p, "gamma", "lambda", "seed", "rs", "rc", "field", "fence_spacing", "out")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)
    try:
        if args.command == "detect":
            return cmd_detect(args)
        if args.command == "gen":
            return cmd_gen(args)
        cfg = build_config(args.command, args)
        if args.command == "bounds":
            return cmd_bounds(cfg)
        if args.command == "mc":
            return cmd_mc(cfg)
        return cmd_campaign(cfg, args.summary)
    except ConfigurationError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
