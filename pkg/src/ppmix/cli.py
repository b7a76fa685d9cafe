"""Command-line front end: configured, reproducible experiment runs.

Runs are described by a flat INI config (sections ``[measure]``,
``[transform]``, ``[experiment]``, ``[run]``) plus command-line
overrides; equal configs and seeds give byte-identical output files for
any worker count.  Every emitted file embeds the config hash and seed.

Exit codes: 0 all checks pass, 1 check failure or runtime error,
2 usage or config error.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence


from .config_space import RandomIntegrand
from .experiments import (required_decay_window, required_mixing_window,
                          run_invariance_check, run_mecke_check, run_mixing,
                          run_moment_check, run_zero_type)
from .integrands import CappedCount, DeterministicIntegrand, ExpCount, NearestNeighbor
from .intensity import (IndicatorFunction, IntensityMeasure, RadialBump,
                        TestFunction, region_within)
from .mc import StatReport, block_generator
from .regions import Annulus, Box, Region
from .transforms import (CountShift, FixedAngle, HashedAngle, Identity,
                         MixingSchedule, ShiftTransformation, Transformation,
                         check_vanishing, compose, make_dilation_rotation,
                         make_hull_rotation)

SCHEMA_VERSION = 1
Z_MAX = 4.0


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


# ---------------------------------------------------------------------------
# token-level parsers for catalog specs
# ---------------------------------------------------------------------------

def _floats(tokens: Sequence[str], n: int, what: str) -> list[float]:
    if len(tokens) < n:
        raise ConfigError(f"{what}: expected {n} numbers, got {tokens}")
    try:
        return [float(t) for t in tokens[:n]]
    except ValueError as exc:
        raise ConfigError(f"{what}: {exc}") from None


def _take_region(tokens: list[str], what: str) -> tuple[Region, list[str]]:
    if not tokens:
        raise ConfigError(f"{what}: missing region")
    kind = tokens[0]
    if kind == "ann":
        vals = _floats(tokens[1:], 2, what)
        return Annulus(vals[0], vals[1]), tokens[3:]
    if kind == "sector":
        vals = _floats(tokens[1:], 4, what)
        return Annulus(*vals), tokens[5:]
    if kind == "box":
        vals = _floats(tokens[1:], 4, what)
        return Box((vals[0], vals[1]), (vals[2], vals[3])), tokens[5:]
    if kind == "interval":
        vals = _floats(tokens[1:], 2, what)
        return Box((vals[0],), (vals[1],)), tokens[3:]
    raise ConfigError(f"{what}: unknown region kind {kind!r}")


def parse_test_function(spec: str) -> TestFunction:
    """``ind:<region>`` or ``bump:r_lo:r_hi``."""
    tokens = [t.strip() for t in spec.split(":")]
    name, rest = tokens[0], tokens[1:]
    if name == "ind":
        region, rest = _take_region(rest, spec)
        if rest:
            raise ConfigError(f"trailing tokens in test function {spec!r}")
        return IndicatorFunction(region, label=spec)
    if name == "bump":
        vals = _floats(rest, 2, spec)
        return RadialBump(vals[0], vals[1], label=spec)
    raise ConfigError(f"unknown test function {name!r} in {spec!r}")


def parse_integrand(spec: str) -> RandomIntegrand:
    """Catalog integrands: ``det:<testfn>``, ``count_capped:<region>:cap``,
    ``expcount:<region>`` and ``nn:<region>:cap``."""
    tokens = [t.strip() for t in spec.split(":")]
    name, rest = tokens[0], tokens[1:]
    if name == "det":
        return DeterministicIntegrand(parse_test_function(":".join(rest)))
    if name == "count_capped":
        region, rest = _take_region(rest, spec)
        cap = int(_floats(rest, 1, spec)[0]) if rest else 10
        return CappedCount(region, cap)
    if name == "expcount":
        region, rest = _take_region(rest, spec)
        count_region = region
        if rest:
            count_region, rest = _take_region(rest, spec)
        return ExpCount(region, count_region)
    if name == "nn":
        region, rest = _take_region(rest, spec)
        cap = _floats(rest, 1, spec)[0] if rest else 1.0
        return NearestNeighbor(region, cap)
    raise ConfigError(f"unknown integrand {name!r} in {spec!r}")


def _spec_list(raw: str) -> list[str]:
    return [item.strip() for item in raw.split(",") if item.strip()]


# ---------------------------------------------------------------------------
# config assembly
# ---------------------------------------------------------------------------

def load_config(path: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    return parser


def _get(cp, section: str, key: str, default=None, required: bool = False) -> str:
    if cp.has_option(section, key):
        return cp.get(section, key)
    if required:
        raise ConfigError(f"missing [{section}] {key}")
    return default


def build_measure(cp) -> IntensityMeasure:
    kind = _get(cp, "measure", "kind", required=True)
    rate = float(_get(cp, "measure", "rate", "1.0"))
    if kind == "log_radial":
        r_lo = float(_get(cp, "measure", "r_lo", required=True))
        r_hi = float(_get(cp, "measure", "r_hi", required=True))
        return IntensityMeasure.log_radial(r_lo, r_hi, rate)
    if kind == "homogeneous":
        lo = tuple(float(v) for v in _get(cp, "measure", "lo", required=True).split())
        hi = tuple(float(v) for v in _get(cp, "measure", "hi", required=True).split())
        return IntensityMeasure.homogeneous(Box(lo, hi), rate)
    raise ConfigError(f"unknown measure kind {kind!r}")


def _hull_angle_rule(cp):
    mode = _get(cp, "transform", "hull_angle", "fixed")
    if mode == "fixed":
        return FixedAngle(float(_get(cp, "transform", "hull_angle_value", "0.0")))
    if mode == "hashed":
        return HashedAngle(int(_get(cp, "transform", "hull_angle_seed", "0")))
    raise ConfigError(f"unknown hull angle rule {mode!r}")


def build_transform(cp) -> Transformation:
    kind = _get(cp, "transform", "kind", "identity")
    if kind == "identity":
        return Identity()
    if kind == "dilation_rotation":
        return make_dilation_rotation(float(_get(cp, "transform", "r", required=True)),
                                      float(_get(cp, "transform", "angle", "0.0")))
    if kind == "hull_rotation":
        return make_hull_rotation(_hull_angle_rule(cp),
                                  float(_get(cp, "transform", "ball_radius", "1.0")))
    if kind == "hull_dilation_rotation":
        outer = make_dilation_rotation(float(_get(cp, "transform", "r", required=True)),
                                       float(_get(cp, "transform", "angle", "0.0")))
        inner = make_hull_rotation(_hull_angle_rule(cp),
                                   float(_get(cp, "transform", "ball_radius", "1.0")))
        return compose(outer, inner)
    if kind == "shift":
        offset = tuple(float(v) for v in _get(cp, "transform", "offset", "0.5 0.0").split())
        return ShiftTransformation(offset)
    if kind == "count_shift":
        return CountShift(float(_get(cp, "transform", "scale", "0.01")))
    raise ConfigError(f"unknown transform kind {kind!r}")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run: measure, transformation, experiment parameters,
    seed and workers.  Two equal RunConfigs produce identical outputs."""

    parser: configparser.ConfigParser
    seed: int
    workers: int

    @property
    def measure(self) -> IntensityMeasure:
        return build_measure(self.parser)

    @property
    def transform(self) -> Transformation:
        return build_transform(self.parser)

    def experiment(self, key: str, default=None, required: bool = False) -> str:
        return _get(self.parser, "experiment", key, default, required)

    @property
    def config_hash(self) -> str:
        items = []
        for section in sorted(self.parser.sections()):
            for key in sorted(self.parser.options(section)):
                if section == "run" and key in ("seed", "workers"):
                    continue
                value = " ".join(self.parser.get(section, key).split())
                items.append(f"{section}.{key}={value}")
        items.append(f"seed={self.seed}")
        digest = hashlib.sha256("\n".join(items).encode("utf-8")).hexdigest()
        return digest[:12]


def resolve_config(args) -> RunConfig:
    parser = load_config(args.config)
    seed = args.seed
    if seed is None:
        raw = _get(parser, "run", "seed")
        if raw is None:
            raise ConfigError("no seed: set [run] seed or pass --seed")
        seed = int(raw)
    workers = args.workers
    if workers is None:
        workers = int(_get(parser, "run", "workers", "1"))
    return RunConfig(parser, int(seed), max(1, int(workers)))


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _emit(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _csv_text(header: str, rows, cfg: RunConfig) -> str:
    lines = [f"# config_hash={cfg.config_hash} seed={cfg.seed}", header]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row))
    return "\n".join(lines) + "\n"


def _report_row(rep: StatReport) -> dict:
    return {
        "label": rep.label,
        "estimate": rep.estimate,
        "reference": None if math.isnan(rep.reference) else rep.reference,
        "std_error": rep.std_error,
        "z_score": None if math.isnan(rep.z_score) else rep.z_score,
        "pass": rep.passes(Z_MAX),
    }


def _emit_report(rows: list[dict], cfg: RunConfig, command: str,
                 out: Optional[str], quiet: bool) -> int:
    all_pass = all(row["pass"] for row in rows)
    doc = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
        "checks": rows,
        "pass": all_pass,
    }
    _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", out)
    if not quiet:
        for row in rows:
            mark = "pass" if row["pass"] else "FAIL"
            z = row["z_score"]
            z_text = "" if z is None else f" z={z:+.3f}"
            print(f"[{mark}] {row['label']}: estimate={row['estimate']:.6g}"
                  f"{z_text}", file=sys.stderr)
    return 0 if all_pass else 1


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_sample(cfg: RunConfig, args) -> int:
    sigma = cfg.measure
    rng = block_generator(cfg.seed, 0)
    omega = sigma.sample(rng)
    d = sigma.dimension
    header = ",".join(f"x{i}" for i in range(d))
    rows = [tuple(p) for p in omega]
    text = _csv_text(header, rows, cfg)
    _emit(text, args.out)
    if not args.quiet:
        print(f"sampled {len(omega)} points (mass {sigma.mass:.6g})",
              file=sys.stderr)
    return 0


def cmd_check_mecke(cfg: RunConfig, args) -> int:
    sigma = cfg.measure
    specs = _spec_list(cfg.experiment("integrands", required=True))
    n_mc = int(cfg.experiment("n_mc", "100000"))
    rows = []
    for i, spec in enumerate(specs):
        u = parse_integrand(spec)
        rep = run_mecke_check(u, sigma, n_mc, cfg.seed + i, cfg.workers)
        rows.append(_report_row(rep.relabel(f"mecke[{spec}]")))
    return _emit_report(rows, cfg, "check-mecke", args.out, args.quiet)


def cmd_check_moments(cfg: RunConfig, args) -> int:
    sigma = cfg.measure
    specs = _spec_list(cfg.experiment("integrands", required=True))
    powers = [int(v) for v in cfg.experiment("powers", required=True).split()]
    if len(powers) != len(specs):
        raise ConfigError("powers must list one exponent per integrand")
    n_mc = int(cfg.experiment("n_mc", "100000"))
    us = [parse_integrand(spec) for spec in specs]
    rep = run_moment_check(us, powers, sigma, n_mc, cfg.seed, cfg.workers)
    return _emit_report([_report_row(rep)], cfg, "check-moments", args.out,
                        args.quiet)


def _parse_region_spec(spec: str) -> Region:
    region, rest = _take_region([t.strip() for t in spec.split(":")], spec)
    if rest:
        raise ConfigError(f"trailing tokens in region {spec!r}")
    return region


def cmd_check_invariance(cfg: RunConfig, args) -> int:
    sigma = cfg.measure
    tau = cfg.transform
    regions = [_parse_region_spec(spec)
               for spec in _spec_list(cfg.experiment("regions", required=True))]
    n_mc = int(cfg.experiment("n_mc", "100000"))
    reports = run_invariance_check(tau, sigma, regions, n_mc, cfg.seed,
                                   cfg.workers)
    return _emit_report([_report_row(r) for r in reports], cfg,
                        "check-invariance", args.out, args.quiet)


def cmd_check_vanishing(cfg: RunConfig, args) -> int:
    sigma = cfg.measure
    tau = cfg.transform
    n_draws = int(cfg.experiment("n_draws", "1000"))
    m_max = int(cfg.experiment("m_max", "3"))
    k_max = int(cfg.experiment("k_max", "3"))
    tol = float(cfg.experiment("tol", "1e-12"))
    rng = block_generator(cfg.seed, 0)
    failures = 0
    first_witness = None
    for i in range(n_draws):
        omega = sigma.sample(rng)
        m = 1 + i % m_max
        xs = [tuple(p) for p in sigma.sample_rows(sigma.window, m, rng).tolist()]
        ks = [int(k) for k in rng.integers(1, k_max + 1, size=m)]
        result = check_vanishing(tau, omega, xs, ks, tol)
        if not result.passed:
            failures += 1
            if first_witness is None:
                first_witness = f"draw {i}: family {result.witness[0]}"
    row = {
        "label": f"vanishing[{tau.label},draws={n_draws},m<={m_max},k<={k_max}]",
        "estimate": float(failures),
        "reference": 0.0,
        "std_error": 0.0,
        "z_score": None,
        "pass": failures == 0,
    }
    if first_witness is not None:
        row["witness"] = first_witness
    return _emit_report([row], cfg, "check-vanishing", args.out, args.quiet)


def cmd_zero_type(cfg: RunConfig, args) -> int:
    sigma = cfg.measure
    tau = cfg.transform
    g = parse_test_function(cfg.experiment("g", required=True))
    h = parse_test_function(cfg.experiment("h", required=True))
    n_max = int(cfg.experiment("n_max", "4"))
    n_mc = int(cfg.experiment("n_mc", "200"))
    resolution = int(cfg.experiment("resolution", "64"))
    needed = required_decay_window(g, h, tau, n_max)
    if needed is not None and not region_within(needed, sigma.window):
        print(f"window {sigma.window.spec()} too small for n_max={n_max}: "
              f"requires {needed.spec()}", file=sys.stderr)
        return 1
    curve = run_zero_type(g, h, tau, sigma, n_max, n_mc, cfg.seed,
                          cfg.workers, resolution)
    rows = [(row.n, row.mean, row.std_error, row.q05, row.q95)
            for row in curve.rows]
    _emit(_csv_text("n,mean,std_error,q05,q95", rows, cfg), args.out)
    if not args.quiet:
        print(f"decay curve over n=0..{n_max} with {n_mc} replicates",
              file=sys.stderr)
    return 0


def cmd_mixing(cfg: RunConfig, args) -> int:
    sigma = cfg.measure
    tau = cfg.transform
    specs = _spec_list(cfg.experiment("functions", required=True))
    hs = [parse_test_function(spec) for spec in specs]
    ls = [int(v) for v in cfg.experiment("powers", required=True).split()]
    n_grid = [int(v) for v in cfg.experiment("n_grid", "0 1 2 3 4 5 6").split()]
    n_mc = int(cfg.experiment("n_mc", "100000"))
    resolution = int(cfg.experiment("resolution", "512"))
    schedule = MixingSchedule()
    k_max = schedule.cumulative(len(hs), max(n_grid))
    needed = required_mixing_window(hs, tau, k_max)
    if needed is not None and not region_within(needed, sigma.window):
        print(f"window {sigma.window.spec()} too small for offsets up to "
              f"{k_max}: requires {needed.spec()}", file=sys.stderr)
        return 1
    reports = run_mixing(hs, ls, schedule, tau, sigma, n_grid, n_mc,
                         cfg.seed, cfg.workers, resolution)
    rows = [(n, rep.estimate, rep.reference, rep.std_error, rep.z_score)
            for n, rep in zip(n_grid, reports)]
    _emit(_csv_text("n,joint_estimate,product_reference,std_error,z", rows, cfg),
          args.out)
    bad = [n for n, rep in zip(n_grid, reports)
           if n == max(n_grid) and not rep.passes(Z_MAX)]
    if not args.quiet:
        for n, rep in zip(n_grid, reports):
            print(f"n={n}: estimate={rep.estimate:.6g} "
                  f"reference={rep.reference:.6g} z={rep.z_score:+.3f}",
                  file=sys.stderr)
    return 1 if bad else 0


COMMANDS = {
    "sample": cmd_sample,
    "check-mecke": cmd_check_mecke,
    "check-moments": cmd_check_moments,
    "check-invariance": cmd_check_invariance,
    "check-vanishing": cmd_check_vanishing,
    "zero-type": cmd_zero_type,
    "mixing": cmd_mixing,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppmix",
        description="Poisson point process transformation experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="run config file")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override [run] seed")
        cmd.add_argument("--out", default=None,
                         help="output path (default: stdout)")
        cmd.add_argument("--workers", type=int, default=None,
                         help="parallel replicate workers")
        cmd.add_argument("--quiet", action="store_true")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure: exit 1 per CLI contract
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
