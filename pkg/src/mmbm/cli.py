"""Command-line interface: config ingestion, dispatch, CSV emission.

Subcommands: validate | solve | cdf | simulate | verify.  The config is a
single strict JSON file (unknown keys are rejected, errors name the field
path).  All numeric CSV cells use the shortest round-trip decimal form, so
identical configurations produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, TextIO

import numpy as np

from .errors import MmbmError, ValidationError
from .linalg import solve_stable_quadratic
from .model import MmbmModel, ResampleSpec, StickySpec, validate_model, validate_resample, validate_sticky
from .regenerative import (
    BoundaryVariant,
    expected_sojourn,
    resampled_variant,
    standard_variant,
    sticky_variant,
)
from .simulate import SimConfig, ks_distance, regen_stats_compare, simulate
from .stationary import (
    evaluate_cdf,
    matrix_K,
    stationary_resampled,
    stationary_standard,
    stationary_sticky,
    vector_ell,
    vector_nu,
)
from .verify import run_verify

_GRID_DEFAULT = {"min": 0.0, "max": 5.0, "points": 100, "spacing": "linear"}
_SIM_DEFAULT = {"lambda": 1e4, "horizon": 1e4, "seed": 0, "replications": 1}


def _fnum(x: float) -> str:
    return repr(float(x))


def _reject_unknown(block: dict, allowed: set[str], path: str) -> None:
    unknown = set(block) - allowed
    if unknown:
        raise ValidationError("config-unknown-key",
                              f"{path}: unknown key(s) {sorted(unknown)}")


class RunConfig:
    """Parsed and validated configuration file."""

    def __init__(self, model: MmbmModel, sticky: StickySpec | None,
                 resample: ResampleSpec | None, tag: str, q: float,
                 grid: np.ndarray, lam: float, horizon: float, seed: int,
                 replications: int):
        self.model = model
        self.sticky = sticky
        self.resample = resample
        self.tag = tag
        self.q = q
        self.grid = grid
        self.lam = lam
        self.horizon = horizon
        self.seed = seed
        self.replications = replications

    def variant(self, tag: str | None = None) -> BoundaryVariant:
        tag = tag or self.tag
        if tag == "standard":
            return standard_variant()
        if tag == "sticky":
            if self.sticky is None:
                raise ValidationError("variant-spec",
                                      "variant.a is required for the sticky variant")
            return sticky_variant(self.sticky)
        if tag == "resampled":
            if self.resample is None:
                raise ValidationError(
                    "variant-spec",
                    "variant.A and variant.Atilde are required for the resampled variant")
            return resampled_variant(self.resample)
        raise ValidationError("variant-tag", f"unknown variant {tag!r}")


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ValidationError("config-file", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError("config-json",
                              f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ValidationError("config-json", "top level must be an object")
    _reject_unknown(raw, {"model", "variant", "analysis", "simulation"}, "config")

    if "model" not in raw:
        raise ValidationError("config-model", "missing required block 'model'")
    mb = raw["model"]
    _reject_unknown(mb, {"Q", "mu", "sigma"}, "model")
    for key in ("Q", "mu", "sigma"):
        if key not in mb:
            raise ValidationError("config-model", f"model.{key} is required")
    model = validate_model(mb["Q"], mb["mu"], mb["sigma"])

    vb = raw.get("variant", {"tag": "standard"})
    _reject_unknown(vb, {"tag", "a", "A", "Atilde", "Qtilde"}, "variant")
    tag = vb.get("tag", "standard")
    if tag not in ("standard", "sticky", "resampled"):
        raise ValidationError("variant-tag", f"variant.tag: unknown variant {tag!r}")
    sticky = validate_sticky(vb["a"], model) if "a" in vb else None
    resample = None
    if "A" in vb or "Atilde" in vb:
        if not ("A" in vb and "Atilde" in vb):
            raise ValidationError("variant-spec",
                                  "variant.A and variant.Atilde must be given together")
        resample = validate_resample(model, vb["A"], vb["Atilde"], vb.get("Qtilde"))
    if tag == "sticky" and sticky is None:
        raise ValidationError("variant-spec", "variant.a is required when tag is 'sticky'")
    if tag == "resampled" and resample is None:
        raise ValidationError("variant-spec",
                              "variant.A/Atilde are required when tag is 'resampled'")

    ab = raw.get("analysis", {})
    _reject_unknown(ab, {"q", "grid"}, "analysis")
    q = float(ab.get("q", 1.0))
    if not np.isfinite(q) or q <= 0.0:
        raise ValidationError("config-analysis", f"analysis.q must be > 0, got {q}")
    gb = dict(_GRID_DEFAULT)
    gb.update(ab.get("grid", {}))
    _reject_unknown(gb, set(_GRID_DEFAULT), "analysis.grid")
    points = int(gb["points"])
    if points < 2:
        raise ValidationError("config-grid", "analysis.grid.points must be >= 2")
    lo, hi = float(gb["min"]), float(gb["max"])
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo < 0.0 or hi <= lo:
        raise ValidationError("config-grid",
                              f"analysis.grid requires 0 <= min < max, got [{lo}, {hi}]")
    if gb["spacing"] == "linear":
        grid = np.linspace(lo, hi, points)
    elif gb["spacing"] == "log":
        if lo <= 0.0:
            raise ValidationError("config-grid", "log spacing requires min > 0")
        grid = np.geomspace(lo, hi, points)
    else:
        raise ValidationError("config-grid",
                              f"analysis.grid.spacing must be 'linear' or 'log', got {gb['spacing']!r}")

    sb = dict(_SIM_DEFAULT)
    sb.update(raw.get("simulation", {}))
    _reject_unknown(sb, set(_SIM_DEFAULT), "simulation")
    return RunConfig(model=model, sticky=sticky, resample=resample, tag=tag,
                     q=q, grid=grid, lam=float(sb["lambda"]),
                     horizon=float(sb["horizon"]), seed=int(sb["seed"]),
                     replications=int(sb["replications"]))


def _emit_block(out: TextIO, name: str, arr: np.ndarray) -> None:
    arr = np.atleast_2d(np.asarray(arr, dtype=float))
    kind = "vector" if arr.shape[0] == 1 else "matrix"
    out.write(f"# block: {name} kind={kind} rows={arr.shape[0]} cols={arr.shape[1]}\n")
    for row in arr:
        out.write(",".join(_fnum(v) for v in row) + "\n")


def _law_for(cfg: RunConfig, tag: str):
    if tag == "standard":
        return stationary_standard(cfg.model)
    if tag == "sticky":
        cfg.variant("sticky")  # raises if the spec is missing
        return stationary_sticky(cfg.model, cfg.sticky)
    cfg.variant("resampled")
    return stationary_resampled(cfg.model, cfg.resample)


def _cmd_validate(cfg: RunConfig, out: TextIO) -> int:
    m = cfg.model
    out.write(f"phases: {m.m}\n")
    out.write("alpha: " + ",".join(_fnum(v) for v in m.alpha) + "\n")
    out.write(f"drift: {_fnum(m.drift)}\n")
    out.write(f"rate_threshold: {_fnum(m.rate_threshold())}\n")
    out.write(f"variant: {cfg.tag}\n")
    return 0


def _cmd_solve(cfg: RunConfig, tag: str, out: TextIO) -> int:
    model = cfg.model
    sol0 = solve_stable_quadratic(model.Q, model.mu, model.sigma, 0.0)
    solq = solve_stable_quadratic(model.Q, model.mu, model.sigma, cfg.q)
    variant = cfg.variant(tag)
    law = expected_sojourn(variant, model, cfg.q)
    _emit_block(out, "U0", sol0.U)
    _emit_block(out, "Uq", solq.U)
    _emit_block(out, "K", matrix_K(model, sol0.U))
    _emit_block(out, "nu", vector_nu(model))
    _emit_block(out, "alpha", model.alpha)
    _emit_block(out, "ell", vector_ell(model))
    _emit_block(out, f"rho_{variant.tag}", law.rho)
    _emit_block(out, "m_vec", law.m_vec)
    return 0


def _cmd_cdf(cfg: RunConfig, tag: str, out: TextIO) -> int:
    law = _law_for(cfg, tag or cfg.tag)
    values = evaluate_cdf(law, cfg.grid)
    out.write(f"# variant: {tag or cfg.tag}\n")
    out.write("x," + ",".join(f"G_phase{i + 1}" for i in range(law.m)) + "\n")
    for x, row in zip(cfg.grid, values):
        out.write(_fnum(x) + "," + ",".join(_fnum(v) for v in row) + "\n")
    return 0


def _cmd_simulate(cfg: RunConfig, tag: str, compare: bool, out: TextIO) -> int:
    variant = cfg.variant(tag)
    sim_cfg = SimConfig(lam=cfg.lam, variant=variant, q=cfg.q,
                        horizon=cfg.horizon, seed=cfg.seed, grid=cfg.grid,
                        replications=cfg.replications)
    emp = simulate(sim_cfg, cfg.model)
    emp.to_csv(out)
    if compare:
        law = _law_for(cfg, variant.tag)
        per_phase, total = ks_distance(emp, law)
        out.write("# ks_per_phase: " + ",".join(_fnum(v) for v in per_phase) + "\n")
        out.write(f"# ks_total: {_fnum(total)}\n")
        reg = regen_stats_compare(emp, expected_sojourn(variant, cfg.model, cfg.q))
        out.write("# regen_freq_dev: " + ",".join(_fnum(v) for v in reg.freq_dev) + "\n")
        out.write("# regen_freq_se: " + ",".join(_fnum(v) for v in reg.freq_se) + "\n")
        out.write(f"# mean_cycle_dev: {_fnum(reg.cycle_dev)}\n")
        out.write(f"# mean_cycle_se: {_fnum(reg.cycle_se)}\n")
        out.write(f"# within_3se: {reg.within(3.0)}\n")
    return 0


def _cmd_verify(cfg: RunConfig, out: TextIO, k_perturb: float = 0.0) -> int:
    checks, notes = run_verify(cfg.model, sticky=cfg.sticky,
                               resample=cfg.resample, grid=cfg.grid,
                               k_perturb=k_perturb)
    failed = 0
    for c in checks:
        out.write(c.line() + "\n")
        if not c.passed:
            failed += 1
    for note in notes:
        out.write(f"# {note}\n")
    out.write(f"{len(checks) - failed}/{len(checks)} checks passed\n")
    return 0 if failed == 0 else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmbm",
        description="Stationary laws and simulation of regulated "
                    "Markov-modulated Brownian motions with sticky boundaries.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("validate", "validate the model and print its summary"),
            ("solve", "emit the solver matrices and vectors as labeled CSV blocks"),
            ("cdf", "evaluate the selected stationary law on the grid"),
            ("simulate", "run the flip-flop simulator and emit its statistics"),
            ("verify", "run the full cross-check suite")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="path to the JSON configuration file")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--q", type=float, default=None, help="override analysis q")
        p.add_argument("--lambda", dest="lam", type=float, default=None,
                       help="override the oscillation rate")
        p.add_argument("--seed", type=int, default=None, help="override the seed")
        if name in ("solve", "cdf", "simulate"):
            p.add_argument("--variant", default=None,
                           choices=("standard", "sticky", "resampled"),
                           help="select the boundary variant")
        if name == "simulate":
            p.add_argument("--compare", action="store_true",
                           help="append comparisons against the analytic law")
    return parser


def run_command(argv) -> int:
    """Dispatch a CLI invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config)
        if args.q is not None:
            if not np.isfinite(args.q) or args.q <= 0.0:
                raise ValidationError("config-analysis", f"--q must be > 0, got {args.q}")
            cfg.q = args.q
        if args.lam is not None:
            cfg.lam = args.lam
        if args.seed is not None:
            cfg.seed = args.seed
        tag = getattr(args, "variant", None)
        sink = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
        try:
            if args.command == "validate":
                return _cmd_validate(cfg, sink)
            if args.command == "solve":
                return _cmd_solve(cfg, tag, sink)
            if args.command == "cdf":
                return _cmd_cdf(cfg, tag, sink)
            if args.command == "simulate":
                return _cmd_simulate(cfg, tag, args.compare, sink)
            return _cmd_verify(cfg, sink)
        finally:
            if args.out:
                sink.close()
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MmbmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
