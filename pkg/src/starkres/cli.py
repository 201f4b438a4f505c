"""Command-line front end: resonance, sweep-mu, scan, trace, validate.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import svg
from .profiles import Profile, make_model2, profile_from_spec
from .quadrature import NonConvergence
from .resolvent import EvalBudget, i6_decay, model2_r0_formula, model_F, order_law_fit
from .rootfind import (BoundaryZero, NoConvergence, NonIntegerWinding, ResonanceRecord, newton, scan_window,
                       winding_count)
from .trajectories import (BranchLost, fmt, instability_report, mu_sweep, trace_many,
                           write_mu_sweep_csv, write_trajectory_csv)

NUMERICAL_ERRORS = (NoConvergence, NonConvergence, BranchLost, BoundaryZero, NonIntegerWinding)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    model: str = "model1"
    profile: Optional[dict] = None
    mu: float = 0.1
    epsilon: float = 0.05
    f: float = 0.0
    f_range: list = field(default_factory=lambda: [0.02, 0.002])
    steps: int = 10
    mode: str = "ray"
    window: list = field(default_factory=lambda: [0.9, 1.1, -0.04, -0.0005])
    grid: list = field(default_factory=lambda: [8, 4])
    tol: float = 1e-12
    rel_tol: float = 1e-10
    threads: Optional[int] = None
    out: str = "."
    svg: bool = False
    seeds: list = field(default_factory=list)
    mu_grid: list = field(default_factory=lambda: [0.025, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.85])
    validate_z: list = field(default_factory=lambda: [1.02, -0.005])
    validate_fs: list = field(default_factory=lambda: [0.04, 0.02, 0.01, 0.005])

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        for k in data:
            if k not in names:
                raise ConfigError(f"field {k!r}: unknown field")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(data)

    def validate(self) -> None:
        def need(cond, name, msg):
            if not cond:
                raise ConfigError(f"field {name!r}: {msg}")

        need(self.model in ("model1", "model2"), "model", "must be model1 or model2")
        for name in ("mu", "epsilon", "f", "tol", "rel_tol"):
            need(isinstance(getattr(self, name), (int, float)) and not isinstance(getattr(self, name), bool),
                 name, "must be a number")
        need(self.mu >= 0, "mu", "must be >= 0")
        need(self.epsilon >= 0, "epsilon", "must be >= 0")
        need(self.f >= 0, "f", "must be >= 0")
        need(self.tol > 0, "tol", "must be > 0")
        need(self.rel_tol > 0, "rel_tol", "must be > 0")
        need(len(self.f_range) == 2 and self.f_range[0] > self.f_range[1] > 0, "f_range",
             "needs [f_start, f_end] with f_start > f_end > 0")
        need(isinstance(self.steps, int) and self.steps >= 2, "steps", "must be an integer >= 2")
        need(self.mode in ("ray", "branch"), "mode", "must be ray or branch")
        need(len(self.window) == 4 and self.window[0] < self.window[1] and self.window[2] < self.window[3],
             "window", "needs [re_lo, re_hi, im_lo, im_hi] with lo < hi")
        need(len(self.grid) == 2 and all(isinstance(n, int) and n > 0 for n in self.grid), "grid",
             "needs two positive integers")
        need(self.threads is None or (isinstance(self.threads, int) and self.threads > 0), "threads",
             "must be a positive integer")
        need(all(isinstance(s, list) and len(s) == 2 for s in self.seeds), "seeds", "needs [[re, im], ...]")
        need(len(self.mu_grid) > 0 and all(0 < m <= 0.85 for m in self.mu_grid), "mu_grid",
             "values must lie in (0, 0.85]")
        need(len(self.validate_z) == 2, "validate_z", "needs [re, im]")
        need(len(self.validate_fs) >= 2 and all(f > 0 for f in self.validate_fs), "validate_fs",
             "needs at least two positive values")
        need(self.profile is None or isinstance(self.profile, dict), "profile", "must be an object")


# ---------------------------------------------------------------- helpers

def resolve_threads(cfg: RunConfig) -> int:
    if cfg.threads:
        return cfg.threads
    env = os.environ.get("STARKRES_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def build_profile(cfg: RunConfig) -> Profile:
    try:
        if cfg.model == "model1":
            spec = cfg.profile or {"kind": "gaussian", "mu": cfg.mu}
            return profile_from_spec(spec)
        psi0 = profile_from_spec(cfg.profile or {"kind": "psi0_default"})
        return make_model2(psi0, cfg.epsilon)
    except (KeyError, ValueError, TypeError) as exc:
        # NormSignError is a ValueError and lands here too
        raise ConfigError(f"field 'profile': {exc}") from None


def default_seed(cfg: RunConfig, p: Profile) -> complex:
    if cfg.seeds:
        return complex(*cfg.seeds[0])
    if cfg.model == "model2":
        return model2_r0_formula(p)
    return 1 - 0.001j


def f0_resonance(cfg: RunConfig, p: Profile, budget: EvalBudget) -> complex:
    F = model_F(cfg.model, p, budget)
    seed = model2_r0_formula(p) if cfg.model == "model2" else 1 - 0.001j
    return newton(lambda z: F(z, 0.0), seed, cfg.tol).z


def certify(F, z: complex, f: float, threads: int) -> bool:
    rad = 1e-3 if f == 0 else min(1e-3, 0.1 * math.pi * f / math.sqrt(max(z.real, 1e-3)))
    try:
        return winding_count(F, (z - rad * (1 + 1j), z + rad * (1 + 1j)), 16, threads=threads).count == 1
    except (BoundaryZero, NonIntegerWinding):
        return False


def complex_json(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


def write_text(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def emit_summary(out: Path, name: str, summary: dict) -> None:
    text = json.dumps(summary, indent=2, sort_keys=True, default=str) + "\n"
    write_text(out, name, text)
    sys.stdout.write(text)


# ---------------------------------------------------------------- subcommands

def cmd_resonance(cfg: RunConfig) -> int:
    """Find and certify one zero of F near the seed."""
    p = build_profile(cfg)
    budget = EvalBudget(rel_tol=cfg.rel_tol)
    F = model_F(cfg.model, p, budget)
    Fz = lambda z: F(z, cfg.f)
    if cfg.model == "model1" and p.l2_norm == 0:
        # decoupled: F = 1 - z has the exact root 1
        rec = ResonanceRecord(1.0 + 0j, 0.0, 0, cfg.f, cfg.model)
    else:
        rec = newton(Fz, default_seed(cfg, p), cfg.tol, f=cfg.f, model=cfg.model)
    rec.count_certified = certify(Fz, rec.z, cfg.f, resolve_threads(cfg))
    summary = rec.as_dict()
    if cfg.model == "model2" and cfg.f == 0:
        summary["formula"] = complex_json(model2_r0_formula(p))
    emit_summary(Path(cfg.out), "resonance.json", summary)
    return 0 if rec.count_certified else 2


def cmd_sweep_mu(cfg: RunConfig) -> int:
    """Field-free resonance r0 as a function of mu."""
    pts = mu_sweep(cfg.mu_grid, tol=cfg.tol)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "mu_sweep.csv", "w", newline="") as fh:
        write_mu_sweep_csv(pts, fh)
    small = [q for q in pts if q.mu <= 0.2]
    exponent = None
    if len(small) >= 2:
        exponent = float(np.polyfit(np.log([q.mu for q in small]), np.log([abs(q.r0 - 1) for q in small]), 1)[0])
    summary = {"count": len(pts), "small_mu_exponent": exponent,
               "points": [{"mu": q.mu, **complex_json(q.r0), "residual": q.residual} for q in pts]}
    if cfg.svg:
        mus = [q.mu for q in pts]
        write_text(out, "mu_sweep_re.svg", svg.plot([("Re r0", mus, [q.r0.real for q in pts])],
                                                    "Real part of the resonance r0(mu)", "mu", "Re r0"))
        write_text(out, "mu_sweep_im.svg", svg.plot([("Im r0", mus, [q.r0.imag for q in pts])],
                                                    "Imaginary part of the resonance r0(mu)", "mu", "Im r0"))
    emit_summary(out, "sweep_mu_summary.json", summary)
    return 0


def cmd_scan(cfg: RunConfig) -> int:
    """All zeros of F in a window, cross-checked by the winding count."""
    p = build_profile(cfg)
    budget = EvalBudget(rel_tol=cfg.rel_tol)
    F = model_F(cfg.model, p, budget)
    re_lo, re_hi, im_lo, im_hi = cfg.window
    res = scan_window(lambda z: F(z, cfg.f), (complex(re_lo, im_lo), complex(re_hi, im_hi)), tuple(cfg.grid),
                      tol=cfg.tol, threads=resolve_threads(cfg), f=cfg.f, model=cfg.model)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "scan.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["re_z", "im_z", "residual", "newton_iters", "count_certified", "multiplicity"])
        for r in res.records:
            w.writerow([fmt(r.z.real), fmt(r.z.imag), fmt(r.residual), r.newton_iters,
                        int(r.count_certified), r.multiplicity])
    summary = {"count": res.count, "winding_count": res.winding.count if res.winding else None,
               "mismatch": res.mismatch, "starts": res.starts, "failures": res.failures,
               "diagnostics": res.diagnostics, "f": cfg.f, "window": cfg.window}
    if cfg.svg:
        write_text(out, "scan.svg", svg.plot([("zeros", [r.z.real for r in res.records],
                                                [r.z.imag for r in res.records])],
                                              f"Zeros of F at f={cfg.f:g}", "Re z", "Im z", scatter=True))
    emit_summary(out, "scan_summary.json", summary)
    return 2 if res.mismatch else 0


def cmd_trace(cfg: RunConfig) -> int:
    """Follow zeros as f decreases and report the instability diagnostics."""
    p = build_profile(cfg)
    budget = EvalBudget(rel_tol=cfg.rel_tol)
    r0 = f0_resonance(cfg, p, budget)
    seeds = [complex(*s) for s in cfg.seeds] or [r0]
    runs = trace_many(cfg.model, p, cfg.f_range[0], cfg.f_range[1], cfg.steps, seeds,
                      threads=resolve_threads(cfg), mode=cfg.mode, tol=cfg.tol, budget=budget)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    reports, failed = [], []
    for i, traj in enumerate(runs):
        if isinstance(traj, Exception):
            failed.append({"seed": i, "error": str(traj)})
            continue
        with open(out / ("trace.csv" if i == 0 else f"trace_{i}.csv"), "w", newline="") as fh:
            write_trajectory_csv(traj, fh)
        rep = instability_report(traj, r0, f_cut=max(cfg.f_range[1], 0.1 * abs(r0.imag)))
        reports.append({"seed": i, "c0_hat": rep.c0_hat, "min_dist_to_r0": rep.min_dist_to_r0,
                        "verdict": rep.verdict, "kendall_tau": rep.kendall_tau, "kendall_p": rep.kendall_p,
                        "f_range": list(rep.f_range), "branches": traj[-1].branch + 1})
        if cfg.svg:
            fs = [q.f for q in traj]
            write_text(out, f"trace_{i}_ratio.svg", svg.plot([("|Im r|/f", fs, [q.im_over_f for q in traj])],
                                                             "Ratio |Im r|/f along the trace", "f", "|Im r|/f"))
            write_text(out, f"trace_{i}_plane.svg", svg.plot([("r(f)", [q.r.real for q in traj],
                                                                [q.r.imag for q in traj])],
                                                              "Zero positions along the trace", "Re r", "Im r",
                                                              scatter=True))
    summary = {"r0": complex_json(r0), "runs": reports, "failed": failed}
    emit_summary(out, "trace_summary.json", summary)
    return 2 if failed else 0


def cmd_validate(cfg: RunConfig) -> int:
    """Order-law fits of the small-f expansions; nonzero exit on deviation."""
    cfg_p = dataclasses.replace(cfg, model="model1")
    p = build_profile(cfg_p)
    z = complex(*cfg.validate_z)
    fs = sorted(cfg.validate_fs, reverse=True)
    law = order_law_fit(z, fs, p)
    decay = i6_decay(z, fs[:3], p, EvalBudget(rel_tol=cfg.rel_tol))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "validate.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["f", "err_expansion24", "err_leading26"])
        for f, a, b in zip(law.fs, law.err24, law.err26):
            w.writerow([fmt(f), fmt(a), fmt(b)])
    dev = law.deviations()
    ok = all(d <= 0.25 for d in dev.values()) and decay.slope < 0
    summary = {"z": complex_json(z), "slope_expansion24": law.slope24, "slope_leading26": law.slope26,
               "expected": {"expansion24": 1.0, "leading26": 0.5}, "deviation": dev,
               "i6_log_slope_vs_inv_f": decay.slope, "passed": ok}
    if cfg.svg:
        write_text(out, "validate.svg", svg.plot([("log err expansion24", list(np.log(law.fs)), list(np.log(law.err24))),
                                                  ("log err leading26", list(np.log(law.fs)), list(np.log(law.err26)))],
                                                 "Approximation error against f", "log f", "log error"))
    emit_summary(out, "validate_summary.json", summary)
    return 0 if ok else 2


COMMANDS = {"resonance": cmd_resonance, "sweep-mu": cmd_sweep_mu, "scan": cmd_scan,
            "trace": cmd_trace, "validate": cmd_validate}


# ---------------------------------------------------------------- argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _grid(text: str) -> list[int]:
    try:
        n, m = text.lower().split("x")
        return [int(n), int(m)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like NxM, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--model", choices=["model1", "model2"])
    common.add_argument("--mu", type=float)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--f", type=float, help="field strength")
    common.add_argument("--f-range", type=float, nargs=2, metavar=("F_START", "F_END"))
    common.add_argument("--steps", type=int)
    common.add_argument("--mode", choices=["ray", "branch"])
    common.add_argument("--window", type=float, nargs=4, metavar=("RE_LO", "RE_HI", "IM_LO", "IM_HI"))
    common.add_argument("--grid", type=_grid, help="scan grid NxM")
    common.add_argument("--seed", type=float, nargs=2, action="append", metavar=("RE", "IM"))
    common.add_argument("--tol", type=float)
    common.add_argument("--threads", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--svg", action="store_true", default=None)
    parser = _Parser(prog="starkres", description="Resonances of a Friedrichs model in a constant field.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name).strip().split("\n")[0])
    return parser


def config_from_args(args) -> RunConfig:
    data = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        data = dataclasses.asdict(RunConfig.from_json(text))
    flags = {"model": args.model, "mu": args.mu, "epsilon": args.epsilon, "f": args.f,
             "f_range": args.f_range, "steps": args.steps, "mode": args.mode, "window": args.window,
             "grid": args.grid, "tol": args.tol, "threads": args.threads, "out": args.out, "svg": args.svg,
             "seeds": [list(s) for s in args.seed] if args.seed else None}
    data.update({k: v for k, v in flags.items() if v is not None})
    return RunConfig.from_dict(data)


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        # the effective config makes every artifact directory reproducible
        write_text(Path(cfg.out), f"{args.command}_config.json", cfg.to_json())
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
