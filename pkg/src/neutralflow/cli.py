"""Command-line entry point.

Subcommands: solve (single boundary-value run), family (multi-leaf filling
run), oracle (reduction-coefficient fit), verify (geometric property suite).
Configuration is flat `key = value` text with dotted sections; every key has
a default and unknown keys are errors.  Exit codes: 0 success, 1 config or
usage error, 2 non-convergence / failed checks.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, runio, verification
from .family import ambient_congruence, evolve_family
from .geometry import OrientedLine, eta_from_psi, line_to_euclidean
from .oracle import reduction_consistency
from .profiles import ORACLE_PROFILE_NAMES, named_profile
from .solver import DefinitenessError, SolverConfig, boundary_implied_B, boundary_implied_u, run


class ConfigError(ValueError):
    pass


# key -> (type, default); bool values are "true"/"false"
CONFIG_SCHEMA = {
    "solver.theta0": (float, 0.3),
    "solver.c0": (float, 2.0 * math.sin(0.3) ** 2),
    "solver.c1": (float, 0.0),
    "solver.k": (float, 2.0),
    "solver.neumann_variant": (str, "consistent-cot-theta"),
    "solver.boundary_mode": (str, "dirichlet-pinned"),
    "solver.grid_n": (int, 400),
    "solver.scheme": (str, "semi-implicit"),
    "solver.dt_safety": (float, 0.5),
    "solver.semi_dt_factor": (float, 10.0),
    "solver.t_end": (float, 5.0),
    "solver.tol_steady": (float, 1e-10),
    "solver.monitor_every": (int, 50),
    "solver.snapshot_count": (int, 11),
    "initial.kind": (str, "perturbed"),
    "initial.amplitude_frac": (float, 0.1),
    "family.ambient": (str, "tan2"),
    "family.vartheta0": (float, 0.3),
    "family.leaves": (int, 8),
    "family.amplitude_frac": (float, 0.1),
    "family.samples": (int, 60),
    "family.euclidean_samples": (bool, False),
    "oracle.profiles": (str, ",".join(ORACLE_PROFILE_NAMES)),
    "oracle.thetas": (str, "0.05,0.10,0.15,0.20,0.25,0.30,0.35"),
}


def parse_config(path: Path | None) -> dict:
    """Flat key = value config; unknown keys and bad values are errors."""
    cfg = {k: v for k, (_, v) in CONFIG_SCHEMA.items()}
    if path is None:
        return cfg
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in CONFIG_SCHEMA:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        typ, _ = CONFIG_SCHEMA[key]
        try:
            if typ is bool:
                if value.lower() not in ("true", "false"):
                    raise ValueError("expected true/false")
                cfg[key] = value.lower() == "true"
            else:
                cfg[key] = typ(value)
        except ValueError as err:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {err}") from None
    return cfg


def solver_config_from(cfg: dict, args) -> SolverConfig:
    amp = cfg["initial.amplitude_frac"] * cfg["solver.c0"]
    sc = SolverConfig(
        theta0=cfg["solver.theta0"],
        c0=cfg["solver.c0"],
        c1=cfg["solver.c1"],
        k=cfg["solver.k"],
        neumann_variant=cfg["solver.neumann_variant"],
        boundary_mode=cfg["solver.boundary_mode"],
        grid_n=cfg["solver.grid_n"],
        scheme=cfg["solver.scheme"],
        dt_safety=cfg["solver.dt_safety"],
        semi_dt_factor=cfg["solver.semi_dt_factor"],
        t_end=cfg["solver.t_end"],
        tol_steady=cfg["solver.tol_steady"],
        initial_kind=cfg["initial.kind"],
        initial_amplitude=amp,
        monitor_every=cfg["solver.monitor_every"],
        snapshot_count=cfg["solver.snapshot_count"],
    )
    if args.k is not None:
        sc = replace(sc, k=float(args.k))
    if args.paper_literal:
        sc = replace(sc, neumann_variant="paper-literal-cot-two-theta")
    return sc


def resolve_out(args) -> Path:
    out = os.environ.get("NEUTRALFLOW_OUT") or args.out
    if out is None:
        raise ConfigError("no output directory: pass --out or set NEUTRALFLOW_OUT")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def config_echo(cfg: dict, args) -> dict:
    echo = dict(cfg)
    if args.k is not None:
        echo["solver.k"] = float(args.k)
    if args.paper_literal:
        echo["solver.neumann_variant"] = "paper-literal-cot-two-theta"
    echo["seed"] = args.seed
    return echo


def cmd_solve(args) -> int:
    t0 = time.time()
    cfg = parse_config(args.config)
    sc = solver_config_from(cfg, args)
    out = resolve_out(args)
    try:
        result = run(sc)
    except (DefinitenessError, ValueError) as err:
        print(f"solve failed: {err}", file=sys.stderr)
        return 1
    for idx, (t, prof) in enumerate(result.snapshots[:-1]):
        runio.write_profile_csv(out / f"profile_{idx:04d}.csv", prof)
    runio.write_profile_csv(out / "profile_final.csv", result.snapshots[-1][1])
    from .geometry import stationary_profile

    runio.write_profile_csv(
        out / "limit_profile.csv", stationary_profile(result.report.limit, sc.grid)
    )
    runio.write_monitors_csv(out / "monitors.csv", result.monitors)
    rep = result.report
    payload = {
        "config": config_echo(cfg, args),
        "converged": rep.converged,
        "t_converged": rep.t_converged,
        "a": rep.limit.a,
        "b": rep.limit.b,
        "linf_error": rep.linf_error_to_limit,
        "decay_slope": None if math.isnan(rep.decay_slope) else rep.decay_slope,
        "axis_compatible": rep.axis_compatible,
        "monitor_extrema": rep.monitor_extrema,
        "boundary_implied_u": boundary_implied_u(sc),
        "boundary_implied_B": boundary_implied_B(sc),
        "snapshot_times": [t for t, _ in result.snapshots],
    }
    runio.write_json(out / "report.json", payload)
    runio.write_manifest(out, "solve", args.config, config_echo(cfg, args), time.time() - t0)
    if not args.quiet:
        state = "converged" if rep.converged else "NOT converged"
        print(
            f"solve: {state} at t={rep.t_converged:.6g}, "
            f"residual={result.monitors[-1].steady_residual:.3e}, "
            f"linf error to limit={rep.linf_error_to_limit:.3e}"
        )
    return 0 if rep.converged else 2


def _euclidean_rows(profile):
    rows = []
    theta = profile.theta_grid
    stride = max(1, theta.size // 12)
    for i in range(1, theta.size, stride):
        psi = float(profile.values[i])
        for phi in np.linspace(0.0, 2.0 * math.pi, 13):
            line = OrientedLine(
                math.tan(theta[i] / 2.0) * complex(math.cos(phi), math.sin(phi)),
                eta_from_psi(float(theta[i]), float(phi), psi),
            )
            for r in (-1.0, 0.0, 1.0):
                x = line_to_euclidean(line, r)
                rows.append((theta[i], phi, r, x[0], x[1], x[2]))
    return rows


def cmd_family(args) -> int:
    t0 = time.time()
    cfg = parse_config(args.config)
    sc = solver_config_from(cfg, args)
    out = resolve_out(args)
    n_leaves = cfg["family.leaves"]
    if sc.grid_n % n_leaves:
        print(f"config error: family.leaves={n_leaves} must divide solver.grid_n={sc.grid_n}",
              file=sys.stderr)
        return 1
    try:
        amb = ambient_congruence(cfg["family.ambient"], cfg["family.vartheta0"])
        angles = cfg["family.vartheta0"] * np.arange(1, n_leaves + 1) / n_leaves
        report = evolve_family(
            amb, angles, sc,
            amplitude_frac=cfg["family.amplitude_frac"],
            n_samples=cfg["family.samples"],
        )
    except (DefinitenessError, ValueError) as err:
        print(f"family failed: {err}", file=sys.stderr)
        return 1
    rows = []
    for si, t in enumerate(report.sample_times):
        for li, leaf in enumerate(report.leaves):
            sep = report.separation_series[si, min(li, report.separation_series.shape[1] - 1)] \
                if len(report.leaves) > 1 else math.inf
            rows.append((t, li, report.linf_series[si, li], sep))
    runio.write_csv(out / "family.csv", ("t", "leaf_index", "linf_error", "min_separation"), rows)
    for li, leaf in enumerate(report.leaves):
        runio.write_profile_csv(out / f"leaf_final_{li:02d}.csv", leaf.final_profile)
        if cfg["family.euclidean_samples"]:
            runio.write_csv(
                out / f"leaf_lines_{li:02d}.csv",
                ("theta", "phi", "r", "x1", "x2", "x3"),
                _euclidean_rows(leaf.final_profile),
            )
    payload = {
        "config": config_echo(cfg, args),
        "filling": report.filling,
        "failure": report.failure,
        "min_separation": report.min_separation,
        "leaves": [
            {
                "vartheta": l.vartheta,
                "converged": l.converged,
                "t_converged": l.t_converged,
                "linf_error": l.linf_error_to_limit,
                "a": l.a,
                "b": l.b,
                "axis_slope": l.axis_slope,
            }
            for l in report.leaves
        ],
    }
    runio.write_json(out / "family_report.json", payload)
    runio.write_manifest(out, "family", args.config, config_echo(cfg, args), time.time() - t0)
    if not args.quiet:
        print(
            f"family: filling={report.filling}, min separation={report.min_separation:.3e}, "
            f"worst leaf error={max(l.linf_error_to_limit for l in report.leaves):.3e}"
        )
    return 0 if report.filling else 2


def cmd_oracle(args) -> int:
    cfg = parse_config(args.config)
    names = [s for s in cfg["oracle.profiles"].split(",") if s.strip()]
    try:
        thetas = [float(s) for s in cfg["oracle.thetas"].split(",") if s.strip()]
    except ValueError as err:
        print(f"config error: bad oracle.thetas: {err}", file=sys.stderr)
        return 1
    if not thetas or not names:
        print("oracle error: empty profile or sample list", file=sys.stderr)
        return 1
    k_cmp = float(args.k) if args.k is not None else None
    fits = {}
    for name in names:
        prof = named_profile(name)
        fit = reduction_consistency(prof, thetas)
        fits[name] = fit
        if not args.quiet:
            print(f"profile {name:>10}: k = {fit.k_mean:.6f} +- {fit.k_spread:.2e} "
                  f"({fit.thetas.size} samples)")
        if k_cmp is not None and abs(k_cmp - 2.0) > 1e-12 and not args.quiet:
            # predicted mismatch of the k != 2 right-hand side: (2-k) sqrt(psi) cot(2 theta)
            for th in fit.thetas:
                psi = float(prof.psi(th))
                predicted = (2.0 - k_cmp) * math.sqrt(psi) / math.tan(2.0 * th)
                print(f"    theta={th:.2f}: rhs(k={k_cmp:g}) - psidot = {predicted:.6f} (predicted)")
    overall = np.array([f.k_mean for f in fits.values()])
    spread = max(f.k_spread for f in fits.values())
    if not args.quiet:
        print(f"fitted drift coefficient: {np.mean(overall):.6f} (max spread {spread:.2e})")
    if args.out or os.environ.get("NEUTRALFLOW_OUT"):
        out = resolve_out(args)
        payload = {
            "config": config_echo(cfg, args),
            "profiles": {
                name: {
                    "k_mean": fit.k_mean,
                    "k_spread": fit.k_spread,
                    "thetas": list(fit.thetas),
                    "k_samples": list(fit.k_samples),
                }
                for name, fit in fits.items()
            },
        }
        runio.write_json(out / "oracle_report.json", payload)
        runio.write_manifest(out, "oracle", args.config, config_echo(cfg, args), 0.0)
    return 0


def cmd_verify(args) -> int:
    checks = verification.run_suite(seed=args.seed, count=args.count, tol_scale=args.tol_scale)
    if not args.quiet:
        print(verification.format_table(checks))
    return 0 if all(c.passed for c in checks) else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="neutralflow",
        description="Mean curvature flow laboratory for rotationally symmetric line congruences",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", type=Path, default=None, help="flat key=value config file")
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (env NEUTRALFLOW_OUT overrides)")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
        p.add_argument("--k", type=float, default=None, choices=None,
                       help="drift coefficient override (default 2; 1 runs the alternative drift)")
        p.add_argument("--paper-literal", action="store_true",
                       help="use the cot(2 theta0) Neumann variant")
        p.add_argument("--quiet", action="store_true")

    common(sub.add_parser("solve", help="run one boundary-value flow to steady state"))
    common(sub.add_parser("family", help="run the multi-leaf filling flow"))
    common(sub.add_parser("oracle", help="fit the reduced-flow drift coefficient"))
    pv = sub.add_parser("verify", help="run the geometric property suite")
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--count", type=int, default=120, help="number of randomized jets")
    pv.add_argument("--tol-scale", type=float, default=1.0,
                    help="scale every tolerance (0 lists controlled failures)")
    pv.add_argument("--quiet", action="store_true")

    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "family":
            return cmd_family(args)
        if args.command == "oracle":
            return cmd_oracle(args)
        return cmd_verify(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
