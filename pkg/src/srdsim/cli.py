"""Command-line front end.

Four subcommands wire configs to the library workflows:

    srdsim simulate --config c.cfg     one trajectory -> snapshots.csv,
                                       phi.csv, energy.txt
    srdsim converge --config c.cfg     resolution study -> study.csv, fit.txt
    srdsim failure  --config c.cfg     failure estimator -> failure.txt,
                                       indicators.csv
    srdsim check    --config c.cfg     inequality / SBP / covariance checks
                                       -> PASS/FAIL lines on stdout

Common flags: ``--seed <u64>``, ``--threads <k>``, ``--out <dir>``, and
repeatable ``--set key=value`` overrides.  Every output file starts with
``#`` comment lines echoing the resolved configuration and seed, so runs
are self-describing; the thread count never changes file contents.

Exit codes: 0 ok, 2 config error, 3 numerical overflow, 4 partial
failure (too many overflowed samples), 5 check failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace

import numpy as np

from .analysis import convergence_study, fit_order
from .config import Config, load_config
from .errors import ConfigError, TrajectoryOverflowError
from .grid import Grid, GridFunction, v_seminorm
from .mc import (
    clip_interval,
    confidence_halfwidth,
    estimate_failure_probability,
)
from .model import CheckSpec, check_assumptions
from .noise import derive_substream, discretize_kernel
from .operators import sbp_defect
from .sim import energy_check, run_trajectory

__all__ = ["main", "main_entry"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_OVERFLOW = 3
EXIT_PARTIAL = 4
EXIT_CHECK = 5


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _header_lines(cfg: Config, seed: int) -> list[str]:
    lines = [f"{k} = {v}" for k, v in cfg.resolved_items()]
    lines.append(f"seed = {seed}")
    return lines


def _write_lines(path: str, comments: list[str], body: list[str]) -> None:
    with open(path, "w") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        for line in body:
            fh.write(line + "\n")


def _write_csv(path: str, comments: list[str], header: str, rows) -> None:
    body = [header]
    body.extend(",".join(_fmt(x) for x in row) for row in rows)
    _write_lines(path, comments, body)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(cfg: Config, seed: int, threads: int, out: str) -> int:
    model = cfg.build_model()
    solver = cfg.build_solver_config()
    if solver.snapshot_stride == 0:
        # the snapshot file should show the field at a handful of times
        solver = replace(solver, snapshot_stride=max(1, solver.steps // 4))
    kernel = cfg.build_kernel()
    noise = discretize_kernel(kernel, solver.grid, cfg.quad_order())
    state0 = cfg.build_initial_state(model, solver.grid)
    rng = derive_substream(seed, 0)
    try:
        traj = run_trajectory(solver, model, noise, state0.v, state0.w, rng)
    except TrajectoryOverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW

    comments = _header_lines(cfg, seed)
    xi = solver.grid.nodes()
    snap_rows = []
    for t, snap in zip(traj.snapshot_times, traj.snapshots):
        for x, v, w in zip(xi, snap.v.values, snap.w.values):
            snap_rows.append((t, x, v, w))
    _write_csv(os.path.join(out, "snapshots.csv"), comments, "t,xi,v,w", snap_rows)
    _write_csv(
        os.path.join(out, "phi.csv"),
        comments,
        "t,phi",
        zip(traj.times, traj.phi_series),
    )
    report = energy_check([traj], model, noise, solver.T)
    _write_lines(
        os.path.join(out, "energy.txt"),
        comments,
        [
            f"lhs_mean={report.lhs_mean:.17g}",
            f"rhs_bound={report.rhs_bound:.17g}",
            f"margin={report.margin:.17g}",
            f"mc_stderr={report.mc_stderr:.17g}",
            f"samples={report.samples}",
            f"passed={report.passed}",
        ],
    )
    print(
        f"simulate: {solver.steps} steps, min phi after T0 = "
        f"{traj.min_phi_after_t0:.6g}, energy margin = {report.margin:.6g}"
    )
    return EXIT_OK


def cmd_converge(cfg: Config, seed: int, threads: int, out: str) -> int:
    model = cfg.build_model()
    solver = cfg.build_solver_config()
    kernel = cfg.build_kernel()
    ladder = cfg.get_int_list("study.ladder", [32, 64, 128])
    if len(ladder) < 2:
        print("error: study.ladder needs at least two resolutions", file=sys.stderr)
        return EXIT_CONFIG
    samples = cfg.get_int("study.samples", 16)
    ref_factor = cfg.get_int("study.ref_factor", 4)
    p = cfg.get_int("study.p", 2)
    try:
        study = convergence_study(
            solver,
            model,
            kernel,
            ladder,
            ref_factor=ref_factor,
            samples=samples,
            seed=seed,
            p=p,
            quad_order=cfg.quad_order(),
            threads=threads,
            initial_state=lambda grid: cfg.build_initial_state(model, grid),
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    comments = _header_lines(cfg, seed)
    _write_csv(
        os.path.join(out, "study.csv"),
        comments,
        "n,error,samples,failures",
        [(r.n, r.error, r.samples, r.failures) for r in study.rows],
    )
    try:
        fit = fit_order([(r.n, r.error) for r in study.rows])
        fit_body = [
            f"order={fit.order:.17g}",
            f"intercept={fit.intercept:.17g}",
            f"r2={fit.r2:.17g}",
            f"points_used={fit.points_used}",
            f"reference_n={study.reference_n}",
        ]
        print(f"order={fit.order:.6g} r2={fit.r2:.6g}")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _write_lines(os.path.join(out, "fit.txt"), comments, fit_body)

    ok = study.rows[0].samples if study.rows else 0
    if samples > 0 and ok / samples < 0.8:
        print(
            f"warning: only {ok}/{samples} samples completed", file=sys.stderr
        )
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_failure(cfg: Config, seed: int, threads: int, out: str) -> int:
    model = cfg.build_model()
    solver = cfg.build_solver_config()
    kernel = cfg.build_kernel()
    spec = cfg.build_failure_spec()
    noise = discretize_kernel(kernel, solver.grid, cfg.quad_order())
    state0 = cfg.build_initial_state(model, solver.grid)
    estimate = estimate_failure_probability(
        solver, model, noise, spec, seed, initial_state=state0, threads=threads
    )
    gamma = confidence_halfwidth(spec, solver.n)
    lo, hi = (
        clip_interval(estimate.p_hat, gamma)
        if math.isfinite(estimate.p_hat)
        else (math.nan, math.nan)
    )

    comments = _header_lines(cfg, seed)
    _write_lines(
        os.path.join(out, "failure.txt"),
        comments,
        [
            f"p_hat={estimate.p_hat:.17g}",
            f"gamma={gamma:.17g}",
            f"m={estimate.m_effective}",
            f"failures={estimate.failures}",
            f"seed={seed}",
            f"m_requested={estimate.m_requested}",
            f"overflows={estimate.overflows}",
            f"interval_low={lo:.17g}",
            f"interval_high={hi:.17g}",
            "confidence=level alpha (Chebyshev, conservative)",
        ],
    )
    _write_csv(
        os.path.join(out, "indicators.csv"),
        comments,
        "sample,indicator",
        [
            (k, x if x >= 0 else "overflow")
            for k, x in enumerate(estimate.indicators)
        ],
    )
    print(f"p_hat = {estimate.p_hat:.6g} +/- {gamma:.6g}  [{lo:.6g}, {hi:.6g}]")
    if estimate.m_requested and estimate.overflows / estimate.m_requested > 0.2:
        print(
            f"warning: {estimate.overflows}/{estimate.m_requested} overflows",
            file=sys.stderr,
        )
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_check(cfg: Config, seed: int, threads: int, out: str) -> int:
    model = cfg.build_model()
    solver = cfg.build_solver_config()
    kernel = cfg.build_kernel()

    results: list[tuple[str, bool, str]] = []

    spec = CheckSpec(
        box_v=cfg.get_float("check.box_v", 5.0),
        box_w=cfg.get_float("check.box_w", 5.0),
        xi_max=solver.L,
        samples=cfg.get_int("check.samples", 100_000),
        seed=seed,
    )
    report = check_assumptions(model, spec)
    for key in sorted(report.margins):
        margin = report.margins[key]
        results.append((f"{key} margin", margin >= 0.0, f"worst={margin:.6g}"))

    # summation-by-parts residual sweep over random pairs
    pairs = cfg.get_int("check.sbp_pairs", 1000)
    rng = derive_substream(seed, 1)
    worst = 0.0
    for n in (8, 64, solver.n):
        grid = Grid(n, solver.L)
        for _ in range(max(1, pairs // 3)):
            v = GridFunction(grid, rng.standard_normal(n + 1))
            u = GridFunction(grid, rng.standard_normal(n + 1))
            scale = 1.0 + v_seminorm(v) * v_seminorm(u)
            worst = max(worst, abs(sbp_defect(v, u)) / scale)
    results.append(("SBP residual", worst < 1e-10, f"worst={worst:.3g}"))

    # covariance of sampled increments vs h*dt*qn*qn^T on a small grid;
    # entries must sit within 5% relative or inside the CLT sampling band
    # (long-range kernel entries can underflow below any relative tolerance)
    draws = cfg.get_int("check.cov_draws", 100_000)
    n_cov = 8
    grid = Grid(n_cov, solver.L)
    noise = discretize_kernel(kernel, grid, cfg.quad_order())
    dt = 0.1
    rng = derive_substream(seed, 2)
    z = rng.standard_normal((draws, n_cov))
    incr = np.sqrt(grid.h * dt) * (z @ noise.qn.T)
    emp = incr.T @ incr / draws
    target = grid.h * dt * (noise.qn @ noise.qn.T)
    diag = np.diag(target)
    mc_se = np.sqrt((np.outer(diag, diag) + target**2) / draws)
    err = np.abs(emp - target)
    ok_entries = (err <= 0.05 * np.abs(target)) | (err <= 6.0 * mc_se)
    frac = float(np.mean(ok_entries))
    results.append(
        (
            "noise covariance",
            frac >= 0.95,
            f"{100 * frac:.1f}% entries within 5% or 6 sigma",
        )
    )

    all_ok = True
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        all_ok &= ok
    return EXIT_OK if all_ok else EXIT_CHECK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

_COMMANDS = {
    "simulate": cmd_simulate,
    "converge": cmd_converge,
    "failure": cmd_failure,
    "check": cmd_check,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srdsim",
        description="stochastic reaction-diffusion simulation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="key-value config file")
        p.add_argument("--seed", type=int, default=None, help="base RNG seed")
        p.add_argument("--threads", type=int, default=None, help="worker count")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config entry (repeatable)",
        )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg.apply_overrides(args.overrides)
        seed = args.seed if args.seed is not None else cfg.get_int("seed", 0)
        threads = (
            args.threads
            if args.threads is not None
            else cfg.get_int("threads", os.cpu_count() or 1)
        )
        os.makedirs(args.out, exist_ok=True)
        return _COMMANDS[args.command](cfg, seed, threads, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main_entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    main_entry()
