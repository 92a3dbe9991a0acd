"""End-to-end scenario runs: integrate, derive hazards, value the policy, write files."""
from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .actuarial import (
    discounted_annuity,
    net_level_premium,
    optimal_premium,
    perpetuity_identity_residual,
    reserve_series,
)
from .errors import ConfigError, DomainError, StageError
from .hazards import SeriesTable, hazard_table
from .integrator import (
    GridSpec,
    Trajectory,
    estimate_convergence_order,
    integrate_nsfd,
)
from .io import RunManifest, trajectory_table, write_csv, write_results
from .plots import render_plots
from .scenario import Scenario

PERPETUITY_DISCOUNT = 0.05
PERPETUITY_TRUNCATION = 400.0
PERPETUITY_STEP = 0.1
PERPETUITY_TOL = 2e-4


@contextmanager
def stage(name: str):
    try:
        yield
    except StageError:
        raise
    except (ValueError, ArithmeticError, OSError) as exc:
        raise StageError(name, exc) from exc


def simulate(scenario: Scenario) -> Trajectory:
    v = scenario.vital
    if v.lambda_recruit != 0.0 or v.mu != 0.0:
        raise ConfigError(
            "the NSFD pipeline integrates the model without vital dynamics; "
            "set [vital] lambda_recruit = mu = 0 (use integrate_vital for the full model)"
        )
    return integrate_nsfd(scenario.initial, scenario.model, scenario.grid, scenario.denominator)


def policy_trajectory(traj: Trajectory, scenario: Scenario) -> Trajectory:
    return traj.truncate(traj.times[0] + scenario.actuarial.horizon)


def perpetuity_applies(scenario: Scenario) -> bool:
    m, x = scenario.model, scenario.initial
    return (m.gamma_i == m.gamma_a and m.delta_i == m.delta_a
            and scenario.actuarial.discount > 0 and x.r == 0.0 and x.d == 0.0)


@dataclass(frozen=True)
class PremiumSummary:
    net_level_premium: float
    optimal_premium: float
    premium: float


def price(scenario: Scenario, traj: Trajectory | None = None) -> PremiumSummary:
    if traj is None:
        traj = simulate(scenario)
    policy = policy_trajectory(traj, scenario)
    act = scenario.actuarial
    pi_star = optimal_premium(policy, scenario.model, act)
    return PremiumSummary(
        net_level_premium=net_level_premium(policy, act.discount),
        optimal_premium=pi_star,
        premium=act.premium if act.premium is not None else pi_star,
    )


def run_scenario(scenario: Scenario, out_dir) -> RunManifest:
    """Full pipeline; writes CSV tables, ``results.txt``, SVG plots and ``manifest.txt``."""
    out_dir = Path(out_dir)
    with stage("output"):
        out_dir.mkdir(parents=True, exist_ok=True)
    with stage("integrate"):
        traj = simulate(scenario)
    with stage("hazards"):
        hazards = hazard_table(traj, scenario.model)
    with stage("actuarial"):
        policy = policy_trajectory(traj, scenario)
        summary = price(scenario, traj)
        act = scenario.actuarial.with_premium(summary.premium)
        reserve = reserve_series(policy, scenario.model, act)
        sweep = SeriesTable(policy.times, {
            f"V_x{factor:g}": reserve_series(
                policy, scenario.model, act.with_premium(factor * summary.optimal_premium)
            ).reserve
            for factor in scenario.outputs.reserve_sweep
        })
        results = {
            "scenario": scenario.name,
            "net_level_premium": summary.net_level_premium,
            "optimal_premium": summary.optimal_premium,
            "premium": summary.premium,
            "premium_annuity": discounted_annuity(policy.s + policy.e, policy.times, act.discount),
            "benefit_annuity": discounted_annuity(policy.i + policy.a, policy.times, act.discount),
            "reserve_min": float(reserve.reserve.min()),
            "reserve_max": float(reserve.reserve.max()),
            "conservation_drift": traj.conservation_drift(),
        }
        if perpetuity_applies(scenario):
            results["perpetuity_residual"] = perpetuity_identity_residual(
                policy, scenario.model, act.discount
            )
            results["perpetuity_tail_bound"] = math.exp(-act.discount * act.horizon) / act.discount

    with stage("write"):
        names = [
            write_csv(trajectory_table(traj), out_dir / "trajectory.csv").name,
            write_csv(hazards, out_dir / "hazards.csv").name,
            write_csv(reserve.to_table(), out_dir / "reserve.csv").name,
            write_csv(sweep, out_dir / "reserve_sweep.csv").name,
            write_results(results, out_dir / "results.txt").name,
        ]
    with stage("plots"):
        tables = {"trajectory": trajectory_table(traj), "hazards": hazards, "reserve_sweep": sweep}
        names += [p.name for p in render_plots(tables, out_dir, scenario.outputs.plots)]
    with stage("manifest"):
        manifest = RunManifest.build(out_dir, names, scenario.digest, __version__)
        manifest.write(out_dir / "manifest.txt")
    return manifest


def run_simulation_only(scenario: Scenario, out_dir) -> RunManifest:
    out_dir = Path(out_dir)
    with stage("output"):
        out_dir.mkdir(parents=True, exist_ok=True)
    with stage("integrate"):
        traj = simulate(scenario)
    with stage("write"):
        names = [write_csv(trajectory_table(traj), out_dir / "trajectory.csv").name]
        manifest = RunManifest.build(out_dir, names, scenario.digest, __version__)
        manifest.write(out_dir / "manifest.txt")
    return manifest


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def validate_scenario(scenario: Scenario, convergence: bool = True) -> list[Check]:
    """Structural checks of the integrator and valuation on one scenario."""
    checks = []
    model, x0, grid = scenario.model, scenario.initial, scenario.grid
    traj = simulate(scenario)

    drift = traj.conservation_drift()
    checks.append(Check("conservation", drift <= 1e-11, f"max |sum - 1| = {drift:.3e}"))

    span = grid.t_end - grid.t0
    lowest = math.inf
    tried = []
    for k in (0.1, 1.0, 5.0, 10.0, 50.0):
        if abs(round(span / k) * k - span) > 1e-9:
            continue
        run = integrate_nsfd(x0, model, GridSpec(grid.t0, grid.t_end, k), scenario.denominator)
        lowest = min(lowest, float(run.states.min()))
        tried.append(f"{k:g}")
    checks.append(Check("positivity", lowest >= 0.0,
                        f"min component {lowest:.3e} over k in {{{', '.join(tried)}}}"))

    d_steps = np.diff(traj.d)
    checks.append(Check("deceased monotone", bool(np.all(d_steps >= 0)),
                        f"min increment {d_steps.min():.3e}"))

    if convergence and span >= 1:
        t_probe = grid.t0 + min(100.0, math.floor(span))
        steps = [1.0, 0.5, 0.25, 0.125]
        try:
            order = estimate_convergence_order(x0, model, t_probe, steps, "nsfd", t0=grid.t0,
                                               spec=scenario.denominator)
            checks.append(Check("NSFD order", 0.8 <= order <= 1.2, f"{order:.3f} (target [0.8, 1.2])"))
            ref_order = estimate_convergence_order(x0, model, t_probe, steps, "reference", t0=grid.t0)
            checks.append(Check("reference order", 3.5 <= ref_order <= 4.5,
                                f"{ref_order:.3f} (target [3.5, 4.5])"))
        except DomainError as exc:
            checks.append(Check("NSFD order", True, f"skipped: {exc}"))

    if x0.r == 0.0 and x0.d == 0.0:
        equal = model.replace(gamma_a=model.gamma_i, delta_a=model.delta_i)
        long_run = integrate_nsfd(x0, equal, GridSpec(0.0, PERPETUITY_TRUNCATION, PERPETUITY_STEP))
        residual = perpetuity_identity_residual(long_run, equal, PERPETUITY_DISCOUNT)
        checks.append(Check("perpetuity identity", abs(residual) <= PERPETUITY_TOL,
                            f"residual {residual:.3e} (tolerance {PERPETUITY_TOL:g})"))

    policy = policy_trajectory(traj, scenario)
    act = scenario.actuarial
    try:
        pi_star = optimal_premium(policy, model, act)
    except DomainError as exc:
        checks.append(Check("premium bound", False, str(exc)))
        return checks
    at_bound = reserve_series(policy, model, act.with_premium(pi_star)).reserve
    scale = max(float(np.max(np.abs(at_bound))), 1e-300)
    checks.append(Check("premium bound feasibility", abs(at_bound.min()) <= 1e-10 * scale,
                        f"pi* = {pi_star:.6e}, min V = {at_bound.min():.3e}"))
    lower = reserve_series(policy, model, act.with_premium(0.5 * pi_star)).reserve
    checks.append(Check("reserve monotone in premium", bool(np.all(lower >= at_bound)),
                        "V(t; pi*/2) >= V(t; pi*) at every node"))
    return checks
