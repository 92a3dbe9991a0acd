"""Forces of infection, mortality and removal along a trajectory, and the
survival probabilities obtained by integrating them."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import DomainError
from .integrator import Trajectory
from .model import LIVING_EPS, ModelParams

POOL_EPS = 1e-14

HAZARD_COLUMNS = ("lambda", "mu_d", "mu_se", "mu_ia", "p_s", "p_l")


@dataclass(frozen=True, eq=False)
class SeriesTable:
    """Named scalar series sharing one strictly increasing time axis."""

    times: np.ndarray
    columns: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        cols = {}
        for name, values in self.columns.items():
            values = np.asarray(values, dtype=float)
            if values.shape != times.shape:
                raise ValueError(
                    f"column {name!r} has shape {values.shape}, expected {times.shape}"
                )
            cols[name] = values
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "columns", cols)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    @property
    def names(self) -> list[str]:
        return list(self.columns)


@dataclass(frozen=True, eq=False)
class HazardBundle:
    lam: np.ndarray
    mu_d: np.ndarray
    mu_se: np.ndarray
    mu_ia: np.ndarray


def _living(traj: Trajectory) -> np.ndarray:
    living = 1.0 - traj.d
    bad = np.flatnonzero(living <= LIVING_EPS)
    if bad.size:
        raise DomainError(f"living population exhausted at t={float(traj.times[bad[0]])!r}")
    return living


def mechanistic_force_of_infection(traj: Trajectory, params: ModelParams) -> np.ndarray:
    """``beta * (i + kappa*a) / (1 - d)`` at every grid node."""
    return params.beta * (traj.i + params.kappa * traj.a) / _living(traj)


def force_of_mortality(traj: Trajectory, params: ModelParams) -> np.ndarray:
    return (params.delta_i * traj.i + params.delta_a * traj.a) / _living(traj)


def empirical_force_of_infection(traj: Trajectory, params: ModelParams) -> np.ndarray:
    """Relative depletion rate of ``s + e``.

    Evaluated from the model right-hand side, where ``-(s' + e') = alpha*e``,
    so no differencing of the trajectory is involved.
    """
    pool = traj.s + traj.e
    bad = np.flatnonzero(pool <= POOL_EPS)
    if bad.size:
        raise DomainError(f"s + e vanishes at t={float(traj.times[bad[0]])!r}")
    return params.alpha * traj.e / pool


def empirical_force_of_removal(traj: Trajectory, params: ModelParams) -> np.ndarray:
    """Net relative outflow from ``i + a``; negative while inflow from ``e`` dominates."""
    pool = traj.i + traj.a
    bad = np.flatnonzero(pool <= POOL_EPS)
    if bad.size:
        raise DomainError(f"i + a vanishes at t={float(traj.times[bad[0]])!r}")
    outflow = (params.gamma_i + params.delta_i) * traj.i + (params.gamma_a + params.delta_a) * traj.a
    return (outflow - params.alpha * traj.e) / pool


def cumulative_survival(hazard, times) -> np.ndarray:
    """``exp(-integral_0^t hazard)`` with the integral accumulated by trapezoids."""
    hazard = np.asarray(hazard, dtype=float)
    times = np.asarray(times, dtype=float)
    if hazard.shape != times.shape:
        raise ValueError("hazard and times must have the same shape")
    return np.exp(-cumulative_trapezoid(hazard, times, initial=0.0))


def hazard_bundle(traj: Trajectory, params: ModelParams) -> HazardBundle:
    return HazardBundle(
        lam=mechanistic_force_of_infection(traj, params),
        mu_d=force_of_mortality(traj, params),
        mu_se=empirical_force_of_infection(traj, params),
        mu_ia=empirical_force_of_removal(traj, params),
    )


def hazard_table(traj: Trajectory, params: ModelParams) -> SeriesTable:
    b = hazard_bundle(traj, params)
    return SeriesTable(
        traj.times,
        {
            "lambda": b.lam,
            "mu_d": b.mu_d,
            "mu_se": b.mu_se,
            "mu_ia": b.mu_ia,
            "p_s": cumulative_survival(b.lam, traj.times),
            "p_l": cumulative_survival(b.mu_d, traj.times),
        },
    )
