"""Time stepping for the normalized SEIARD system.

``integrate_nsfd`` is the production integrator: a Mickens-type nonstandard
finite difference scheme that keeps every compartment non-negative and the
fractions summing to one for any step size. ``integrate_reference`` is a
classical fourth-order Runge-Kutta method used only as an accuracy oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ParameterError
from .model import (
    COMPARTMENTS,
    LIVING_EPS,
    CompartmentState,
    ModelParams,
    VitalParams,
    _normalized_rates,
    eval_rhs_vital,
)

DRIFT_TOL = 1e-11
REFERENCE_NEG_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    t0: float
    t_end: float
    k: float

    def __post_init__(self):
        if not (math.isfinite(self.t0) and math.isfinite(self.t_end) and math.isfinite(self.k)):
            raise ParameterError("grid bounds and step must be finite")
        if not self.t_end > self.t0:
            raise ParameterError(f"t_end must exceed t0 (t0={self.t0!r}, t_end={self.t_end!r})")
        if not self.k > 0:
            raise ParameterError(f"step size k must be > 0, got {self.k!r}")
        if abs(self.t0 + self.n_steps * self.k - self.t_end) > 1e-9:
            raise ParameterError(
                f"step k={self.k!r} does not divide [{self.t0!r}, {self.t_end!r}] into whole steps"
            )

    @property
    def n_steps(self) -> int:
        return int(round((self.t_end - self.t0) / self.k))

    def times(self) -> np.ndarray:
        return self.t0 + self.k * np.arange(self.n_steps + 1, dtype=float)


@dataclass(frozen=True)
class DenominatorSpec:
    mu_hat: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.mu_hat) and self.mu_hat >= 0):
            raise ParameterError(f"mu_hat must be a finite value >= 0, got {self.mu_hat!r}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniform time grid and the state at every node.

    ``states`` has shape ``(len(times), 6)`` with columns ``s, e, i, a, r, d``.
    """

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise ValueError("a trajectory needs at least two time points")
        if states.shape != (times.size, 6):
            raise ValueError(f"states must have shape ({times.size}, 6), got {states.shape}")
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise ValueError("times must be strictly increasing")
        if np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(times[-1])):
            raise ValueError("times must be uniformly spaced")
        if not np.all(np.isfinite(states)):
            raise DomainError("trajectory contains non-finite values")
        times.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    def __len__(self) -> int:
        return self.times.size

    @property
    def k(self) -> float:
        return float(self.times[1] - self.times[0])

    def column(self, name: str) -> np.ndarray:
        return self.states[:, COMPARTMENTS.index(name)]

    s = property(lambda self: self.column("s"))
    e = property(lambda self: self.column("e"))
    i = property(lambda self: self.column("i"))
    a = property(lambda self: self.column("a"))
    r = property(lambda self: self.column("r"))
    d = property(lambda self: self.column("d"))

    @property
    def n_living(self) -> np.ndarray:
        return self.states[:, :5].sum(axis=1)

    def state(self, n: int) -> CompartmentState:
        return CompartmentState.from_array(self.states[n])

    def index_of(self, t: float) -> int:
        """Grid index of time ``t``; raises if ``t`` is not a node."""
        n = int(round((t - self.times[0]) / self.k))
        if n < 0 or n >= self.times.size or abs(self.times[n] - t) > 1e-9:
            raise ValueError(f"t={t!r} is not a node of the trajectory grid")
        return n

    def truncate(self, t_end: float) -> "Trajectory":
        n = self.index_of(t_end)
        return Trajectory(self.times[: n + 1], self.states[: n + 1])

    def conservation_drift(self) -> float:
        return float(np.max(np.abs(self.states.sum(axis=1) - 1.0)))

    def check_invariants(self, drift_tol: float = DRIFT_TOL, neg_tol: float = 0.0) -> None:
        lowest = float(self.states.min())
        if lowest < -neg_tol:
            n, j = np.unravel_index(np.argmin(self.states), self.states.shape)
            raise DomainError(
                f"compartment {COMPARTMENTS[j]} negative ({lowest!r}) at t={float(self.times[n])!r}"
            )
        drift = self.conservation_drift()
        if drift > drift_tol:
            raise DomainError(f"sum-to-one drift {drift!r} exceeds {drift_tol!r}")


def denominator_phi(k: float, spec: DenominatorSpec = DenominatorSpec()) -> float:
    """Nonstandard denominator ``(exp(mu_hat*k) - 1) / mu_hat``, or ``k`` when ``mu_hat == 0``."""
    if not k > 0:
        raise ParameterError(f"step size k must be > 0, got {k!r}")
    if spec.mu_hat == 0.0:
        return float(k)
    return math.expm1(spec.mu_hat * k) / spec.mu_hat


def _nsfd_update(y, params: ModelParams, phi: float) -> tuple:
    s, e, i, a, r, d = y
    living = 1.0 - d
    if not living > LIVING_EPS:
        raise DomainError("living population exhausted")
    pressure = params.beta * (i + params.kappa * a) / living * phi
    s1 = s / (1.0 + pressure)
    e1 = (e + pressure * s1) / (1.0 + params.alpha * phi)
    flow = params.alpha * e1 * phi
    to_i = params.p * flow
    i1 = (i + to_i) / (1.0 + (params.gamma_i + params.delta_i) * phi)
    a1 = (a + (flow - to_i)) / (1.0 + (params.gamma_a + params.delta_a) * phi)
    r1 = r + phi * (params.gamma_i * i1 + params.gamma_a * a1)
    d1 = d + phi * (params.delta_i * i1 + params.delta_a * a1)
    return s1, e1, i1, a1, r1, d1


def nsfd_step(state: CompartmentState, params: ModelParams, phi: float) -> CompartmentState:
    """Advance one step of the semi-implicit NSFD scheme.

    Updates run in the order s, e, i, a, r, d and each one consumes the values
    already advanced in this step, so the order is part of the scheme.
    """
    if not phi > 0:
        raise ParameterError(f"phi must be > 0, got {phi!r}")
    y = (state.s, state.e, state.i, state.a, state.r, state.d)
    return CompartmentState(*_nsfd_update(y, params, phi))


def integrate_nsfd(
    initial: CompartmentState,
    params: ModelParams,
    grid: GridSpec,
    spec: DenominatorSpec = DenominatorSpec(),
) -> Trajectory:
    phi = denominator_phi(grid.k, spec)
    out = np.empty((grid.n_steps + 1, 6))
    y = (initial.s, initial.e, initial.i, initial.a, initial.r, initial.d)
    out[0] = y
    for n in range(grid.n_steps):
        try:
            y = _nsfd_update(y, params, phi)
        except DomainError as exc:
            raise DomainError(f"NSFD step {n} (t={grid.t0 + n * grid.k!r}): {exc}") from exc
        out[n + 1] = y
    traj = Trajectory(grid.times(), out)
    traj.check_invariants()
    return traj


def _rk4(f: Callable, y0: np.ndarray, grid: GridSpec, check: Callable | None = None) -> np.ndarray:
    h = grid.k
    out = np.empty((grid.n_steps + 1, y0.size))
    y = np.array(y0, dtype=float)
    out[0] = y
    for n in range(grid.n_steps):
        try:
            k1 = f(y)
            k2 = f(y + 0.5 * h * k1)
            k3 = f(y + 0.5 * h * k2)
            k4 = f(y + h * k3)
        except DomainError as exc:
            raise DomainError(f"RK4 step {n} (t={grid.t0 + n * h!r}): {exc}") from exc
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if check is not None:
            check(n + 1, y)
        out[n + 1] = y
    return out


def integrate_reference(initial: CompartmentState, params: ModelParams, grid: GridSpec) -> Trajectory:
    """Classical RK4 on the normalized system, intended for small steps only.

    There is no positivity guarantee; a component below ``-1e-9`` or an
    exhausted living population aborts the run with the offending step.
    """

    def f(y):
        return np.array(_normalized_rates(y, params))

    def check(n, y):
        if y.min() < -REFERENCE_NEG_TOL:
            j = int(np.argmin(y))
            raise DomainError(
                f"reference solution left the valid region at step {n} "
                f"(t={grid.t0 + n * grid.k!r}): {COMPARTMENTS[j]}={y[j]!r}"
            )
        if not 1.0 - y[5] > LIVING_EPS:
            raise DomainError(f"living population exhausted at step {n}")

    states = _rk4(f, initial.as_array(), grid, check)
    return Trajectory(grid.times(), states)


def integrate_vital(counts0, params: ModelParams, vital: VitalParams, grid: GridSpec) -> tuple:
    """RK4 integration of the counts model with vital dynamics.

    Returns ``(times, counts)`` with ``counts`` of shape ``(M+1, 6)``. The
    total population is not conserved here, so no Trajectory is built.
    """

    def f(y):
        return eval_rhs_vital(y, params, vital).as_array()

    return grid.times(), _rk4(f, np.asarray(counts0, dtype=float), grid)


def estimate_convergence_order(
    initial: CompartmentState,
    params: ModelParams,
    t_probe: float,
    steps: Sequence[float],
    method: str = "nsfd",
    reference_step: float = 1e-3,
    t0: float = 0.0,
    spec: DenominatorSpec = DenominatorSpec(),
) -> float:
    """Least-squares slope of log(error at ``t_probe``) against log(k).

    The error is the max-norm distance to an RK4 run with ``reference_step``.
    ``method`` selects the integrator under test: ``"nsfd"`` or ``"reference"``.
    """
    steps = [float(k) for k in steps]
    if len(steps) < 3:
        raise ValueError("at least three step sizes are needed to estimate an order")
    ratios = [steps[j + 1] / steps[j] for j in range(len(steps) - 1)]
    if any(abs(q - ratios[0]) > 1e-9 * abs(ratios[0]) for q in ratios) or ratios[0] == 1.0:
        raise ValueError(f"step sizes must form a geometric progression, got {steps}")
    if method not in ("nsfd", "reference"):
        raise ValueError(f"unknown method {method!r}")

    truth = integrate_reference(initial, params, GridSpec(t0, t_probe, reference_step)).states[-1]
    errors = []
    for k in steps:
        grid = GridSpec(t0, t_probe, k)
        if method == "nsfd":
            traj = integrate_nsfd(initial, params, grid, spec)
        else:
            traj = integrate_reference(initial, params, grid)
        errors.append(float(np.max(np.abs(traj.states[-1] - truth))))
    if any(err == 0.0 for err in errors):
        raise DomainError("zero error, order undefined")
    slope, _ = np.polyfit(np.log(steps), np.log(errors), 1)
    return float(slope)
