"""Annuity values, net premiums and prospective reserves from SEIARD trajectories.

Payments are continuous: premiums flow from the paying classes, benefits to
the infective classes, and a lump sum is paid on each disease death. All
integrals use the trapezoidal rule on the trajectory grid with exact
exponential discounting between nodes; ``discount`` is a force of interest
per day.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import lfilter

from .errors import DomainError, ParameterError
from .hazards import SeriesTable
from .integrator import Trajectory
from .model import ModelParams

RESERVE_COLUMNS = ("V", "benefit_apv", "premium_base_apv")


@dataclass(frozen=True)
class ActuarialParams:
    """Policy terms. ``premium=None`` means "not priced yet" (see :func:`optimal_premium`)."""

    discount: float
    horizon: float
    premium: float | None = None
    b_i: float = 1.0
    b_a: float = 1.0
    l_d: float = 0.0

    def __post_init__(self):
        for name in ("discount", "horizon", "b_i", "b_a", "l_d"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ParameterError(f"{name} must be a finite number, got {value!r}")
        if self.discount < 0:
            raise ParameterError(f"discount must be >= 0, got {self.discount!r}")
        if not self.horizon > 0:
            raise ParameterError(f"horizon must be > 0, got {self.horizon!r}")
        for name in ("b_i", "b_a", "l_d"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0, got {getattr(self, name)!r}")
        if self.premium is not None and not (math.isfinite(self.premium) and self.premium >= 0):
            raise ParameterError(f"premium must be >= 0 when given, got {self.premium!r}")

    def with_premium(self, premium: float) -> "ActuarialParams":
        return ActuarialParams(self.discount, self.horizon, premium, self.b_i, self.b_a, self.l_d)


@dataclass(frozen=True, eq=False)
class ReserveSeries:
    times: np.ndarray
    reserve: np.ndarray
    benefit_apv: np.ndarray
    premium_base_apv: np.ndarray
    premium: float

    def to_table(self) -> SeriesTable:
        return SeriesTable(
            self.times,
            {"V": self.reserve, "benefit_apv": self.benefit_apv,
             "premium_base_apv": self.premium_base_apv},
        )


def discounted_annuity(weights, times, discount: float, upto: float | None = None) -> float:
    """Trapezoidal value of ``integral_{t0}^{upto} exp(-discount*(tau - t0)) * weights(tau) dtau``.

    ``upto`` defaults to the last node; a value between nodes closes the last
    interval with a linearly interpolated weight.
    """
    w = np.asarray(weights, dtype=float)
    t = np.asarray(times, dtype=float)
    if w.shape != t.shape or t.ndim != 1 or t.size < 2:
        raise ValueError("weights and times must be matching 1-d arrays with >= 2 points")
    if discount < 0:
        raise ParameterError(f"discount must be >= 0, got {discount!r}")
    if upto is None:
        upto = float(t[-1])
    if upto < t[0] - 1e-9 or upto > t[-1] + 1e-9:
        raise ValueError(f"upto={upto!r} lies outside the grid [{float(t[0])!r}, {float(t[-1])!r}]")
    n = int(np.searchsorted(t, upto + 1e-9, side="right"))
    f = np.exp(-discount * (t[:n] - t[0])) * w[:n]
    value = float(trapezoid(f, t[:n])) if n > 1 else 0.0
    if n < t.size and upto - t[n - 1] > 1e-9:
        frac = (upto - t[n - 1]) / (t[n] - t[n - 1])
        w_end = w[n - 1] + frac * (w[n] - w[n - 1])
        f_end = math.exp(-discount * (upto - t[0])) * w_end
        value += 0.5 * (upto - t[n - 1]) * (f[-1] + f_end)
    return value


def infinite_annuity(weights, times, discount: float) -> tuple[float, float]:
    """Truncated perpetuity value and the analytic tail bound ``exp(-discount*T)/discount``.

    The bound assumes ``0 <= weights <= 1`` beyond the grid, which holds for
    population fractions.
    """
    if not discount > 0:
        raise ParameterError("an infinite-horizon annuity needs discount > 0")
    t = np.asarray(times, dtype=float)
    tail = math.exp(-discount * (t[-1] - t[0])) / discount
    return discounted_annuity(weights, t, discount), tail


def net_level_premium(traj: Trajectory, discount: float, upto: float | None = None) -> float:
    """Level premium rate equating the annuity paid to ``i + a`` with the one collected from ``s + e``."""
    premiums = discounted_annuity(traj.s + traj.e, traj.times, discount, upto)
    if not premiums > 0:
        raise DomainError("no premium base")
    return discounted_annuity(traj.i + traj.a, traj.times, discount, upto) / premiums


def perpetuity_identity_residual(
    traj: Trajectory, params: ModelParams, discount: float, truncation: float | None = None
) -> float:
    """``a(s+e) + (1 + (gamma+delta)/discount) * a(i+a) - 1/discount`` with perpetuities truncated.

    Requires equal recovery and death rates in the two infective classes. The
    identity assumes nobody starts recovered or dead; otherwise the residual
    also carries ``-(r0 + d0)/discount``.
    """
    if params.gamma_i != params.gamma_a or params.delta_i != params.delta_a:
        raise ParameterError("identity requires equal class rates")
    if not discount > 0:
        raise ParameterError("perpetuity undefined for discount <= 0")
    if truncation is not None:
        traj = traj.truncate(truncation)
    removal = params.gamma_i + params.delta_i
    se = discounted_annuity(traj.s + traj.e, traj.times, discount)
    ia = discounted_annuity(traj.i + traj.a, traj.times, discount)
    return se + (1.0 + removal / discount) * ia - 1.0 / discount


def _cash_flows(traj: Trajectory, params: ModelParams, act: ActuarialParams):
    i, a = traj.i, traj.a
    benefits = act.b_i * i + act.b_a * a + act.l_d * (params.delta_i * i + params.delta_a * a)
    premium_base = traj.s + traj.e + traj.r
    return benefits, premium_base


def _backward_apv(g: np.ndarray, k: float, discount: float) -> np.ndarray:
    # X_n = q X_{n+1} + (k/2)(g_n + q g_{n+1}),  X_M = 0
    q = math.exp(-discount * k)
    c = 0.5 * k * (g[:-1] + q * g[1:])
    out = np.zeros_like(g)
    out[:-1] = lfilter([1.0], [1.0, -q], c[::-1])[::-1]
    return out


def _check_horizon(traj: Trajectory, act: ActuarialParams) -> None:
    # horizon is measured from the first node
    span = traj.times[-1] - traj.times[0]
    if abs(span - act.horizon) > 1e-9:
        raise ValueError(
            f"trajectory spans {float(span)!r} days but the policy horizon is {act.horizon!r}"
        )


def benefit_and_premium_apv(traj: Trajectory, params: ModelParams, act: ActuarialParams):
    """Per-node APVs of remaining benefits and of the remaining unit premium base."""
    _check_horizon(traj, act)
    benefits, premium_base = _cash_flows(traj, params, act)
    return (_backward_apv(benefits, traj.k, act.discount),
            _backward_apv(premium_base, traj.k, act.discount))


def reserve_series(traj: Trajectory, params: ModelParams, act: ActuarialParams) -> ReserveSeries:
    """Prospective reserve at every node, vanishing at the horizon."""
    if act.premium is None:
        raise ParameterError("reserve_series needs a premium; use optimal_premium to price one")
    _check_horizon(traj, act)
    benefits, premium_base = _cash_flows(traj, params, act)
    reserve = _backward_apv(benefits - act.premium * premium_base, traj.k, act.discount)
    return ReserveSeries(
        times=traj.times,
        reserve=reserve,
        benefit_apv=_backward_apv(benefits, traj.k, act.discount),
        premium_base_apv=_backward_apv(premium_base, traj.k, act.discount),
        premium=act.premium,
    )


def optimal_premium(traj: Trajectory, params: ModelParams, act: ActuarialParams) -> float:
    """Largest level premium keeping the reserve non-negative at every node.

    The minimum of benefit APV over premium-base APV is taken over all nodes
    except the horizon, where both vanish. ``act.premium`` is ignored.
    """
    benefit, base = benefit_and_premium_apv(traj, params, act)
    benefit, base = benefit[:-1], base[:-1]
    ok = base > 0
    if not np.any(ok):
        raise DomainError("premium base identically zero")
    return float(np.min(benefit[ok] / base[ok]))
