"""SEIARD parameters, state containers and right-hand sides.

Three forms of the vector field are provided:

* ``eval_rhs_normalized`` -- population fractions summing to one, with the
  frequency-dependent incidence scaled by ``1 / (1 - d)``;
* ``eval_rhs_absolute`` -- counts without vital dynamics;
* ``eval_rhs_vital`` -- counts with recruitment ``lambda_recruit`` and
  natural mortality ``mu`` on every living class.
"""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from .errors import DomainError, ParameterError

COMPARTMENTS = ("s", "e", "i", "a", "r", "d")

# below this living fraction the 1/(1-d) factor is treated as undefined
LIVING_EPS = 1e-12
SUM_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Epidemiological rate constants (per day unless dimensionless)."""

    beta: float
    kappa: float
    alpha: float
    p: float
    gamma_i: float
    gamma_a: float
    delta_i: float
    delta_a: float

    @classmethod
    def mexico2020(cls) -> "ModelParams":
        """Rates estimated for the early 2020 Mexican SARS-CoV-2 wave."""
        return cls(beta=0.3, kappa=0.7, alpha=0.192, p=0.14,
                   gamma_i=0.2, gamma_a=0.1, delta_i=0.007, delta_a=0.001)

    def replace(self, **changes: float) -> "ModelParams":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return validate_params(ModelParams(**values))


@dataclass(frozen=True)
class VitalParams:
    lambda_recruit: float = 0.0  # individuals / day
    mu: float = 0.0  # 1 / day

    def __post_init__(self):
        for name in ("lambda_recruit", "mu"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ParameterError(f"{name} must be a finite value >= 0, got {value!r}")


def validate_params(params: ModelParams) -> ModelParams:
    """Check rate signs and the unit-interval fractions ``p`` and ``kappa``.

    Returns ``params`` unchanged; raises ``ParameterError`` naming the first
    offending field.
    """
    for f in fields(params):
        value = getattr(params, f.name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ParameterError(f"{f.name} must be a finite number, got {value!r}")
    for name in ("p", "kappa"):
        value = getattr(params, name)
        if not 0.0 <= value <= 1.0:
            raise ParameterError(f"{name} out of [0,1]: {value!r}")
    for name in ("beta", "alpha", "gamma_i", "gamma_a", "delta_i", "delta_a"):
        value = getattr(params, name)
        if value < 0:
            raise ParameterError(f"{name} must be >= 0, got {value!r}")
    return params


@dataclass(frozen=True)
class CompartmentState:
    """Population fractions at one instant.

    Construction checks non-negativity and the sum-to-one constraint; use
    :meth:`renormalized` to rescale user data explicitly.
    """

    s: float
    e: float
    i: float
    a: float
    r: float
    d: float

    def __post_init__(self):
        values = astuple(self)
        for name, value in zip(COMPARTMENTS, values):
            if not math.isfinite(value):
                raise DomainError(f"compartment {name} is not finite: {value!r}")
            if value < 0:
                raise DomainError(f"compartment {name} is negative: {value!r}")
        total = math.fsum(values)
        if abs(total - 1.0) > SUM_TOL:
            raise DomainError(
                f"compartment fractions sum to {total!r}, expected 1 within {SUM_TOL:g}"
            )

    @classmethod
    def from_array(cls, values) -> "CompartmentState":
        return cls(*(float(v) for v in values))

    @classmethod
    def renormalized(cls, s, e, i, a, r, d) -> "CompartmentState":
        values = [float(v) for v in (s, e, i, a, r, d)]
        total = math.fsum(values)
        if not total > 0:
            raise DomainError("cannot renormalize a state with non-positive total")
        return cls(*(v / total for v in values))

    @classmethod
    def mexico2020(cls) -> "CompartmentState":
        return cls(s=0.9999, e=0.00005, i=0.00003, a=0.00002, r=0.0, d=0.0)

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    def counts(self, population: float) -> np.ndarray:
        return population * self.as_array()


@dataclass(frozen=True)
class StateDerivative:
    ds: float
    de: float
    di: float
    da: float
    dr: float
    dd: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    def total(self) -> float:
        return math.fsum(astuple(self))


def living_fraction(state: CompartmentState) -> float:
    """Fraction of the population still alive, ``s + e + i + a + r``."""
    return state.s + state.e + state.i + state.a + state.r


def _normalized_rates(y, params: ModelParams) -> tuple:
    # y is any 6-sequence (s, e, i, a, r, d); shared by the integrators
    s, e, i, a, r, d = y
    living = 1.0 - d
    if not living > LIVING_EPS:
        raise DomainError("living population exhausted")
    incidence = params.beta * s * (i + params.kappa * a) / living
    progression = params.alpha * e
    to_i = params.p * progression
    to_a = progression - to_i
    rec_i = params.gamma_i * i
    rec_a = params.gamma_a * a
    die_i = params.delta_i * i
    die_a = params.delta_a * a
    return (
        -incidence,
        incidence - progression,
        to_i - (rec_i + die_i),
        to_a - (rec_a + die_a),
        rec_i + rec_a,
        die_i + die_a,
    )


def eval_rhs_normalized(state: CompartmentState, params: ModelParams) -> StateDerivative:
    """Time derivative of the normalized simplified model.

    The six components sum to zero up to rounding, reflecting a closed
    population.
    """
    return StateDerivative(*_normalized_rates(astuple(state), params))


def _check_counts(counts) -> np.ndarray:
    y = np.asarray(counts, dtype=float)
    if y.shape != (6,):
        raise ValueError(f"expected six compartment counts, got shape {y.shape}")
    if np.any(y < 0) or not np.all(np.isfinite(y)):
        raise DomainError(f"compartment counts must be finite and >= 0, got {y.tolist()}")
    if not y[:5].sum() > 0:
        raise DomainError("living population exhausted")
    return y


def eval_rhs_absolute(counts, params: ModelParams) -> StateDerivative:
    """Counts form without births or natural deaths (total is conserved)."""
    return eval_rhs_vital(counts, params, VitalParams())


def eval_rhs_vital(counts, params: ModelParams, vital: VitalParams) -> StateDerivative:
    """Counts form with recruitment into S and natural mortality on S, E, I, A, R.

    ``counts`` is ``(S, E, I, A, R, D)``; ``D`` only accumulates disease deaths.
    """
    S, E, I, A, R, D = _check_counts(counts)
    living = S + E + I + A + R
    mu = vital.mu
    incidence = params.beta * S * (I + params.kappa * A) / living
    progression = params.alpha * E
    return StateDerivative(
        vital.lambda_recruit - incidence - mu * S,
        incidence - progression - mu * E,
        params.p * progression - (params.gamma_i + params.delta_i + mu) * I,
        (1.0 - params.p) * progression - (params.gamma_a + params.delta_a + mu) * A,
        params.gamma_i * I + params.gamma_a * A - mu * R,
        params.delta_i * I + params.delta_a * A,
    )
