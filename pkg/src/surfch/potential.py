"""Logarithmic free energy, its convex part, and a quadratic regularization.

The free energy density splits into a convex logarithmic part, scaled by the
temperature, and a concave quadratic part:

    F(r) = (theta/2) F_log(r) + (1 - r^2)/2
    F_log(r) = (1 + r) log(1 + r) + (1 - r) log(1 - r)
    f(r) = F_log'(r) = log((1 + r)/(1 - r))

F_log is finite on [-1, 1] (value 2 log 2 at the endpoints) but f blows up at
the endpoints. The delta-regularized variant replaces F_log outside
|r| <= 1 - delta by its second-order Taylor expansion at the knots, which
makes f_delta globally defined with slope at most 1/delta + 1/(2 - delta).
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.special import xlogy


@dataclasses.dataclass(frozen=True)
class PotentialParams:
    """Temperature, interface width, and optional regularization width."""

    theta: float
    epsilon: float
    delta: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.delta is not None and not 0.0 < self.delta < 0.5:
            raise ValueError(f"delta must lie in (0, 0.5), got {self.delta}")


def _require_delta(params: PotentialParams) -> float:
    if params.delta is None:
        raise ValueError("regularized potential requires params.delta")
    return params.delta


def _scalar_or_array(r, out: np.ndarray):
    return out if np.ndim(r) else float(out)


def f_log(r):
    """log((1 + r)/(1 - r)) on (-1, 1), via log1p to stay accurate near poles."""
    arr = np.asarray(r, dtype=float)
    if np.any(np.abs(arr) >= 1.0):
        raise ValueError("f_log is defined only on the open interval (-1, 1)")
    return _scalar_or_array(r, np.log1p(arr) - np.log1p(-arr))


def f_log_prime(r):
    """2 / (1 - r^2), the derivative of f_log on (-1, 1)."""
    arr = np.asarray(r, dtype=float)
    if np.any(np.abs(arr) >= 1.0):
        raise ValueError("f_log_prime is defined only on (-1, 1)")
    return _scalar_or_array(r, 2.0 / ((1.0 - arr) * (1.0 + arr)))


def F_log(r):
    """Convex part (1+r)log(1+r) + (1-r)log(1-r); endpoint value 2 log 2."""
    arr = np.asarray(r, dtype=float)
    if np.any(np.abs(arr) > 1.0):
        raise ValueError("F_log is defined only on [-1, 1]")
    out = xlogy(1.0 + arr, 1.0 + arr) + xlogy(1.0 - arr, 1.0 - arr)
    return _scalar_or_array(r, out)


def F_total(r, params: PotentialParams):
    """(theta/2) F_log(r) + (1 - r^2)/2 on [-1, 1], endpoint limits included."""
    arr = np.asarray(r, dtype=float)
    out = 0.5 * params.theta * F_log(arr) + 0.5 * (1.0 - arr * arr)
    return _scalar_or_array(r, out)


def _branch_masks(arr: np.ndarray, delta: float):
    knot = 1.0 - delta
    return arr > knot, arr < -knot, np.clip(arr, -knot, knot)


def f_delta(r, params: PotentialParams):
    """Globally defined regularization of f_log, linear outside |r| <= 1-delta."""
    delta = _require_delta(params)
    arr = np.asarray(r, dtype=float)
    upper_mask, lower_mask, clipped = _branch_masks(arr, delta)
    inner = np.log1p(clipped) - np.log1p(-clipped)
    upper = (
        np.log(2.0 - delta) - np.log(delta)
        - (1.0 - arr) / delta + (1.0 + arr) / (2.0 - delta)
    )
    lower = (
        np.log(delta) - np.log(2.0 - delta)
        + (1.0 + arr) / delta - (1.0 - arr) / (2.0 - delta)
    )
    out = np.where(upper_mask, upper, np.where(lower_mask, lower, inner))
    return _scalar_or_array(r, out)


def f_delta_prime(r, params: PotentialParams):
    """Derivative of f_delta: 2/(1-r^2) inside, 1/delta + 1/(2-delta) outside."""
    delta = _require_delta(params)
    arr = np.asarray(r, dtype=float)
    upper_mask, lower_mask, clipped = _branch_masks(arr, delta)
    inner = 2.0 / ((1.0 - clipped) * (1.0 + clipped))
    outer = 1.0 / delta + 1.0 / (2.0 - delta)
    out = np.where(upper_mask | lower_mask, outer, inner)
    return _scalar_or_array(r, out)


def F_delta_log(r, params: PotentialParams):
    """Regularized convex part: F_log inside, quadratic continuation outside."""
    delta = _require_delta(params)
    arr = np.asarray(r, dtype=float)
    upper_mask, lower_mask, clipped = _branch_masks(arr, delta)
    inner = xlogy(1.0 + clipped, 1.0 + clipped) + xlogy(1.0 - clipped, 1.0 - clipped)
    upper = (
        (1.0 - arr) * np.log(delta) + (1.0 + arr) * np.log(2.0 - delta)
        + (1.0 - arr) ** 2 / (2.0 * delta)
        + (1.0 + arr) ** 2 / (2.0 * (2.0 - delta)) - 1.0
    )
    lower = (
        (1.0 + arr) * np.log(delta) + (1.0 - arr) * np.log(2.0 - delta)
        + (1.0 + arr) ** 2 / (2.0 * delta)
        + (1.0 - arr) ** 2 / (2.0 * (2.0 - delta)) - 1.0
    )
    out = np.where(upper_mask, upper, np.where(lower_mask, lower, inner))
    return _scalar_or_array(r, out)


def F_delta_total(r, params: PotentialParams):
    """(theta/2) F_delta_log(r) + (1 - r^2)/2, defined for every real r."""
    arr = np.asarray(r, dtype=float)
    out = 0.5 * params.theta * F_delta_log(arr, params) + 0.5 * (1.0 - arr * arr)
    return _scalar_or_array(r, out)
