"""Composite loss assembly and weighting strategies.

Three strategies are supported: ``fixed`` (plain sum), ``relaxed``
(constant relaxation factor on the physics term), and ``adaptive``
(data terms scaled by a running ratio of gradient statistics).  The
same coefficient triple drives both the reported totals and the
gradient combination in the trainers, so reported losses are exactly
reproducible from their components.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from . import autodiff as ad
from .autodiff import Var
from .errors import ConfigurationError, DegenerateGradientError

STRATEGIES = ("fixed", "relaxed", "adaptive")

# Relaxation constants studied for the physics term (sweep axis).
RELAXATION_CONSTANTS = (1.0, 0.1, 0.01, 0.001, 0.0001)


@dataclass(frozen=True)
class WeightState:
    """Loss-weighting state.

    ``lambda_d`` is the running data weight (updated only by the
    adaptive strategy), ``alpha`` the smoothing constant of its running
    average, ``w_pde`` the fixed relaxation constant, and
    ``update_every`` the number of iterations between recomputations.
    """

    lambda_d: float = 1.0
    alpha: float = 0.9
    w_pde: float = 1.0
    update_every: int = 10

    def validate(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError("alpha must lie strictly between 0 and 1")
        if self.update_every < 1:
            raise ConfigurationError("update_every must be >= 1")
        if self.w_pde < 0 or self.lambda_d < 0:
            raise ConfigurationError("weights must be nonnegative")


@dataclass
class LossBreakdown:
    """Every loss component with the weights in force when it was formed."""

    data_components: dict[str, float]
    pde_components: dict[str, float]
    prevdata: float | None
    lambda_d: float
    w_pde: float
    strategy: str
    total: float

    @property
    def data_total(self) -> float:
        return float(sum(self.data_components.values()))

    @property
    def pde_total(self) -> float:
        return float(sum(self.pde_components.values()))

    def recompute_total(self) -> float:
        c_data, c_pde, c_prev = strategy_coefficients(
            WeightState(lambda_d=self.lambda_d, w_pde=self.w_pde), self.strategy
        )
        total = c_data * self.data_total + c_pde * self.pde_total
        if self.prevdata is not None:
            total += c_prev * self.prevdata
        return float(total)


def strategy_coefficients(state: WeightState, strategy: str) -> tuple[float, float, float]:
    """(data, pde, prevdata) multipliers for the given strategy."""
    if strategy == "fixed":
        return 1.0, 1.0, 1.0
    if strategy == "relaxed":
        return state.lambda_d, state.w_pde, 1.0
    if strategy == "adaptive":
        return state.lambda_d, 1.0, state.lambda_d
    raise ConfigurationError(f"unknown weighting strategy {strategy!r}")


def mse(pred, truth) -> float:
    """Mean squared elementwise difference."""
    pred = np.asarray(pred, dtype=np.float64).ravel()
    truth = np.asarray(truth, dtype=np.float64).ravel()
    if pred.size == 0 or truth.size == 0:
        raise ConfigurationError("mse of empty vectors is undefined")
    if pred.size != truth.size:
        raise ConfigurationError(f"length mismatch: {pred.size} vs {truth.size}")
    diff = pred - truth
    return float(np.mean(diff * diff))


def assemble_loss(
    data_terms: Mapping[str, float],
    pde_terms: Mapping[str, float],
    prev_term: float | None,
    state: WeightState,
    strategy: str,
) -> LossBreakdown:
    """Combine loss components under the active weighting strategy."""
    c_data, c_pde, c_prev = strategy_coefficients(state, strategy)
    data_components = {k: float(v) for k, v in data_terms.items()}
    pde_components = {k: float(v) for k, v in pde_terms.items()}
    total = c_data * sum(data_components.values()) + c_pde * sum(pde_components.values())
    if prev_term is not None:
        total += c_prev * float(prev_term)
    return LossBreakdown(
        data_components=data_components,
        pde_components=pde_components,
        prevdata=None if prev_term is None else float(prev_term),
        lambda_d=state.lambda_d,
        w_pde=state.w_pde,
        strategy=strategy,
        total=float(total),
    )


def grad_abs_stats(grad: np.ndarray) -> tuple[float, float]:
    """(max |g|, mean |g|) of a flat gradient vector.

    This single helper feeds both the adaptive weighting ratio and the
    gradient-histogram summary stats, so the two agree exactly.
    """
    magnitude = np.abs(np.asarray(grad, dtype=np.float64).ravel())
    if magnitude.size == 0:
        raise ConfigurationError("empty gradient vector")
    return float(np.max(magnitude)), float(np.mean(magnitude))


def instantaneous_lambda(grad_pde: np.ndarray, grad_data: np.ndarray) -> float:
    """Instantaneous data weight: max |pde gradient| over mean |data gradient|."""
    max_pde, _ = grad_abs_stats(grad_pde)
    _, mean_data = grad_abs_stats(grad_data)
    if mean_data == 0.0:
        raise DegenerateGradientError(
            "mean |data gradient| is zero; adaptive weight left unchanged"
        )
    return max_pde / mean_data


def update_lambda(state: WeightState, lam_hat: float) -> WeightState:
    """Running-average update of the data weight."""
    if not np.isfinite(lam_hat):
        raise ConfigurationError(f"non-finite instantaneous weight {lam_hat!r}")
    new = (1.0 - state.alpha) * state.lambda_d + state.alpha * lam_hat
    return replace(state, lambda_d=float(new))


# graph-level loss construction -------------------------------------------


def mse_graph(pred: Var, target: np.ndarray) -> Var:
    """Mean-squared-error expression between a predicted column and
    constant targets."""
    return ad.reduce_mean(ad.square(pred - ad.constant(np.asarray(target, dtype=np.float64))))


def sum_components(components: Mapping[str, Var]) -> Var:
    """Fixed-order sum of component expressions (insertion order)."""
    total = None
    for value in components.values():
        total = value if total is None else total + value
    if total is None:
        raise ConfigurationError("no components to sum")
    return total
