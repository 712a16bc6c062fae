"""Mini-batch Adam optimization with a staged learning-rate schedule."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ConfigurationError, NonFiniteGradientError


@dataclass(frozen=True)
class TrainingBudget:
    """Fixed iteration budget with per-stage learning rates.

    ``learning_rates`` are applied in order; ``shares`` gives each
    stage's fraction of the total iterations (equal shares when omitted).
    """

    total_iterations: int
    learning_rates: tuple[float, ...] = (1e-3, 1e-4)
    batch_size: int = 1000
    seed: int = 0
    shares: tuple[float, ...] | None = None

    def validate(self) -> None:
        if self.total_iterations < 0:
            raise ConfigurationError("total_iterations must be >= 0")
        if not self.learning_rates or any(lr <= 0 for lr in self.learning_rates):
            raise ConfigurationError("every learning rate must be > 0")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if self.shares is not None:
            if len(self.shares) != len(self.learning_rates):
                raise ConfigurationError("shares must match learning_rates in length")
            if any(s <= 0 for s in self.shares):
                raise ConfigurationError("stage shares must be > 0")

    def stage_boundaries(self) -> list[int]:
        """Iteration index at which each stage ends (cumulative)."""
        n = len(self.learning_rates)
        shares = self.shares if self.shares is not None else (1.0 / n,) * n
        total = sum(shares)
        ends, acc = [], 0.0
        for s in shares:
            acc += s / total
            ends.append(int(round(acc * self.total_iterations)))
        ends[-1] = self.total_iterations
        return ends

    def lr_at(self, iteration: int) -> float:
        """Learning rate for a 0-based global iteration index (step function)."""
        for end, lr in zip(self.stage_boundaries(), self.learning_rates):
            if iteration < end:
                return lr
        return self.learning_rates[-1]


@dataclass
class AdamState:
    """First/second moment accumulators; congruent with the flat
    parameter vector, single-owner."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_size(cls, n: int, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        return cls(m=np.zeros(n), v=np.zeros(n), t=0, beta1=beta1, beta2=beta2, eps=eps)


def adam_step(theta: np.ndarray, grad: np.ndarray, state: AdamState, lr: float) -> np.ndarray:
    """One bias-corrected Adam update; returns the new parameter vector.

    ``state`` is advanced in place.  A non-finite gradient aborts the
    step before any state is touched.
    """
    if theta.shape != grad.shape:
        raise ConfigurationError(
            f"gradient shape {grad.shape} does not match parameters {theta.shape}"
        )
    if not np.all(np.isfinite(grad)):
        bad = int(np.sum(~np.isfinite(grad)))
        raise NonFiniteGradientError(
            f"{bad} non-finite gradient entries at step {state.t + 1}; step aborted"
        )
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1**state.t)
    v_hat = state.v / (1.0 - state.beta2**state.t)
    return theta - lr * m_hat / (np.sqrt(v_hat) + state.eps)


def minibatch_iter(n_items: int, batch_size: int, seed: int) -> Iterator[np.ndarray]:
    """Endless stream of index batches.

    Each epoch is a fresh seeded shuffle partitioned into consecutive
    batches (the final short batch is kept), so every index appears
    exactly once per epoch.
    """
    if n_items < 1:
        raise ConfigurationError("cannot draw mini-batches from an empty dataset")
    if batch_size > n_items:
        raise ConfigurationError(
            f"batch size {batch_size} exceeds dataset size {n_items}"
        )
    rng = np.random.default_rng(seed)
    while True:
        order = rng.permutation(n_items)
        for start in range(0, n_items, batch_size):
            yield order[start : start + batch_size]


def epoch_batches(n_items: int, batch_size: int, seed: int) -> list[np.ndarray]:
    """The batches of exactly one epoch (mainly for inspection/tests)."""
    stream = minibatch_iter(n_items, batch_size, seed)
    count = -(-n_items // batch_size)
    return [next(stream) for _ in range(count)]
