"""Relative-L2 evaluation on test splits and back-propagated gradient
histograms.

Incompressible pressure is identifiable only up to an additive constant
(per time step), so pressure errors are reported both raw and after
per-step mean alignment; the aligned value is the headline number.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .datagen import DatasetSplit
from .errors import ConfigurationError, UndefinedMetricError
from .ioutils import atomic_write_text
from .physics import COLS_2D, COLS_3D, NS2D, input_width, output_width, velocity_fields
from .weighting import grad_abs_stats

HISTOGRAM_BINS = 101


def relative_l2(pred: np.ndarray, truth: np.ndarray) -> float:
    """||pred - truth||_2 / ||truth||_2."""
    pred = np.asarray(pred, dtype=np.float64).ravel()
    truth = np.asarray(truth, dtype=np.float64).ravel()
    if pred.size != truth.size:
        raise ConfigurationError(f"length mismatch: {pred.size} vs {truth.size}")
    denom = float(np.linalg.norm(truth))
    if denom == 0.0:
        raise UndefinedMetricError("relative L2 undefined for zero-norm ground truth")
    return float(np.linalg.norm(pred - truth) / denom)


@dataclass
class EvalReport:
    """Per-timestep relative L2 errors and their per-field means."""

    fields: list[str]
    times: np.ndarray
    per_step: dict[str, np.ndarray]
    aggregates: dict[str, float]
    meta: dict = field(default_factory=dict)

    def steps_csv(self) -> str:
        lines = ["field,timestep,epsilon"]
        for name in self.fields:
            eps = self.per_step[name]
            for t, e in zip(self.times, eps):
                lines.append(f"{name},{float(t)!r},{float(e)!r}")
        return "\n".join(lines) + "\n"

    def summary_csv(self) -> str:
        lines = ["field,arelative_l2"]
        for name in self.fields:
            lines.append(f"{name},{float(self.aggregates[name])!r}")
        return "\n".join(lines) + "\n"

    def write(self, steps_path: str, summary_path: str) -> None:
        atomic_write_text(steps_path, self.steps_csv())
        atomic_write_text(summary_path, self.summary_csv())


def evaluate(params, net, split: DatasetSplit, regime: str, chunk: int = 20000) -> EvalReport:
    """Relative L2 per field per test timestep, plus per-field means.

    Pressure gets two entries: ``p_raw`` and ``p_aligned`` (predicted
    pressure shifted per step so its mean matches the ground truth,
    removing the gauge constant).  Velocity fields are untouched by the
    alignment.
    """
    if net.config.n_inputs != input_width(regime) or net.config.n_outputs != output_width(regime):
        raise ConfigurationError(
            f"checkpoint widths ({net.config.n_inputs} in, {net.config.n_outputs} out) "
            f"do not match regime {regime}"
        )
    test = split.test
    if len(test) == 0:
        raise ConfigurationError("test split is empty")
    expected_dim = input_width(regime) - 1
    if test.n_dim != expected_dim:
        raise ConfigurationError(
            f"test split has {test.n_dim} spatial dimensions, regime {regime} "
            f"expects {expected_dim}"
        )

    cols = COLS_2D if regime == NS2D else COLS_3D
    vel = velocity_fields(regime)
    has_pressure = test.p is not None
    fields = list(vel) + (["p_raw", "p_aligned"] if has_pressure else [])

    times = np.unique(test.times)
    per_step = {name: np.empty(len(times)) for name in fields}

    predictions = np.empty((len(test), net.config.n_outputs))
    for lo in range(0, len(test), chunk):
        hi = min(lo + chunk, len(test))
        predictions[lo:hi] = net.forward(params, test.points[lo:hi])

    for i, t in enumerate(times):
        idx = np.flatnonzero(test.times == t)
        for name in vel:
            per_step[name][i] = relative_l2(
                predictions[idx, cols[name]], test.component(name)[idx]
            )
        if has_pressure:
            truth_p = test.component("p")[idx]
            pred_p = predictions[idx, cols["p"]]
            per_step["p_raw"][i] = relative_l2(pred_p, truth_p)
            shift = np.mean(truth_p) - np.mean(pred_p)  # per-step gauge constant
            per_step["p_aligned"][i] = relative_l2(pred_p + shift, truth_p)

    aggregates = {name: float(np.mean(per_step[name])) for name in fields}
    return EvalReport(
        fields=fields,
        times=times,
        per_step=per_step,
        aggregates=aggregates,
        meta=dict(split.meta),
    )


@dataclass
class GradientHistogram:
    """Distribution of one loss component's back-propagated gradient."""

    component: str
    edges: np.ndarray  # strictly increasing, symmetric about zero
    counts: np.ndarray
    max_abs: float
    mean_abs: float
    nonfinite_count: int = 0


def _symmetric_log_edges(max_abs: float, bins: int) -> np.ndarray:
    # Symmetric log-spaced bins with a zero-straddling center bin.
    half = (bins - 1) // 2
    if max_abs <= 0.0:
        return np.linspace(-1.0, 1.0, bins + 1)
    inner = max_abs * 1e-12
    positive = np.geomspace(inner, max_abs, half + 1)
    return np.concatenate([-positive[::-1], positive])


def gradient_histograms(
    gradients: dict[str, np.ndarray], bins: int = HISTOGRAM_BINS
) -> list[GradientHistogram]:
    """One histogram per loss component over its flat parameter gradient.

    Non-finite entries are excluded from the bins and counted separately;
    summary stats (max |g|, mean |g|) use exactly the same computation as
    the adaptive weighting ratio.
    """
    if bins < 3 or bins % 2 == 0:
        raise ConfigurationError("bins must be an odd number >= 3")
    out = []
    for component, grad in gradients.items():
        grad = np.asarray(grad, dtype=np.float64).ravel()
        finite = grad[np.isfinite(grad)]
        nonfinite = int(grad.size - finite.size)
        if finite.size:
            max_abs, mean_abs = grad_abs_stats(finite)
        else:
            max_abs = mean_abs = 0.0
        edges = _symmetric_log_edges(max_abs, bins)
        counts, _ = np.histogram(finite, bins=edges)
        out.append(
            GradientHistogram(
                component=component,
                edges=edges,
                counts=counts,
                max_abs=max_abs,
                mean_abs=mean_abs,
                nonfinite_count=nonfinite,
            )
        )
    return out


def histograms_csv(histograms: list[GradientHistogram]) -> str:
    lines = ["component,bin_lo,bin_hi,count"]
    for h in histograms:
        for lo, hi, count in zip(h.edges[:-1], h.edges[1:], h.counts):
            lines.append(f"{h.component},{float(lo)!r},{float(hi)!r},{int(count)}")
    return "\n".join(lines) + "\n"


def write_histograms(path: str, histograms: list[GradientHistogram]) -> None:
    atomic_write_text(path, histograms_csv(histograms))
