"""Shared fixtures and finite-difference oracles for the test suite."""

import os

# Keep BLAS single-threaded so timed runs measure one CPU core and
# reductions stay deterministic across processes.
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np
import pytest

from flowpinn.network import Mlp, MlpConfig, init


@pytest.fixture
def tiny_net():
    config = MlpConfig(n_inputs=3, hidden_layers=2, neurons=8, n_outputs=3, seed=11)
    return Mlp(config), init(config)


def fd_input_first(net, params, point, k, axis, h=1e-5):
    e = np.zeros(len(point))
    e[axis] = 1.0
    hi = net.forward(params, point + h * e)[k]
    lo = net.forward(params, point - h * e)[k]
    return (hi - lo) / (2.0 * h)


def fd_input_second(net, params, point, k, axis, h=1e-4):
    e = np.zeros(len(point))
    e[axis] = 1.0
    hi = net.forward(params, point + h * e)[k]
    mid = net.forward(params, point)[k]
    lo = net.forward(params, point - h * e)[k]
    return (hi - 2.0 * mid + lo) / (h * h)


def rel_err(a, b, floor=1e-8):
    return abs(a - b) / max(floor, abs(b))
