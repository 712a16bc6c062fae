"""Network derivatives: parameter gradients and input derivatives.

Parameter gradients of any scalar loss come from a reverse sweep over
the recorded graph (:func:`grad_params`).  Derivatives of network
outputs with respect to network inputs are built layer by layer: the
reverse sweep for first partials is written out as graph operations,
and a forward tangent is propagated through that same reverse sweep to
obtain pure second partials.  Because both recurrences are ordinary
graph expressions, a single reverse sweep afterwards differentiates any
loss built from them (e.g. PDE residuals) with respect to the
parameters, exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import autodiff as ad
from .autodiff import Var, constant, gradients
from .errors import ConfigurationError


@dataclass(frozen=True)
class Activation:
    """A smooth nonlinearity with first and second derivatives.

    ``fn`` is the plain-numpy evaluation; ``apply``/``d1``/``d2`` build
    graph expressions (``d1`` and ``d2`` may reuse the activation value
    ``h`` to keep graphs small).
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    apply: Callable[[Var], Var]
    d1: Callable[[Var, Var], Var]
    d2: Callable[[Var, Var, Var], Var]


ACTIVATIONS = {
    "tanh": Activation(
        name="tanh",
        fn=np.tanh,
        apply=ad.tanh,
        d1=lambda q, h: 1.0 - ad.square(h),
        d2=lambda q, h, d1: -2.0 * h * d1,
    ),
    "sin": Activation(
        name="sin",
        fn=np.sin,
        apply=ad.sin,
        d1=lambda q, h: ad.cos(q),
        d2=lambda q, h, d1: -h,
    ),
    "identity": Activation(
        name="identity",
        fn=lambda x: x,
        apply=lambda q: q,
        d1=lambda q, h: constant(np.ones_like(q.value)),
        d2=lambda q, h, d1: constant(np.zeros_like(q.value)),
    ),
}


def activation_by_name(name: str) -> Activation:
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise ConfigurationError(f"unknown activation {name!r}") from None


@dataclass
class ParamVars:
    """Graph leaves for one parameter set, in flattening order."""

    weights: list[Var]
    biases: list[Var]
    lam: Var | None = None

    def leaves(self) -> list[Var]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        if self.lam is not None:
            out.append(self.lam)
        return out


def grad_params(loss: Var, pvars: ParamVars) -> np.ndarray:
    """Flat gradient of a scalar loss, ordered layer by layer.

    The flattening order is W1 (row-major), b1, W2, b2, ..., then the
    inverse coefficient last when present.
    """
    grads = gradients(loss, pvars.leaves())
    return np.concatenate([g.ravel() for g in grads])


class NetGraph:
    """Taped forward pass of a fully connected net over a batch of points,
    with cached input-derivative recurrences.

    ``x`` has shape (batch, n_inputs) and is treated as constant; the
    weight/bias Vars carry the differentiable parameters.
    """

    def __init__(self, pvars: ParamVars, activation: Activation, x: np.ndarray):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2:
            raise ConfigurationError("NetGraph expects a 2-D batch of points")
        self.pvars = pvars
        self.activation = activation
        self.x = x
        self.n_in = x.shape[1]
        self.n_out = pvars.weights[-1].shape[1]
        if pvars.weights[0].shape[0] != self.n_in:
            raise ConfigurationError(
                f"point width {self.n_in} does not match network input width "
                f"{pvars.weights[0].shape[0]}"
            )

        hidden = len(pvars.weights) - 1
        self._pre: list[Var] = []
        self._act: list[Var] = []
        h = constant(x)
        for i in range(hidden):
            q = ad.matmul(h, pvars.weights[i]) + pvars.biases[i]
            h = activation.apply(q)
            self._pre.append(q)
            self._act.append(h)
        self.out = ad.matmul(h, pvars.weights[-1]) + pvars.biases[-1]

        self._d1: list[Var | None] = [None] * hidden
        self._d2: list[Var | None] = [None] * hidden
        self._cols: dict[int, Var] = {}
        self._rev: dict[int, tuple[list[Var], Var]] = {}
        self._tan: dict[int, list[Var]] = {}
        self._tanrev: dict[tuple[int, int], Var] = {}

    # cached per-layer activation derivatives -------------------------

    def _act_d1(self, i: int) -> Var:
        if self._d1[i] is None:
            self._d1[i] = self.activation.d1(self._pre[i], self._act[i])
        return self._d1[i]

    def _act_d2(self, i: int) -> Var:
        if self._d2[i] is None:
            self._d2[i] = self.activation.d2(self._pre[i], self._act[i], self._act_d1(i))
        return self._d2[i]

    # outputs ----------------------------------------------------------

    def output_col(self, k: int) -> Var:
        """Output field k over the batch, shape (batch,)."""
        if k not in self._cols:
            self._cols[k] = ad.getcol(self.out, k)
        return self._cols[k]

    # first partials via a reverse sweep written as graph ops ----------

    def _reverse_chain(self, k: int) -> tuple[list[Var], Var]:
        if k in self._rev:
            return self._rev[k]
        hidden = len(self._pre)
        adjoints: list[Var] = [None] * hidden  # adjoint of h_i
        cur = ad.getcol(self.pvars.weights[-1], k)
        for i in range(hidden - 1, -1, -1):
            adjoints[i] = cur
            s = self._act_d1(i) * cur
            cur = ad.matmul(s, ad.transpose(self.pvars.weights[i]))
        self._rev[k] = (adjoints, cur)
        return self._rev[k]

    def first_partials(self, k: int) -> Var:
        """d(out_k)/d(inputs) over the batch, shape (batch, n_inputs)."""
        return self._reverse_chain(k)[1]

    def first_partial(self, k: int, axis: int) -> Var:
        return ad.getcol(self.first_partials(k), axis)

    # forward tangent for one input axis -------------------------------

    def _tangent_chain(self, axis: int) -> list[Var]:
        if axis in self._tan:
            return self._tan[axis]
        hidden = len(self._pre)
        dq: list[Var] = [None] * hidden
        dq[0] = ad.getrow(self.pvars.weights[0], axis)
        dh = self._act_d1(0) * dq[0]
        for i in range(1, hidden):
            dq[i] = ad.matmul(dh, self.pvars.weights[i])
            dh = self._act_d1(i) * dq[i]
        self._tan[axis] = dq
        return dq

    # pure second partials: tangent propagated through the reverse sweep

    def second_partial(self, k: int, axis: int) -> Var:
        """d2(out_k)/d(input_axis)2 over the batch, shape (batch,)."""
        key = (k, axis)
        if key in self._tanrev:
            return self._tanrev[key]
        adjoints, _ = self._reverse_chain(k)
        dq = self._tangent_chain(axis)
        hidden = len(self._pre)
        tangent: Var | None = None  # tangent of the h_i adjoint; starts at zero
        for i in range(hidden - 1, -1, -1):
            ts = self._act_d2(i) * dq[i] * adjoints[i]
            if tangent is not None:
                ts = ts + self._act_d1(i) * tangent
            tangent = ad.matmul(ts, ad.transpose(self.pvars.weights[i]))
        result = ad.getcol(tangent, axis)
        self._tanrev[key] = result
        return result


@dataclass
class DerivativeBundle:
    """First and pure second partials of every output w.r.t. every input."""

    first: np.ndarray  # (n_outputs, n_inputs)
    second: np.ndarray  # (n_outputs, n_inputs)


def params_to_vars(params, requires_grad: bool = True) -> ParamVars:
    """Wrap a parameter set's arrays as graph leaves."""
    weights = [Var(w, requires_grad=requires_grad) for w in params.weights]
    biases = [Var(b, requires_grad=requires_grad) for b in params.biases]
    lam = None
    if getattr(params, "lam", None) is not None:
        lam = Var(np.float64(params.lam), requires_grad=requires_grad)
    return ParamVars(weights, biases, lam)


def input_derivatives(net, params, point) -> DerivativeBundle:
    """All first and pure second partials of the network outputs at one point.

    ``net`` supplies the configuration (input width, activation);
    ``params`` the weights and biases.  Raises
    :class:`ConfigurationError` on a dimension mismatch.
    """
    coords = np.asarray(
        point.coords() if hasattr(point, "coords") else point, dtype=np.float64
    ).ravel()
    if coords.size != net.config.n_inputs:
        raise ConfigurationError(
            f"point has {coords.size} coordinates, network expects {net.config.n_inputs}"
        )
    activation = activation_by_name(net.config.activation)
    pvars = params_to_vars(params, requires_grad=False)
    graph = NetGraph(pvars, activation, coords[None, :])

    n_out, n_in = graph.n_out, graph.n_in
    first = np.empty((n_out, n_in))
    second = np.empty((n_out, n_in))
    for k in range(n_out):
        first[k, :] = graph.first_partials(k).value[0]
        for axis in range(n_in):
            second[k, axis] = graph.second_partial(k, axis).value[0]
    return DerivativeBundle(first=first, second=second)
