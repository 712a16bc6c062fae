"""Fully connected feed-forward network: configuration, parameters,
initialization, evaluation and checkpoint persistence."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DataFormatError
from .ioutils import atomic_write_bytes
from .netderiv import ACTIVATIONS, activation_by_name

INIT_SCHEMES = ("xavier", "uniform-random")

_MAGIC = b"FLOWPINN"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class MlpConfig:
    """Architecture of one network.

    All hidden layers share the same width; the final layer is affine
    (no activation) so outputs are unbounded reals.
    """

    n_inputs: int
    hidden_layers: int
    neurons: int
    n_outputs: int
    activation: str = "tanh"
    init_scheme: str = "xavier"
    seed: int = 0

    def validate(self) -> None:
        if self.n_inputs < 1 or self.n_outputs < 1:
            raise ConfigurationError("network input/output widths must be >= 1")
        if self.hidden_layers < 1 or self.neurons < 1:
            raise ConfigurationError("need at least one hidden layer with >= 1 neuron")
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(f"unknown activation {self.activation!r}")
        if self.init_scheme not in INIT_SCHEMES:
            raise ConfigurationError(f"unknown init scheme {self.init_scheme!r}")

    def layer_widths(self) -> list[int]:
        return [self.n_inputs] + [self.neurons] * self.hidden_layers + [self.n_outputs]


@dataclass
class NetworkParams:
    """All trainable values: per-layer weights/biases plus an optional
    inverse PDE coefficient (present only for inverse runs)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    lam: float | None = None

    @property
    def n_params(self) -> int:
        count = sum(w.size + b.size for w, b in zip(self.weights, self.biases))
        return count + (1 if self.lam is not None else 0)

    def copy(self) -> "NetworkParams":
        return NetworkParams(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            lam=self.lam,
        )

    def with_lambda(self, lam: float) -> "NetworkParams":
        return NetworkParams(weights=self.weights, biases=self.biases, lam=float(lam))


def init(config: MlpConfig) -> NetworkParams:
    """Draw initial parameters; deterministic under the config seed.

    The Xavier scheme draws weights from a normal with variance
    2 / (fan_in + fan_out); uniform-random draws from
    U(-1/sqrt(fan_in), 1/sqrt(fan_in)).  Biases start at zero in both.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    widths = config.layer_widths()
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        if config.init_scheme == "xavier":
            sigma = np.sqrt(2.0 / (fan_in + fan_out))
            w = rng.normal(0.0, sigma, size=(fan_in, fan_out))
        else:
            bound = 1.0 / np.sqrt(fan_in)
            w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        weights.append(w)
        biases.append(np.zeros(fan_out))
    return NetworkParams(weights=weights, biases=biases)


class Mlp:
    """Network structure bound to a configuration."""

    def __init__(self, config: MlpConfig):
        config.validate()
        self.config = config
        self._fn = activation_by_name(config.activation).fn

    def init_params(self) -> NetworkParams:
        return init(self.config)

    def forward(self, params: NetworkParams, points: np.ndarray) -> np.ndarray:
        """Evaluate the network on (N, n_inputs) points; returns (N, n_outputs).

        A single point of shape (n_inputs,) returns (n_outputs,).
        """
        x = np.asarray(points, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.shape[1] != self.config.n_inputs:
            raise ConfigurationError(
                f"input width {x.shape[1]} does not match configured {self.config.n_inputs}"
            )
        h = x
        for w, b in zip(params.weights[:-1], params.biases[:-1]):
            h = self._fn(h @ w + b)
        out = h @ params.weights[-1] + params.biases[-1]
        return out[0] if single else out


# flat parameter vector --------------------------------------------------


def flatten(params: NetworkParams) -> np.ndarray:
    """Concatenate parameters in the documented order: W1 (row-major),
    b1, W2, b2, ..., inverse coefficient last if present."""
    parts = []
    for w, b in zip(params.weights, params.biases):
        parts.append(w.ravel())
        parts.append(b)
    if params.lam is not None:
        parts.append(np.array([params.lam]))
    return np.concatenate(parts)


def unflatten(flat: np.ndarray, template: NetworkParams) -> NetworkParams:
    """Inverse of :func:`flatten`; shapes taken from ``template``."""
    weights, biases = [], []
    pos = 0
    for w, b in zip(template.weights, template.biases):
        weights.append(flat[pos : pos + w.size].reshape(w.shape))
        pos += w.size
        biases.append(flat[pos : pos + b.size])
        pos += b.size
    lam = None
    if template.lam is not None:
        lam = float(flat[pos])
        pos += 1
    if pos != flat.size:
        raise ConfigurationError("flat vector length does not match parameter shapes")
    return NetworkParams(weights=weights, biases=biases, lam=lam)


# checkpoint format ------------------------------------------------------
#
# magic "FLOWPINN" | u32 version | u32 n_inputs | u32 hidden_layers
# | u32 neurons | u32 n_outputs | u16 len + utf8 activation
# | u16 len + utf8 init scheme | i64 seed | per layer: W then b as
# row-major little-endian float64 | u8 lambda flag | [f64 lambda]


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<H", len(raw)) + raw


def save_checkpoint(path: str, config: MlpConfig, params: NetworkParams) -> None:
    chunks = [
        _MAGIC,
        struct.pack(
            "<IIIII",
            _FORMAT_VERSION,
            config.n_inputs,
            config.hidden_layers,
            config.neurons,
            config.n_outputs,
        ),
        _pack_str(config.activation),
        _pack_str(config.init_scheme),
        struct.pack("<q", config.seed),
    ]
    for w, b in zip(params.weights, params.biases):
        chunks.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        chunks.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    if params.lam is None:
        chunks.append(struct.pack("<B", 0))
    else:
        chunks.append(struct.pack("<B", 1))
        chunks.append(struct.pack("<d", params.lam))
    atomic_write_bytes(path, b"".join(chunks))


class _Reader:
    def __init__(self, payload: bytes, path: str):
        self.payload = payload
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.payload):
            raise DataFormatError(f"truncated checkpoint file: {self.path}")
        out = self.payload[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def take_str(self) -> str:
        (n,) = self.unpack("<H")
        return self.take(n).decode("utf-8")


def load_checkpoint(path: str) -> tuple[MlpConfig, NetworkParams]:
    with open(path, "rb") as handle:
        payload = handle.read()
    r = _Reader(payload, path)
    if r.take(len(_MAGIC)) != _MAGIC:
        raise DataFormatError(f"not a checkpoint file: {path}")
    version, n_in, layers, neurons, n_out = r.unpack("<IIIII")
    if version != _FORMAT_VERSION:
        raise DataFormatError(f"unsupported checkpoint version {version} in {path}")
    activation = r.take_str()
    init_scheme = r.take_str()
    (seed,) = r.unpack("<q")
    config = MlpConfig(
        n_inputs=n_in,
        hidden_layers=layers,
        neurons=neurons,
        n_outputs=n_out,
        activation=activation,
        init_scheme=init_scheme,
        seed=seed,
    )
    widths = config.layer_widths()
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        w = np.frombuffer(r.take(8 * fan_in * fan_out), dtype="<f8").reshape(fan_in, fan_out)
        b = np.frombuffer(r.take(8 * fan_out), dtype="<f8")
        weights.append(w.astype(np.float64))
        biases.append(b.astype(np.float64))
    (flag,) = r.unpack("<B")
    lam = None
    if flag:
        (lam,) = r.unpack("<d")
    if r.pos != len(payload):
        raise DataFormatError(f"trailing bytes in checkpoint file: {path}")
    return config, NetworkParams(weights=weights, biases=biases, lam=lam)
