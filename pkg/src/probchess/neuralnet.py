"""Small feed-forward networks with modality-separated first layers.

The input vector is split into named groups. Each group feeds its own block
of first-layer units; everything above the first hidden layer is fully
connected. Hidden units are ReLU; the single output unit is tanh (evaluator)
or logistic (move-probability network).
"""

from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

ACTIVATIONS = ("relu", "tanh", "logistic", "identity")
HEADS = ("tanh", "logistic", "identity")

# He-style uniform bound: limit = INIT_GAIN / sqrt(fan_in).
INIT_GAIN = math.sqrt(6.0)

MAGIC = b"PCNN"
FORMAT_VERSION = 1


class TrainingDivergence(FloatingPointError):
    """Raised when a gradient or update contains NaN or Inf."""


class WeightsFormatError(ValueError):
    pass


class LayoutMismatch(WeightsFormatError):
    pass


@dataclass(frozen=True)
class Topology:
    """``groups``: (name, width) input partition; ``blocks``: first-layer units
    per group; ``hidden``: widths of the fully connected hidden layers above."""

    groups: tuple
    blocks: tuple
    hidden: tuple = (64,)
    head: str = "tanh"

    def __post_init__(self):
        if len(self.groups) != len(self.blocks):
            raise ValueError("one first-layer block per input group required")
        if any(w <= 0 for _, w in self.groups) or any(b <= 0 for b in self.blocks):
            raise ValueError("group and block widths must be positive")
        if any(h <= 0 for h in self.hidden):
            raise ValueError("hidden widths must be positive")
        if self.head not in HEADS:
            raise ValueError(f"unknown head activation {self.head!r}")

    @property
    def input_size(self) -> int:
        return sum(w for _, w in self.groups)

    @property
    def sizes(self) -> list:
        return [self.input_size, sum(self.blocks), *self.hidden, 1]

    @property
    def activations(self) -> list:
        return ["relu"] * (len(self.sizes) - 2) + [self.head]

    def masks(self) -> list:
        sizes = self.sizes
        first = np.zeros((sizes[1], sizes[0]), dtype=bool)
        row = col = 0
        for (_, width), units in zip(self.groups, self.blocks):
            first[row:row + units, col:col + width] = True
            row += units
            col += width
        rest = [np.ones((sizes[i + 1], sizes[i]), dtype=bool) for i in range(1, len(sizes) - 1)]
        return [first] + rest

    def connection_count(self) -> int:
        first = sum(w * b for (_, w), b in zip(self.groups, self.blocks))
        sizes = self.sizes
        return first + sum(sizes[i] * sizes[i + 1] for i in range(1, len(sizes) - 1))


def default_topology(groups, head: str = "tanh", scale: float = 1.0) -> Topology:
    """Desk-sized default: the piece-centric block dominates the first layer."""
    per_group = {"position": 16, "piece": 128, "square": 64, "move": 32}
    blocks = tuple(max(1, int(per_group.get(name, 32) * scale)) for name, _ in groups)
    return Topology(tuple(groups), blocks, (max(1, int(64 * scale)),), head)


class Gradients(NamedTuple):
    weights: list
    biases: list

    def scaled(self, c: float) -> "Gradients":
        return Gradients([w * c for w in self.weights], [b * c for b in self.biases])

    def __add__(self, other: "Gradients") -> "Gradients":
        return Gradients([a + b for a, b in zip(self.weights, other.weights)],
                         [a + b for a, b in zip(self.biases, other.biases)])

    def arrays(self) -> list:
        return list(self.weights) + list(self.biases)

    def norm(self) -> float:
        return math.sqrt(sum(float(np.sum(a.astype(np.float64) ** 2)) for a in self.arrays()))

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())


def _activate(kind: str, z: np.ndarray) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0)
    if kind == "tanh":
        return np.tanh(z)
    if kind == "logistic":
        return 0.5 * (1.0 + np.tanh(0.5 * z))  # overflow-free sigmoid
    return z


def _derivative(kind: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if kind == "relu":
        return (z > 0).astype(z.dtype)
    if kind == "tanh":
        return 1 - a * a
    if kind == "logistic":
        return a * (1 - a)
    return np.ones_like(z)


class Network:
    def __init__(self, topology: Topology, weights: list, biases: list, dtype=np.float32):
        self.topology = topology
        self.dtype = np.dtype(dtype)
        self.masks = topology.masks()
        self.weights = [np.asarray(w, dtype=self.dtype) for w in weights]
        self.biases = [np.asarray(b, dtype=self.dtype) for b in biases]
        for w, m in zip(self.weights, self.masks):
            if w.shape != m.shape:
                raise ValueError(f"weight shape {w.shape} does not match topology {m.shape}")
            w[~m] = 0
        self.activations = topology.activations

    @property
    def input_size(self) -> int:
        return self.topology.input_size

    @property
    def head(self) -> str:
        return self.topology.head

    def copy(self) -> "Network":
        return Network(self.topology, [w.copy() for w in self.weights],
                       [b.copy() for b in self.biases], self.dtype)

    def parameters(self) -> list:
        return self.weights + self.biases

    def zero_gradients(self) -> Gradients:
        return Gradients([np.zeros_like(w) for w in self.weights],
                         [np.zeros_like(b) for b in self.biases])

    # -- inference -----------------------------------------------------------

    def forward(self, x: np.ndarray) -> float:
        """Scalar output for a single input vector."""
        x = np.asarray(x)
        if x.shape != (self.input_size,):
            raise ValueError(f"expected input of width {self.input_size}, got shape {x.shape}")
        a = x.astype(self.dtype, copy=False)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = w @ a + b
            a = _activate(self.activations[i], z) if i == last else np.maximum(z, 0)
        return float(a[0])

    def forward_batch(self, X: np.ndarray) -> np.ndarray:
        return self._trace(X)[-1][1][:, 0]

    def _trace(self, X: np.ndarray) -> list:
        X = np.asarray(X, dtype=self.dtype)
        if X.ndim != 2 or X.shape[1] != self.input_size:
            raise ValueError(f"expected batch of width {self.input_size}, got shape {X.shape}")
        layers = [(None, X)]
        a = X
        for w, b, kind in zip(self.weights, self.biases, self.activations):
            z = a @ w.T + b
            a = _activate(kind, z)
            layers.append((z, a))
        return layers

    # -- gradients -----------------------------------------------------------

    def backward(self, x: np.ndarray, upstream: float, pre_activation: bool = False) -> Gradients:
        """Gradient of ``upstream * output`` for one input.

        With ``pre_activation`` the upstream value is taken as the derivative
        with respect to the output unit's pre-activation (used for the
        logistic + cross-entropy shortcut).
        """
        x = np.asarray(x)
        return self.backward_batch(x[None, :], np.array([upstream]), pre_activation)

    def backward_batch(self, X: np.ndarray, upstream: np.ndarray,
                       pre_activation: bool = False) -> Gradients:
        """Sum over the batch of per-example gradients scaled by ``upstream``."""
        layers = self._trace(X)
        up = np.asarray(upstream, dtype=self.dtype).reshape(-1, 1)
        z, a = layers[-1]
        delta = up if pre_activation else up * _derivative(self.activations[-1], z, a)
        gw = [None] * len(self.weights)
        gb = [None] * len(self.weights)
        for i in range(len(self.weights) - 1, -1, -1):
            prev = layers[i][1]
            gw[i] = (delta.T @ prev) * self.masks[i]
            gb[i] = delta.sum(axis=0)
            if i > 0:
                zp, ap = layers[i]
                delta = (delta @ self.weights[i]) * _derivative(self.activations[i - 1], zp, ap)
        return Gradients(gw, gb)


def build(topology: Topology, seed: int = 0, dtype=np.float32) -> Network:
    """Uniform(-INIT_GAIN/sqrt(fan_in), +INIT_GAIN/sqrt(fan_in)) weights, zero biases.

    ``fan_in`` counts only the connections the mask allows into each unit.
    """
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for m in topology.masks():
        fan_in = np.maximum(m.sum(axis=1, keepdims=True), 1)
        bound = INIT_GAIN / np.sqrt(fan_in)
        w = rng.uniform(-1.0, 1.0, size=m.shape) * bound
        weights.append(np.where(m, w, 0.0))
        biases.append(np.zeros(m.shape[0]))
    return Network(topology, weights, biases, dtype)


def init_bound(fan_in: int) -> float:
    return INIT_GAIN / math.sqrt(max(fan_in, 1))


# -- losses ----------------------------------------------------------------

def _wide(a):
    """``a`` as an array of at least float64 precision (wider types are kept)."""
    a = np.asarray(a)
    return a.astype(np.promote_types(a.dtype, np.float64), copy=False)


def l1_loss(pred, target):
    """(|pred - target|, sign(pred - target)); works on scalars or arrays."""
    diff = _wide(pred) - _wide(target)
    loss, grad = np.abs(diff), np.sign(diff)
    if loss.ndim == 0:
        return float(loss), float(grad)
    return loss, grad


def l2_loss(pred, target):
    """(0.5 (pred - target)^2, pred - target)."""
    diff = _wide(pred) - _wide(target)
    loss, grad = 0.5 * diff * diff, diff
    if loss.ndim == 0:
        return float(loss), float(grad)
    return loss, grad


CE_EPS = 1e-7


def cross_entropy_loss(pred, target):
    """Binary cross-entropy and its derivative with respect to ``pred``.

    ``pred`` is clamped to [CE_EPS, 1 - CE_EPS]. With a logistic head the
    derivative with respect to the pre-activation is simply ``pred - target``
    (see :func:`cross_entropy_logit_grad`).
    """
    p = np.clip(_wide(pred), CE_EPS, 1 - CE_EPS)
    t = _wide(target)
    loss = -(t * np.log(p) + (1 - t) * np.log(1 - p))
    grad = (p - t) / (p * (1 - p))
    if loss.ndim == 0:
        return float(loss), float(grad)
    return loss, grad


def cross_entropy_logit_grad(pred, target):
    return _wide(pred) - _wide(target)


# -- optimisers ------------------------------------------------------------

OPTIMIZERS = ("sgd-momentum", "nesterov", "adagrad", "adadelta")

_DEFAULTS = {
    "sgd-momentum": dict(lr=0.01, momentum=0.9, rho=0.0, eps=0.0),
    "nesterov": dict(lr=0.01, momentum=0.9, rho=0.0, eps=0.0),
    "adagrad": dict(lr=0.01, momentum=0.0, rho=0.0, eps=1e-8),
    "adadelta": dict(lr=1.0, momentum=0.0, rho=0.95, eps=1e-6),
}


@dataclass
class OptimizerState:
    algorithm: str
    lr: float
    momentum: float
    rho: float
    eps: float
    slots: dict = field(default_factory=dict)
    steps: int = 0


def make_optimizer(net: Network, algorithm: str = "adadelta", **hyper) -> OptimizerState:
    if algorithm not in OPTIMIZERS:
        raise ValueError(f"unknown optimizer {algorithm!r}")
    params = dict(_DEFAULTS[algorithm])
    unknown = set(hyper) - set(params)
    if unknown:
        raise TypeError(f"unknown hyperparameters {sorted(unknown)}")
    params.update(hyper)
    names = {"sgd-momentum": ("velocity",), "nesterov": ("velocity",),
             "adagrad": ("sum_sq_grad",), "adadelta": ("avg_sq_grad", "avg_sq_update")}[algorithm]
    slots = {n: [np.zeros_like(p) for p in net.parameters()] for n in names}
    return OptimizerState(algorithm, **params, slots=slots)


def step(net: Network, state: OptimizerState, g: Gradients):
    """Apply one descent step in place; returns ``(net, state)`` for convenience."""
    if not g.is_finite():
        raise TrainingDivergence("non-finite gradient")
    params = net.parameters()
    grads = g.arrays()
    alg = state.algorithm
    for i, (p, gr) in enumerate(zip(params, grads)):
        gr = gr.astype(p.dtype, copy=False)
        if alg == "sgd-momentum":
            v = state.slots["velocity"][i]
            v *= state.momentum
            v -= state.lr * gr
            p += v
        elif alg == "nesterov":
            v = state.slots["velocity"][i]
            prev = v.copy()
            v *= state.momentum
            v -= state.lr * gr
            p += -state.momentum * prev + (1 + state.momentum) * v
        elif alg == "adagrad":
            acc = state.slots["sum_sq_grad"][i]
            acc += gr * gr
            p -= state.lr * gr / np.sqrt(acc + state.eps)
        else:
            eg = state.slots["avg_sq_grad"][i]
            ed = state.slots["avg_sq_update"][i]
            eg *= state.rho
            eg += (1 - state.rho) * gr * gr
            delta = -np.sqrt(ed + state.eps) / np.sqrt(eg + state.eps) * gr
            ed *= state.rho
            ed += (1 - state.rho) * delta * delta
            p += state.lr * delta
    for w, m in zip(net.weights, net.masks):
        w[~m] = 0
    state.steps += 1
    if not all(np.all(np.isfinite(p)) for p in params):
        raise TrainingDivergence("non-finite parameters after update")
    return net, state


# -- serialisation ---------------------------------------------------------

def _pack_str(buf, s: str):
    b = s.encode()
    buf.write(struct.pack("<H", len(b)))
    buf.write(b)


def _pack_array(buf, a: np.ndarray):
    buf.write(np.ascontiguousarray(a, dtype="<f4").tobytes())


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise WeightsFormatError("truncated weights file")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (n,) = self.unpack("<H")
        return self.take(n).decode()

    def array(self, shape) -> np.ndarray:
        count = int(np.prod(shape))
        return np.frombuffer(self.take(4 * count), dtype="<f4").reshape(shape).astype(np.float32)


def dumps(net: Network, state: OptimizerState | None = None) -> bytes:
    """Serialise to the versioned little-endian format (parameters as float32)."""
    t = net.topology
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<H", FORMAT_VERSION))
    _pack_str(buf, t.head)
    buf.write(struct.pack("<H", len(t.groups)))
    for (name, width), units in zip(t.groups, t.blocks):
        _pack_str(buf, name)
        buf.write(struct.pack("<II", width, units))
    buf.write(struct.pack("<H", len(t.hidden)))
    buf.write(struct.pack(f"<{len(t.hidden)}I", *t.hidden))
    for p in net.parameters():
        _pack_array(buf, p)
    if state is None:
        buf.write(struct.pack("<B", 0))
    else:
        buf.write(struct.pack("<B", 1))
        _pack_str(buf, state.algorithm)
        buf.write(struct.pack("<ddddQ", state.lr, state.momentum, state.rho, state.eps, state.steps))
        buf.write(struct.pack("<H", len(state.slots)))
        for name, arrays in state.slots.items():
            _pack_str(buf, name)
            for a in arrays:
                _pack_array(buf, a)
    payload = buf.getvalue()
    return payload + struct.pack("<Q", len(payload))


def loads(data: bytes, expected_groups=None):
    """Inverse of :func:`dumps`. Returns ``(net, optimizer_state_or_None)``.

    ``expected_groups`` (the running feature layout's (name, width) pairs)
    makes a layout mismatch an error.
    """
    if len(data) < 8 or struct.unpack("<Q", data[-8:])[0] != len(data) - 8:
        raise WeightsFormatError("length check failed (truncated or corrupted file)")
    r = _Reader(data[:-8])
    if r.take(4) != MAGIC:
        raise WeightsFormatError("bad magic bytes")
    (version,) = r.unpack("<H")
    if version != FORMAT_VERSION:
        raise WeightsFormatError(f"unsupported format version {version}")
    head = r.string()
    (ngroups,) = r.unpack("<H")
    groups, blocks = [], []
    for _ in range(ngroups):
        name = r.string()
        width, units = r.unpack("<II")
        groups.append((name, width))
        blocks.append(units)
    (nhidden,) = r.unpack("<H")
    hidden = r.unpack(f"<{nhidden}I")
    topology = Topology(tuple(groups), tuple(blocks), tuple(hidden), head)
    if expected_groups is not None and tuple(map(tuple, expected_groups)) != topology.groups:
        raise LayoutMismatch(f"weights expect layout {topology.groups}, "
                             f"feature extractor provides {tuple(expected_groups)}")
    shapes = [m.shape for m in topology.masks()]
    weights = [r.array(s) for s in shapes]
    biases = [r.array((s[0],)) for s in shapes]
    net = Network(topology, weights, biases, np.float32)
    state = None
    (has_state,) = r.unpack("<B")
    if has_state:
        algorithm = r.string()
        lr, momentum, rho, eps, steps = r.unpack("<ddddQ")
        (nslots,) = r.unpack("<H")
        slots = {}
        for _ in range(nslots):
            name = r.string()
            slots[name] = [r.array(p.shape) for p in net.parameters()]
        state = OptimizerState(algorithm, lr, momentum, rho, eps, slots, steps)
    if r.pos != len(r.data):
        raise WeightsFormatError("trailing bytes in weights file")
    return net, state


def save(path, net: Network, state: OptimizerState | None = None) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(net, state))


def load(path, expected_groups=None):
    with open(path, "rb") as fh:
        return loads(fh.read(), expected_groups)
