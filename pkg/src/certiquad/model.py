"""Multilayer perceptrons with ReLU/RePU activations and their exact evaluation.

A network maps R^d -> R through L hidden layers and a final affine map:

    z^1(x) = W^1 x + b^1,         a^1 = mu(z^1),
    z^k(x) = W^k a^{k-1} + b^k,   a^k = mu(z^k),    k = 2, ..., L,
    f(x)   = W^{L+1} a^L + b^{L+1},

with a single scalar activation mu applied component-wise.  Supported
activations are relu(t) = max(0, t) and repu(t) = max(0, t)^n for integer
n >= 2.  Weak derivatives at the kink t = 0 are fixed to 0 so evaluation is
deterministic.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError, UnsupportedOrderError

RELU = "relu"
REPU = "repu"


@dataclass(frozen=True)
class ActivationSpec:
    """Scalar activation function: relu, or repu of a given integer order."""

    kind: str
    order: int | None = None

    def __post_init__(self):
        if self.kind not in (RELU, REPU):
            raise ValueError(f"unknown activation kind {self.kind!r}")
        if self.kind == REPU:
            if self.order is None or int(self.order) < 2:
                raise ValueError("repu activation requires integer order >= 2")
            object.__setattr__(self, "order", int(self.order))
        elif self.order is not None:
            raise ValueError("relu activation takes no order")

    @property
    def max_derivative_order(self) -> int:
        """Highest weak derivative order that exists: 1 for relu, n for repu(n)."""
        return 1 if self.kind == RELU else int(self.order)

    def value(self, t):
        return activation_derivative(self, 0, t)

    def derivative(self, m: int, t):
        return activation_derivative(self, m, t)

    def to_dict(self) -> dict:
        if self.kind == RELU:
            return {"kind": RELU}
        return {"kind": REPU, "order": self.order}

    @classmethod
    def from_dict(cls, d: dict) -> "ActivationSpec":
        return cls(kind=d["kind"], order=d.get("order"))


def _int_power(arr, exponent: int):
    # repeated multiplication: exactly rounded per step and identical across
    # numerics stacks, unlike libm pow
    out = np.ones_like(arr)
    for _ in range(exponent):
        out = out * arr
    return out


def activation_derivative(spec: ActivationSpec, m: int, t):
    """m-th weak derivative of the activation, element-wise on array input.

    For repu(n): mu^(m)(t) = n!/(n-m)! * t^(n-m) for t > 0 and 0 for t <= 0,
    valid for 0 <= m <= n.  For relu: mu(t) = max(0, t) and mu'(t) = 1 for
    t > 0, else 0.  The value at the kink t = 0 is 0 for every m >= 1.
    """
    if m < 0 or m > spec.max_derivative_order:
        raise UnsupportedOrderError(
            f"derivative order {m} unsupported for {spec.kind}"
            + (f"({spec.order})" if spec.kind == REPU else "")
        )
    arr = np.asarray(t, dtype=float)
    pos = arr > 0.0
    if spec.kind == RELU:
        out = np.where(pos, arr if m == 0 else 1.0, 0.0)
    else:
        n = spec.order
        coef = float(math.factorial(n) // math.factorial(n - m))
        out = np.where(pos, coef * _int_power(arr, n - m), 0.0)
    if np.ndim(t) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class NetworkParams:
    """Immutable weights/biases of an MLP, validated on construction.

    ``weights[k]`` has shape (n_{k+1}, n_k) with n_0 = input_dim and the last
    width equal to 1; ``biases[k]`` has length n_{k+1}.  Layer order is
    input -> output, so there are L+1 affine maps for L hidden layers.
    """

    input_dim: int
    weights: tuple
    biases: tuple
    activation: ActivationSpec

    def __post_init__(self):
        ws = tuple(np.ascontiguousarray(w, dtype=float) for w in self.weights)
        bs = tuple(np.ascontiguousarray(b, dtype=float) for b in self.biases)
        if len(ws) != len(bs):
            raise ShapeError("weights and biases must pair up layer by layer")
        if len(ws) < 2:
            raise ShapeError("need at least one hidden layer")
        prev = self.input_dim
        if prev < 1:
            raise ShapeError("input_dim must be positive")
        for k, (w, b) in enumerate(zip(ws, bs)):
            if w.ndim != 2 or b.ndim != 1:
                raise ShapeError(f"layer {k}: weight must be 2-D, bias 1-D")
            if w.shape[1] != prev:
                raise ShapeError(
                    f"layer {k}: weight has {w.shape[1]} columns, expected {prev}"
                )
            if w.shape[0] != b.shape[0]:
                raise ShapeError(f"layer {k}: bias length does not match rows")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise DomainError(f"layer {k}: non-finite parameter entries")
            prev = w.shape[0]
        if prev != 1:
            raise ShapeError("output layer must have a single neuron")
        for a in ws + bs:
            a.setflags(write=False)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    @property
    def depth(self) -> int:
        """Number of hidden layers L."""
        return len(self.weights) - 1

    @property
    def hidden_widths(self) -> tuple:
        return tuple(w.shape[0] for w in self.weights[:-1])

    @property
    def n_parameters(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "activation": self.activation.to_dict(),
            "layers": [
                {"weight": w.tolist(), "bias": b.tolist()}
                for w, b in zip(self.weights, self.biases)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkParams":
        layers = d["layers"]
        return cls(
            input_dim=int(d["input_dim"]),
            weights=tuple(np.array(layer["weight"], dtype=float) for layer in layers),
            biases=tuple(np.array(layer["bias"], dtype=float) for layer in layers),
            activation=ActivationSpec.from_dict(d["activation"]),
        )


def zero_network(input_dim: int, hidden_widths, activation: ActivationSpec) -> NetworkParams:
    """Network of the given shape with all weights and biases zero."""
    widths = [input_dim, *hidden_widths, 1]
    return NetworkParams(
        input_dim=input_dim,
        weights=tuple(np.zeros((widths[k + 1], widths[k])) for k in range(len(widths) - 1)),
        biases=tuple(np.zeros(widths[k + 1]) for k in range(len(widths) - 1)),
        activation=activation,
    )


def load_network(path) -> NetworkParams:
    """Load a network from the portable weight JSON file."""
    with open(path) as fh:
        return NetworkParams.from_dict(json.load(fh))


def save_network(net: NetworkParams, path) -> None:
    """Write the weight JSON; floats use shortest round-trip decimals."""
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(net.to_dict(), fh)
    os.replace(tmp, path)


@dataclass(frozen=True)
class EvalTrace:
    """Forward-pass record at a single point: pre-activations per layer and f(x)."""

    point: np.ndarray
    preactivations: tuple
    activations: tuple
    output: float


def forward(net: NetworkParams, x) -> EvalTrace:
    """Evaluate the network at one point, recording all layer pre-activations."""
    x = np.ascontiguousarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != net.input_dim:
        raise ShapeError(f"expected point of length {net.input_dim}, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise DomainError("non-finite input point")
    zs, acts = [], []
    cur = x
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        z = w @ cur + b
        cur = net.activation.value(z)
        zs.append(z)
        acts.append(cur)
    out = float((net.weights[-1] @ cur + net.biases[-1])[0])
    return EvalTrace(
        point=x, preactivations=tuple(zs), activations=tuple(acts), output=out
    )


def forward_batch(net: NetworkParams, X: np.ndarray):
    """Vectorized forward pass over rows of X.

    Returns (preactivations, outputs) where preactivations[k] has shape
    (N, n_{k+1}) for hidden layer k and outputs has shape (N,).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != net.input_dim:
        raise ShapeError(f"expected (N, {net.input_dim}) batch, got shape {X.shape}")
    zs = []
    cur = X
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        z = cur @ w.T + b
        cur = net.activation.value(z)
        zs.append(z)
    out = cur @ net.weights[-1].T + net.biases[-1]
    return zs, out[:, 0]
