"""Exact partial derivatives of networks at a point.

First derivatives use the layered chain rule, valid for any depth:

    grad_l f(x) = W^{L+1} ( mu'(z^L) . W^L ( ... ( mu'(z^1) . W^1 e_l ) ... ) )

where ``.`` is the element-wise (Hadamard) product.  For one hidden layer an
arbitrary multi-index alpha is available through the structural vector

    F(alpha) = prod_k (W^1 e_k)^{alpha_k}        (element-wise powers)

as  d^alpha f = W^2 ( mu^(|alpha|)(z^1) . F(alpha) ).  For two hidden layers,
second and third derivatives combine the per-axis vectors

    G^beta = W^2 ( mu^(|beta|)(z^1) . F(beta) ),

cached per evaluation point.  Axes are 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, ShapeError, UnsupportedOrderError
from .model import EvalTrace, NetworkParams, forward_batch


@dataclass(frozen=True)
class MultiIndex:
    """Vector of non-negative derivative exponents, one per input axis."""

    exponents: tuple

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exponents)
        if any(e < 0 for e in exps):
            raise ValueError("multi-index exponents must be non-negative")
        object.__setattr__(self, "exponents", exps)

    @property
    def order(self) -> int:
        return sum(self.exponents)

    @property
    def dim(self) -> int:
        return len(self.exponents)

    def axes(self) -> tuple:
        """Expand to a sorted tuple of axis indices with multiplicity."""
        out = []
        for axis, e in enumerate(self.exponents):
            out.extend([axis] * e)
        return tuple(out)

    def plus_axis(self, axis: int) -> "MultiIndex":
        exps = list(self.exponents)
        exps[axis] += 1
        return MultiIndex(tuple(exps))

    @classmethod
    def zero(cls, dim: int) -> "MultiIndex":
        return cls((0,) * dim)

    @classmethod
    def from_axes(cls, dim: int, axes) -> "MultiIndex":
        exps = [0] * dim
        for axis in axes:
            exps[axis] += 1
        return cls(tuple(exps))


def _check_order(net: NetworkParams, order: int) -> None:
    if order > net.activation.max_derivative_order:
        raise UnsupportedOrderError(
            f"derivative order {order} exceeds activation smoothness "
            f"({net.activation.kind}, max {net.activation.max_derivative_order})"
        )


def gradient(net: NetworkParams, trace: EvalTrace) -> np.ndarray:
    """All first partials (d_1 f(y), ..., d_d f(y)) at the traced point."""
    _check_order(net, 1)
    mat = net.weights[0]
    for k in range(1, net.depth + 1):
        nu = net.activation.derivative(1, trace.preactivations[k - 1])
        mat = net.weights[k] @ (nu[:, None] * mat)
    return mat[0].copy()


def structural_vector(net: NetworkParams, alpha: MultiIndex) -> np.ndarray:
    """F(alpha): element-wise product of first-layer columns with multiplicity."""
    w1 = net.weights[0]
    if alpha.dim != net.input_dim:
        raise ShapeError("multi-index length must equal input dimension")
    out = np.ones(w1.shape[0])
    for axis, e in enumerate(alpha.exponents):
        if e:
            out = out * w1[:, axis] ** e
    return out


def partial_alpha_one_layer(net: NetworkParams, alpha: MultiIndex, trace: EvalTrace) -> float:
    """d^alpha f(y) for a one-hidden-layer network, any supported order."""
    if net.depth != 1:
        raise CapabilityError("closed form requires exactly one hidden layer")
    if alpha.order == 0:
        return trace.output
    _check_order(net, alpha.order)
    mu = net.activation.derivative(alpha.order, trace.preactivations[0])
    return float((net.weights[1] @ (mu * structural_vector(net, alpha)))[0])


@dataclass
class LayerJet:
    """Per-point cache of activation derivatives and G vectors (two hidden layers)."""

    net: NetworkParams
    trace: EvalTrace
    _mu: dict = field(default_factory=dict)
    _g: dict = field(default_factory=dict)

    def mu(self, layer: int, order: int) -> np.ndarray:
        key = (layer, order)
        if key not in self._mu:
            self._mu[key] = self.net.activation.derivative(
                order, self.trace.preactivations[layer]
            )
        return self._mu[key]

    def g(self, alpha: MultiIndex) -> np.ndarray:
        """G^alpha = W^2 (mu^(|alpha|)(z^1) . F(alpha)) at the traced point."""
        key = alpha.exponents
        if key not in self._g:
            vec = self.mu(0, alpha.order) * structural_vector(self.net, alpha)
            self._g[key] = self.net.weights[1] @ vec
        return self._g[key]


def _require_two_layers(net: NetworkParams, order: int) -> None:
    if net.depth != 2:
        raise CapabilityError("closed form requires exactly two hidden layers")
    _check_order(net, order)


def second_partial_two_layer(
    net: NetworkParams, l1: int, l2: int, trace: EvalTrace, jet: LayerJet | None = None
) -> float:
    """d_{l1} d_{l2} f(y) for a two-hidden-layer network."""
    _require_two_layers(net, 2)
    l1, l2 = sorted((l1, l2))
    jet = jet or LayerJet(net, trace)
    d = net.input_dim
    g1 = jet.g(MultiIndex.from_axes(d, (l1,)))
    g2 = jet.g(MultiIndex.from_axes(d, (l2,)))
    g12 = jet.g(MultiIndex.from_axes(d, (l1, l2)))
    inner = jet.mu(1, 2) * g1 * g2 + jet.mu(1, 1) * g12
    return float((net.weights[2] @ inner)[0])


def third_partial_two_layer(
    net: NetworkParams,
    l1: int,
    l2: int,
    l3: int,
    trace: EvalTrace,
    jet: LayerJet | None = None,
) -> float:
    """d_{l1} d_{l2} d_{l3} f(y) for a two-hidden-layer network."""
    _require_two_layers(net, 3)
    l1, l2, l3 = sorted((l1, l2, l3))
    jet = jet or LayerJet(net, trace)
    d = net.input_dim
    ax = lambda *axes: jet.g(MultiIndex.from_axes(d, axes))
    g1, g2, g3 = ax(l1), ax(l2), ax(l3)
    inner = (
        jet.mu(1, 3) * g3 * g2 * g1
        + jet.mu(1, 1) * ax(l1, l2, l3)
        + jet.mu(1, 2) * (g1 * ax(l2, l3) + g2 * ax(l1, l3) + g3 * ax(l1, l2))
    )
    return float((net.weights[2] @ inner)[0])


# --- vectorized evaluation over batches of points -------------------------------


class BatchJet:
    """Shared forward pass and structural vectors for batched derivatives.

    Accepts precomputed preactivations so envelope machinery evaluating many
    derivatives at the same centers runs the forward pass once.
    """

    def __init__(self, net: NetworkParams, X: np.ndarray, preactivations=None, outputs=None):
        self.net = net
        self.X = np.atleast_2d(np.asarray(X, dtype=float))
        if preactivations is None:
            preactivations, outputs = forward_batch(net, self.X)
        self.zs = preactivations
        self.outputs = outputs
        self._mu = {}
        self._g = {}
        self._partials = {}

    def mu(self, layer: int, order: int) -> np.ndarray:
        key = (layer, order)
        if key not in self._mu:
            self._mu[key] = self.net.activation.derivative(order, self.zs[layer])
        return self._mu[key]

    def g(self, axes) -> np.ndarray:
        """Batched G^alpha vectors of a two-hidden-layer network, shape (N, n_2)."""
        alpha = MultiIndex.from_axes(self.net.input_dim, axes)
        key = alpha.exponents
        if key not in self._g:
            vec = self.mu(0, alpha.order) * structural_vector(self.net, alpha)
            self._g[key] = vec @ self.net.weights[1].T
        return self._g[key]

    def partial(self, alpha: MultiIndex) -> np.ndarray:
        """d^alpha f at every batch row, dispatching on order and depth."""
        if alpha.dim != self.net.input_dim:
            raise ShapeError("multi-index length must equal input dimension")
        key = alpha.exponents
        if key in self._partials:
            return self._partials[key]
        net = self.net
        order = alpha.order
        if order == 0:
            val = self.outputs
        elif order == 1:
            _check_order(net, 1)
            axis = alpha.axes()[0]
            v = self.mu(0, 1) * net.weights[0][:, axis]
            for k in range(1, net.depth):
                v = (v @ net.weights[k].T) * self.mu(k, 1)
            val = v @ net.weights[net.depth].T[:, 0]
        else:
            _check_order(net, order)
            if net.depth == 1:
                val = (
                    self.mu(0, order) * structural_vector(net, alpha)
                ) @ net.weights[1].T[:, 0]
            elif net.depth == 2 and order == 2:
                l1, l2 = alpha.axes()
                inner = self.mu(1, 2) * self.g((l1,)) * self.g((l2,)) + self.mu(
                    1, 1
                ) * self.g((l1, l2))
                val = inner @ net.weights[2].T[:, 0]
            elif net.depth == 2 and order == 3:
                l1, l2, l3 = alpha.axes()
                g = self.g
                inner = (
                    self.mu(1, 3) * g((l3,)) * g((l2,)) * g((l1,))
                    + self.mu(1, 1) * g((l1, l2, l3))
                    + self.mu(1, 2)
                    * (
                        g((l1,)) * g((l2, l3))
                        + g((l2,)) * g((l1, l3))
                        + g((l3,)) * g((l1, l2))
                    )
                )
                val = inner @ net.weights[2].T[:, 0]
            else:
                raise CapabilityError(
                    "orders >= 2 are available only for one- or two-hidden-layer networks"
                )
        self._partials[key] = val
        return val


def gradient_batch(net: NetworkParams, X: np.ndarray) -> np.ndarray:
    """First partials at every row of X, shape (N, d)."""
    jet = BatchJet(net, X)
    out = np.empty((jet.X.shape[0], net.input_dim))
    for axis in range(net.input_dim):
        out[:, axis] = jet.partial(MultiIndex.from_axes(net.input_dim, (axis,)))
    return out


def partial_batch(net: NetworkParams, X: np.ndarray, alpha: MultiIndex) -> np.ndarray:
    """d^alpha f at every row of X."""
    return BatchJet(net, X).partial(alpha)
