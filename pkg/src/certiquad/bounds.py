"""Certified locally uniform bounds for network derivatives over boxes.

For a box B of side eps centered at y, per-neuron activation bounds

    Q^{k,m}_j >= sup_{x in B} |mu^(m)(z^k_j(x)) - mu^(m)(z^k_j(y))|

are obtained from pre-activation gradient bounds E^k_j >= sup ||grad z^k_j||
by alternating layer by layer: E^1 is exact (row norms of W^1), Q^k follows
from E^k through the activation-specific comparison functions below, and
E^{k+1} combines exact center gradients with the first-derivative difference
bound of the sub-network feeding each neuron.  Any box point lies within
Euclidean distance eps*sqrt(d)/2 of the center; that displacement enters
every Taylor argument here.

From the activation bounds, difference bounds

    |d^alpha f(x) - d^alpha f(y)| <= diff_bound   for all x in B

follow by expanding the exact derivative formulas around the center: each
perturbed factor is replaced by its Q bound, each unperturbed factor by its
absolute center value, and every matrix outside the innermost exact run by
its element-wise absolute value.  First derivatives support any depth (terms
enumerated over the 2^L - 1 non-empty perturbation masks); second and third
derivatives require exactly two hidden layers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, ShapeError, UnsupportedOrderError
from .model import RELU, ActivationSpec, EvalTrace, NetworkParams, forward_batch
from .derivatives import (
    BatchJet,
    MultiIndex,
    gradient,
    second_partial_two_layer,
    structural_vector,
    third_partial_two_layer,
)

MAX_MASK_DEPTH = 12

_S2 = [m for m in itertools.product((0, 1), repeat=2) if any(m)]
_S3 = [m for m in itertools.product((0, 1), repeat=3) if any(m)]
_S4 = [m for m in itertools.product((0, 1), repeat=4) if any(m)]


@dataclass(frozen=True)
class BoxSpec:
    """Axis-aligned cube {x : ||x - center||_inf <= side/2}."""

    center: np.ndarray
    side: float

    def __post_init__(self):
        c = np.ascontiguousarray(self.center, dtype=float)
        if c.ndim != 1:
            raise ShapeError("box center must be a vector")
        if not self.side > 0:
            raise ValueError("box side must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "side", float(self.side))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def displacement_radius(self) -> float:
        """Largest Euclidean distance from the center to a box point."""
        return self.side * math.sqrt(self.dim) / 2.0

    @property
    def volume(self) -> float:
        return self.side**self.dim


def qhat_relu(z_center, grad_bound, side: float, dim: int):
    """Activation-status bound for relu': 0 if the sign provably cannot flip.

    The pre-activation moves by at most side*sqrt(dim)*grad_bound/2, so the
    derivative is unchanged whenever side*sqrt(dim)*grad_bound < 2*|z(y)|;
    otherwise the jump of relu' is bounded by 1.  The inequality is strict,
    so a center exactly on the kink always yields 1.
    """
    cond = side * math.sqrt(dim) * np.asarray(grad_bound, dtype=float) < 2.0 * np.abs(
        z_center
    )
    out = np.where(cond, 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def qhat_repu(
    z_center,
    grad_bound,
    side: float,
    dim: int,
    deriv_order: int,
    repu_order: int,
):
    """Bound on the movement of repu^(i) over the box, i = deriv_order.

    Taylor expansion with integral remainder around the center value gives

        sum_{m=1}^{n-i} delta^m / m! * |mu^(m+i)(z(y))|
        + n!/(n-i)! * delta^(n-i) * qhat_relu(...)

    with displacement delta = side*sqrt(dim)*grad_bound/2; the remainder term
    uses repu^(n) = n! * relu'.
    """
    n, i = repu_order, deriv_order
    if not 1 <= i <= n:
        raise UnsupportedOrderError(f"repu({n}) has no order-{i} activation bound")
    spec = ActivationSpec("repu", n)
    delta = side * math.sqrt(dim) / 2.0 * np.asarray(grad_bound, dtype=float)
    out = (
        float(math.factorial(n) // math.factorial(n - i))
        * delta ** (n - i)
        * qhat_relu(z_center, grad_bound, side, dim)
    )
    for m in range(1, n - i + 1):
        out = out + delta**m / math.factorial(m) * np.abs(
            spec.derivative(m + i, z_center)
        )
    return float(out) if np.ndim(out) == 0 else out


def _qhat(act: ActivationSpec, z_center, grad_bound, side, dim, order):
    if act.kind == RELU:
        if order != 1:
            raise UnsupportedOrderError("relu supports first-order activation bounds only")
        return qhat_relu(z_center, grad_bound, side, dim)
    return qhat_repu(z_center, grad_bound, side, dim, order, act.order)


@dataclass(frozen=True)
class ActivationEnvelope:
    """Per-layer, per-order activation bounds for one box.

    ``gradient_bounds[k]`` dominates sup ||grad z^{k+1}_j|| over the box;
    ``activation_bounds[(k, m)]`` dominates the movement of mu^(m)(z^{k+1}_j).
    """

    box: BoxSpec
    preactivations: tuple
    gradient_bounds: tuple
    activation_bounds: dict
    max_order: int


@dataclass(frozen=True)
class DerivativeEnvelope:
    """Certified data for one derivative over one box.

    ``center_value`` is the exact derivative at the box center, ``diff_bound``
    dominates its movement anywhere in the box, and ``total`` dominates its
    absolute value over the whole box.
    """

    center_value: float
    diff_bound: float
    total: float

    def __post_init__(self):
        if self.diff_bound < 0:
            raise ValueError("diff_bound must be non-negative")
        if self.total < abs(self.center_value):
            raise ValueError("total must dominate the center value")


# --- array-level bound kernels ---------------------------------------------------
#
# These operate on dictionaries nu0[(layer, order)] and q[(layer, order)] of
# shape-(N, n_layer) arrays (layer indices 0-based), shared by the batched
# engine and the single-box entry points.


def _mask_bound_first(net, nu0, q, axis, n_hidden, abs_ws, out_mat, abs_out):
    """Difference bound for d_axis of the map with hidden layers 0..n_hidden-1
    and affine output ``out_mat``; returns (N, rows(out_mat))."""
    if n_hidden > MAX_MASK_DEPTH:
        raise CapabilityError(
            f"first-derivative bound enumeration capped at {MAX_MASK_DEPTH} hidden layers"
        )
    ws = net.weights
    prefix = [None] * n_hidden
    prefix[0] = ws[0][:, axis]
    for j in range(1, n_hidden):
        prefix[j] = (nu0[(j - 1, 1)] * prefix[j - 1]) @ ws[j].T
    total = 0.0
    for mask in range(1, 1 << n_hidden):
        kstar = (mask & -mask).bit_length() - 1
        v = q[(kstar, 1)] * np.abs(prefix[kstar])
        for j in range(kstar + 1, n_hidden):
            v = v @ abs_ws[j].T
            v = (q[(j, 1)] if (mask >> j) & 1 else np.abs(nu0[(j, 1)])) * v
        total = total + v @ abs_out.T
    return total


class _GhatCache:
    """Center/perturbation dominator pairs for the G vectors of a 2-layer net."""

    def __init__(self, net, nu0, q, abs_w2):
        self.net = net
        self.nu0 = nu0
        self.q = q
        self.abs_w2 = abs_w2
        self._pairs = {}

    def pair(self, axes):
        alpha = MultiIndex.from_axes(self.net.input_dim, axes)
        key = alpha.exponents
        if key not in self._pairs:
            f_vec = structural_vector(self.net, alpha)
            g0 = (self.nu0[(0, alpha.order)] * f_vec) @ self.net.weights[1].T
            g1 = (self.q[(0, alpha.order)] * np.abs(f_vec)) @ self.abs_w2.T
            self._pairs[key] = (np.abs(g0), g1)
        return self._pairs[key]


def _bound_second_arrays(net, nu0, q, abs_ws, l1, l2, ghat: _GhatCache):
    nu2 = (np.abs(nu0[(1, 2)]), q[(1, 2)])
    nu1 = (np.abs(nu0[(1, 1)]), q[(1, 1)])
    a, b = ghat.pair((l1,)), ghat.pair((l2,))
    c = ghat.pair((l1, l2))
    acc = 0.0
    for i1, i2, i3 in _S3:
        acc = acc + nu2[i1] * a[i2] * b[i3]
    for j1, j2 in _S2:
        acc = acc + nu1[j1] * c[j2]
    return (acc @ abs_ws[2].T)[:, 0]


def _bound_third_arrays(net, nu0, q, abs_ws, l1, l2, l3, ghat: _GhatCache):
    nu3 = (np.abs(nu0[(1, 3)]), q[(1, 3)])
    nu2 = (np.abs(nu0[(1, 2)]), q[(1, 2)])
    nu1 = (np.abs(nu0[(1, 1)]), q[(1, 1)])
    a1, a2, a3 = ghat.pair((l1,)), ghat.pair((l2,)), ghat.pair((l3,))
    b23, b13, b12 = ghat.pair((l2, l3)), ghat.pair((l1, l3)), ghat.pair((l1, l2))
    c = ghat.pair((l1, l2, l3))
    acc = 0.0
    for i1, i2, i3, i4 in _S4:
        acc = acc + nu3[i1] * a3[i2] * a2[i3] * a1[i4]
    for j1, j2 in _S2:
        acc = acc + nu1[j1] * c[j2]
    for k1, k2, k3 in _S3:
        acc = acc + nu2[k1] * (a1[k2] * b23[k3] + a2[k2] * b13[k3] + a3[k2] * b12[k3])
    return (acc @ abs_ws[2].T)[:, 0]


# --- batched propagation engine -------------------------------------------------


class _Propagation:
    """Shared activation-bound state for a batch of same-sized boxes."""

    def __init__(self, net: NetworkParams, centers: np.ndarray, side: float, max_order: int):
        act = net.activation
        if max_order < 1:
            raise ValueError("max_order must be >= 1")
        if max_order > act.max_derivative_order:
            raise UnsupportedOrderError(
                f"activation {act.kind} does not support order {max_order}"
            )
        if max_order >= 2 and net.depth != 2:
            raise CapabilityError("orders >= 2 require exactly two hidden layers")
        self.net = net
        self.centers = np.asarray(centers, dtype=float)
        self.side = float(side)
        self.max_order = max_order
        self.dim = net.input_dim
        ws = net.weights
        self.abs_ws = [np.abs(w) for w in ws]
        self.zs, self.outputs = forward_batch(net, self.centers)
        self.nu0 = {
            (k, m): act.derivative(m, self.zs[k])
            for k in range(net.depth)
            for m in range(1, max_order + 1)
        }
        self.grad_bounds = [np.linalg.norm(ws[0], axis=1)]
        self.act_bounds = {
            (0, m): _qhat(act, self.zs[0], self.grad_bounds[0], side, self.dim, m)
            for m in range(1, max_order + 1)
        }
        for k in range(1, net.depth):
            sq = 0.0
            for axis in range(self.dim):
                u = self.nu0[(0, 1)] * ws[0][:, axis]
                for j in range(1, k):
                    u = (u @ ws[j].T) * self.nu0[(j, 1)]
                exact = u @ ws[k].T
                bnd = _mask_bound_first(
                    net, self.nu0, self.act_bounds, axis, k, self.abs_ws, ws[k], self.abs_ws[k]
                )
                sq = sq + (np.abs(exact) + bnd) ** 2
            self.grad_bounds.append(np.sqrt(sq))
            for m in range(1, max_order + 1):
                self.act_bounds[(k, m)] = _qhat(
                    act, self.zs[k], self.grad_bounds[k], side, self.dim, m
                )


class EnvelopeBatch:
    """Vectorized derivative envelopes for many boxes of equal side.

    Computes, per box center, the exact derivative value and the certified
    difference bound for requested multi-indices, sharing activation bounds
    and structural vectors across all requests at the same centers.
    """

    def __init__(self, net: NetworkParams, centers: np.ndarray, side: float, max_order: int):
        self.net = net
        self.prop = _Propagation(net, centers, side, max_order)
        self.jet = BatchJet(
            net, self.prop.centers, preactivations=self.prop.zs, outputs=self.prop.outputs
        )
        self._ghat = (
            _GhatCache(net, self.prop.nu0, self.prop.act_bounds, self.prop.abs_ws[1])
            if net.depth == 2
            else None
        )
        self._diff = {}
        self._first_norm = None

    @property
    def n_boxes(self) -> int:
        return self.prop.centers.shape[0]

    def center_partial(self, alpha: MultiIndex) -> np.ndarray:
        """Exact d^alpha f at every box center."""
        return self.jet.partial(alpha)

    def diff_bound(self, alpha: MultiIndex) -> np.ndarray:
        """Certified bound on |d^alpha f(x) - d^alpha f(y)| over each box."""
        key = alpha.exponents
        if key in self._diff:
            return self._diff[key]
        net, prop = self.net, self.prop
        order = alpha.order
        if order == 0:
            val = prop.side * math.sqrt(net.input_dim) / 2.0 * self.first_order_norm()
        elif order == 1:
            axis = alpha.axes()[0]
            val = _mask_bound_first(
                net,
                prop.nu0,
                prop.act_bounds,
                axis,
                net.depth,
                prop.abs_ws,
                net.weights[net.depth],
                prop.abs_ws[net.depth],
            )[:, 0]
        elif order == 2:
            self._require_order(2)
            val = _bound_second_arrays(
                net, prop.nu0, prop.act_bounds, prop.abs_ws, *alpha.axes(), self._ghat
            )
        elif order == 3:
            self._require_order(3)
            val = _bound_third_arrays(
                net, prop.nu0, prop.act_bounds, prop.abs_ws, *alpha.axes(), self._ghat
            )
        else:
            raise UnsupportedOrderError("difference bounds available up to order 3")
        self._diff[key] = val
        return val

    def _require_order(self, order):
        if self.prop.max_order < order or self._ghat is None:
            raise UnsupportedOrderError(
                f"propagation was run with max_order < {order} or depth != 2"
            )

    def total(self, alpha: MultiIndex) -> np.ndarray:
        """Certified bound on |d^alpha f| over each box (center + movement)."""
        return np.abs(self.center_partial(alpha)) + self.diff_bound(alpha)

    def first_order_norm(self) -> np.ndarray:
        """Bound on ||grad f|| over each box: Euclidean norm of first-order totals."""
        if self._first_norm is None:
            sq = 0.0
            for axis in range(self.net.input_dim):
                sq = sq + self.total(MultiIndex.from_axes(self.net.input_dim, (axis,))) ** 2
            self._first_norm = np.sqrt(sq)
        return self._first_norm


# --- single-box public operations ------------------------------------------------


def propagate(net: NetworkParams, box: BoxSpec, max_order: int) -> ActivationEnvelope:
    """Per-layer gradient bounds E^k and activation bounds Q^{k,m} for one box."""
    if box.dim != net.input_dim:
        raise ShapeError("box dimension must equal the network input dimension")
    prop = _Propagation(net, box.center[None, :], box.side, max_order)
    grad_bounds = tuple(np.atleast_1d(np.squeeze(e)) for e in prop.grad_bounds)
    act_bounds = {
        key: np.atleast_1d(np.squeeze(q)) for key, q in prop.act_bounds.items()
    }
    return ActivationEnvelope(
        box=box,
        preactivations=tuple(z[0] for z in prop.zs),
        gradient_bounds=grad_bounds,
        activation_bounds=act_bounds,
        max_order=max_order,
    )


def _arrays_from_env(net: NetworkParams, env: ActivationEnvelope, trace: EvalTrace, orders):
    nu0 = {
        (k, m): np.atleast_2d(net.activation.derivative(m, trace.preactivations[k]))
        for k in range(net.depth)
        for m in orders
    }
    q = {
        key: np.asarray(vals, dtype=float)[None, :]
        for key, vals in env.activation_bounds.items()
    }
    return nu0, q


def bound_first(
    net: NetworkParams, axis: int, env: ActivationEnvelope, trace: EvalTrace, box: BoxSpec
) -> DerivativeEnvelope:
    """Envelope for d_axis f over the box, any depth."""
    nu0, q = _arrays_from_env(net, env, trace, (1,))
    abs_ws = [np.abs(w) for w in net.weights]
    diff = float(
        _mask_bound_first(
            net, nu0, q, axis, net.depth, abs_ws, net.weights[net.depth], abs_ws[net.depth]
        )[0, 0]
    )
    center = float(gradient(net, trace)[axis])
    return DerivativeEnvelope(center, diff, abs(center) + diff)


def bound_second(
    net: NetworkParams,
    l1: int,
    l2: int,
    env: ActivationEnvelope,
    trace: EvalTrace,
    box: BoxSpec,
) -> DerivativeEnvelope:
    """Envelope for d_{l1} d_{l2} f over the box (two hidden layers)."""
    if net.depth != 2:
        raise CapabilityError("second-derivative bounds require two hidden layers")
    if env.max_order < 2:
        raise UnsupportedOrderError("activation envelope was computed to order < 2")
    nu0, q = _arrays_from_env(net, env, trace, (1, 2))
    abs_ws = [np.abs(w) for w in net.weights]
    ghat = _GhatCache(net, nu0, q, abs_ws[1])
    diff = float(_bound_second_arrays(net, nu0, q, abs_ws, l1, l2, ghat)[0])
    center = second_partial_two_layer(net, l1, l2, trace)
    return DerivativeEnvelope(center, diff, abs(center) + diff)


def bound_third(
    net: NetworkParams,
    l1: int,
    l2: int,
    l3: int,
    env: ActivationEnvelope,
    trace: EvalTrace,
    box: BoxSpec,
) -> DerivativeEnvelope:
    """Envelope for d_{l1} d_{l2} d_{l3} f over the box (two hidden layers)."""
    if net.depth != 2:
        raise CapabilityError("third-derivative bounds require two hidden layers")
    if env.max_order < 3:
        raise UnsupportedOrderError("activation envelope was computed to order < 3")
    nu0, q = _arrays_from_env(net, env, trace, (1, 2, 3))
    abs_ws = [np.abs(w) for w in net.weights]
    ghat = _GhatCache(net, nu0, q, abs_ws[1])
    diff = float(_bound_third_arrays(net, nu0, q, abs_ws, l1, l2, l3, ghat)[0])
    center = third_partial_two_layer(net, l1, l2, l3, trace)
    return DerivativeEnvelope(center, diff, abs(center) + diff)


def envelope(net: NetworkParams, alpha: MultiIndex, box: BoxSpec) -> DerivativeEnvelope:
    """Certified bound on |d^alpha f| over the box, |alpha| in {0, 1, 2, 3}.

    For |alpha| = 0 the bound is |f(y)| plus the displacement radius times the
    gradient envelope norm; higher orders add the exact center derivative and
    its difference bound.
    """
    if alpha.dim != net.input_dim or box.dim != net.input_dim:
        raise ShapeError("alpha and box must match the network input dimension")
    order = alpha.order
    if order > 3:
        raise UnsupportedOrderError("envelopes available up to order 3")
    batch = EnvelopeBatch(net, box.center[None, :], box.side, max(order, 1))
    center = float(batch.center_partial(alpha)[0])
    diff = float(batch.diff_bound(alpha)[0])
    return DerivativeEnvelope(center, diff, abs(center) + diff)
