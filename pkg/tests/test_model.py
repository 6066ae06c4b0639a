import json

import numpy as np
import pytest

from certiquad import (
    ActivationSpec,
    DomainError,
    NetworkParams,
    ShapeError,
    UnsupportedOrderError,
    activation_derivative,
    forward,
    forward_batch,
    load_network,
    save_network,
    zero_network,
)
from conftest import REPU3, RELU, make_random_net, one_neuron_chain

from oracles import naive_forward


def test_forward_cubic_chain():
    net = one_neuron_chain(depth=1)
    trace = forward(net, [2.0])
    assert trace.output == 8.0
    assert trace.preactivations[0][0] == 2.0
    assert trace.activations[0][0] == 8.0


def test_forward_zero_network():
    net = zero_network(3, [5, 4], REPU3)
    assert forward(net, [0.3, -0.7, 2.0]).output == 0.0


def test_forward_matches_naive_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        d = int(rng.integers(1, 4))
        depth = int(rng.integers(1, 4))
        widths = [int(rng.integers(2, 9)) for _ in range(depth)]
        act = RELU if rng.random() < 0.5 else REPU3
        net = make_random_net(rng, d, widths, act)
        x = rng.uniform(-2, 2, d)
        got = forward(net, x).output
        want = naive_forward(net, x)
        assert got == pytest.approx(want, rel=1e-12, abs=1e-300)


def test_forward_deterministic():
    rng = np.random.default_rng(5)
    net = make_random_net(rng, 2, [6, 6])
    x = rng.uniform(-1, 1, 2)
    assert forward(net, x).output == forward(net, x).output


def test_forward_batch_matches_single():
    rng = np.random.default_rng(8)
    net = make_random_net(rng, 3, [7, 5])
    X = rng.uniform(-1, 1, (40, 3))
    zs, outs = forward_batch(net, X)
    for i in range(40):
        trace = forward(net, X[i])
        assert outs[i] == pytest.approx(trace.output, rel=1e-14)
        for k, z in enumerate(trace.preactivations):
            assert np.allclose(zs[k][i], z, rtol=1e-14)


def test_activation_derivative_examples():
    assert activation_derivative(REPU3, 2, 2.0) == 12.0
    assert activation_derivative(RELU, 1, -0.5) == 0.0
    assert activation_derivative(REPU3, 3, 5.0) == 6.0


def test_activation_kink_convention():
    # weak derivatives at the kink are pinned to 0 for determinism
    assert activation_derivative(RELU, 1, 0.0) == 0.0
    for m in range(1, 4):
        assert activation_derivative(REPU3, m, 0.0) == 0.0
    assert activation_derivative(REPU3, 0, -1.0) == 0.0


@pytest.mark.parametrize("order", [2, 3, 4])
def test_activation_derivative_finite_difference(order):
    spec = ActivationSpec("repu", order)
    h = 1e-6
    for t in (0.3, 0.9, 1.7):
        for m in range(1, order + 1):
            fd = (
                activation_derivative(spec, m - 1, t + h)
                - activation_derivative(spec, m - 1, t - h)
            ) / (2 * h)
            assert activation_derivative(spec, m, t) == pytest.approx(fd, rel=1e-5)


def test_activation_unsupported_order():
    with pytest.raises(UnsupportedOrderError):
        activation_derivative(RELU, 2, 1.0)
    with pytest.raises(UnsupportedOrderError):
        activation_derivative(REPU3, 4, 1.0)


def test_activation_spec_validation():
    with pytest.raises(ValueError):
        ActivationSpec("repu")
    with pytest.raises(ValueError):
        ActivationSpec("repu", 1)
    with pytest.raises(ValueError):
        ActivationSpec("relu", 2)
    with pytest.raises(ValueError):
        ActivationSpec("sigmoid")


def test_forward_input_errors():
    net = zero_network(2, [3], RELU)
    with pytest.raises(ShapeError):
        forward(net, [1.0])
    with pytest.raises(DomainError):
        forward(net, [1.0, float("nan")])


def test_network_shape_validation():
    with pytest.raises(ShapeError):
        NetworkParams(2, (np.ones((3, 2)), np.ones((1, 4))), (np.zeros(3), np.zeros(1)), RELU)
    with pytest.raises(ShapeError):
        NetworkParams(2, (np.ones((3, 2)),), (np.zeros(3),), RELU)
    with pytest.raises(DomainError):
        NetworkParams(
            1,
            (np.array([[np.inf]]), np.ones((1, 1))),
            (np.zeros(1), np.zeros(1)),
            RELU,
        )


def test_weight_json_roundtrip(tmp_path):
    rng = np.random.default_rng(77)
    net = make_random_net(rng, 3, [5, 4], REPU3)
    path = tmp_path / "net.json"
    save_network(net, path)
    loaded = load_network(path)
    assert loaded.input_dim == net.input_dim
    assert loaded.activation == net.activation
    for a, b in zip(loaded.weights, net.weights):
        assert np.array_equal(a, b)
    for a, b in zip(loaded.biases, net.biases):
        assert np.array_equal(a, b)
    doc = json.loads(path.read_text())
    assert list(doc) >= ["input_dim", "activation", "layers"]
    assert len(doc["layers"]) == net.depth + 1


def test_network_params_immutable():
    net = zero_network(2, [3], RELU)
    with pytest.raises(ValueError):
        net.weights[0][0, 0] = 1.0
