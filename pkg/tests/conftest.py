import math
import pathlib
import sys

import numpy as np
import pytest

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

from certiquad import ActivationSpec, HeatProblem, InitialCondition, NetworkParams, load_network

FIXTURE_DIR = pathlib.Path(__file__).resolve().parent / "fixtures"

REPU3 = ActivationSpec("repu", 3)
RELU = ActivationSpec("relu")


def make_random_net(rng, d, widths, activation=REPU3, scale=1.0, bias_scale=0.4):
    dims = [d, *widths, 1]
    weights, biases = [], []
    for a, b in zip(dims[:-1], dims[1:]):
        weights.append(rng.normal(0.0, scale / math.sqrt(a), (b, a)))
        biases.append(rng.normal(0.0, bias_scale, b))
    return NetworkParams(d, tuple(weights), tuple(biases), activation)


def ramp_net():
    """The relu network realizing f(x) = x on x >= 0."""
    return NetworkParams(
        1,
        (np.array([[1.0]]), np.array([[1.0]])),
        (np.zeros(1), np.zeros(1)),
        RELU,
    )


def one_neuron_chain(depth=2, weight=1.0, activation=REPU3):
    """Width-1 network with all weights equal and zero biases."""
    ws = tuple(np.array([[weight]]) for _ in range(depth + 1))
    bs = tuple(np.zeros(1) for _ in range(depth + 1))
    return NetworkParams(1, ws, bs, activation)


@pytest.fixture(scope="session")
def sine_problem():
    return HeatProblem(
        d=2,
        kappa=1.0 / math.pi**2,
        T=1.0,
        initial=InitialCondition("sine_product", 1.0, (1,)),
    )


@pytest.fixture(scope="session")
def zero_problem():
    return HeatProblem(d=2, kappa=1.0 / math.pi**2, T=1.0, initial=InitialCondition("zero"))


@pytest.fixture(scope="session")
def trained_net():
    return load_network(FIXTURE_DIR / "pinn_final.json")


@pytest.fixture(scope="session")
def checkpoint_nets():
    return [
        load_network(FIXTURE_DIR / "pinn_epoch0010.json"),
        load_network(FIXTURE_DIR / "pinn_epoch0100.json"),
        load_network(FIXTURE_DIR / "pinn_final.json"),
    ]


@pytest.fixture(scope="session")
def random_fixture_net():
    return load_network(FIXTURE_DIR / "random_8x8.json")
