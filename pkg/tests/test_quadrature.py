import math

import numpy as np
import pytest

from certiquad import (
    GridDomain,
    GridMismatchError,
    MultiIndex,
    NormCertificate,
    UnsupportedOrderError,
    build_uniform_grid,
    forward_batch,
    lp_power_estimate,
    norm_interval,
    zero_network,
)
from certiquad.quadrature import midpoint_power_sum
from conftest import REPU3, make_random_net, ramp_net


def tame_net(rng, d=1):
    widths = [int(rng.integers(4, 9)), int(rng.integers(4, 9))]
    return make_random_net(rng, d, widths, REPU3, scale=0.35, bias_scale=0.5)


def fine_reference(net, lower, upper, eps, p, refine=100):
    grid = build_uniform_grid(lower, upper, eps / refine)
    _, vals = forward_batch(net, grid.centers)
    return float(np.sum(grid.sides ** grid.dim * np.abs(vals) ** p))


def test_build_uniform_grid_examples():
    grid = build_uniform_grid([0.0], [1.0], 0.5)
    assert np.allclose(sorted(grid.centers.ravel()), [0.25, 0.75])
    grid2 = build_uniform_grid([-1.0, 0.0], [1.0, 1.0], 0.5)
    assert grid2.n_boxes == 8
    with pytest.raises(GridMismatchError):
        build_uniform_grid([0.0], [1.0], 0.3)


def test_grid_volume_matches_domain():
    grid = build_uniform_grid([-1.0, 0.0], [1.0, 1.0], 0.04)
    assert grid.volume == pytest.approx(2.0, rel=1e-12)


def test_zero_network_certificate():
    net = zero_network(1, [4, 4], REPU3)
    grid = build_uniform_grid([0.0], [1.0], 0.25)
    cert = lp_power_estimate(net, MultiIndex.zero(1), grid, 2)
    assert cert.estimate == 0.0 and cert.error_bound == 0.0
    assert norm_interval(cert) == (0.0, 0.0)


def test_ramp_net_midpoint_value_and_containment():
    net = ramp_net()
    grid = build_uniform_grid([0.0], [1.0], 0.5)
    cert = lp_power_estimate(net, MultiIndex.zero(1), grid, 2)
    assert cert.estimate == pytest.approx(0.3125, rel=1e-14)
    # true squared norm of f(x) = x on [0, 1] is 1/3
    assert abs(1.0 / 3.0 - cert.estimate) <= cert.error_bound


def test_norm_interval_examples():
    cert = NormCertificate(p=2, alpha=MultiIndex.zero(1), estimate=4.0, error_bound=0.0, eps=0.1, n_boxes=1)
    assert norm_interval(cert) == (2.0, 2.0)
    cert = NormCertificate(p=2, alpha=MultiIndex.zero(1), estimate=1.0, error_bound=1.0, eps=0.1, n_boxes=1)
    lo, hi = norm_interval(cert)
    assert lo == 0.0 and hi == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert cert.sqrt_taylor_radius is None


def test_norm_interval_from_table_scale_values():
    cert = NormCertificate(
        p=2,
        alpha=MultiIndex.zero(2),
        estimate=1.353825,
        error_bound=0.03246448,
        eps=0.01,
        n_boxes=20000,
    )
    assert cert.norm_upper == pytest.approx(1.177408, abs=5e-7)
    assert cert.sqrt_taylor_radius == pytest.approx(
        0.03246448 / math.sqrt(1.353825 - 0.03246448), rel=1e-12
    )


def test_containment_random_nets():
    rng = np.random.default_rng(60)
    for _ in range(5):
        net = tame_net(rng)
        for p in (1, 2, 3):
            for eps in (0.1, 0.05):
                grid = build_uniform_grid([-1.0], [1.0], eps)
                cert = lp_power_estimate(net, MultiIndex.zero(1), grid, p)
                ref = fine_reference(net, [-1.0], [1.0], eps, p)
                assert cert.estimate - cert.error_bound <= ref <= cert.estimate + cert.error_bound


def test_refinement_ratio_window():
    rng = np.random.default_rng(61)
    for _ in range(5):
        net = tame_net(rng)
        for p in (1, 2, 3):
            radii, widths = [], []
            for eps in (0.1, 0.05, 0.025):
                grid = build_uniform_grid([-1.0], [1.0], eps)
                cert = lp_power_estimate(net, MultiIndex.zero(1), grid, p)
                radii.append(cert.error_bound)
                widths.append(cert.norm_upper - cert.norm_lower)
            for coarse, fine in zip(radii, radii[1:]):
                assert 1.5 <= coarse / fine <= 2.6
            # the certified norm interval tightens under refinement
            assert widths[0] > widths[1] > widths[2]


def test_first_order_alpha_certificate():
    rng = np.random.default_rng(62)
    net = tame_net(rng)
    alpha = MultiIndex((1,))
    grid = build_uniform_grid([-1.0], [1.0], 0.05)
    cert = lp_power_estimate(net, alpha, grid, 2)
    fine = build_uniform_grid([-1.0], [1.0], 0.0005)
    from certiquad import partial_batch

    vals = partial_batch(net, fine.centers, alpha)
    ref = float(np.sum(0.0005 * np.abs(vals) ** 2))
    assert cert.estimate - cert.error_bound <= ref <= cert.estimate + cert.error_bound


def test_additivity_of_split_grids():
    rng = np.random.default_rng(63)
    net = tame_net(rng, d=2)
    full = build_uniform_grid([-1.0, -1.0], [1.0, 1.0], 0.1)
    left = build_uniform_grid([-1.0, -1.0], [0.0, 1.0], 0.1)
    right = build_uniform_grid([0.0, -1.0], [1.0, 1.0], 0.1)
    alpha = MultiIndex.zero(2)
    cert = lp_power_estimate(net, alpha, full, 2)
    cl = lp_power_estimate(net, alpha, left, 2)
    cr = lp_power_estimate(net, alpha, right, 2)
    assert cl.estimate + cr.estimate == pytest.approx(cert.estimate, rel=1e-12)
    assert cl.error_bound + cr.error_bound == pytest.approx(cert.error_bound, rel=1e-12)


def test_worker_count_does_not_change_results():
    rng = np.random.default_rng(64)
    net = tame_net(rng)
    grid = build_uniform_grid([-1.0], [1.0], 0.01)
    alpha = MultiIndex.zero(1)
    one = lp_power_estimate(net, alpha, grid, 2, workers=1, chunk=64)
    two = lp_power_estimate(net, alpha, grid, 2, workers=2, chunk=64)
    assert one.estimate == two.estimate
    assert one.error_bound == two.error_bound


def test_mixed_side_grid_groups():
    rng = np.random.default_rng(65)
    net = tame_net(rng)
    coarse = build_uniform_grid([-1.0], [0.0], 0.1)
    fine = build_uniform_grid([0.0], [1.0], 0.05)
    mixed = GridDomain(
        centers=np.vstack([coarse.centers, fine.centers]),
        sides=np.concatenate([coarse.sides, fine.sides]),
    )
    alpha = MultiIndex.zero(1)
    cert = lp_power_estimate(net, alpha, mixed, 2)
    ca = lp_power_estimate(net, alpha, coarse, 2)
    cb = lp_power_estimate(net, alpha, fine, 2)
    assert cert.estimate == pytest.approx(ca.estimate + cb.estimate, rel=1e-12)
    assert cert.error_bound == pytest.approx(ca.error_bound + cb.error_bound, rel=1e-12)


def test_order_overflow_rejected():
    net = zero_network(1, [3, 3], REPU3)
    grid = build_uniform_grid([0.0], [1.0], 0.5)
    with pytest.raises(UnsupportedOrderError):
        lp_power_estimate(net, MultiIndex((3,)), grid, 2)


def test_midpoint_power_sum_matches_direct():
    rng = np.random.default_rng(66)
    vals = rng.normal(0, 1, 1000)
    vols = np.full(1000, 0.01)
    assert midpoint_power_sum(vals, vols, 2) == pytest.approx(
        float(np.sum(vols * vals**2)), rel=1e-13
    )


def test_certificate_json_shape():
    cert = NormCertificate(p=2, alpha=MultiIndex.zero(2), estimate=1.0, error_bound=0.5, eps=0.1, n_boxes=10)
    doc = cert.to_json_dict()
    assert set(doc) == {
        "p", "alpha", "I", "R", "lower", "upper", "taylor_radius", "eps", "n_boxes", "wall_time_ms",
    }
    assert doc["alpha"] == [0, 0]
    assert doc["lower"] == pytest.approx(math.sqrt(0.5))
