import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gqmc.covering import (
    ball_volume,
    covering_radius_estimate,
    expected_random_covering,
    grassmann_volume,
    multivariate_gamma,
    slope_fit,
)
from gqmc.exceptions import DomainError, InsufficientData, NonPositiveValue
from gqmc.kernels import G24, PointConfiguration
from gqmc.manifold import GrassmannSpace, orthonormal_basis, random_projector


def test_multivariate_gamma_values():
    assert multivariate_gamma(1, 2.5) == pytest.approx(math.gamma(2.5))
    assert multivariate_gamma(2, 1.0) == pytest.approx(math.pi)
    assert multivariate_gamma(2, 2.0) == pytest.approx(math.pi / 2.0)
    with pytest.raises(DomainError):
        multivariate_gamma(2, 0.5)


def test_grassmann_volume_values():
    assert grassmann_volume(GrassmannSpace(m=2, k=1)) == pytest.approx(math.pi * math.sqrt(2.0))
    assert grassmann_volume(G24) == pytest.approx(8.0 * math.pi**2)
    # duality G(k, m) = G(m-k, m)
    assert grassmann_volume(GrassmannSpace(m=3, k=1)) == pytest.approx(
        grassmann_volume(GrassmannSpace(m=3, k=2))
    )


def test_ball_volume_values():
    assert ball_volume(1) == pytest.approx(2.0)
    assert ball_volume(2) == pytest.approx(math.pi)
    assert ball_volume(4) == pytest.approx(math.pi**2 / 2.0)


def test_volume_ratio_fourth_root_is_two():
    ratio = grassmann_volume(G24) / ball_volume(4)
    assert ratio ** 0.25 == pytest.approx(2.0, abs=1e-12)


def test_expected_random_covering_values():
    assert expected_random_covering(G24, 1e7) == pytest.approx(0.0713, abs=2e-4)
    for n in (10, 1000, 123456):
        simplified = 2.0 * n**-0.25 * math.log(n) ** 0.25
        assert expected_random_covering(G24, n) == pytest.approx(simplified, abs=1e-12)
    assert expected_random_covering(GrassmannSpace(m=2, k=1), math.e) == pytest.approx(
        0.8172226462399178, abs=1e-12
    )
    with pytest.raises(ValueError):
        expected_random_covering(G24, 1)


def test_slope_fit_exact_power_law():
    pairs = [(n, 3.7 * n**-0.875) for n in (3, 10, 45, 200, 1234)]
    fit = slope_fit(pairs)
    assert fit.slope == pytest.approx(-0.875, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


@given(
    st.floats(min_value=-3.0, max_value=3.0),
    st.floats(min_value=0.1, max_value=100.0),
)
def test_slope_fit_recovers_any_power_law(slope, scale):
    pairs = [(n, scale * n**slope) for n in (2, 7, 29, 120, 800)]
    fit = slope_fit(pairs)
    assert fit.slope == pytest.approx(slope, abs=1e-9)


def test_slope_fit_constant_series():
    fit = slope_fit([(2, 5.0), (10, 5.0), (100, 5.0)])
    assert fit.slope == pytest.approx(0.0, abs=1e-14)


def test_slope_fit_guards():
    with pytest.raises(InsufficientData):
        slope_fit([(2, 1.0), (4, 0.5)])
    with pytest.raises(NonPositiveValue):
        slope_fit([(2, 1.0), (4, 0.5), (8, 0.0)])


class _BasisStub:
    """rng stand-in whose Gaussian draws always span the same subspace."""

    def __init__(self, basis):
        self.flat = np.asarray(basis)

    def standard_normal(self, shape):
        count = shape[0]
        return np.broadcast_to(self.flat, (count, *self.flat.shape)).copy()


def test_covering_estimate_zero_when_probes_hit_points(rng):
    p = random_projector(G24, rng)
    config = PointConfiguration.equal_weights([p])
    stub = _BasisStub(orthonormal_basis(p))
    estimate = covering_radius_estimate(config, probes=16, rng=stub)
    assert estimate.rho_hat <= 1e-7
    assert estimate.upper_hint >= estimate.rho_hat


def test_covering_estimate_bounded_by_diameter(rng):
    config = PointConfiguration.equal_weights([random_projector(G24, rng)])
    estimate = covering_radius_estimate(config, probes=2000, seed=8)
    assert 0.0 < estimate.rho_hat <= np.pi + 1e-12


def test_single_point_estimate_approaches_diameter(rng):
    # the sup over the manifold is pi (complementary plane); many probes get close
    config = PointConfiguration.equal_weights([random_projector(G24, rng)])
    estimate = covering_radius_estimate(config, probes=100_000, seed=4)
    assert 2.8 <= estimate.rho_hat <= np.pi


def test_adding_a_point_never_increases_rho(rng):
    points = [random_projector(G24, rng) for _ in range(6)]
    smaller = PointConfiguration.equal_weights(points[:5])
    larger = PointConfiguration.equal_weights(points)
    est_small = covering_radius_estimate(smaller, probes=20_000, seed=99)
    est_large = covering_radius_estimate(larger, probes=20_000, seed=99)
    assert est_large.rho_hat <= est_small.rho_hat


def test_probe_prefix_monotonicity(rng):
    config = PointConfiguration.random(G24, 5, rng)
    estimates = [
        covering_radius_estimate(config, probes=p, seed=123).rho_hat
        for p in (1000, 5000, 20_000)
    ]
    assert estimates[0] <= estimates[1] <= estimates[2]


def test_covering_estimate_deterministic(rng):
    config = PointConfiguration.random(G24, 4, rng)
    a = covering_radius_estimate(config, probes=10_000, seed=77)
    b = covering_radius_estimate(config, probes=10_000, seed=77)
    assert a.rho_hat == b.rho_hat


def test_covering_estimate_json(rng):
    config = PointConfiguration.random(G24, 4, rng)
    estimate = covering_radius_estimate(config, probes=2000, seed=31)
    data = json.loads(estimate.to_json())
    assert data["probes"] == 2000 and data["seed"] == 31
    assert data["upper_hint"] == pytest.approx(data["rho_hat"] + data["expected_probe_covering"])


def test_covering_estimate_requires_rng_or_seed(rng):
    config = PointConfiguration.random(G24, 4, rng)
    with pytest.raises(ValueError):
        covering_radius_estimate(config, probes=10)
    with pytest.raises(ValueError):
        covering_radius_estimate(config, probes=0, seed=1)


def test_covering_on_higher_k_space(rng):
    # k = 3 exercises the batched-SVD fallback path of the scan
    g36 = GrassmannSpace(m=6, k=3)
    config = PointConfiguration.random(g36, 4, rng)
    estimate = covering_radius_estimate(config, probes=500, seed=13)
    assert 0.0 < estimate.rho_hat <= g36.diameter + 1e-12
