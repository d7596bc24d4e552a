"""Covering-radius estimation by random probes, plus the volume formulas and
the expected covering radius of uniform random points.

The probe estimate max_probe min_point dist(R, P_j) approaches the true
covering radius from below; the gap is at most the covering radius of the
probe set itself, which for large probe counts behaves like
(vol(G)/vol(B_d) * log(n)/n)^(1/d).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import gamma as _gamma

from . import _core_py
from .backend import get_core
from .exceptions import DomainError, InsufficientData, NonPositiveValue
from .kernels import PointConfiguration
from .manifold import GrassmannSpace, orthonormal_basis, random_basis_stack

PROBE_CHUNK = 8192

__all__ = [
    "CoveringEstimate",
    "covering_radius_estimate",
    "multivariate_gamma",
    "grassmann_volume",
    "ball_volume",
    "expected_random_covering",
    "slope_fit",
    "SlopeFit",
]


@dataclass(frozen=True)
class CoveringEstimate:
    """Probe-based lower estimate of a configuration's covering radius."""

    rho_hat: float
    probes: int
    probe_seed: int | None
    expected_probe_covering: float
    upper_hint: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "rho_hat": self.rho_hat,
                "probes": self.probes,
                "seed": self.probe_seed,
                "expected_probe_covering": self.expected_probe_covering,
                "upper_hint": self.upper_hint,
            }
        )


def covering_radius_estimate(
    config: PointConfiguration,
    probes: int,
    rng: np.random.Generator | None = None,
    seed: int | None = None,
) -> CoveringEstimate:
    """max-min distance from uniform random probes to the configuration.

    Probes are drawn in fixed chunks of 8192 from ``rng`` (or a fresh
    PCG64(seed) stream), so a given seed always sees the same probe sequence
    and larger probe counts extend it. Distances are computed on the fly;
    nothing of size probes x n is ever materialized.
    """
    if probes < 1:
        raise ValueError("need at least one probe")
    if rng is None:
        if seed is None:
            raise ValueError("pass an rng or a seed")
        rng = np.random.Generator(np.random.PCG64(seed))
    space = config.space
    bases = np.stack([orthonormal_basis(p) for p in config.points])
    core = get_core()
    rho = 0.0
    remaining = probes
    while remaining > 0:
        count = min(PROBE_CHUNK, remaining)
        probe_bases = random_basis_stack(space, count, rng)
        try:
            dists = core.min_dists(bases, probe_bases)
        except NotImplementedError:  # compiled scan is k <= 2 only
            dists = _core_py.min_dists(bases, probe_bases)
        rho = max(rho, float(dists.max()))
        remaining -= count
    expected = expected_random_covering(space, probes) if probes >= 2 else space.diameter
    return CoveringEstimate(
        rho_hat=rho,
        probes=probes,
        probe_seed=seed,
        expected_probe_covering=expected,
        upper_hint=rho + expected,
    )


def multivariate_gamma(k: int, x: float) -> float:
    """Multivariate Gamma: pi^(k(k-1)/4) * prod_i Gamma(x + (1-i)/2)."""
    if x <= (k - 1) / 2.0:
        raise DomainError(f"multivariate_gamma needs x > (k-1)/2, got x={x}, k={k}")
    product = 1.0
    for i in range(1, k + 1):
        product *= float(_gamma(x + (1.0 - i) / 2.0))
    return math.pi ** (k * (k - 1) / 4.0) * product


def grassmann_volume(space: GrassmannSpace) -> float:
    """Volume of G(k, m) under the scaled (sqrt 2) projector-embedding metric."""
    k, m = space.k, space.m
    ratio = multivariate_gamma(k, k / 2.0) / multivariate_gamma(k, m / 2.0)
    return ratio * (2.0 * math.pi) ** (k * (m - k) / 2.0)


def ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return math.pi ** (d / 2.0) / float(_gamma(d / 2.0 + 1.0))


def expected_random_covering(space: GrassmannSpace, n: float) -> float:
    """Large-n expected covering radius of n uniform random points:
    (vol(G)/vol(B_d) * log(n)/n)^(1/d). On G(2,4) this is exactly
    2 n^(-1/4) log(n)^(1/4)."""
    if n < 2:
        raise ValueError("the asymptotic needs n >= 2")
    d = space.d
    ratio = grassmann_volume(space) / ball_volume(d)
    return (ratio * math.log(n) / n) ** (1.0 / d)


class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float


def slope_fit(pairs: Sequence[tuple[float, float]]) -> SlopeFit:
    """Least-squares slope of log(value) against log(n).

    Raises NonPositiveValue for nonpositive inputs and InsufficientData for
    fewer than three pairs.
    """
    if len(pairs) < 3:
        raise InsufficientData(f"slope fit needs >= 3 points, got {len(pairs)}")
    ns = np.array([p[0] for p in pairs], dtype=float)
    values = np.array([p[1] for p in pairs], dtype=float)
    if np.any(ns <= 0.0) or np.any(values <= 0.0):
        raise NonPositiveValue("log-log fit needs positive n and positive values")
    x, y = np.log(ns), np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    total = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if total == 0.0 else 1.0 - float(np.sum(residuals**2)) / total
    return SlopeFit(float(slope), float(intercept), r_squared)
