"""Trace kernels on G(2,4), their zeroth Fourier coefficients, and worst-case
integration errors in the induced reproducing-kernel Hilbert spaces.

A trace kernel is K(P, Q) = profile(tr(PQ)). Its zeroth Fourier coefficient
(the double integral of K against the uniform measure) enters the closed-form
worst-case error; on G(2,4) both built-in kernels have exact values, checked
against an independent tensor Gauss-Legendre oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .backend import get_core
from .exceptions import KernelNotPositiveDefinite, KernelSpaceMismatch, UnsupportedSpace
from .manifold import GrassmannSpace, Projector, random_projector_stack

G24 = GrassmannSpace(m=4, k=2)

NEGATIVE_CLAMP = 1e-10

__all__ = [
    "TraceKernel",
    "PointConfiguration",
    "WceReport",
    "kernel_k1",
    "kernel_k2",
    "shi",
    "khat0_quadrature",
    "khat0_monte_carlo",
    "moment_constant",
    "wce_squared",
    "random_wce_constant",
    "expected_random_wce",
]


@dataclass(frozen=True)
class TraceKernel:
    """A kernel K(P, Q) = profile(tr(PQ)) with known zeroth Fourier coefficient.

    ``profile`` must accept numpy arrays of traces in [0, k]. ``khat0`` is the
    double integral of K against the uniform measure; the constructor checks
    the two positive-definiteness necessities 0 < khat0 <= profile(k).
    """

    name: str
    profile: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    space: GrassmannSpace
    diag_value: float
    khat0: float

    def __post_init__(self) -> None:
        probes = np.array([0.0, self.space.k / 2.0, float(self.space.k)])
        values = np.asarray(self.profile(probes), dtype=float)
        if not np.all(np.isfinite(values)):
            raise ValueError(f"kernel {self.name}: profile not finite on [0, k]")
        if not self.khat0 > 0.0:
            raise ValueError(f"kernel {self.name}: khat0 must be positive")
        if self.khat0 > self.diag_value + 1e-12:
            raise ValueError(f"kernel {self.name}: khat0 exceeds the diagonal value")


def kernel_k1() -> TraceKernel:
    """The sqrt((2-r)^3) + 2r kernel on G(2,4).

    Its RKHS carries an equivalent norm to the order-7/2 L2 Sobolev space, so
    equal-weight cubature errors should decay like n^(-7/8).
    """
    khat0 = 2.0 + (74.0 / 75.0) * math.sqrt(2.0) - 0.4 * math.log1p(math.sqrt(2.0))

    def profile(r):
        r = np.asarray(r, dtype=float)
        return np.sqrt(np.maximum(2.0 - r, 0.0) ** 3) + 2.0 * r

    return TraceKernel(name="K1", profile=profile, space=G24, diag_value=4.0, khat0=khat0)


def kernel_k2() -> TraceKernel:
    """The (3/2) exp(-(2-r)) kernel on G(2,4); smoother than any fixed Sobolev
    order, so its cubature error curves bend downward on log-log axes."""
    khat0 = 1.5 * math.exp(-1.0) * shi(1.0)

    def profile(r):
        r = np.asarray(r, dtype=float)
        return 1.5 * np.exp(r - 2.0)

    return TraceKernel(name="K2", profile=profile, space=G24, diag_value=1.5, khat0=khat0)


def shi(x: float) -> float:
    """Hyperbolic sine integral via its Maclaurin series.

    The series x^(2n+1) / ((2n+1) (2n+1)!) converges everywhere; terms are
    accumulated until one falls below 1e-17 of the running value. Limited to
    |x| <= 50 to stay clear of float overflow in intermediate powers.
    """
    if abs(x) > 50.0:
        raise ValueError("shi series evaluated only for |x| <= 50")
    total = 0.0
    power_over_factorial = x  # x^(2n+1) / (2n+1)!
    n = 0
    while True:
        term = power_over_factorial / (2 * n + 1)
        total += term
        if abs(term) <= 1e-17 * abs(total):
            return total
        n += 1
        power_over_factorial *= x * x / ((2 * n) * (2 * n + 1))


def khat0_quadrature(kernel: TraceKernel, nodes: int) -> float:
    """Independent oracle for khat0 on G(2,4).

    Tensor Gauss-Legendre evaluation of (1/4) * double integral of
    profile(1 + xi * eta) over [-1, 1]^2, which the orthogonal invariance of
    trace kernels reduces the uniform double integral to.
    """
    if nodes < 8:
        raise ValueError("need at least 8 quadrature nodes")
    if kernel.space != G24:
        raise UnsupportedSpace(f"quadrature reduction is specific to G(2,4), not {kernel.space}")
    x, w = np.polynomial.legendre.leggauss(nodes)
    values = kernel.profile(1.0 + np.outer(x, x))
    return 0.25 * float(w @ values @ w)


def khat0_monte_carlo(
    kernel_profile: Callable[[np.ndarray], np.ndarray],
    space: GrassmannSpace,
    samples: int,
    rng: np.random.Generator,
) -> float:
    """Monte Carlo estimate of khat0 on an arbitrary G(k, m).

    Averages profile(tr(PQ)) over independent uniform pairs. This is the
    fallback oracle for spaces without the G(2,4) closed forms.
    """
    P = random_projector_stack(space, samples, rng)
    Q = random_projector_stack(space, samples, rng)
    traces = np.einsum("nij,nij->n", P, Q)
    return float(np.mean(kernel_profile(np.clip(traces, 0.0, space.k))))


def _moment_fraction(i: int) -> Fraction:
    # (1/4) * iint (1 + xi*eta)^i = sum over even j of C(i,j)/(j+1)^2
    return sum(
        (Fraction(math.comb(i, j), (j + 1) ** 2) for j in range(0, i + 1, 2)),
        Fraction(0),
    )


def moment_constant(i: int, space: GrassmannSpace = G24) -> float:
    """The uniform double integral of tr(PQ)^i on G(2,4), exact in rationals.

    Raises UnsupportedSpace for any other (k, m); callers there should use a
    Monte Carlo oracle instead of a silently wrong constant.
    """
    if space != G24:
        raise UnsupportedSpace(f"closed-form trace moments exist only on G(2,4), not {space}")
    if not 1 <= i <= 16:
        raise ValueError("moment_constant supports 1 <= i <= 16")
    return float(_moment_fraction(i))


@dataclass(frozen=True)
class PointConfiguration:
    """n projectors with quadrature weights (equal 1/n for designs)."""

    points: tuple[Projector, ...]
    weights: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if not self.points:
            raise ValueError("empty configuration")
        space = self.points[0].space
        if any(p.space != space for p in self.points):
            raise ValueError("all points must live on one space")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.points),) or not np.all(np.isfinite(w)):
            raise ValueError("need one finite weight per point")
        object.__setattr__(self, "weights", w)
        self.weights.setflags(write=False)

    @classmethod
    def equal_weights(cls, points: Sequence[Projector]) -> "PointConfiguration":
        n = len(points)
        return cls(tuple(points), np.full(n, 1.0 / n))

    @classmethod
    def random(cls, space: GrassmannSpace, n: int, rng: np.random.Generator) -> "PointConfiguration":
        stack = random_projector_stack(space, n, rng)
        points = tuple(Projector(stack[i], space) for i in range(n))
        return cls(points, np.full(n, 1.0 / n))

    @property
    def space(self) -> GrassmannSpace:
        return self.points[0].space

    @property
    def n(self) -> int:
        return len(self.points)

    def stack(self) -> np.ndarray:
        """(n, m, m) array of the projector entries."""
        return np.stack([p.entries for p in self.points])

    def trace_matrix(self) -> np.ndarray:
        """Pairwise tr(P_a P_b), clipped into [0, k]."""
        F = self.stack().reshape(self.n, -1)
        return np.clip(F @ F.T, 0.0, float(self.space.k))


@dataclass(frozen=True)
class WceReport:
    """Worst-case integration error of a configuration in one RKHS."""

    kernel: str
    n: int
    wce_squared: float
    wce: float
    clamped: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "kernel": self.kernel,
                "n": self.n,
                "wce_squared": self.wce_squared,
                "wce": self.wce,
                "clamped": self.clamped,
            }
        )


def wce_squared(config: PointConfiguration, kernel: TraceKernel) -> WceReport:
    """Worst-case error squared: the weighted kernel double sum plus
    khat0 * (1 - 2 * sum of weights).

    The double sum runs in deterministic row-major order with compensated
    accumulation, so a good design's near-cancellation to ~1e-16 is
    reproducible. Negatives within roundoff (-1e-10, 0) are clamped to zero
    wce with a flag; anything more negative means the kernel was not positive
    definite.
    """
    if config.space != kernel.space:
        raise KernelSpaceMismatch(f"kernel on {kernel.space}, points on {config.space}")
    core = get_core()
    K = np.asarray(kernel.profile(config.trace_matrix()), dtype=float)
    total = core.weighted_double_sum(K, config.weights)
    value = total + kernel.khat0 * (1.0 - 2.0 * math.fsum(config.weights))
    if value < -NEGATIVE_CLAMP:
        raise KernelNotPositiveDefinite(f"wce^2 = {value:.3e} for kernel {kernel.name}")
    clamped = value < 0.0
    return WceReport(
        kernel=kernel.name,
        n=config.n,
        wce_squared=value,
        wce=math.sqrt(max(value, 0.0)),
        clamped=clamped,
    )


def random_wce_constant(kernel: TraceKernel) -> float:
    """c^2 in the expected-error law for uniform random points.

    For trace kernels the diagonal K(P, P) = profile(k) is constant, so
    c^2 = diag_value - khat0.
    """
    return kernel.diag_value - kernel.khat0


def expected_random_wce(kernel: TraceKernel, n: int) -> float:
    """Root-mean-square worst-case error of n uniform random points: c / sqrt(n)."""
    if n < 1:
        raise ValueError("n must be positive")
    return math.sqrt(random_wce_constant(kernel)) / math.sqrt(n)
