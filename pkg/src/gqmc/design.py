"""Equal-weight cubature (t-design) construction on G(2,4).

A strength-index-i design makes the empirical pairwise trace moments
(1/n^2) sum_ab tr(P_a P_b)^j hit their uniform-measure values for every
j = 1..i; those values are a hard lower bound, so the squared moment gaps
form a nonnegative energy whose zeros are exactly the designs. The energy is
minimized by Riemannian nonlinear conjugate gradient in the projector
embedding.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .backend import get_core
from .exceptions import NoConvergence
from .kernels import G24, PointConfiguration, moment_constant
from .manifold import (
    EIGENGAP_TOL,
    GrassmannSpace,
    Projector,
    TangentVector,
    random_projector_stack,
)

ARMIJO_C = 1e-4
ARMIJO_SHRINK = 0.5
MAX_BACKTRACKS = 60

__all__ = [
    "DesignProblem",
    "DesignResult",
    "n_schedule",
    "design_strength",
    "energy",
    "energy_gradient",
    "cg_minimize",
    "verify_design",
]


def n_schedule(i: int) -> int:
    """Cardinality schedule floor((i+1)^2 (2 + 2i + i^2) / 6), exact in ints."""
    if i < 1:
        raise ValueError("strength index must be >= 1")
    return ((i + 1) ** 2 * (2 + 2 * i + i * i)) // 6


def design_strength(i: int, k: int) -> float:
    """Design strength t = 2i / sqrt(k) achieved by closing moments 1..i."""
    if i < 1 or k < 1:
        raise ValueError("need i >= 1 and k >= 1")
    return 2.0 * i / math.sqrt(k)


@dataclass(frozen=True)
class DesignProblem:
    """Moment-matching problem: close trace-moment gaps for the given powers."""

    space: GrassmannSpace
    strength_index: int
    powers: tuple[int, ...]
    targets: tuple[float, ...]
    n: int
    max_iters: int = 20000
    energy_tol: float = 1e-14
    restarts: int = 8

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if len(self.powers) != len(self.targets):
            raise ValueError("one target per power")
        if any(j < 1 for j in self.powers):
            raise ValueError("powers must be positive")

    @classmethod
    def for_strength(
        cls,
        i: int,
        space: GrassmannSpace = G24,
        n: int | None = None,
        max_iters: int = 20000,
        energy_tol: float = 1e-14,
        restarts: int | None = None,
    ) -> "DesignProblem":
        """Standard problem for strength index i: powers 1..i, scheduled n."""
        powers = tuple(range(1, i + 1))
        targets = tuple(moment_constant(j, space) for j in powers)
        if restarts is None:
            restarts = 8 if i <= 4 else 3
        return cls(
            space=space,
            strength_index=i,
            powers=powers,
            targets=targets,
            n=n if n is not None else n_schedule(i),
            max_iters=max_iters,
            energy_tol=energy_tol,
            restarts=restarts,
        )


@dataclass(frozen=True)
class DesignResult:
    """Outcome of one optimization: configuration, energy, per-power gaps."""

    config: PointConfiguration
    energy: float
    gaps: np.ndarray = field(repr=False)
    iterations: int
    converged: bool
    seed: int

    def __post_init__(self) -> None:
        self.gaps.setflags(write=False)


# -- energy and gradient on raw stacks ----------------------------------------


def _moment_gaps(P: np.ndarray, powers: Sequence[int], targets: Sequence[float]):
    """Energy, gaps, and the reusable Gram pieces for a projector stack."""
    core = get_core()
    n = P.shape[0]
    F = P.reshape(n, -1)
    G = F @ F.T
    if not powers:
        return 0.0, np.zeros(0), G, F
    sums = core.moment_sums(G, max(powers))
    gaps = sums[np.asarray(powers) - 1] / n**2 - np.asarray(targets, dtype=float)
    return float(np.sum(gaps * gaps)), gaps, G, F


def _riemannian_gradient(P, powers, targets, gaps, G, F):
    """Tangent-space gradient stack of the squared-gap energy."""
    n = P.shape[0]
    W = np.zeros_like(G)
    for j, gap in zip(powers, gaps):
        coeff = 4.0 * j * gap / n**2
        W += coeff * (G ** (j - 1) if j > 1 else np.ones_like(G))
    D = (W @ F).reshape(P.shape)
    D = 0.5 * (D + D.transpose(0, 2, 1))
    return _tangent_project_stack(D, P)


def _tangent_project_stack(D: np.ndarray, P: np.ndarray) -> np.ndarray:
    PD = P @ D
    return PD + PD.transpose(0, 2, 1) - 2.0 * (PD @ P)


def _retract_stack(P: np.ndarray, X: np.ndarray, step: float, k: int):
    """Spectral re-projection of P + step*X; None when any eigengap collapses."""
    S = P + step * X
    S = 0.5 * (S + S.transpose(0, 2, 1))
    w, v = np.linalg.eigh(S)
    split = P.shape[1] - k
    if np.min(w[:, split] - w[:, split - 1]) < EIGENGAP_TOL:
        return None
    basis = v[:, :, split:]
    return np.einsum("nik,njk->nij", basis, basis)


def _config_to_stack(config: PointConfiguration) -> np.ndarray:
    if not np.allclose(config.weights, 1.0 / config.n):
        raise ValueError("moment energy is defined for equal weights")
    return config.stack()


def energy(config: PointConfiguration, problem: DesignProblem):
    """Squared-gap energy of an equal-weight configuration.

    Returns (energy, gaps) where gaps[j] is the empirical moment minus its
    uniform value for problem.powers[j]; each gap is >= 0 up to roundoff.
    """
    e, gaps, _, _ = _moment_gaps(_config_to_stack(config), problem.powers, problem.targets)
    return e, gaps


def energy_gradient(config: PointConfiguration, problem: DesignProblem) -> list[TangentVector]:
    """Riemannian gradient of the energy, one tangent vector per point."""
    P = _config_to_stack(config)
    _, gaps, G, F = _moment_gaps(P, problem.powers, problem.targets)
    R = _riemannian_gradient(P, problem.powers, problem.targets, gaps, G, F)
    return [TangentVector(R[a], config.points[a]) for a in range(config.n)]


def _cg_single_run(problem: DesignProblem, P: np.ndarray):
    """Polak-Ribiere+ conjugate gradient from one starting stack.

    Directions are transported by re-projection onto the new tangent space;
    the line search is Armijo backtracking, restarting from twice the last
    accepted step. Accepted energies are non-increasing by construction.
    """
    powers, targets, k = problem.powers, problem.targets, problem.space.k
    f, gaps, G, F = _moment_gaps(P, powers, targets)
    g = _riemannian_gradient(P, powers, targets, gaps, G, F)
    d = -g
    gg = float(np.vdot(g, g))
    step = 1.0
    iterations = 0
    history = [f]
    while f > problem.energy_tol and iterations < problem.max_iters and gg > 1e-30:
        dg = float(np.vdot(d, g))
        if dg >= 0.0:  # not a descent direction: restart on steepest descent
            d = -g
            dg = -gg
        trial = 2.0 * step
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            P_new = _retract_stack(P, d, trial, k)
            if P_new is not None:
                f_new, gaps_new, G_new, F_new = _moment_gaps(P_new, powers, targets)
                if f_new <= f + ARMIJO_C * trial * dg:
                    accepted = True
                    break
            trial *= ARMIJO_SHRINK
        if not accepted:
            break
        step = trial
        P, f, gaps, G, F = P_new, f_new, gaps_new, G_new, F_new
        history.append(f)
        g_prev, gg_prev = g, gg
        g = _riemannian_gradient(P, powers, targets, gaps, G, F)
        gg = float(np.vdot(g, g))
        g_prev_t = _tangent_project_stack(g_prev, P)
        beta = max(0.0, float(np.vdot(g, g - g_prev_t)) / gg_prev)
        d = -g + beta * _tangent_project_stack(d, P)
        iterations += 1
    return P, f, gaps, iterations, history


def cg_minimize(
    problem: DesignProblem,
    seed: int,
    initial: PointConfiguration | None = None,
    stop_on_converged: bool = True,
) -> DesignResult:
    """Multi-start Riemannian CG minimization of the moment energy.

    Each restart draws fresh uniform points from a child stream of ``seed``
    (SeedSequence([seed, restart])); ``initial`` replaces the random start of
    restart 0. The best run is returned; by default later restarts are skipped
    once one reaches the tolerance.

    Raises
    ------
    NoConvergence
        When no restart reaches energy_tol; the exception carries the best
        DesignResult for inspection.
    """
    if problem.n < n_schedule(problem.strength_index):
        warnings.warn(
            f"n={problem.n} is below the schedule value "
            f"{n_schedule(problem.strength_index)} for i={problem.strength_index}; "
            "an exact design may not exist",
            stacklevel=2,
        )
    best: tuple[float, np.ndarray, np.ndarray, int] | None = None
    for restart in range(max(problem.restarts, 1)):
        if restart == 0 and initial is not None:
            P0 = _config_to_stack(initial)
        else:
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, restart])))
            P0 = random_projector_stack(problem.space, problem.n, rng)
        P, f, gaps, iterations, _ = _cg_single_run(problem, P0)
        if best is None or f < best[0]:
            best = (f, P, gaps, iterations)
        if stop_on_converged and f <= problem.energy_tol:
            break
    f, P, gaps, iterations = best
    points = tuple(Projector(np.ascontiguousarray(P[a]), problem.space) for a in range(problem.n))
    result = DesignResult(
        config=PointConfiguration.equal_weights(points),
        energy=f,
        gaps=gaps,
        iterations=iterations,
        converged=f <= problem.energy_tol,
        seed=seed,
    )
    if not result.converged:
        raise NoConvergence(result)
    return result


def verify_design(result: DesignResult, tol: float):
    """Recompute every moment gap in fresh arithmetic and compare against tol.

    Independent of the optimizer's accumulation path: pairwise traces from the
    configuration and exact (fsum) reduction per power. Returns (ok, report)
    where ok requires |gap_j| <= tol and gap_j >= -1e-10 for every power.
    """
    config = result.config
    problem_powers = np.arange(1, len(result.gaps) + 1)
    G = config.trace_matrix()
    n = config.n
    gaps = []
    for j in problem_powers:
        total = math.fsum((G**j).ravel())
        gaps.append(total / n**2 - moment_constant(int(j), config.space))
    ok = all(abs(g) <= tol and g >= -1e-10 for g in gaps)
    report = {
        "tol": tol,
        "gaps": gaps,
        "max_abs_gap": max((abs(g) for g in gaps), default=0.0),
        "ok": ok,
    }
    return ok, report
