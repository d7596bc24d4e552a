"""Grassmannian geometry in the projector embedding.

A point of G(k, m) is the m x m orthogonal projector onto the subspace; all
public geometry (sampling, principal angles, distances, tangent projection,
retraction) is expressed in terms of projectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.linalg import subspace_angles

from .exceptions import (
    DegenerateDraw,
    EigengapCollapse,
    NotIdempotent,
    NotSymmetric,
    WrongRank,
)

SYMMETRY_TOL = 1e-12
IDEMPOTENCY_TOL = 1e-10
TRACE_TOL = 1e-10
EIGENGAP_TOL = 1e-12

__all__ = [
    "GrassmannSpace",
    "Projector",
    "PrincipalAngles",
    "TangentVector",
    "validate_projector",
    "random_projector",
    "orthonormal_basis",
    "principal_angles",
    "geodesic_distance",
    "trace_inner",
    "tangent_project",
    "retract",
    "write_projectors",
    "read_projectors",
]


@dataclass(frozen=True)
class GrassmannSpace:
    """The Grassmannian G(k, m) of k-dimensional subspaces of R^m."""

    m: int
    k: int

    def __post_init__(self) -> None:
        if not (1 <= self.k <= self.m - 1):
            raise ValueError(f"need 1 <= k <= m-1, got k={self.k}, m={self.m}")

    @property
    def d(self) -> int:
        """Manifold dimension k(m-k)."""
        return self.k * (self.m - self.k)

    @property
    def diameter(self) -> float:
        """Largest geodesic distance: min(k, m-k) right angles."""
        return np.pi * np.sqrt(min(self.k, self.m - self.k) / 2.0)


@dataclass(frozen=True)
class Projector:
    """A validated rank-k orthogonal projector on R^m."""

    entries: np.ndarray = field(repr=False)
    space: GrassmannSpace

    def __post_init__(self) -> None:
        self.entries.setflags(write=False)


@dataclass(frozen=True)
class PrincipalAngles:
    """Principal angles between two subspaces, ascending, in [0, pi/2]."""

    theta: np.ndarray


@dataclass(frozen=True)
class TangentVector:
    """A symmetric matrix tangent to the projector embedding at ``base``."""

    entries: np.ndarray = field(repr=False)
    base: Projector

    def __post_init__(self) -> None:
        self.entries.setflags(write=False)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))


def validate_projector(matrix: np.ndarray, space: GrassmannSpace) -> Projector:
    """Wrap ``matrix`` as a point of G(k, m), checking the projector identities.

    Raises
    ------
    NotSymmetric, NotIdempotent, WrongRank
        Naming the violated identity and its residual.
    """
    M = np.asarray(matrix, dtype=float)
    if M.shape != (space.m, space.m):
        raise ValueError(f"expected {space.m}x{space.m} matrix, got {M.shape}")
    sym_residual = float(np.abs(M - M.T).max())
    if sym_residual > SYMMETRY_TOL:
        raise NotSymmetric(sym_residual)
    idem_residual = float(np.abs(M @ M - M).max())
    if idem_residual > IDEMPOTENCY_TOL:
        raise NotIdempotent(idem_residual)
    trace = float(np.trace(M))
    if abs(trace - space.k) > TRACE_TOL:
        raise WrongRank(trace, space.k)
    return Projector(M.copy(), space)


def random_projector(space: GrassmannSpace, rng: np.random.Generator) -> Projector:
    """Draw a projector from the orthogonally invariant measure on G(k, m).

    Orthonormalizes an m x k matrix of independent standard normals; the
    invariance of the Gaussian ensemble makes the column span exactly uniform.
    """
    for _ in range(3):
        g = rng.standard_normal((space.m, space.k))
        q, r = np.linalg.qr(g)
        if np.abs(np.diagonal(r)).min() > 1e-12:
            return Projector(q @ q.T, space)
    raise DegenerateDraw("rank-deficient Gaussian draw three times in a row")


def orthonormal_basis(P: Projector) -> np.ndarray:
    """An m x k orthonormal basis of the projector's range.

    Eigenvectors of a projector cluster at eigenvalues {0, 1}; the columns
    with eigenvalue > 1/2 span the range.
    """
    w, v = np.linalg.eigh(P.entries)
    basis = v[:, w > 0.5]
    if basis.shape[1] != P.space.k:
        raise WrongRank(float(w.sum()), P.space.k)
    return basis


def _check_same_space(P: Projector, Q: Projector) -> None:
    if P.space != Q.space:
        raise ValueError(f"points on different spaces: {P.space} vs {Q.space}")


def principal_angles(P: Projector, Q: Projector) -> PrincipalAngles:
    """Principal angles between the ranges of P and Q, sorted ascending.

    Cosines are the singular values of the cross-Gram of orthonormal bases;
    the combined cosine/sine formulation keeps angles near 0 accurate to
    machine precision (plain arccos of a clamped singular value cannot).
    The arguments are put in a canonical order first, so swapping P and Q
    returns bitwise-identical angles.
    """
    _check_same_space(P, Q)
    first, second = _canonical_order(P, Q)
    theta = subspace_angles(orthonormal_basis(first), orthonormal_basis(second))
    return PrincipalAngles(np.sort(theta))


def _canonical_order(P: Projector, Q: Projector) -> tuple[Projector, Projector]:
    for x, y in zip(P.entries.ravel(), Q.entries.ravel()):
        if x < y:
            return P, Q
        if x > y:
            return Q, P
    return P, Q


def geodesic_distance(P: Projector, Q: Projector) -> float:
    """Geodesic distance sqrt(2) * ||theta||_2 in the projector embedding."""
    return float(np.sqrt(2.0) * np.linalg.norm(principal_angles(P, Q).theta))


def trace_inner(P: Projector, Q: Projector) -> float:
    """tr(PQ) = sum of squared principal-angle cosines, clipped into [0, k]."""
    _check_same_space(P, Q)
    value = float(np.vdot(P.entries, Q.entries))
    return min(max(value, 0.0), float(P.space.k))


def tangent_project(G: np.ndarray, P: Projector) -> TangentVector:
    """Orthogonal projection of a symmetric matrix onto the tangent space at P.

    X = P G (I - P) + (I - P) G P; idempotent, and X vanishes iff G commutes
    with P (e.g. G = P or G = I).
    """
    G = np.asarray(G, dtype=float)
    Pm = P.entries
    PG = Pm @ G
    X = PG + PG.T - 2.0 * (Pm @ G @ Pm)
    return TangentVector(X, P)


def retract(P: Projector, X: TangentVector, step: float) -> Projector:
    """Spectral retraction: project P + step*X back onto the manifold.

    Symmetrizes the perturbed matrix and returns the orthogonal projector onto
    its top-k eigenspace. Agrees with the geodesic exponential to first order.

    Raises
    ------
    EigengapCollapse
        If the k-th and (k+1)-th eigenvalues are within 1e-12 of each other,
        making the top-k eigenspace ambiguous; callers halve the step.
    """
    space = P.space
    S = P.entries + step * X.entries
    S = 0.5 * (S + S.T)
    w, v = np.linalg.eigh(S)
    split = space.m - space.k
    if w[split] - w[split - 1] < EIGENGAP_TOL:
        raise EigengapCollapse(f"eigengap {w[split] - w[split - 1]:.3e} at step {step:.3e}")
    basis = v[:, split:]
    return Projector(basis @ basis.T, space)


# -- batched internals shared by the optimizer and the covering scan ---------


def random_basis_stack(space: GrassmannSpace, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` orthonormal m x k bases of uniformly random subspaces.

    Column-by-column Gram-Schmidt on a Gaussian stack; spans (and hence the
    induced projectors) match the per-point QR construction exactly in
    distribution, and the flat Gaussian draw keeps the stream layout identical
    to ``count`` successive single draws.
    """
    g = rng.standard_normal((count, space.m, space.k))
    basis = np.empty_like(g)
    for j in range(space.k):
        col = g[:, :, j].copy()
        for i in range(j):
            col -= np.sum(basis[:, :, i] * col, axis=1, keepdims=True) * basis[:, :, i]
        norms = np.linalg.norm(col, axis=1, keepdims=True)
        if norms.min() < 1e-12:
            raise DegenerateDraw("rank-deficient Gaussian draw in batch sampling")
        basis[:, :, j] = col / norms
    return basis


def random_projector_stack(space: GrassmannSpace, count: int, rng: np.random.Generator) -> np.ndarray:
    """(count, m, m) stack of independent uniform projectors."""
    b = random_basis_stack(space, count, rng)
    return np.einsum("nik,njk->nij", b, b)


# -- projector CSV ------------------------------------------------------------


def write_projectors(path: str | Path, projectors: Sequence[Projector]) -> None:
    """Write projectors to CSV, one row of m^2 row-major entries each."""
    if not projectors:
        raise ValueError("nothing to write")
    space = projectors[0].space
    lines = [f"# grassmann k={space.k} m={space.m}"]
    for p in projectors:
        lines.append(",".join(repr(float(x)) for x in p.entries.ravel()))
    Path(path).write_text("\n".join(lines) + "\n")


def read_projectors(path: str | Path, space: GrassmannSpace | None = None) -> list[Projector]:
    """Read and re-validate a projector CSV written by :func:`write_projectors`."""
    text = Path(path).read_text().strip().splitlines()
    header = text[0].strip()
    if not header.startswith("# grassmann"):
        raise ValueError(f"{path}: missing '# grassmann' header")
    fields = dict(part.split("=") for part in header.split()[2:])
    file_space = GrassmannSpace(m=int(fields["m"]), k=int(fields["k"]))
    if space is not None and space != file_space:
        raise ValueError(f"{path}: file is on {file_space}, expected {space}")
    out = []
    for line in text[1:]:
        values = np.array([float(x) for x in line.split(",")])
        out.append(validate_projector(values.reshape(file_space.m, file_space.m), file_space))
    return out
