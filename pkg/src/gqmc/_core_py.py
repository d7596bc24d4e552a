"""Pure-numpy implementations of the hot kernels.

Mirrors the API of the compiled extension ``gqmc._core``. Reductions here use
math.fsum (exact) where calls are rare and numpy's pairwise summation (shape-
deterministic) inside the optimizer loop; the compiled core uses Kahan
accumulation in row-major order for both. Each backend is bitwise
reproducible under a fixed seed; they agree with each other to ~1e-12.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def kahan_sum(values: np.ndarray) -> float:
    """Exact sum of a 1-D array (math.fsum; strictly stronger than Kahan)."""
    return math.fsum(np.asarray(values, dtype=float).ravel())


def moment_sums(G: np.ndarray, jmax: int) -> np.ndarray:
    """Sums of elementwise powers of G: out[j-1] = sum_ab G_ab^j, j = 1..jmax."""
    G = np.asarray(G, dtype=float)
    out = np.empty(jmax)
    power = G.copy()
    for j in range(1, jmax + 1):
        out[j - 1] = power.sum()
        if j < jmax:
            power *= G
    return out


def weighted_double_sum(K: np.ndarray, w: np.ndarray) -> float:
    """sum_ab w_a w_b K_ab, accumulated exactly in row-major order."""
    K = np.asarray(K, dtype=float)
    w = np.asarray(w, dtype=float)
    return math.fsum((np.outer(w, w) * K).ravel())


def min_dists(bases: np.ndarray, probes: np.ndarray) -> np.ndarray:
    """Per-probe minimum geodesic distance to a stack of design points.

    ``bases`` is (n, m, k) orthonormal, ``probes`` is (c, m, k) orthonormal.
    For k <= 2 the principal-angle cosines come from closed-form 2x2 singular
    values; larger k goes through batched SVD.
    """
    bases = np.asarray(bases, dtype=float)
    probes = np.asarray(probes, dtype=float)
    k = bases.shape[2]
    if k == 1:
        cos = np.abs(np.einsum("cmi,nmi->cn", probes, bases))
        theta = np.arccos(np.clip(cos, 0.0, 1.0))
        return np.sqrt(2.0) * theta.min(axis=1)
    # cross-Gram stack T[c, n] = bases_n^T probes_c, shape (c, n, k, k)
    T = np.einsum("nak,baj->bnkj", bases, probes)
    if k == 2:
        frob2 = np.einsum("bnkj,bnkj->bn", T, T)
        det = T[..., 0, 0] * T[..., 1, 1] - T[..., 0, 1] * T[..., 1, 0]
        disc = np.sqrt(np.maximum(frob2 * frob2 - 4.0 * det * det, 0.0))
        y_hi = np.clip(0.5 * (frob2 + disc), 0.0, 1.0)
        y_lo = np.clip(0.5 * (frob2 - disc), 0.0, 1.0)
        d2 = np.arccos(np.sqrt(y_hi)) ** 2 + np.arccos(np.sqrt(y_lo)) ** 2
    else:
        s = np.clip(np.linalg.svd(T, compute_uv=False), 0.0, 1.0)
        d2 = (np.arccos(s) ** 2).sum(axis=-1)
    return np.sqrt(2.0 * d2.min(axis=1))
