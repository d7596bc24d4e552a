import math

import numpy as np
import pytest

from gqmc.exceptions import DegenerateDraw, EigengapCollapse, NotIdempotent, NotSymmetric, WrongRank
from gqmc.manifold import (
    GrassmannSpace,
    Projector,
    geodesic_distance,
    orthonormal_basis,
    principal_angles,
    random_basis_stack,
    random_projector,
    random_projector_stack,
    read_projectors,
    retract,
    tangent_project,
    trace_inner,
    validate_projector,
    write_projectors,
)

G24 = GrassmannSpace(m=4, k=2)
G12 = GrassmannSpace(m=2, k=1)

PLANE_12 = np.diag([1.0, 1.0, 0.0, 0.0])
PLANE_34 = np.diag([0.0, 0.0, 1.0, 1.0])
PLANE_13 = np.diag([1.0, 0.0, 1.0, 0.0])


def test_space_dimensions():
    assert G24.d == 4
    assert GrassmannSpace(m=7, k=3).d == 12
    with pytest.raises(ValueError):
        GrassmannSpace(m=4, k=4)
    with pytest.raises(ValueError):
        GrassmannSpace(m=4, k=0)


def test_validate_accepts_coordinate_planes():
    p = validate_projector(PLANE_12, G24)
    assert isinstance(p, Projector)
    # rank-1 projector onto span{(1,1)}
    validate_projector(0.5 * np.ones((2, 2)), G12)


def test_validate_rejects_each_invariant():
    with pytest.raises(WrongRank):
        validate_projector(np.diag([1.0, 0.0, 0.0, 0.0]), G24)
    bad_sym = PLANE_12.copy()
    bad_sym[0, 1] = 1e-6
    with pytest.raises(NotSymmetric) as err:
        validate_projector(bad_sym, G24)
    assert err.value.residual == pytest.approx(1e-6)
    with pytest.raises(NotIdempotent):
        validate_projector(np.diag([1.0, 0.5, 0.5, 0.0]), G24)


def test_random_projector_is_valid_and_mean_is_half_identity(rng):
    for _ in range(10):
        p = random_projector(G24, rng)
        validate_projector(p.entries, G24)
    mean = random_projector_stack(G24, 100_000, rng).mean(axis=0)
    assert np.abs(mean - 0.5 * np.eye(4)).max() < 0.01


def test_random_pair_trace_mean_matches_first_moment(rng):
    # E tr(PQ) for independent uniform pairs equals the first trace moment, 1.
    p = random_projector_stack(G24, 100_000, rng)
    q = random_projector_stack(G24, 100_000, rng)
    traces = np.einsum("nij,nij->n", p, q)
    se = traces.std(ddof=1) / math.sqrt(traces.size)
    assert abs(traces.mean() - 1.0) < 3 * se


def test_degenerate_draw_after_three_bad_tries():
    class ZeroRng:
        def standard_normal(self, shape):
            return np.zeros(shape)

    with pytest.raises(DegenerateDraw):
        random_projector(G24, ZeroRng())


def test_principal_angles_examples():
    p12 = validate_projector(PLANE_12, G24)
    p34 = validate_projector(PLANE_34, G24)
    p13 = validate_projector(PLANE_13, G24)
    assert principal_angles(p12, p12).theta == pytest.approx([0.0, 0.0], abs=1e-12)
    assert principal_angles(p12, p34).theta == pytest.approx([np.pi / 2, np.pi / 2])
    assert principal_angles(p12, p13).theta == pytest.approx([0.0, np.pi / 2], abs=1e-12)


def test_principal_angles_sorted_and_in_range(rng):
    for _ in range(50):
        p = random_projector(G24, rng)
        q = random_projector(G24, rng)
        theta = principal_angles(p, q).theta
        assert np.all(np.diff(theta) >= 0.0)
        assert np.all(theta >= 0.0) and np.all(theta <= np.pi / 2 + 1e-15)


def test_geodesic_distance_examples():
    p12 = validate_projector(PLANE_12, G24)
    p34 = validate_projector(PLANE_34, G24)
    p13 = validate_projector(PLANE_13, G24)
    assert geodesic_distance(p12, p12) == pytest.approx(0.0, abs=1e-12)
    assert geodesic_distance(p12, p34) == pytest.approx(np.pi)
    assert geodesic_distance(p12, p13) == pytest.approx(np.sqrt(2.0) * np.pi / 2)


def test_trace_inner_examples(rng):
    p12 = validate_projector(PLANE_12, G24)
    p34 = validate_projector(PLANE_34, G24)
    p13 = validate_projector(PLANE_13, G24)
    assert trace_inner(p12, p12) == pytest.approx(2.0)
    assert trace_inner(p12, p34) == pytest.approx(0.0)
    assert trace_inner(p12, p13) == pytest.approx(1.0)
    for _ in range(20):
        p, q = random_projector(G24, rng), random_projector(G24, rng)
        assert 0.0 <= trace_inner(p, q) <= 2.0


def test_metric_axioms_on_random_triples(rng):
    triples = [
        (random_projector(G24, rng), random_projector(G24, rng), random_projector(G24, rng))
        for _ in range(200)
    ]
    for p, q, r in triples:
        dpq = geodesic_distance(p, q)
        assert dpq == geodesic_distance(q, p)
        assert geodesic_distance(p, p) <= 1e-9
        assert dpq > 1e-9  # independent draws are distinct
        assert geodesic_distance(p, r) <= dpq + geodesic_distance(q, r) + 1e-9
        assert dpq <= np.pi + 1e-12


def test_orthogonal_invariance(rng):
    for _ in range(20):
        p, q = random_projector(G24, rng), random_projector(G24, rng)
        u, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        up = validate_projector(u @ p.entries @ u.T, G24)
        uq = validate_projector(u @ q.entries @ u.T, G24)
        assert geodesic_distance(up, uq) == pytest.approx(geodesic_distance(p, q), abs=1e-9)
        assert trace_inner(up, uq) == pytest.approx(trace_inner(p, q), abs=1e-10)


def test_frobenius_consistency_for_close_pairs(rng):
    # dist and the Frobenius distance agree to first order as pairs get close
    p = random_projector(G24, rng)
    for scale in (1e-2, 1e-3, 1e-4):
        g = rng.standard_normal((4, 4))
        x = tangent_project(g + g.T, p)
        q = retract(p, x, scale / max(x.norm, 1e-300))
        frob = np.linalg.norm(p.entries - q.entries)
        dist = geodesic_distance(p, q)
        assert dist >= frob - 0.25 * frob**3
        assert dist / frob == pytest.approx(1.0, abs=5 * frob)


def test_tangent_project_examples(rng):
    p = random_projector(G24, rng)
    assert np.abs(tangent_project(p.entries, p).entries).max() < 1e-12
    assert np.abs(tangent_project(np.eye(4), p).entries).max() < 1e-12
    g = rng.standard_normal((4, 4))
    x = tangent_project(g + g.T, p)
    again = tangent_project(x.entries, p)
    assert np.abs(again.entries - x.entries).max() < 1e-12
    # tangency identity at the base point
    pe, xe = p.entries, x.entries
    residual = xe - (pe @ xe @ (np.eye(4) - pe) + (np.eye(4) - pe) @ xe @ pe)
    assert np.abs(residual).max() < 1e-10


def test_retract_fixed_points(rng):
    p = random_projector(G24, rng)
    g = rng.standard_normal((4, 4))
    x = tangent_project(g + g.T, p)
    assert np.abs(retract(p, x, 0.0).entries - p.entries).max() < 1e-12
    zero = tangent_project(np.zeros((4, 4)), p)
    assert np.abs(retract(p, zero, 1.0).entries - p.entries).max() < 1e-12


def test_retract_is_first_order(rng):
    p = random_projector(G24, rng)
    g = rng.standard_normal((4, 4))
    x = tangent_project(g + g.T, p)
    for t in (1e-3, 1e-4):
        moved = geodesic_distance(retract(p, x, t), p)
        assert moved == pytest.approx(t * x.norm, rel=1e-4)


def test_retract_eigengap_collapse():
    # stepping halfway between two complementary planes makes the split ambiguous
    p = validate_projector(PLANE_12, G24)
    x_entries = PLANE_34 - PLANE_12
    from gqmc.manifold import TangentVector

    x = TangentVector(0.5 * (x_entries + x_entries.T), p)
    with pytest.raises(EigengapCollapse):
        retract(p, x, 0.5)


def test_orthonormal_basis_spans_range(rng):
    p = random_projector(G24, rng)
    b = orthonormal_basis(p)
    assert b.shape == (4, 2)
    assert np.abs(b.T @ b - np.eye(2)).max() < 1e-12
    assert np.abs(b @ b.T - p.entries).max() < 1e-12


def test_basis_stack_matches_qr_projectors(rng):
    seed_rng = np.random.default_rng(5)
    stack = random_basis_stack(G24, 64, seed_rng)
    projectors = np.einsum("nik,njk->nij", stack, stack)
    single_rng = np.random.default_rng(5)
    for i in range(64):
        p = random_projector(G24, single_rng)
        assert np.abs(projectors[i] - p.entries).max() < 1e-12


def test_projector_csv_roundtrip(tmp_path, rng):
    points = [random_projector(G24, rng) for _ in range(7)]
    path = tmp_path / "points.csv"
    write_projectors(path, points)
    header = path.read_text().splitlines()[0]
    assert header == "# grassmann k=2 m=4"
    loaded = read_projectors(path, G24)
    assert len(loaded) == 7
    for original, restored in zip(points, loaded):
        assert np.array_equal(original.entries, restored.entries)


def test_projector_csv_revalidates(tmp_path):
    path = tmp_path / "bad.csv"
    row = ",".join(repr(float(x)) for x in np.diag([1.0, 0.0, 0.0, 0.0]).ravel())
    path.write_text("# grassmann k=2 m=4\n" + row + "\n")
    with pytest.raises(WrongRank):
        read_projectors(path)
