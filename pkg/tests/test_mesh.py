import numpy as np
import pytest

from polyvem.generators import (
    build_mesh,
    generate_dq2s,
    generate_sq1,
    generate_sun_star,
    generate_voronoi,
)
from polyvem.mesh import Domain, MeshError, mean_diameter, read_vpoly, validate_mesh, write_vpoly

FAMILIES = ("sq1", "dq2s", "sns", "isns", "vrn")


def _segments_properly_cross(p1, p2, q1, q2):
    # brute-force oracle, independent of polyvem.geometry
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return d1 * d2 < -1e-28 and d3 * d4 < -1e-28


def _oracle_is_simple(poly):
    n = len(poly)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_properly_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]):
                return False
    return True


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("N", [1, 2, 3, 4, 5])
def test_generator_invariants(family, N):
    mesh = build_mesh(family, N, seed=3, lloyd_iters=2)
    validate_mesh(mesh, rel_tol=1e-10)


def test_sq1_counts_and_areas():
    m = generate_sq1(3)
    assert m.n_elements == 64
    assert m.n_vertices == 81
    m1 = generate_sq1(1)
    assert m1.element_areas() == pytest.approx([0.25] * 4)
    m2 = generate_sq1(2, Domain.rectangle(2.0, 1.0))
    assert m2.n_elements == 16
    assert m2.element_areas().sum() == pytest.approx(2.0)


def test_sq1_rejects_bad_level():
    with pytest.raises(MeshError):
        generate_sq1(0)


def test_dq2s_zero_distortion_is_structured():
    m = generate_dq2s(3, distortion=0.0)
    assert m.n_elements == 64
    assert all(len(cyc) == 8 for cyc in m.elements)
    assert m.element_areas() == pytest.approx([1.0 / 64] * 64)


def test_dq2s_distorted_tiling_and_simplicity():
    m = generate_dq2s(3, distortion=0.3, rng_seed=1)
    assert m.element_areas().sum() == pytest.approx(1.0, rel=1e-10)
    m2 = generate_dq2s(2, distortion=0.45, rng_seed=11)
    for e in range(m2.n_elements):
        assert _oracle_is_simple(m2.element_coords(e))


def test_dq2s_boundary_nodes_stay_on_boundary():
    m = generate_dq2s(3, distortion=0.4, rng_seed=5)
    for tag, coord, val in (("bottom", 1, 0.0), ("top", 1, 1.0), ("left", 0, 0.0), ("right", 0, 1.0)):
        for n in m.boundary_nodes(tag):
            assert m.vertices[n][coord] == pytest.approx(val, abs=1e-12)


def test_sun_star_counts():
    m = generate_sun_star(3)
    stars = (2**3 - 1) ** 2
    assert m.n_elements == 64 + stars
    assert m.element_areas().sum() == pytest.approx(1.0, rel=1e-10)


def test_interlocking_split_doubles_suns():
    plain = generate_sun_star(1)
    inter = generate_sun_star(1, interlocking=True)
    n_suns = 4
    assert inter.n_elements == plain.n_elements + n_suns


def test_sun_star_has_concave_element():
    def concave(v):
        n = len(v)
        for k in range(n):
            a, b, c = v[k - 1], v[k], v[(k + 1) % n]
            if (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) < -1e-12:
                return True
        return False

    for interlocking in (False, True):
        m = generate_sun_star(2, interlocking=interlocking)
        assert any(concave(m.element_coords(e)) for e in range(m.n_elements))


def test_suns_are_convex():
    m = generate_sun_star(2)
    # suns are the first 16 elements by construction order
    for e in range(16):
        v = m.element_coords(e)
        n = len(v)
        for k in range(n):
            a, b, c = v[k - 1], v[k], v[(k + 1) % n]
            assert (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) > 0


def test_voronoi_tiling_and_convexity():
    m = generate_voronoi(3, lloyd_iters=10, rng_seed=7)
    assert m.n_elements == 64
    assert m.element_areas().sum() == pytest.approx(1.0, rel=1e-10)
    for e in range(m.n_elements):
        v = m.element_coords(e)
        n = len(v)
        for k in range(n):
            a, b, c = v[k - 1], v[k], v[(k + 1) % n]
            cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            assert cross > -1e-9 * polygon_scale(v)


def polygon_scale(v):
    return float(np.abs(v).max()) ** 2 + 1e-30


def test_voronoi_cells_contain_their_seeds():
    from matplotlib.path import Path

    m = generate_voronoi(1, lloyd_iters=0, rng_seed=3)
    assert m.n_elements == 4
    seeds = m.meta["seeds"]
    for e in range(4):
        assert Path(m.element_coords(e)).contains_point(seeds[e])


def test_lloyd_relaxation_equidistributes():
    m0 = generate_voronoi(2, lloyd_iters=0, rng_seed=5)
    m50 = generate_voronoi(2, lloyd_iters=50, rng_seed=5)

    def ratio(m):
        a = m.element_areas()
        return a.max() / a.min()

    assert ratio(m50) < ratio(m0)


@pytest.mark.parametrize("family", FAMILIES)
def test_generators_deterministic(family):
    a = build_mesh(family, 2, seed=9, lloyd_iters=3)
    b = build_mesh(family, 2, seed=9, lloyd_iters=3)
    assert np.array_equal(a.vertices, b.vertices)
    assert a.elements == b.elements
    assert a.boundary_edges == b.boundary_edges


def test_mean_diameter():
    for N in (1, 2, 3):
        m = generate_sq1(N)
        assert mean_diameter(m) == pytest.approx(np.sqrt(2.0) / 2**N)
    m4 = generate_sun_star(2)
    m5 = generate_sun_star(3)
    # hbar roughly halves under refinement
    assert mean_diameter(m5) == pytest.approx(0.5 * mean_diameter(m4), rel=0.05)


def test_mapped_domain_tiling():
    cook = Domain(np.array([[0.0, 0.0], [48.0, 44.0], [48.0, 60.0], [0.0, 44.0]]))
    for family in FAMILIES:
        m = build_mesh(family, 2, cook, seed=1, lloyd_iters=3)
        validate_mesh(m, rel_tol=1e-10)
        assert m.element_areas().sum() == pytest.approx(cook.area, rel=1e-10)


def test_vpoly_round_trip_bit_exact(tmp_path):
    m = build_mesh("vrn", 2, seed=13, lloyd_iters=4)
    path = tmp_path / "mesh.vpoly"
    write_vpoly(m, path)
    m2 = read_vpoly(path)
    assert np.array_equal(m.vertices, m2.vertices)
    assert m.elements == m2.elements
    assert m.boundary_edges == m2.boundary_edges
    # writing again reproduces the identical file
    path2 = tmp_path / "mesh2.vpoly"
    write_vpoly(m2, path2)
    assert path.read_text() == path2.read_text()


def test_vpoly_rejects_bad_header(tmp_path):
    p = tmp_path / "bad.vpoly"
    p.write_text("NOTVPOLY\n1 0 0\n0 0\n")
    with pytest.raises(MeshError):
        read_vpoly(p)
