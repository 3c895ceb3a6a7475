import numpy as np
import pytest

from polyvem.geometry import (
    TriangulationError,
    is_simple_polygon,
    polygon_area,
    polygon_centroid,
    polygon_diameter,
    sutherland_hodgman,
    triangulate,
)

from conftest import random_simple_polygon

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def test_shoelace_area_and_orientation():
    assert polygon_area(SQUARE) == pytest.approx(1.0)
    assert polygon_area(SQUARE[::-1]) == pytest.approx(-1.0)
    tri = np.array([[0, 0], [2, 0], [0, 1]], dtype=float)
    assert polygon_area(tri) == pytest.approx(1.0)


def test_centroid_and_diameter():
    assert polygon_centroid(SQUARE) == pytest.approx([0.5, 0.5])
    assert polygon_diameter(SQUARE) == pytest.approx(np.sqrt(2.0))


def test_triangulate_square():
    tris = triangulate(SQUARE)
    assert len(tris) == 2
    areas = sorted(polygon_area(SQUARE[list(t)]) for t in tris)
    assert areas == pytest.approx([0.5, 0.5])


def test_triangulate_triangle_is_identity():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]])
    assert triangulate(tri) == [(0, 1, 2)]


def test_triangulate_concave_star():
    a = 0.2
    star = np.array(
        [
            [a, 0], [a / 4, a / 4], [0, a], [-a / 4, a / 4],
            [-a, 0], [-a / 4, -a / 4], [0, -a], [a / 4, -a / 4],
        ]
    )
    tris = triangulate(star)
    assert len(tris) == 6
    t_areas = [polygon_area(star[list(t)]) for t in tris]
    assert all(at > 0 for at in t_areas)
    assert sum(t_areas) == pytest.approx(polygon_area(star), rel=1e-12)


def test_triangulate_collinear_hanging_vertices():
    # square with midside vertices: collinear triples must not break clipping
    octo = np.array(
        [
            [0, 0], [0.5, 0], [1, 0], [1, 0.5],
            [1, 1], [0.5, 1], [0, 1], [0, 0.5],
        ],
        dtype=float,
    )
    tris = triangulate(octo)
    assert len(tris) == 6
    areas = [polygon_area(octo[list(t)]) for t in tris]
    assert all(a > 1e-12 for a in areas)
    assert sum(areas) == pytest.approx(1.0, rel=1e-12)
    # every vertex is covered by at least one positive-area triangle
    assert set(np.concatenate([list(t) for t in tris])) == set(range(8))


def test_triangulate_random_polygons_area_sum():
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        n = int(rng.integers(3, 13))
        poly = random_simple_polygon(rng, n)
        if polygon_area(poly) <= 0:
            poly = poly[::-1]
        tris = triangulate(poly)
        assert len(tris) == n - 2
        total = sum(polygon_area(poly[list(t)]) for t in tris)
        assert total == pytest.approx(polygon_area(poly), rel=1e-12)


def test_triangulate_rejects_bad_input():
    bowtie = np.array([[0, 0], [1, 1], [1, 0], [0, 1]], dtype=float)
    with pytest.raises(TriangulationError):
        triangulate(bowtie)
    with pytest.raises(TriangulationError):
        triangulate(SQUARE[::-1])  # clockwise
    with pytest.raises(TriangulationError):
        triangulate(SQUARE[:2])


def test_is_simple_polygon():
    assert is_simple_polygon(SQUARE)
    bowtie = np.array([[0, 0], [1, 1], [1, 0], [0, 1]], dtype=float)
    assert not is_simple_polygon(bowtie)
    repeated = np.array([[0, 0], [1, 0], [1, 0], [0, 1]], dtype=float)
    assert not is_simple_polygon(repeated)
    hanging = np.array([[0, 0], [0.5, 0], [1, 0], [0.5, 0.9]], dtype=float)
    assert is_simple_polygon(hanging)


def test_sutherland_hodgman_clips_to_domain():
    big = np.array([[-1, -1], [2, -1], [2, 2], [-1, 2]], dtype=float)
    out = sutherland_hodgman(big, SQUARE)
    assert polygon_area(out) == pytest.approx(1.0)
    inside = np.array([[0.2, 0.2], [0.8, 0.2], [0.5, 0.7]])
    out2 = sutherland_hodgman(inside, SQUARE)
    assert polygon_area(out2) == pytest.approx(polygon_area(inside))
