import numpy as np
import pytest


def random_simple_polygon(rng, n_vertices, r_min=0.35, r_max=1.0):
    """Star-shaped (hence simple) polygon with random radii and angles.

    All angular gaps are kept below pi so the polygon is star-shaped with
    respect to the origin (gaps above pi would let a chord cross the far
    side and self-intersect)."""
    while True:
        ang = np.sort(rng.uniform(0.0, 2.0 * np.pi, n_vertices))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2.0 * np.pi]]))
        if gaps.min() > 1e-3 and gaps.max() < 0.95 * np.pi:
            break
    rad = rng.uniform(r_min, r_max, n_vertices)
    return np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])


def fd_scalar_gradient(f, x, h):
    """Central-difference gradient of a scalar function of a vector."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for k in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp.flat[k] += h
        xm.flat[k] -= h
        g.flat[k] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def fd_vector_jacobian(f, x, h):
    """Central-difference Jacobian of a vector function of a vector."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(f(x))
    J = np.zeros((f0.size, x.size))
    for k in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp.flat[k] += h
        xm.flat[k] -= h
        J[:, k] = (np.asarray(f(xp)) - np.asarray(f(xm))).ravel() / (2.0 * h)
    return J


@pytest.fixture(scope="session")
def qref_cache(tmp_path_factory):
    """Session-wide cache directory for Q2 reference solutions."""
    return str(tmp_path_factory.mktemp("qref_cache"))
