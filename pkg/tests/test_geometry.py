import numpy as np
import pytest

from uqr_lab.geometry import (SPHERE2, ManifoldMismatch, Point, ProductPoint,
                              dist, product_dist, sample_uniform_bulk,
                              sup_dist, torus, torus_grid)
from uqr_lab.rng import make_rng


def pp(*coords):
    return ProductPoint.of([Point.on_torus(c) for c in coords])


class TestDist:
    def test_torus_wraparound(self):
        a = Point.on_torus([0.1, 0.0])
        b = Point.on_torus([0.9, 0.0])
        assert dist(a, b) == pytest.approx(0.2, abs=1e-12)

    def test_antipodal_poles(self):
        n = Point.on_sphere([0, 0, 1])
        s = Point.on_sphere([0, 0, -1])
        assert dist(n, s) == pytest.approx(np.pi, abs=1e-12)

    def test_identity_of_indiscernibles(self):
        a = Point.on_torus([0.37, 0.81])
        assert dist(a, a) == 0.0
        p = Point.on_sphere([0.6, 0.8, 0.0])
        assert dist(p, p) == 0.0

    def test_manifold_mismatch(self):
        with pytest.raises(ManifoldMismatch):
            dist(Point.on_torus([0.1, 0.2]), Point.on_sphere([0, 0, 1]))

    def test_torus_translation_invariance(self):
        rng = make_rng(3, "translation")
        for _ in range(200):
            a, b, t = rng.random((3, 2))
            d1 = dist(Point.on_torus(a), Point.on_torus(b))
            d2 = dist(Point.on_torus((a + t) % 1.0), Point.on_torus((b + t) % 1.0))
            assert d1 == pytest.approx(d2, abs=1e-12)


class TestProductMetrics:
    def test_sup_dist_coordinatewise_max(self):
        x = pp([0, 0], [0.1, 0], [0, 0])
        y = pp([0, 0], [0, 0], [0.3, 0])
        assert sup_dist(x, y) == pytest.approx(0.3, abs=1e-12)

    def test_zero_on_equal(self):
        x = pp([0.2, 0.4], [0.6, 0.9])
        assert sup_dist(x, x) == 0.0
        assert product_dist(x, x) == 0.0

    def test_k0_reduces_to_dist(self):
        a, b = [0.15, 0.25], [0.65, 0.95]
        x, y = pp(a), pp(b)
        d = dist(Point.on_torus(a), Point.on_torus(b))
        assert sup_dist(x, y) == pytest.approx(d, abs=1e-15)
        assert product_dist(x, y) == pytest.approx(d, abs=1e-15)

    def test_product_dist_pythagorean(self):
        x = pp([0, 0], [0.1, 0], [0, 0])
        y = pp([0, 0], [0, 0], [0.3, 0])
        assert product_dist(x, y) == pytest.approx(np.sqrt(0.01 + 0.09), abs=1e-12)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ManifoldMismatch):
            sup_dist(pp([0, 0]), pp([0, 0], [0.5, 0.5]))

    def test_norm_equivalence_random(self):
        rng = make_rng(5, "norm-equiv")
        k = 3
        for _ in range(300):
            xc, yc = rng.random((2, k + 1, 2))
            x = pp(*xc)
            y = pp(*yc)
            s, p = sup_dist(x, y), product_dist(x, y)
            assert s <= p + 1e-12
            assert p <= np.sqrt(k + 1) * s + 1e-12


@pytest.mark.parametrize("manifold", [torus(2), SPHERE2])
def test_triangle_inequality(manifold):
    rng = make_rng(11, "triangle", manifold.kind)
    pts = sample_uniform_bulk(manifold, 3 * 10_000, rng).reshape(10_000, 3, -1)
    from uqr_lab.geometry import dist_bulk
    ab = dist_bulk(manifold, pts[:, 0], pts[:, 1])
    bc = dist_bulk(manifold, pts[:, 1], pts[:, 2])
    ac = dist_bulk(manifold, pts[:, 0], pts[:, 2])
    assert np.all(ac <= ab + bc + 1e-12)


def test_triangle_inequality_chain_metrics():
    rng = make_rng(12, "triangle-chain")
    k = 2
    tuples = rng.random((10_000, 3, k + 1, 2))
    m = torus(2)
    from uqr_lab.geometry import dist_bulk
    d = dist_bulk(m, tuples[:, :, None, :, :], tuples[:, None, :, :, :])
    sup = d.max(axis=-1)
    prod = np.sqrt((d ** 2).sum(axis=-1))
    for mat in (sup, prod):
        assert np.all(mat[:, 0, 2] <= mat[:, 0, 1] + mat[:, 1, 2] + 1e-12)


class TestSampling:
    def test_torus_law_of_large_numbers(self):
        rng = make_rng(21, "lln-torus")
        s = sample_uniform_bulk(torus(2), 1_000_000, rng)
        assert np.all(np.abs(s.mean(axis=0) - 0.5) < 0.002)

    def test_sphere_symmetry(self):
        rng = make_rng(22, "lln-sphere")
        s = sample_uniform_bulk(SPHERE2, 1_000_000, rng)
        assert np.all(np.abs(s.mean(axis=0)) < 0.003)
        assert np.allclose(np.linalg.norm(s, axis=1), 1.0, atol=1e-12)

    def test_fixed_seed_replays(self):
        a = sample_uniform_bulk(torus(2), 100, make_rng(7, "replay"))
        b = sample_uniform_bulk(torus(2), 100, make_rng(7, "replay"))
        assert np.array_equal(a, b)

    def test_named_streams_differ(self):
        a = sample_uniform_bulk(torus(2), 100, make_rng(7, "stream-a"))
        b = sample_uniform_bulk(torus(2), 100, make_rng(7, "stream-b"))
        assert not np.array_equal(a, b)


def test_torus_grid_lexicographic():
    g = torus_grid(2, 4)
    assert g.shape == (16, 2)
    assert np.array_equal(g[:4], [[0, 0], [0, 0.25], [0, 0.5], [0, 0.75]])
    assert np.all((g >= 0) & (g < 1))


def test_point_validation():
    with pytest.raises(ValueError):
        Point(torus(2), np.array([0.5, 1.0]))  # not reduced
    with pytest.raises(ValueError):
        Point(SPHERE2, np.array([1.0, 1.0, 0.0]))  # not unit
    p = Point.on_torus([1.25, -0.25])  # reduction applied on construction
    assert np.allclose(p.coords, [0.25, 0.75])
