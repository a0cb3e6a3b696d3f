import math

import numpy as np
import pytest

from uqr_lab.dynamics import IterateMap, ToralEndo
from uqr_lab.errors import ZeroHitsError
from uqr_lab.geometry import Point, sample_uniform_bulk
from uqr_lab.graph_geometry import (ahlfors_scan, chain_volume,
                                    chain_volumes_upto, check_pointwise_bound,
                                    local_volume, n_jacobian, n_jacobian_bulk)
from uqr_lab.rng import make_rng

RADII = [0.3, 0.17, 0.1, 0.056, 0.031, 0.018, 0.01]


class TestNJacobian:
    def test_doubling_k1(self, diag22):
        assert n_jacobian(diag22, 1, Point.on_torus([0.3, 0.7])) == pytest.approx(
            5.0, abs=1e-12)

    def test_doubling_geometric_sum(self, diag22):
        for k in range(0, 7):
            want = sum(4.0 ** j for j in range(k + 1))
            got = n_jacobian(diag22, k, Point.on_torus([0.21, 0.88]))
            assert got == pytest.approx(want, abs=1e-9)

    def test_identity_components(self, ident):
        for k in (0, 1, 3):
            got = n_jacobian(ident, k, Point.on_torus([0.5, 0.5]))
            assert got == pytest.approx(k + 1.0, abs=1e-12)

    def test_constant_over_cloud(self, diag23):
        x = sample_uniform_bulk(diag23.manifold, 100, make_rng(1, "nj"))
        vals = n_jacobian_bulk(diag23, 2, x)
        # Gram of diag powers: sqrt((1+4+16)(1+9+81))
        want = math.sqrt(21.0 * 91.0)
        assert np.allclose(vals, want, atol=1e-9)


class TestChainVolume:
    def test_doubling_zero_variance(self, diag22):
        for k in (1, 2, 6):
            res = chain_volume(diag22, k, 2000, seed=2)
            want = (4.0 ** (k + 1) - 1) / 3.0
            assert res.value == pytest.approx(want, abs=1e-9)
            assert res.stderr == 0.0
            assert not res.flagged

    def test_identity_constant_integrand(self, ident):
        res = chain_volume(ident, 3, 2000, seed=3)
        assert res.value == pytest.approx(4.0, abs=1e-12)

    def test_sphere_degree_growth(self, sphere2):
        vols = chain_volumes_upto(sphere2, 5, 20_000, seed=4)
        for k, v in enumerate(vols):
            want = (2.0 ** (k + 1) - 1) * 4.0 * math.pi
            assert v.value == pytest.approx(want, rel=4 * max(v.stderr / v.value, 0.01))

    def test_sample_floor(self, diag22):
        with pytest.raises(ValueError):
            chain_volume(diag22, 2, 500, seed=5)


class TestLocalVolume:
    def test_sup_metric_pullback_disc(self, diag22):
        # region pulls back to a disc of radius eps 2^-k; integrand sum 4^j
        for k, eps in ((2, 0.1), (3, 0.1), (4, 0.05)):
            lv = local_volume(diag22, k, np.array([0.37, 0.61]), eps,
                              metric="sup", mc_samples=6000, seed=6,
                              seed_labels=("t", k))
            want = (4.0 ** (k + 1) - 1) / 3.0 * math.pi * (eps / 2.0 ** k) ** 2
            assert lv.value == pytest.approx(want, rel=0.1)

    def test_identity_product_metric_disc(self, ident):
        lv = local_volume(ident, 3, np.array([0.5, 0.5]), 0.2,
                          metric="product", mc_samples=8000, seed=7)
        assert lv.value == pytest.approx(math.pi * 0.04, rel=0.1)

    def test_big_radius_swallows_graph(self, diag22):
        # r beyond diam(chain graph) makes the ball contain everything
        k = 2
        r = math.sqrt(k + 1) * diag22.manifold.diameter + 0.1
        lv = local_volume(diag22, k, np.array([0.2, 0.8]), r, metric="product",
                          mc_samples=4000, seed=8)
        total = chain_volume(diag22, k, 2000, seed=8).value
        assert lv.value == pytest.approx(total, rel=0.05)

    def test_monotone_in_r_on_shared_samples(self, diag22):
        # same seed and importance radius: indicator sets are nested exactly
        vals = []
        for r in (0.05, 0.1, 0.2):
            lv = local_volume(diag22, 2, np.array([0.3, 0.3]), r, metric="sup",
                              mc_samples=4000, seed=9, seed_labels=("mono",),
                              importance_radius=0.05)
            vals.append(lv.value)
        assert vals[0] <= vals[1] <= vals[2]

    def test_zero_hits_raises(self, diag22):
        # a microscopic region with a deliberately defocused importance ball
        with pytest.raises(ZeroHitsError):
            local_volume(diag22, 6, np.array([0.1, 0.1]), 1e-7,
                         metric="sup", mc_samples=1000, seed=10,
                         importance_radius=0.4)

    def test_importance_weights_recorded(self, diag22):
        lv = local_volume(diag22, 3, np.array([0.4, 0.9]), 0.1, metric="sup",
                          mc_samples=4000, seed=11)
        assert 0.0 < lv.importance_radius <= 0.49
        assert 0.0 < lv.mixture_weight < 1.0
        assert lv.hits > 0


class TestAhlforsScan:
    def test_doubling_k3(self, diag22):
        scan = ahlfors_scan(diag22, 3, 8, RADII, mc_samples=4000, seed=12)
        assert scan.slope == pytest.approx(2.0, abs=0.05)
        assert scan.passed

    def test_identity_k3(self, ident):
        scan = ahlfors_scan(ident, 3, 8, RADII, mc_samples=4000, seed=13)
        assert scan.slope == pytest.approx(2.0, abs=0.05)
        assert scan.passed

    def test_sphere_k2(self, sphere2):
        scan = ahlfors_scan(sphere2, 2, 8, RADII, mc_samples=4000, seed=14)
        assert abs(scan.slope - 2.0) <= 0.2
        assert scan.ratio_spread <= scan.spread_bound
        assert scan.passed

    def test_volumes_nonnegative_and_roughly_monotone(self, diag22):
        scan = ahlfors_scan(diag22, 2, 4, [0.2, 0.1, 0.05], mc_samples=4000,
                            seed=15)
        by_center = {}
        for c, r, v, _ in scan.rows:
            assert v >= 0.0
            by_center.setdefault(c, []).append((r, v))
        for rows in by_center.values():
            rows.sort()
            vols = [v for _, v in rows]
            assert all(b <= a * 1.2 for a, b in zip(vols[1:], vols))

    def test_radius_cap_noted(self, diag22):
        scan = ahlfors_scan(diag22, 1, 4, [5.0, 0.2, 0.1], mc_samples=4000,
                            seed=16)
        assert any("diam" in n for n in scan.notes)
        assert 5.0 not in scan.radii


class TestPointwiseBound:
    def test_two_similitudes_explicit(self):
        maps = [ToralEndo([[2, 0], [0, 2]]), ToralEndo([[4, 0], [0, 4]])]
        rep = check_pointwise_bound(maps, sample_count=100, seed=17)
        assert rep.passed
        # |J_g| = sqrt(det(4I + 16I)) = 20, bound 2 * 1 * (4 + 16) = 40
        assert rep.lhs == pytest.approx(20.0 - 40.0, abs=1e-9)
        assert rep.details["K_sampled"] == pytest.approx(1.0, abs=1e-12)

    def test_single_component_reduces(self, diag23):
        rep = check_pointwise_bound([diag23], sample_count=1000, seed=18)
        assert rep.passed

    def test_sheared_iterates(self, sheared22):
        comps = [IterateMap(sheared22, j) for j in (1, 2, 3)]
        rep = check_pointwise_bound(comps, sample_count=10_000, seed=19)
        assert rep.passed
        assert rep.details["violations"] == 0

    def test_mixed_manifolds_rejected(self, diag22, sphere2):
        with pytest.raises(ValueError):
            check_pointwise_bound([diag22, sphere2])
