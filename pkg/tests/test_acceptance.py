"""Acceptance suite: one test per criterion, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the verdict lines;
shared heavy runs (512^2-grid entropy sweeps, the 4*10^7-atom balanced
tree) live in session fixtures and are timed there, so the runtime bounds
below include the real work.
"""

import json
import math
import time

import numpy as np

from uqr_lab.audits import (audit_theorem_7_1, bihari_check,
                            distortion_growth_rate, generate_bihari_instance)
from uqr_lab.cli import main as cli_main
from uqr_lab.dynamics import IterateMap, ToralEndo
from uqr_lab.entropy_top import BaseSource, audit_theorem_3_1
from uqr_lab.entropy_measure import (PartitionSpec, entropy_lower_bound_report,
                                     ks_entropy_estimate)
from uqr_lab.geometry import SPHERE2, Point, sample_uniform_bulk
from uqr_lab.graph_geometry import (ahlfors_scan, chain_volumes_upto,
                                    check_pointwise_bound)
from uqr_lab.measures import (CapIndicator, EmpiricalMeasure, FourierMode,
                              balanced_iterate, balancedness_residual,
                              dyadic_box_masses, equator_band_mass, integrate,
                              pole_cap_table, pullback, pushforward_eval)
from uqr_lab.entropy_top import lov_estimate
from uqr_lab.rng import make_rng

LOG2, LOG4, LOG6 = math.log(2.0), math.log(4.0), math.log(6.0)
NORTH = Point.on_sphere([0.0, 0.0, 1.0])


def verdict(num, name, ok, detail):
    print(f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, f"criterion {num}: {name}: {detail}"


def test_criterion_01_degree_index_identity(diag22, diag23, upper21, sphere2,
                                            sphere3):
    t0 = time.monotonic()
    ok = True
    for f in (diag22, diag23, upper21, sphere2, sphere3):
        y = sample_uniform_bulk(f.manifold, 100, make_rng(101, "c1", repr(f)))
        _, parent, idx = f.preimages_bulk(y)
        sums = np.bincount(parent, weights=idx, minlength=100)
        ok = ok and bool(np.all(sums == f.degree))
    elapsed = time.monotonic() - t0
    verdict(1, "degree/index identity", ok and elapsed < 1.0,
            f"5 families x 100 targets exact, {elapsed:.2f}s")


def test_criterion_02_pullback_duality(diag22, diag23, upper21, sphere2,
                                       sheared22):
    t0 = time.monotonic()
    worst = 0.0
    for f in (diag22, diag23, upper21, sphere2, sheared22):
        rng = make_rng(102, "c2", repr(f))
        for trial in range(50):
            n_atoms = int(rng.integers(1, 12))
            mu = EmpiricalMeasure(f.manifold,
                                  sample_uniform_bulk(f.manifold, n_atoms, rng),
                                  rng.random(n_atoms))
            if f.manifold.kind == "torus":
                eta = FourierMode(rng.integers(-3, 4, size=2), "cos")
            else:
                c = sample_uniform_bulk(SPHERE2, 1, rng)[0]
                eta = CapIndicator(c, float(rng.uniform(0.3, 1.5)))
            lhs = integrate(pullback(f, mu), eta)
            rhs = float(np.dot(mu.weights,
                               [pushforward_eval(f, eta, Point(f.manifold, x))
                                for x in mu.coords]))
            worst = max(worst, abs(lhs - rhs))
    elapsed = time.monotonic() - t0
    verdict(2, "pull-back duality", worst <= 1e-9 and elapsed < 1.0,
            f"max |difference| = {worst:.2e}, {elapsed:.2f}s")


def test_criterion_03_balanced_measure_torus(diag22, balanced22_big):
    mu, build_time = balanced22_big
    t0 = time.monotonic()
    masses = dyadic_box_masses(mu, 2)
    box_dev = float(np.max(np.abs(masses - 1.0 / 16.0)))
    modes = [FourierMode(fr, p)
             for fr in [(1, 0), (0, 1), (1, 1), (1, -1)]
             for p in ("cos", "sin")]
    residual = balancedness_residual(diag22, mu, modes)
    elapsed = build_time + (time.monotonic() - t0)
    ok = box_dev <= 0.01 and residual <= 0.02 and elapsed < 30.0
    verdict(3, "balanced measure (k=6, m=10^4)", ok,
            f"box dev {box_dev:.2e}, residual {residual:.2e}, {elapsed:.1f}s")


def test_criterion_04_julia_concentration(balanced_sphere_k8):
    mu, build_time = balanced_sphere_k8
    t0 = time.monotonic()
    band = equator_band_mass(mu, 0.1)
    caps = pole_cap_table(mu, radii=(0.5, 0.2, 0.1))
    pole_mass = dict((r, m) for r, m in caps)[0.1]
    elapsed = build_time + (time.monotonic() - t0)
    ok = band >= 0.95 and pole_mass <= 1e-3 and elapsed < 30.0
    verdict(4, "Julia-set concentration (sphere, k=8)", ok,
            f"equator band {band:.4f}, pole caps {pole_mass:.1e}, {elapsed:.1f}s")


def test_criterion_05_main_equality_torus(entropy_diag22, entropy_diag23):
    est22, t22, _ = entropy_diag22
    est23, t23, _ = entropy_diag23
    ok22 = abs(est22.value - LOG4) <= 0.15 and t22 <= 300.0
    ok23 = abs(est23.value - LOG6) <= 0.2 and t23 <= 300.0
    verdict(5, "entropy equality on the torus", ok22 and ok23,
            f"diag(2,2): {est22.value:.4f} vs log4={LOG4:.4f} in {t22:.0f}s; "
            f"diag(2,3): {est23.value:.4f} vs log6={LOG6:.4f} in {t23:.0f}s")


def test_criterion_06_identity_entropy(entropy_identity):
    est, elapsed, _ = entropy_identity
    ok = abs(est.value) <= 0.02 and elapsed < 30.0
    verdict(6, "identity map entropy", ok,
            f"estimate {est.value:.2e}, {elapsed:.1f}s")


def test_criterion_07_measure_entropy_identity(diag22, diag23):
    t0 = time.monotonic()
    bounds_ok = True
    for f in (diag22, diag23):
        mu = balanced_iterate(f, 4, 1000, seed=107)
        rep = entropy_lower_bound_report(f, mu, residual_threshold=None)
        bounds_ok = bounds_ok and rep.bound == math.log(f.degree) \
            and rep.branch_mass == 0.0
    cloud = EmpiricalMeasure.uniform_cloud(diag22.manifold, 1_000_000,
                                           make_rng(107, "ks"))
    ks = ks_entropy_estimate(diag22, cloud, PartitionSpec(diag22.manifold, depth=4), 4)
    elapsed = time.monotonic() - t0
    ok = bounds_ok and abs(ks.value - LOG4) <= 0.1 and elapsed <= 120.0
    verdict(7, "measure-entropy identity", ok,
            f"bounds exact, KS {ks.value:.4f} vs {LOG4:.4f}, {elapsed:.1f}s")


def test_criterion_08_branch_term(sphere2, balanced_sphere_k8):
    delta = entropy_lower_bound_report(sphere2, EmpiricalMeasure.dirac(NORTH),
                                       residual_threshold=None)
    mu, _ = balanced_sphere_k8
    rep = entropy_lower_bound_report(sphere2, mu, residual_threshold=None)
    ok = delta.bound == 0.0 and abs(rep.bound - LOG2) <= 0.01
    verdict(8, "branch term of the lower bound", ok,
            f"delta-at-pole bound {delta.bound}, balanced bound {rep.bound:.6f}")


def test_criterion_09_chain_volumes(diag22):
    t0 = time.monotonic()
    vols = chain_volumes_upto(diag22, 6, 2000, seed=109)
    dev = max(abs(v.value - (4.0 ** (k + 1) - 1) / 3.0)
              for k, v in enumerate(vols))
    lov = lov_estimate(diag22, [1, 2, 3, 4, 5, 6], 2000, seed=109)
    elapsed = time.monotonic() - t0
    ok = dev <= 1e-9 and abs(lov["slope"] - LOG4) <= 0.05 and elapsed < 60.0
    verdict(9, "chain volumes via the area formula", ok,
            f"max closed-form deviation {dev:.1e}, lov {lov['slope']:.4f}, "
            f"{elapsed:.1f}s")


def test_criterion_10_theorem_3_1(diag22, ident, sphere2, entropy_diag22,
                                  entropy_identity, entropy_sphere):
    t0 = time.monotonic()
    rep22 = audit_theorem_3_1(diag22, [0.2, 0.1, 0.05], [1, 2, 3, 4, 5, 6],
                              entropy_diag22[2], mc_samples=4000,
                              center_samples=10, seed=110, tolerance=0.1,
                              entropy_estimate=entropy_diag22[0])
    rep_id = audit_theorem_3_1(ident, [0.2, 0.1, 0.05], [1, 2, 3, 4, 5, 6],
                               entropy_identity[2], mc_samples=4000,
                               center_samples=10, seed=110, tolerance=0.1,
                               entropy_estimate=entropy_identity[0])
    rep_s = audit_theorem_3_1(sphere2, [0.2, 0.1, 0.05], [1, 2, 3, 4, 5, 6],
                              entropy_sphere[2], mc_samples=4000,
                              center_samples=10, seed=110, tolerance=0.1,
                              entropy_estimate=entropy_sphere[0])
    elapsed = time.monotonic() - t0
    ok = rep22.passed and rep_id.passed and rep_s.passed and elapsed <= 300.0
    verdict(10, "volume-density entropy bound", ok,
            f"diag22 {rep22.passed}, identity {rep_id.passed}, "
            f"sphere {rep_s.passed}, {elapsed:.0f}s")


def test_criterion_11_pointwise_bound(diag22, diag23, sheared22, sphere2):
    t0 = time.monotonic()
    lists = [[ToralEndo([[2, 0], [0, 2]]), ToralEndo([[4, 0], [0, 4]])]]
    for f in (diag22, diag23, sheared22, sphere2):
        lists.append([IterateMap(f, j) for j in (1, 2, 3)])
    violations = 0
    for comps in lists:
        rep = check_pointwise_bound(comps, sample_count=10_000, seed=111)
        violations += rep.details["violations"]
    elapsed = time.monotonic() - t0
    ok = violations == 0 and elapsed < 10.0
    verdict(11, "pointwise n-Jacobian bound", ok,
            f"{len(lists)} component lists, {violations} violations, "
            f"{elapsed:.1f}s")


def test_criterion_12_ahlfors_scans(diag22, ident, sphere2):
    t0 = time.monotonic()
    radii = [0.3, 0.17, 0.1, 0.056, 0.031, 0.018, 0.01]
    scans = {
        "diag22 k=3": ahlfors_scan(diag22, 3, 8, radii, 4000, seed=112),
        "identity k=3": ahlfors_scan(ident, 3, 8, radii, 4000, seed=112),
        "sphere k=2": ahlfors_scan(sphere2, 2, 8, radii, 4000, seed=112),
    }
    elapsed = time.monotonic() - t0
    ok = all(s.passed for s in scans.values()) and elapsed <= 300.0
    detail = ", ".join(f"{k}: slope {s.slope:.3f}" for k, s in scans.items())
    verdict(12, "Ahlfors regularity scans", ok, f"{detail}, {elapsed:.0f}s")


def test_criterion_13_theorem_7_1(diag22, diag23, sheared22, sphere2,
                                  entropy_diag22, entropy_diag23,
                                  entropy_sheared, entropy_sphere):
    t0 = time.monotonic()
    grid = BaseSource(kind="grid", resolution=512)
    rand = BaseSource(kind="random", count=300_000)
    cases = [(diag22, entropy_diag22[0], grid), (diag23, entropy_diag23[0], grid),
             (sheared22, entropy_sheared[0], grid), (sphere2, entropy_sphere[0], rand)]
    all_pass = True
    for f, est, src in cases:
        rep = audit_theorem_7_1(f, [0.2, 0.1, 0.05], [1, 2, 3, 4, 5, 6], src,
                                distortion_samples=2000, seed=113,
                                entropy_estimate=est)
        all_pass = all_pass and rep.passed
    growth = distortion_growth_rate(sheared22, [1, 2, 3, 4, 5, 6], 2000, seed=113)
    elapsed = time.monotonic() - t0
    ok = all_pass and abs(growth["slope"]) <= 0.02 and elapsed <= 300.0
    verdict(13, "entropy upper bound (distortion route)", ok,
            f"all families pass, sheared K-slope {growth['slope']:.4f}, "
            f"{elapsed:.0f}s")


def test_criterion_14_bihari_lasalle():
    t0 = time.monotonic()
    rng = make_rng(114, "bihari")
    violations = 0
    for n in (2, 3):
        for _ in range(100):
            c = float(rng.uniform(0.5, 3.0))
            a = float(rng.uniform(0.5, 2.0))
            t, g = generate_bihari_instance(c, n, a, 200, rng)
            rep = bihari_check(t, g, c, n)
            violations += len(rep.details["violating_indices"])
    elapsed = time.monotonic() - t0
    ok = violations == 0 and elapsed < 5.0
    verdict(14, "Bihari-LaSalle inequality", ok,
            f"200 instances, {violations} violations, {elapsed:.1f}s")


def test_criterion_15_determinism(tmp_path):
    cfg = {
        "experiment": "balanced-measure",
        "seed": 2026,
        "output_dir": str(tmp_path / "a"),
        "map": {"family": "toral", "matrix": [[2, 0], [0, 3]]},
        "budgets": {"tree_depth": 4, "tree_samples": 2000},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert cli_main(["run", str(path), "--threads", "1"]) == 0
    first = (tmp_path / "a" / "results.csv").read_bytes()
    cfg["output_dir"] = str(tmp_path / "b")
    path.write_text(json.dumps(cfg))
    assert cli_main(["run", str(path), "--threads", "4"]) == 0
    second = (tmp_path / "b" / "results.csv").read_bytes()

    cfg2 = {
        "experiment": "entropy-top",
        "seed": 2026,
        "output_dir": str(tmp_path / "c"),
        "map": {"family": "sphere_power", "exponent": 2},
        "budgets": {"base_samples": 20_000, "k_range": [1, 2, 3],
                    "eps_schedule": [0.3, 0.2, 0.1]},
    }
    path.write_text(json.dumps(cfg2))
    assert cli_main(["run", str(path), "--threads", "1"]) == 0
    third = (tmp_path / "c" / "results.csv").read_bytes()
    cfg2["output_dir"] = str(tmp_path / "d")
    path.write_text(json.dumps(cfg2))
    assert cli_main(["run", str(path), "--threads", "3"]) == 0
    fourth = (tmp_path / "d" / "results.csv").read_bytes()

    ok = first == second and third == fourth
    verdict(15, "byte-identical reruns at any worker count", ok,
            f"balanced-measure {len(first)}B and entropy-top {len(third)}B match")
