"""Hausdorff geometry of chain graphs via the area formula.

The image of g_k = (id, f, ..., f^k) is an n-dimensional set in the product
manifold; because the first component is injective, its Hausdorff n-measure
equals the integral of the n-Jacobian sqrt(det sum_j (Df^j)^T Df^j) over the
base manifold.  All volumes here are computed on that pulled-back side:
total volumes by plain Monte Carlo, ball volumes by importance-sampled
Monte Carlo concentrated in a pullback neighborhood of the center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import chain_coords, chain_differentials, operator_norms
from .errors import ZeroHitsError
from .geometry import Manifold, chain_dist_bulk, dist_bulk, sample_uniform_bulk
from .rng import make_rng

__all__ = [
    "n_jacobian",
    "n_jacobian_bulk",
    "ChainVolumeResult",
    "chain_volume",
    "chain_volumes_upto",
    "LocalVolumeResult",
    "local_volume",
    "AhlforsScan",
    "ahlfors_scan",
    "check_pointwise_bound",
    "gram_n_jacobian",
]

VARIANCE_FLAG_FRACTION = 0.1


def _det_stack(mats: np.ndarray) -> np.ndarray:
    if mats.shape[-1] == 2:
        return mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]
    return np.linalg.det(mats)


def _min_singular(mats: np.ndarray) -> np.ndarray:
    if mats.shape[-1] == 2:
        a, b = mats[..., 0, 0], mats[..., 0, 1]
        c, d = mats[..., 1, 0], mats[..., 1, 1]
        q = a * a + b * b + c * c + d * d
        det = a * d - b * c
        disc = np.sqrt(np.maximum(q * q - 4.0 * det * det, 0.0))
        return np.sqrt(np.maximum((q - disc) / 2.0, 0.0))
    return np.linalg.svd(mats, compute_uv=False)[..., -1]


def gram_n_jacobian(diff_stacks: list[np.ndarray]) -> np.ndarray:
    """sqrt(det sum_j D_j^T D_j) for a list of (N, n, n) differential stacks."""
    gram = None
    for d in diff_stacks:
        term = np.einsum("nij,nik->njk", d, d)
        gram = term if gram is None else gram + term
    return np.sqrt(np.maximum(_det_stack(gram), 0.0))


def n_jacobian_bulk(f, k: int, x: np.ndarray) -> np.ndarray:
    """n-Jacobian of g_k = (id, f, ..., f^k) at each row of x."""
    _, diffs = chain_differentials(f, x, k)
    return gram_n_jacobian(diffs)


def n_jacobian(f, k: int, p) -> float:
    coords = p.coords if hasattr(p, "coords") else np.asarray(p, float)
    return float(n_jacobian_bulk(f, k, coords[None, :])[0])


@dataclass(frozen=True)
class ChainVolumeResult:
    value: float
    stderr: float
    samples: int
    k: int

    @property
    def flagged(self) -> bool:
        return self.value > 0 and self.stderr > VARIANCE_FLAG_FRACTION * self.value


def chain_volumes_upto(f, k_max: int, mc_samples: int, seed: int) -> list[ChainVolumeResult]:
    """H^n(chain_k) estimates for every k = 0..k_max on one shared sample set."""
    if mc_samples < 1000:
        raise ValueError("need at least 1000 Monte Carlo samples")
    rng = make_rng(seed, "chain-volume")
    x = sample_uniform_bulk(f.manifold, mc_samples, rng)
    vol = f.manifold.volume
    n = f.manifold.n
    cur = x
    cur_d = np.broadcast_to(np.eye(n), (mc_samples, n, n)).copy()
    gram = np.einsum("nij,nik->njk", cur_d, cur_d)
    out = []
    for k in range(k_max + 1):
        if k > 0:
            step = f.differentials_bulk(cur)
            cur_d = step @ cur_d
            cur = f.eval_bulk(cur)
            gram = gram + np.einsum("nij,nik->njk", cur_d, cur_d)
        nj = np.sqrt(np.maximum(_det_stack(gram), 0.0))
        mean = float(np.mean(nj))
        stderr = float(np.std(nj) / math.sqrt(mc_samples))
        out.append(ChainVolumeResult(value=mean * vol, stderr=stderr * vol,
                                     samples=mc_samples, k=k))
    return out


def chain_volume(f, k: int, mc_samples: int, seed: int = 0) -> ChainVolumeResult:
    """Monte Carlo H^n(chain_k); exact (zero variance) for linear toral maps."""
    return chain_volumes_upto(f, k, mc_samples, seed)[k]


# ---------------------------------------------------------------------------
# local ball volumes


@dataclass(frozen=True)
class LocalVolumeResult:
    value: float
    stderr: float
    hits: int
    samples: int
    importance_radius: float
    mixture_weight: float

    @property
    def flagged(self) -> bool:
        return self.value > 0 and self.stderr > VARIANCE_FLAG_FRACTION * self.value


def _ball_volume_torus(n: int, rho: float) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0) * rho ** n


def _sample_ball_torus(center: np.ndarray, rho: float, count: int, rng) -> np.ndarray:
    n = center.shape[0]
    d = rng.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    rad = rho * rng.random(count) ** (1.0 / n)
    return np.mod(center + d * rad[:, None], 1.0)


def _sample_cap_sphere(center: np.ndarray, rho: float, count: int, rng) -> np.ndarray:
    z = 1.0 - rng.random(count) * (1.0 - math.cos(rho))
    phi = rng.random(count) * 2.0 * np.pi
    r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    local = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)
    # rotate the north pole onto the center
    north = np.array([0.0, 0.0, 1.0])
    v = np.cross(north, center)
    s = np.linalg.norm(v)
    c = float(center @ north)
    if s < 1e-15:
        return local if c > 0 else local * np.array([1.0, -1.0, -1.0])
    vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    rot = np.eye(3) + vx + vx @ vx * ((1.0 - c) / (s * s))
    out = local @ rot.T
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def _pullback_radius(f, k: int, center: np.ndarray, r: float) -> float:
    """Importance radius from expansion factors of the chain map at the center."""
    _, diffs = chain_differentials(f, center[None, :], k)
    expansion = max(float(_min_singular(d[0]).item()) for d in diffs)
    expansion = max(expansion, 1e-9)
    return 1.3 * r / expansion


def local_volume(f, k: int, center, r: float, metric: str = "product",
                 mc_samples: int = 4000, seed: int = 0, seed_labels=(),
                 importance_radius: float | None = None,
                 mixture_weight: float = 0.2) -> LocalVolumeResult:
    """H^n of the chain graph inside a metric ball around g_k(center).

    Unbiased importance-sampled Monte Carlo: a mixture of the uniform
    distribution on M (safety component, covering the whole integration
    region) and the uniform distribution on a pullback ball whose radius is
    derived from the sampled expansion factors at the center.  Importance
    weights are the exact mixture densities.
    """
    if r <= 0.0:
        raise ValueError("radius must be positive")
    center = center.coords if hasattr(center, "coords") else np.asarray(center, float)
    manifold: Manifold = f.manifold
    rng = make_rng(seed, "local-volume", *seed_labels)

    if importance_radius is not None:
        rho = float(importance_radius)
    else:
        rho = min(_pullback_radius(f, k, center, r), r)
    if manifold.kind == "torus":
        rho = min(rho, 0.49)
        ball_vol = _ball_volume_torus(manifold.n, rho)
    else:
        rho = min(rho, math.pi)
        ball_vol = 2.0 * math.pi * (1.0 - math.cos(rho))

    n_outer = max(1, int(round(mixture_weight * mc_samples)))
    n_inner = mc_samples - n_outer
    alpha = n_outer / mc_samples

    outer = sample_uniform_bulk(manifold, n_outer, rng)
    if manifold.kind == "torus":
        inner = _sample_ball_torus(center, rho, n_inner, rng)
    else:
        inner = _sample_cap_sphere(center, rho, n_inner, rng)
    x = np.concatenate([outer, inner], axis=0)

    # mixture density at every sample, w.r.t. the Riemannian volume measure
    in_ball = dist_bulk(manifold, x, center[None, :]) < rho
    q = alpha / manifold.volume + (1.0 - alpha) * in_ball / ball_vol

    chains = chain_coords(f, x, k)
    center_chain = chain_coords(f, center[None, :], k)[0]
    hits = chain_dist_bulk(manifold, chains, center_chain, metric) < r
    n_hits = int(np.sum(hits))
    if n_hits == 0:
        raise ZeroHitsError(
            f"no Monte Carlo hits in the r={r} chain ball; "
            "increase the radius or the sample count"
        )
    values = np.zeros(mc_samples)
    values[hits] = n_jacobian_bulk(f, k, x[hits]) / q[hits]
    mean = float(np.mean(values))
    stderr = float(np.std(values) / math.sqrt(mc_samples))
    return LocalVolumeResult(value=mean, stderr=stderr, hits=n_hits,
                             samples=mc_samples, importance_radius=rho,
                             mixture_weight=alpha)


# ---------------------------------------------------------------------------
# Ahlfors regularity scans


@dataclass(frozen=True)
class AhlforsScan:
    k: int
    dimension: int
    center_coords: np.ndarray = field(repr=False)
    radii: tuple = ()
    rows: tuple = ()              # (center_id, r, volume, ratio volume/r^n)
    per_center_slopes: tuple = ()
    slope: float = float("nan")
    ratio_spread: float = float("nan")
    slope_tolerance: float = 0.2
    spread_bound: float = 10.0
    notes: tuple = ()

    @property
    def passed(self) -> bool:
        return (abs(self.slope - self.dimension) <= self.slope_tolerance
                and self.ratio_spread <= self.spread_bound)

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "dimension": self.dimension,
            "radii": list(self.radii),
            "slope": self.slope,
            "per_center_slopes": list(self.per_center_slopes),
            "ratio_spread": self.ratio_spread,
            "slope_tolerance": self.slope_tolerance,
            "spread_bound": self.spread_bound,
            "passed": self.passed,
            "rows": [list(r) for r in self.rows],
            "notes": list(self.notes),
        }


def ahlfors_scan(f, k: int, n_centers: int, radii, mc_samples: int = 4000,
                 seed: int = 0, slope_tolerance: float = 0.2,
                 spread_bound: float = 10.0) -> AhlforsScan:
    """Scaling of product-metric ball volumes of the chain graph.

    For each sampled center y = g_k(x) and radius r the scan tabulates
    H^n(ball)/r^n; the verdict checks the fitted log-log slope against the
    manifold dimension and the spread of the ratios, never the (inexplicit)
    regularity constants.  Radii above half the graph diameter are dropped
    with a note: the ball geometry degenerates there.
    """
    manifold = f.manifold
    n = manifold.n
    radii = sorted((float(r) for r in radii), reverse=True)
    if any(r <= 0 for r in radii) or len(set(radii)) != len(radii):
        raise ValueError("radii must be positive and distinct")
    notes = []
    cap = 0.5 * math.sqrt(k + 1) * manifold.diameter
    usable = [r for r in radii if r <= cap]
    if len(usable) != len(radii):
        notes.append(f"dropped radii above 0.5 * diam(chain graph) ~ {cap:.3g}")
    rng = make_rng(seed, "ahlfors-centers")
    centers = sample_uniform_bulk(manifold, n_centers, rng)
    rows = []
    slopes = []
    for c_idx in range(n_centers):
        logs_r, logs_v = [], []
        for r in usable:
            try:
                lv = local_volume(f, k, centers[c_idx], r, metric="product",
                                  mc_samples=mc_samples, seed=seed,
                                  seed_labels=("ahlfors", k, c_idx, r))
            except ZeroHitsError:
                notes.append(f"zero hits at center {c_idx}, r={r}; row skipped")
                continue
            if lv.flagged:
                notes.append(f"high MC variance at center {c_idx}, r={r}")
            ratio = lv.value / r ** n
            rows.append((c_idx, r, lv.value, ratio))
            logs_r.append(math.log(r))
            logs_v.append(math.log(lv.value))
        if len(logs_r) >= 2:
            slopes.append(float(np.polyfit(logs_r, logs_v, 1)[0]))
    ratios = [row[3] for row in rows]
    spread = max(ratios) / min(ratios) if ratios else float("nan")
    return AhlforsScan(k=k, dimension=n, center_coords=centers,
                       radii=tuple(usable), rows=tuple(rows),
                       per_center_slopes=tuple(slopes),
                       slope=float(np.mean(slopes)) if slopes else float("nan"),
                       ratio_spread=float(spread),
                       slope_tolerance=slope_tolerance,
                       spread_bound=spread_bound, notes=tuple(notes))


# ---------------------------------------------------------------------------
# pointwise n-Jacobian bound for component lists


def check_pointwise_bound(maps: list, sample_count: int = 10_000, seed: int = 0,
                          slack: float = 1e-9):
    """Verify |J_g| <= n^{n/2} K k^{n/2-1} sum_j J_{f_j} on uniform samples.

    g = (f_1, ..., f_k) stacks the given maps (no identity component).  K is
    the maximum sampled pointwise distortion, which dominates the pointwise
    distortion at each sample, so a violation indicates an implementation
    bug rather than sampling error.
    """
    from .reporting import AuditReport, config_digest

    manifold = maps[0].manifold
    if any(m.manifold != manifold for m in maps):
        raise ValueError("component maps on different manifolds")
    n = manifold.n
    k = len(maps)
    rng = make_rng(seed, "pointwise-bound")
    x = sample_uniform_bulk(manifold, sample_count, rng)
    diff_stacks = [m.differentials_bulk(x) for m in maps]
    lhs = gram_n_jacobian(diff_stacks)
    jac_sum = np.zeros(sample_count)
    k_sampled = 1.0
    for d in diff_stacks:
        dets = np.abs(_det_stack(d))
        jac_sum += dets
        good = dets > 0
        if np.any(good):
            k_sampled = max(k_sampled, float(np.max(
                operator_norms(d[good]) ** n / dets[good])))
    rhs = n ** (n / 2.0) * k_sampled * k ** (n / 2.0 - 1.0) * jac_sum
    margin = lhs - rhs
    tol = slack * np.maximum(1.0, rhs)
    violations = int(np.sum(margin > tol))
    worst = float(np.max(margin))
    cfg = {"maps": [repr(m) for m in maps], "samples": sample_count,
           "seed": seed, "slack": slack}
    return AuditReport(
        name="pointwise-n-jacobian-bound",
        lhs=worst,
        rhs=0.0,
        tolerance=float(slack),
        passed=violations == 0,
        config_digest=config_digest(cfg),
        details={"violations": violations, "K_sampled": k_sampled,
                 "samples": sample_count, "components": len(maps)},
    )
