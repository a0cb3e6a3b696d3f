"""Measure-theoretic entropy: Jacobian route and finite-partition estimator.

For a balanced probability measure the measure-theoretic Jacobian is
deg(f) / i(x, f), so the conditional-entropy identity reduces the entropy
lower bound to log deg(f) minus the integral of log i.  The finite-partition
Kolmogorov-Sinai estimator labels every atom by the partition cells of its
forward orbit and computes plug-in conditional entropies from weighted
counts; it cross-checks the Jacobian route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Manifold, Point
from .measures import EmpiricalMeasure, balancedness_residual

__all__ = [
    "PartitionSpec",
    "mt_jacobian",
    "LowerBoundReport",
    "entropy_lower_bound_report",
    "KSEntropyResult",
    "ks_entropy_estimate",
]


@dataclass(frozen=True)
class PartitionSpec:
    """Finite measurable partition: dyadic boxes (torus) or lat/lon cells (sphere).

    Cells are half-open and tile the manifold exactly; every point has one
    cell id.  Sphere bands are equal-area (uniform in z).
    """

    manifold: Manifold
    depth: int = 4           # dyadic depth (torus)
    bands: int = 8           # latitude bands (sphere)
    sectors: int = 16        # longitude sectors (sphere)

    @property
    def cell_count(self) -> int:
        if self.manifold.kind == "torus":
            return (1 << self.depth) ** self.manifold.n
        return self.bands * self.sectors

    def labels_bulk(self, coords: np.ndarray) -> np.ndarray:
        if self.manifold.kind == "torus":
            side = 1 << self.depth
            cells = np.clip((coords * side).astype(np.int64), 0, side - 1)
            out = cells[:, 0]
            for a in range(1, self.manifold.n):
                out = out * side + cells[:, a]
            return out
        z = coords[:, 2]
        band = np.clip(((1.0 - z) / 2.0 * self.bands).astype(np.int64),
                       0, self.bands - 1)
        phi = np.arctan2(coords[:, 1], coords[:, 0])  # [-pi, pi]
        sector = np.clip(((phi + np.pi) / (2.0 * np.pi) * self.sectors).astype(np.int64),
                         0, self.sectors - 1)
        return band * self.sectors + sector

    def label(self, p: Point) -> int:
        return int(self.labels_bulk(p.coords[None, :])[0])


def mt_jacobian(f, p: Point) -> float:
    """Measure-theoretic Jacobian deg f / i(x, f) for balanced measures."""
    return f.degree / f.local_index(p)


def _local_index_bulk(f, coords: np.ndarray) -> np.ndarray:
    if hasattr(f, "_pole_mask"):
        idx = np.ones(coords.shape[0], dtype=np.int64)
        idx[f._pole_mask(coords)] = f.degree
        return idx
    return np.ones(coords.shape[0], dtype=np.int64)


@dataclass(frozen=True)
class LowerBoundReport:
    bound: float
    branch_mass: float
    log_degree: float
    residual: float | None
    warnings: tuple

    def as_dict(self) -> dict:
        return {
            "bound": self.bound,
            "branch_mass": self.branch_mass,
            "log_degree": self.log_degree,
            "balancedness_residual": self.residual,
            "warnings": list(self.warnings),
        }


def entropy_lower_bound_report(f, mu: EmpiricalMeasure,
                               residual_threshold: float | None = 0.05,
                               residual_tests=None) -> LowerBoundReport:
    """log deg f - integral of log i(x, f), with the branch mass of mu.

    Equals log deg f exactly when mu puts no mass on the branch set; the
    balancedness residual of mu is checked against the threshold and only
    warned about (the bound formula needs mu balanced to be meaningful).
    """
    warnings = []
    if abs(mu.total - 1.0) > 1e-6:
        warnings.append(f"measure total {mu.total} is not 1")
    residual = None
    if residual_threshold is not None:
        residual = balancedness_residual(f, mu, residual_tests)
        if residual > residual_threshold:
            warnings.append(
                f"balancedness residual {residual:.3g} above threshold {residual_threshold}"
            )
    idx = _local_index_bulk(f, mu.coords)
    branch = idx > 1
    branch_mass = float(np.sum(mu.weights[branch]))
    log_i = float(np.dot(mu.weights, np.log(idx)))
    bound = math.log(f.degree) - log_i
    return LowerBoundReport(bound=bound, branch_mass=branch_mass,
                            log_degree=math.log(f.degree),
                            residual=residual, warnings=tuple(warnings))


@dataclass(frozen=True)
class KSEntropyResult:
    value: float           # conditional entropy at k = k_max
    sequence: tuple        # conditional entropy at k = 1..k_max
    k_max: int
    cell_count: int
    undersampled: tuple    # per k: mass in joint cells with < 5 atoms
    warnings: tuple

    @property
    def supported_k(self) -> int:
        """Largest k whose joint partition keeps undersampled mass <= 5%."""
        good = [k + 1 for k, m in enumerate(self.undersampled) if m <= 0.05]
        return good[-1] if good else 1

    @property
    def supported_value(self) -> float:
        return self.sequence[self.supported_k - 1]

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "ks_sequence": list(self.sequence),
            "k_max": self.k_max,
            "supported_k": self.supported_k,
            "supported_value": self.supported_value,
            "cell_count": self.cell_count,
            "undersampled_mass": list(self.undersampled),
            "warnings": list(self.warnings),
        }


def _group_entropy(keys: np.ndarray, weights: np.ndarray, total: float) -> float:
    _, inv = np.unique(keys, return_inverse=True)
    masses = np.bincount(inv, weights=weights)
    p = masses[masses > 0] / total
    return float(-np.sum(p * np.log(p)))


def ks_entropy_estimate(f, mu: EmpiricalMeasure, partition: PartitionSpec,
                        k_max: int) -> KSEntropyResult:
    """Plug-in conditional entropy H(xi | join of f^{ -j} xi, j = 1..k).

    Atoms are labeled by the partition cells of (x, f x, ..., f^k x); the
    conditional entropy of the first label given the rest is computed from
    weighted counts.  Returned at k = k_max with the whole k-sequence, which
    decreases in k up to sampling noise.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    warnings = []
    if len(mu) < 100 * partition.cell_count:
        warnings.append(
            f"{len(mu)} atoms for {partition.cell_count} cells; "
            "plug-in entropy needs >= 100 atoms per cell"
        )
    total = mu.total
    labels = np.empty((len(mu), k_max + 1), dtype=np.int64)
    cur = mu.coords
    labels[:, 0] = partition.labels_bulk(cur)
    for j in range(1, k_max + 1):
        cur = f.eval_bulk(cur)
        labels[:, j] = partition.labels_bulk(cur)

    # progressive exact re-keying keeps the joint keys inside int64
    seq = []
    undersampled = []
    cond_key = labels[:, 1].copy()
    joint_key = labels[:, 0] * partition.cell_count + labels[:, 1]
    for k in range(1, k_max + 1):
        if k > 1:
            _, cond_ids = np.unique(cond_key, return_inverse=True)
            cond_key = cond_ids * partition.cell_count + labels[:, k]
            _, joint_ids = np.unique(joint_key, return_inverse=True)
            joint_key = joint_ids * partition.cell_count + labels[:, k]
        h_joint = _group_entropy(joint_key, mu.weights, total)
        h_cond = _group_entropy(cond_key, mu.weights, total)
        seq.append(h_joint - h_cond)
        # mass in sparsely populated joint classes (plug-in bias risk)
        _, inv = np.unique(joint_key, return_inverse=True)
        counts = np.bincount(inv)
        masses = np.bincount(inv, weights=mu.weights)
        undersampled.append(float(np.sum(masses[counts < 5]) / total))

    if undersampled[-1] > 0.01:
        warnings.append(
            f"{undersampled[-1]:.3g} of the mass sits in joint cells with "
            f"fewer than 5 atoms at k={k_max}"
        )
    return KSEntropyResult(value=seq[-1], sequence=tuple(seq), k_max=k_max,
                           cell_count=partition.cell_count,
                           undersampled=tuple(undersampled),
                           warnings=tuple(warnings))
