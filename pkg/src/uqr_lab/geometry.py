"""Model manifolds: flat torus T^n and the round 2-sphere.

Points are stored in canonical coordinates (torus: values in [0,1) per axis,
sphere: embedded unit 3-vectors), distances are exact Riemannian distances,
and powers of the manifold carry both the sup-metric and the product metric.

Bulk operations act on coordinate arrays: a cloud of points is an (N, d)
array, a cloud of (k+1)-chains an (N, k+1, d) array, with d = n on the torus
and d = 3 on the sphere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Manifold",
    "torus",
    "SPHERE2",
    "Point",
    "ProductPoint",
    "ManifoldMismatch",
    "dist",
    "dist_bulk",
    "sup_dist",
    "product_dist",
    "sample_uniform",
    "sample_uniform_bulk",
    "torus_grid",
]

_SPHERE_NORM_TOL = 1e-12


class ManifoldMismatch(ValueError):
    """Operands live on different manifolds."""


@dataclass(frozen=True)
class Manifold:
    """Identifier of a model manifold: ``torus(n)`` (n >= 2) or ``sphere2``."""

    kind: str  # "torus" | "sphere2"
    n: int     # intrinsic dimension

    def __post_init__(self):
        if self.kind == "torus":
            if self.n < 2:
                raise ValueError("torus dimension must be >= 2")
        elif self.kind == "sphere2":
            if self.n != 2:
                raise ValueError("sphere2 has dimension 2")
        else:
            raise ValueError(f"unknown manifold kind {self.kind!r}")

    @property
    def ambient_dim(self) -> int:
        """Length of a coordinate vector for this manifold."""
        return self.n if self.kind == "torus" else 3

    @property
    def volume(self) -> float:
        """Riemannian volume: 1 for the unit-cell torus, 4*pi for the sphere."""
        return 1.0 if self.kind == "torus" else 4.0 * np.pi

    @property
    def diameter(self) -> float:
        if self.kind == "torus":
            return 0.5 * np.sqrt(self.n)
        return np.pi

    def __repr__(self):
        return f"torus({self.n})" if self.kind == "torus" else "sphere2"


def torus(n: int = 2) -> Manifold:
    return Manifold("torus", n)


SPHERE2 = Manifold("sphere2", 2)


@dataclass(frozen=True, eq=False)
class Point:
    """A location on a model manifold, in canonical coordinates."""

    manifold: Manifold
    coords: np.ndarray

    @staticmethod
    def on_torus(coords, n: int | None = None) -> "Point":
        c = np.asarray(coords, dtype=float)
        m = torus(len(c) if n is None else n)
        return Point(m, np.mod(c, 1.0))

    @staticmethod
    def on_sphere(coords) -> "Point":
        c = np.asarray(coords, dtype=float)
        nrm = np.linalg.norm(c)
        if abs(nrm - 1.0) > 1e-6:
            raise ValueError(f"sphere point norm {nrm} too far from 1")
        c = c / nrm
        return Point(SPHERE2, c)

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        object.__setattr__(self, "coords", c)
        if c.shape != (self.manifold.ambient_dim,):
            raise ValueError("coordinate length does not match manifold")
        if self.manifold.kind == "sphere2":
            if abs(np.linalg.norm(c) - 1.0) > _SPHERE_NORM_TOL:
                raise ValueError("sphere coordinates must be a unit vector")
        else:
            if np.any(c < 0.0) or np.any(c >= 1.0):
                raise ValueError("torus coordinates must be reduced into [0,1)")


@dataclass(frozen=True, eq=False)
class ProductPoint:
    """An ordered (k+1)-tuple of points on a common manifold (a chain element)."""

    manifold: Manifold
    coords: np.ndarray  # shape (k+1, ambient_dim)

    @staticmethod
    def of(points: list[Point]) -> "ProductPoint":
        if not points:
            raise ValueError("empty product point")
        m = points[0].manifold
        for p in points[1:]:
            if p.manifold != m:
                raise ManifoldMismatch("product point entries on different manifolds")
        return ProductPoint(m, np.stack([p.coords for p in points]))

    @property
    def k(self) -> int:
        return self.coords.shape[0] - 1

    def entry(self, j: int) -> Point:
        return Point(self.manifold, self.coords[j])


def _check_same(a, b):
    if a.manifold != b.manifold:
        raise ManifoldMismatch(f"points on {a.manifold} vs {b.manifold}")


def dist(a: Point, b: Point) -> float:
    """Riemannian distance between two points on a common manifold."""
    _check_same(a, b)
    return float(dist_bulk(a.manifold, a.coords[None, :], b.coords[None, :])[0])


def dist_bulk(manifold: Manifold, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise (broadcast) distances between coordinate arrays (..., d)."""
    if manifold.kind == "torus":
        # per-axis wrap is exactly the minimum over integer lattice shifts
        delta = np.abs(a - b)
        delta = np.minimum(delta, 1.0 - delta)
        return np.sqrt(np.sum(delta * delta, axis=-1))
    # arc length via the chord: well-conditioned near coincident points,
    # exact pi at antipodes (arccos of the dot product loses ~1e-8 near 1)
    chord = np.sqrt(np.sum((a - b) ** 2, axis=-1))
    return 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))


def sup_dist(x: ProductPoint, y: ProductPoint) -> float:
    """Sup-metric on the (k+1)-fold power: max of coordinate distances."""
    _check_same(x, y)
    if x.coords.shape != y.coords.shape:
        raise ManifoldMismatch("product points of different lengths")
    return float(np.max(dist_bulk(x.manifold, x.coords, y.coords)))


def product_dist(x: ProductPoint, y: ProductPoint) -> float:
    """Product Riemannian metric: l2 norm of the coordinate distances."""
    _check_same(x, y)
    if x.coords.shape != y.coords.shape:
        raise ManifoldMismatch("product points of different lengths")
    d = dist_bulk(x.manifold, x.coords, y.coords)
    return float(np.sqrt(np.sum(d * d)))


def chain_dist_bulk(manifold: Manifold, chains: np.ndarray, center: np.ndarray,
                    metric: str = "sup") -> np.ndarray:
    """Distances from each chain in (N, k+1, d) to a single chain (k+1, d)."""
    d = dist_bulk(manifold, chains, center[None, :, :])
    if metric == "sup":
        return np.max(d, axis=-1)
    if metric == "product":
        return np.sqrt(np.sum(d * d, axis=-1))
    raise ValueError(f"unknown metric {metric!r}")


def sample_uniform(manifold: Manifold, rng: np.random.Generator) -> Point:
    """One uniform sample; consumes the stream state deterministically."""
    return Point(manifold, sample_uniform_bulk(manifold, 1, rng)[0])


def sample_uniform_bulk(manifold: Manifold, n: int, rng: np.random.Generator) -> np.ndarray:
    """(n, d) array of independent uniform samples."""
    if manifold.kind == "torus":
        return rng.random((n, manifold.n))
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v


def torus_grid(n: int, resolution: int) -> np.ndarray:
    """Uniform grid on T^n with `resolution` points per axis, lexicographic order."""
    axes = [np.arange(resolution) / resolution] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)
