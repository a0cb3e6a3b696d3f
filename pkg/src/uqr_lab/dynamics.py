"""Concrete uniformly quasiregular self-maps of the model manifolds.

Three families share one informal interface (a "map handle"):

* ``ToralEndo``     -- x -> A x mod 1 on T^n for an integer matrix A,
* ``SpherePowerMap``-- w -> w^d on S^2 in stereographic coordinates,
* ``ShearedEndo``   -- a toral endomorphism conjugated by a shear
                       diffeomorphism h, f = h o A o h^{-1}.

Every handle exposes: ``manifold``, ``degree``, point-wise ``eval`` /
``differential`` / ``jacobian`` / ``pointwise_distortion`` / ``local_index``
/ ``preimages``, bulk variants acting on (N, d) coordinate arrays, and the
branch-point list.  Differentials are returned as matrices with respect to
orthonormal frames at source and target, so determinants are Riemannian
Jacobians and chain-rule products can be formed directly.

The sum of local indices over any preimage fibre equals the degree, exactly.
"""

from __future__ import annotations

import math
from itertools import product as _iproduct

import numpy as np

from .geometry import SPHERE2, Point, ProductPoint, torus

__all__ = [
    "ToralEndo",
    "SpherePowerMap",
    "ShearedEndo",
    "IterateMap",
    "identity_map",
    "SHEAR_PROFILES",
    "chain_point",
    "chain_coords",
    "chain_differentials",
    "iterate_distortion",
    "operator_norms",
    "BRANCH_TOL",
]

# points closer than this (chordal) to a sphere pole count as the branch point
BRANCH_TOL = 1e-9


# ---------------------------------------------------------------------------
# integer linear algebra for coset enumeration


def _int_det(a: list[list[int]]) -> int:
    n = len(a)
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    det = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in a[1:]]
        det += (-1) ** j * a[0][j] * _int_det(minor)
    return det


def _int_adjugate(a: list[list[int]]) -> list[list[int]]:
    n = len(a)
    if n == 1:
        return [[1]]
    cof = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(a) if k != i]
            cof[i][j] = (-1) ** (i + j) * _int_det(minor)
    return [[cof[j][i] for j in range(n)] for i in range(n)]  # transpose


def _coset_representatives(a: list[list[int]]) -> np.ndarray:
    """All integer v with A^{-1} v in [0,1)^n, by exact integer arithmetic.

    These represent Z^n / A Z^n; their count is |det A| and the membership
    test (adj(A) v)_i / det in [0,1) has no floating-point ties.
    """
    n = len(a)
    det = _int_det(a)
    if det == 0:
        raise ValueError("degree undefined: singular matrix")
    adj = _int_adjugate(a)
    corners = []
    for c in _iproduct((0, 1), repeat=n):
        corners.append([sum(a[i][j] * c[j] for j in range(n)) for i in range(n)])
    lo = [min(c[i] for c in corners) for i in range(n)]
    hi = [max(c[i] for c in corners) for i in range(n)]
    reps = []
    for v in _iproduct(*[range(lo[i], hi[i] + 1) for i in range(n)]):
        ok = True
        for i in range(n):
            w = sum(adj[i][j] * v[j] for j in range(n))
            if det > 0:
                if not (0 <= w < det):
                    ok = False
                    break
            else:
                if not (det < w <= 0):
                    ok = False
                    break
        if ok:
            reps.append(v)
    if len(reps) != abs(det):
        raise RuntimeError(
            f"coset enumeration found {len(reps)} representatives, expected {abs(det)}"
        )
    return np.array(sorted(reps), dtype=float)


# ---------------------------------------------------------------------------
# toral endomorphisms


class ToralEndo:
    """x -> A x mod 1 on the flat torus, A a nonsingular integer matrix."""

    family = "toral"

    def __init__(self, matrix):
        a_arr = np.asarray(matrix)
        if a_arr.ndim != 2 or a_arr.shape[0] != a_arr.shape[1]:
            raise ValueError("matrix must be square")
        if not np.all(a_arr == np.round(a_arr)):
            raise ValueError("matrix entries must be integers")
        self.A = a_arr.astype(float)
        self._a_int = [[int(x) for x in row] for row in np.round(a_arr).astype(int)]
        n = self.A.shape[0]
        self.manifold = torus(n)
        det = _int_det(self._a_int)
        if det == 0:
            raise ValueError("degree undefined: singular matrix")
        self.degree = abs(det)
        self._inv = np.linalg.inv(self.A)
        self.coset_reps = _coset_representatives(self._a_int)
        self._rep_shifts = self.coset_reps @ self._inv.T  # A^{-1} v per representative
        # constant pointwise distortion ||A||^n / |det A|
        self._distortion = float(
            np.linalg.norm(self.A, 2) ** n / abs(np.linalg.det(self.A))
        )

    def __repr__(self):
        return f"ToralEndo({self._a_int})"

    @property
    def is_similarity(self) -> bool:
        ata = self.A.T @ self.A
        return np.allclose(ata, ata[0, 0] * np.eye(self.A.shape[0]))

    @property
    def analytic_distortion_bound(self):
        """Uniform bound on K(f^k), when one holds (similarity matrices)."""
        return 1.0 if self.is_similarity else None

    # -- evaluation --------------------------------------------------------

    def eval_bulk(self, x: np.ndarray) -> np.ndarray:
        return np.mod(x @ self.A.T, 1.0)

    def eval(self, p: Point) -> Point:
        return Point(self.manifold, self.eval_bulk(p.coords[None, :])[0])

    # -- differentials -----------------------------------------------------

    def differentials_bulk(self, x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.A, (x.shape[0],) + self.A.shape)

    def differential(self, p: Point) -> np.ndarray:
        return self.A.copy()

    def jacobian(self, p: Point) -> float:
        return float(abs(np.linalg.det(self.A)))

    def pointwise_distortion(self, p: Point) -> float:
        return self._distortion

    # -- preimages ---------------------------------------------------------

    def preimage_blocks(self, y: np.ndarray):
        """Fibres as deg blocks aligned with y: block r is A^{-1}(y + v_r) mod 1.

        Every fibre point has local index 1, so block r row i is the r-th
        preimage of y[i]; consumers exploit this to skip parent bookkeeping.
        """
        base = y @ self._inv.T
        for s in self._rep_shifts:
            yield np.mod(base + s, 1.0)

    def preimages_bulk(self, y: np.ndarray):
        """(Z, parent, index): stacked fibres over the rows of y."""
        n_pts = y.shape[0]
        z = np.concatenate(list(self.preimage_blocks(y)), axis=0)
        parent = np.tile(np.arange(n_pts), self.degree)
        index = np.ones(self.degree * n_pts, dtype=np.int64)
        return z, parent, index

    def preimages(self, y: Point) -> list[tuple[Point, int]]:
        z, _, idx = self.preimages_bulk(y.coords[None, :])
        return [(Point(self.manifold, z[i]), int(idx[i])) for i in range(len(z))]

    def local_index(self, p: Point) -> int:
        return 1

    def branch_points(self) -> list[Point]:
        return []


def identity_map(n: int = 2) -> ToralEndo:
    return ToralEndo(np.eye(n, dtype=int))


# ---------------------------------------------------------------------------
# sphere power maps
#
# Chart N covers z >= 0 with w = (x + iy)/(1 + z)   (north pole -> 0),
# chart S covers z <  0 with w = (x - iy)/(1 - z)   (south pole -> 0);
# the transition is w_S = 1/w_N, so both charts are holomorphically
# compatible and |w| <= 1 on the active chart.  In either chart the map
# is w -> w^d, the round metric is conformal with factor 2/(1+|w|^2),
# and orthonormal frames are the rescaled chart frames.


def _sphere_chart(x: np.ndarray):
    """(north_mask, w) for embedded points (N, 3), w in the active chart."""
    north = x[:, 2] >= 0.0
    denom = 1.0 + np.where(north, x[:, 2], -x[:, 2])
    re = x[:, 0] / denom
    im = np.where(north, x[:, 1], -x[:, 1]) / denom
    return north, re + 1j * im


def _sphere_embed(north: np.ndarray, w: np.ndarray) -> np.ndarray:
    r2 = np.abs(w) ** 2
    s = 2.0 / (1.0 + r2)
    x = np.real(w) * s
    y = np.where(north, np.imag(w), -np.imag(w)) * s
    z = np.where(north, 1.0 - r2, r2 - 1.0) / (1.0 + r2)
    out = np.stack([x, y, z], axis=-1)
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def _conf(w: np.ndarray) -> np.ndarray:
    return 2.0 / (1.0 + np.abs(w) ** 2)


class SpherePowerMap:
    """w -> w^d on the round 2-sphere, conformal away from the fixed poles."""

    family = "sphere_power"

    def __init__(self, d: int):
        if d < 2:
            raise ValueError("power must be >= 2")
        self.d = int(d)
        self.degree = int(d)
        self.manifold = SPHERE2
        self.analytic_distortion_bound = 1.0  # holomorphic iterates

    def __repr__(self):
        return f"SpherePowerMap(d={self.d})"

    def eval_bulk(self, x: np.ndarray) -> np.ndarray:
        north, w = _sphere_chart(x)
        return _sphere_embed(north, w ** self.d)

    def eval(self, p: Point) -> Point:
        return Point(SPHERE2, self.eval_bulk(p.coords[None, :])[0])

    def differentials_bulk(self, x: np.ndarray) -> np.ndarray:
        """Frames: active chart at x and at f(x); zero matrix at the poles."""
        north, w = _sphere_chart(x)
        wd = w ** self.d
        fprime = self.d * w ** (self.d - 1)
        scale = _conf(wd) / _conf(w)
        c = scale * fprime
        out = np.empty((x.shape[0], 2, 2))
        out[:, 0, 0] = np.real(c)
        out[:, 0, 1] = -np.imag(c)
        out[:, 1, 0] = np.imag(c)
        out[:, 1, 1] = np.real(c)
        return out

    def differential(self, p: Point) -> np.ndarray:
        return self.differentials_bulk(p.coords[None, :])[0]

    def jacobian(self, p: Point) -> float:
        return float(np.linalg.det(self.differential(p)))

    def pointwise_distortion(self, p: Point) -> float:
        d_mat = self.differential(p)
        j = np.linalg.det(d_mat)
        if j <= 0.0:
            return math.nan  # branch point: undefined
        return float(np.linalg.norm(d_mat, 2) ** 2 / j)

    def _pole_mask(self, x: np.ndarray) -> np.ndarray:
        chord_n = np.linalg.norm(x - np.array([0.0, 0.0, 1.0]), axis=-1)
        chord_s = np.linalg.norm(x + np.array([0.0, 0.0, 1.0]), axis=-1)
        return np.minimum(chord_n, chord_s) < BRANCH_TOL

    def preimages_bulk(self, y: np.ndarray):
        """Fibres over rows of y; pole rows contribute one root of index d."""
        north, w = _sphere_chart(y)
        at_pole = np.abs(w) < BRANCH_TOL / 2.0
        n_pts = y.shape[0]
        r = np.abs(w) ** (1.0 / self.d)
        theta = np.arctan2(np.imag(w), np.real(w)) / self.d
        z_parts, p_parts, i_parts = [], [], []
        gen = ~at_pole
        if np.any(gen):
            idx_gen = np.nonzero(gen)[0]
            for m in range(self.d):
                roots = r[gen] * np.exp(1j * (theta[gen] + 2.0 * np.pi * m / self.d))
                z_parts.append(_sphere_embed(north[gen], roots))
                p_parts.append(idx_gen)
                i_parts.append(np.ones(len(idx_gen), dtype=np.int64))
        if np.any(at_pole):
            idx_pole = np.nonzero(at_pole)[0]
            z_parts.append(_sphere_embed(north[at_pole], np.zeros(idx_pole.shape, complex)))
            p_parts.append(idx_pole)
            i_parts.append(np.full(len(idx_pole), self.d, dtype=np.int64))
        return (np.concatenate(z_parts), np.concatenate(p_parts),
                np.concatenate(i_parts))

    def preimages(self, y: Point) -> list[tuple[Point, int]]:
        z, _, idx = self.preimages_bulk(y.coords[None, :])
        return [(Point(SPHERE2, z[i]), int(idx[i])) for i in range(len(z))]

    def local_index(self, p: Point) -> int:
        return self.d if self._pole_mask(p.coords[None, :])[0] else 1

    def branch_points(self) -> list[Point]:
        return [Point(SPHERE2, np.array([0.0, 0.0, 1.0])),
                Point(SPHERE2, np.array([0.0, 0.0, -1.0]))]


# ---------------------------------------------------------------------------
# sheared conjugates of toral endomorphisms


class _SineProfile:
    """psi(t) = sin(2 pi t) / (2 pi); sup |psi'| = 1."""

    name = "sine"
    sup_derivative = 1.0

    def value(self, t):
        return np.sin(2.0 * np.pi * t) / (2.0 * np.pi)

    def derivative(self, t):
        return np.cos(2.0 * np.pi * t)


SHEAR_PROFILES = {"sine": _SineProfile()}


class ShearedEndo:
    """h o A o h^{-1} with the shear h(x) = (x1 + s psi(x2), x2, ..., xn).

    Uniformly quasiregular with K(f^k) <= K_h^2 K(A^k); the bound is uniform
    in k whenever A is a similarity.
    """

    family = "sheared"

    def __init__(self, base: ToralEndo, s: float, profile: str = "sine"):
        if profile not in SHEAR_PROFILES:
            raise ValueError(f"unknown shear profile {profile!r}")
        self.base = base
        self.profile = SHEAR_PROFILES[profile]
        if not 0.0 <= s * self.profile.sup_derivative < 1.0:
            raise ValueError("shear amplitude must satisfy s * sup|psi'| < 1")
        self.s = float(s)
        self.manifold = base.manifold
        self.degree = base.degree

    def __repr__(self):
        return f"ShearedEndo({self.base!r}, s={self.s}, profile={self.profile.name})"

    @property
    def shear_distortion(self) -> float:
        """K_h: maximal distortion of the conjugating shear diffeomorphism."""
        t = self.s * self.profile.sup_derivative
        n = self.manifold.n
        sigma = (t + math.sqrt(t * t + 4.0)) / 2.0
        return sigma ** n  # det Dh = 1

    @property
    def analytic_distortion_bound(self):
        base_bound = self.base.analytic_distortion_bound
        if base_bound is None:
            return None
        return self.shear_distortion ** 2 * base_bound

    def h_bulk(self, x: np.ndarray) -> np.ndarray:
        out = x.copy()
        out[:, 0] = np.mod(out[:, 0] + self.s * self.profile.value(x[:, 1]), 1.0)
        return out

    def hinv_bulk(self, y: np.ndarray) -> np.ndarray:
        out = y.copy()
        out[:, 0] = np.mod(out[:, 0] - self.s * self.profile.value(y[:, 1]), 1.0)
        return out

    def eval_bulk(self, x: np.ndarray) -> np.ndarray:
        return self.h_bulk(self.base.eval_bulk(self.hinv_bulk(x)))

    def eval(self, p: Point) -> Point:
        return Point(self.manifold, self.eval_bulk(p.coords[None, :])[0])

    def _shear_jac(self, t: np.ndarray, sign: float) -> np.ndarray:
        n = self.manifold.n
        out = np.broadcast_to(np.eye(n), (t.shape[0], n, n)).copy()
        out[:, 0, 1] = sign * self.s * self.profile.derivative(t)
        return out

    def differentials_bulk(self, x: np.ndarray) -> np.ndarray:
        u = self.base.eval_bulk(self.hinv_bulk(x))  # = hinv(f(x)), same 2nd coord
        dh = self._shear_jac(u[:, 1], +1.0)
        dhinv = self._shear_jac(x[:, 1], -1.0)
        return dh @ self.base.differentials_bulk(x) @ dhinv

    def differential(self, p: Point) -> np.ndarray:
        return self.differentials_bulk(p.coords[None, :])[0]

    def jacobian(self, p: Point) -> float:
        return float(abs(np.linalg.det(self.differential(p))))

    def pointwise_distortion(self, p: Point) -> float:
        d_mat = self.differential(p)
        n = self.manifold.n
        return float(np.linalg.norm(d_mat, 2) ** n / abs(np.linalg.det(d_mat)))

    def preimage_blocks(self, y: np.ndarray):
        for block in self.base.preimage_blocks(self.hinv_bulk(y)):
            yield self.h_bulk(block)

    def preimages_bulk(self, y: np.ndarray):
        z, parent, index = self.base.preimages_bulk(self.hinv_bulk(y))
        return self.h_bulk(z), parent, index

    def preimages(self, y: Point) -> list[tuple[Point, int]]:
        z, _, idx = self.preimages_bulk(y.coords[None, :])
        return [(Point(self.manifold, z[i]), int(idx[i])) for i in range(len(z))]

    def local_index(self, p: Point) -> int:
        return 1

    def branch_points(self) -> list[Point]:
        return []


class IterateMap:
    """f^power as a map handle: used as a component of stacked chain maps."""

    def __init__(self, f, power: int):
        if power < 1:
            raise ValueError("power must be >= 1")
        self.base = f
        self.power = int(power)
        self.manifold = f.manifold
        self.degree = f.degree ** power
        self.family = f"{f.family}^{power}"

    def __repr__(self):
        return f"IterateMap({self.base!r}, power={self.power})"

    def eval_bulk(self, x: np.ndarray) -> np.ndarray:
        for _ in range(self.power):
            x = self.base.eval_bulk(x)
        return x

    def eval(self, p: Point) -> Point:
        return Point(self.manifold, self.eval_bulk(p.coords[None, :])[0])

    def differentials_bulk(self, x: np.ndarray) -> np.ndarray:
        n = self.manifold.n
        cur_d = np.broadcast_to(np.eye(n), (x.shape[0], n, n)).copy()
        for _ in range(self.power):
            cur_d = self.base.differentials_bulk(x) @ cur_d
            x = self.base.eval_bulk(x)
        return cur_d

    def differential(self, p: Point) -> np.ndarray:
        return self.differentials_bulk(p.coords[None, :])[0]


# ---------------------------------------------------------------------------
# chains and iterate distortion


def chain_coords(f, x: np.ndarray, k: int) -> np.ndarray:
    """Orbit chains (x, f x, ..., f^k x) for a coordinate cloud x: (N, k+1, d)."""
    if k < 0:
        raise ValueError("chain length k must be >= 0")
    out = np.empty((x.shape[0], k + 1, x.shape[1]))
    out[:, 0] = x
    cur = x
    for j in range(1, k + 1):
        cur = f.eval_bulk(cur)
        out[:, j] = cur
    return out


def chain_point(f, x: Point, k: int) -> ProductPoint:
    return ProductPoint(f.manifold, chain_coords(f, x.coords[None, :], k)[0])


def chain_differentials(f, x: np.ndarray, k: int):
    """Cumulative differentials D(f^j) at each x, j = 0..k.

    Returns (points, diffs): points[j] is the orbit cloud at time j and
    diffs[j] the (N, n, n) matrices of D(f^j)(x) in orthonormal frames,
    with diffs[0] the identity.
    """
    n_pts = x.shape[0]
    n = f.manifold.n
    pts = [x]
    cur_d = np.broadcast_to(np.eye(n), (n_pts, n, n)).copy()
    diffs = [cur_d]
    cur = x
    for _ in range(k):
        step = f.differentials_bulk(cur)
        cur_d = step @ cur_d
        diffs.append(cur_d)
        cur = f.eval_bulk(cur)
        pts.append(cur)
    return pts, diffs


def operator_norms(mats: np.ndarray) -> np.ndarray:
    """Largest singular value of a stack of 2x2 (or nxn) matrices."""
    if mats.shape[-1] == 2:
        a, b = mats[..., 0, 0], mats[..., 0, 1]
        c, d = mats[..., 1, 0], mats[..., 1, 1]
        q = a * a + b * b + c * c + d * d
        det = a * d - b * c
        disc = np.sqrt(np.maximum(q * q - 4.0 * det * det, 0.0))
        return np.sqrt(np.maximum((q + disc) / 2.0, 0.0))
    return np.linalg.norm(mats, ord=2, axis=(-2, -1))


def iterate_distortion(f, k: int, samples: int, rng: np.random.Generator) -> float:
    """Sampled lower estimate of K(f^k): sup of ||Df^k||^n / J_{f^k}.

    Branch-point hits (vanishing Jacobian) are resampled; they form a
    measure-zero set for the implemented families.
    """
    from .geometry import sample_uniform_bulk

    if k < 1 or samples < 1:
        raise ValueError("need k >= 1 and samples >= 1")
    n = f.manifold.n
    best = 1.0
    remaining = samples
    for _ in range(8):  # resample rounds; first round almost always suffices
        x = sample_uniform_bulk(f.manifold, remaining, rng)
        _, diffs = chain_differentials(f, x, k)
        d_k = diffs[k]
        dets = np.abs(np.linalg.det(d_k))
        good = dets > 1e-300
        if np.any(good):
            vals = operator_norms(d_k[good]) ** n / dets[good]
            best = max(best, float(np.max(vals)))
        remaining = int(np.sum(~good))
        if remaining == 0:
            break
    return best
