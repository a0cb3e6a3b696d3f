"""Greedy maximal eps-separated packing of chain clouds.

The greedy pass keeps a chain iff it is at distance >= eps (sup or product
metric on the power manifold) from every chain kept so far, in deterministic
input order.  A spatial hash on the first min(3, total) flattened scalar
coordinates with cell side >= eps restricts the candidate set: any two
chains within sup distance < eps differ by < eps in every scalar, hence land
in adjacent cells.

The kept count is a maximal (not maximum) separated set, so it lies in the
packing/covering bracket [N_{2 eps}, N_eps].
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

__all__ = ["greedy_pack_torus", "greedy_pack_sphere", "pack_chain_cloud"]

_MAX_CELLS_PER_DIM = 128


@njit(cache=True)
def _pack_torus_kernel(chains, eps, product_metric):
    n, k1, dim = chains.shape
    flat_len = k1 * dim
    h = 3 if flat_len >= 3 else flat_len
    ncell = int(1.0 / eps)
    if ncell < 1:
        ncell = 1
    if ncell > _MAX_CELLS_PER_DIM:
        ncell = _MAX_CELLS_PER_DIM
    eps2 = eps * eps

    if ncell == 1:
        offs = np.zeros(1, dtype=np.int64)
    elif ncell == 2:
        offs = np.array([0, 1], dtype=np.int64)
    else:
        offs = np.array([-1, 0, 1], dtype=np.int64)
    noffs = offs.shape[0]

    cells = np.zeros((n, 3), dtype=np.int64)
    for i in range(n):
        for t in range(h):
            e = t // dim
            a = t - e * dim
            c = int(chains[i, e, a] * ncell)
            if c < 0:
                c = 0
            elif c >= ncell:
                c = ncell - 1
            cells[i, t] = c

    heads = np.full(ncell * ncell * ncell, -1, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    kept = np.empty(n, dtype=np.int64)
    count = 0

    n1 = 1 if h < 2 else noffs
    n2 = 1 if h < 3 else noffs

    for i in range(n):
        reject = False
        for io0 in range(noffs):
            c0 = (cells[i, 0] + offs[io0]) % ncell
            for io1 in range(n1):
                c1 = (cells[i, 1] + offs[io1]) % ncell if h >= 2 else 0
                for io2 in range(n2):
                    c2 = (cells[i, 2] + offs[io2]) % ncell if h >= 3 else 0
                    j = heads[(c0 * ncell + c1) * ncell + c2]
                    while j != -1:
                        if product_metric:
                            acc = 0.0
                            near = True
                            for e in range(k1 - 1, -1, -1):
                                dd = 0.0
                                for a in range(dim):
                                    de = abs(chains[i, e, a] - chains[j, e, a])
                                    if de > 0.5:
                                        de = 1.0 - de
                                    dd += de * de
                                acc += dd
                                if acc >= eps2:
                                    near = False
                                    break
                            if near:
                                reject = True
                                break
                        else:
                            near = True
                            for e in range(k1 - 1, -1, -1):
                                dd = 0.0
                                for a in range(dim):
                                    de = abs(chains[i, e, a] - chains[j, e, a])
                                    if de > 0.5:
                                        de = 1.0 - de
                                    dd += de * de
                                if dd >= eps2:
                                    near = False
                                    break
                            if near:
                                reject = True
                                break
                        j = nxt[j]
                    if reject:
                        break
                if reject:
                    break
            if reject:
                break
        if not reject:
            key = (cells[i, 0] * ncell + cells[i, 1]) * ncell + cells[i, 2]
            nxt[i] = heads[key]
            heads[key] = i
            kept[count] = i
            count += 1
    return kept[:count]


@njit(cache=True)
def _pack_sphere_kernel(chains, eps, cos_eps, product_metric):
    n, k1, _ = chains.shape
    ncell = int(2.0 / eps) + 1
    if ncell > _MAX_CELLS_PER_DIM:
        ncell = _MAX_CELLS_PER_DIM
    side = 2.0 / ncell if 2.0 / ncell > eps else eps
    eps2 = eps * eps

    cells = np.zeros((n, 3), dtype=np.int64)
    for i in range(n):
        for a in range(3):
            c = int((chains[i, 0, a] + 1.0) / side)
            if c < 0:
                c = 0
            elif c >= ncell:
                c = ncell - 1
            cells[i, a] = c

    heads = np.full(ncell * ncell * ncell, -1, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    kept = np.empty(n, dtype=np.int64)
    count = 0

    for i in range(n):
        reject = False
        for o0 in range(-1, 2):
            c0 = cells[i, 0] + o0
            if c0 < 0 or c0 >= ncell:
                continue
            for o1 in range(-1, 2):
                c1 = cells[i, 1] + o1
                if c1 < 0 or c1 >= ncell:
                    continue
                for o2 in range(-1, 2):
                    c2 = cells[i, 2] + o2
                    if c2 < 0 or c2 >= ncell:
                        continue
                    j = heads[(c0 * ncell + c1) * ncell + c2]
                    while j != -1:
                        if product_metric:
                            acc = 0.0
                            near = True
                            for e in range(k1 - 1, -1, -1):
                                dot = (chains[i, e, 0] * chains[j, e, 0]
                                       + chains[i, e, 1] * chains[j, e, 1]
                                       + chains[i, e, 2] * chains[j, e, 2])
                                if dot > 1.0:
                                    dot = 1.0
                                elif dot < -1.0:
                                    dot = -1.0
                                d = math.acos(dot)
                                acc += d * d
                                if acc >= eps2:
                                    near = False
                                    break
                            if near:
                                reject = True
                                break
                        else:
                            near = True
                            for e in range(k1 - 1, -1, -1):
                                dot = (chains[i, e, 0] * chains[j, e, 0]
                                       + chains[i, e, 1] * chains[j, e, 1]
                                       + chains[i, e, 2] * chains[j, e, 2])
                                if dot <= cos_eps:  # geodesic distance >= eps
                                    near = False
                                    break
                            if near:
                                reject = True
                                break
                        j = nxt[j]
                    if reject:
                        break
                if reject:
                    break
            if reject:
                break
        if not reject:
            key = (cells[i, 0] * ncell + cells[i, 1]) * ncell + cells[i, 2]
            nxt[i] = heads[key]
            heads[key] = i
            kept[count] = i
            count += 1
    return kept[:count]


def greedy_pack_torus(chains: np.ndarray, eps: float,
                      metric: str = "sup") -> np.ndarray:
    """Indices of the greedily kept chains; chains is (N, k+1, n) in [0,1)."""
    chains = np.ascontiguousarray(chains, dtype=np.float64)
    return _pack_torus_kernel(chains, float(eps), metric == "product")


def greedy_pack_sphere(chains: np.ndarray, eps: float,
                       metric: str = "sup") -> np.ndarray:
    chains = np.ascontiguousarray(chains, dtype=np.float64)
    return _pack_sphere_kernel(chains, float(eps), math.cos(min(eps, math.pi)),
                               metric == "product")


def pack_chain_cloud(manifold, chains: np.ndarray, eps: float,
                     metric: str = "sup") -> np.ndarray:
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if metric not in ("sup", "product"):
        raise ValueError(f"unknown metric {metric!r}")
    if manifold.kind == "torus":
        return greedy_pack_torus(chains, eps, metric)
    return greedy_pack_sphere(chains, eps, metric)
