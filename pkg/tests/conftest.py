"""Shared fixtures; heavy estimator runs are session-scoped and timed."""

import time

import pytest

from uqr_lab import (BaseSource, ShearedEndo, SpherePowerMap, ToralEndo,
                     balanced_iterate, identity_map,
                     topological_entropy_estimate)


@pytest.fixture(scope="session")
def diag22():
    return ToralEndo([[2, 0], [0, 2]])


@pytest.fixture(scope="session")
def diag23():
    return ToralEndo([[2, 0], [0, 3]])


@pytest.fixture(scope="session")
def upper21():
    return ToralEndo([[2, 1], [0, 2]])


@pytest.fixture(scope="session")
def sphere2():
    return SpherePowerMap(2)


@pytest.fixture(scope="session")
def sphere3():
    return SpherePowerMap(3)


@pytest.fixture(scope="session")
def sheared22(diag22):
    return ShearedEndo(diag22, 0.1)


@pytest.fixture(scope="session")
def ident():
    return identity_map(2)


EPS_SCHEDULE = [0.2, 0.1, 0.05]
K_RANGE = [1, 2, 3, 4, 5, 6]


def _timed_entropy(f, base_source):
    base = base_source.points(f.manifold)
    t0 = time.monotonic()
    est = topological_entropy_estimate(f, EPS_SCHEDULE, K_RANGE, base)
    return est, time.monotonic() - t0, base


@pytest.fixture(scope="session")
def entropy_diag22(diag22):
    return _timed_entropy(diag22, BaseSource(kind="grid", resolution=512))


@pytest.fixture(scope="session")
def entropy_diag23(diag23):
    return _timed_entropy(diag23, BaseSource(kind="grid", resolution=512))


@pytest.fixture(scope="session")
def entropy_identity(ident):
    return _timed_entropy(ident, BaseSource(kind="grid", resolution=512))


@pytest.fixture(scope="session")
def entropy_sheared(sheared22):
    return _timed_entropy(sheared22, BaseSource(kind="grid", resolution=512))


@pytest.fixture(scope="session")
def entropy_sphere(sphere2):
    return _timed_entropy(sphere2, BaseSource(kind="random", count=300_000, seed=0))


@pytest.fixture(scope="session")
def balanced22_big(diag22):
    t0 = time.monotonic()
    mu = balanced_iterate(diag22, 6, 10_000, seed=42, atom_cap=50_000_000)
    return mu, time.monotonic() - t0


@pytest.fixture(scope="session")
def balanced_sphere_k8(sphere2):
    t0 = time.monotonic()
    mu = balanced_iterate(sphere2, 8, 1_000, seed=42)
    return mu, time.monotonic() - t0
