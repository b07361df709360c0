"""Invariant checks on random instances, run by ``gwgauss selfcheck``."""

import numpy as np

from .closed_form import gap_bound, ggw2_squared, ggw_map, lgw2_squared
from .discrete import CouplingPlan, gw_objective, gw_objective_decomposed, gw_objective_reference
from .gaussian import AffineMap, PointCloud, make_gaussian, push_forward
from .linalg import schur_feasible, sorted_eig
from .constrained import max_cross_cov_frobenius


def random_spd(rng, d, rank=None):
    rank = d if rank is None else rank
    a = rng.standard_normal((d, rank))
    return a @ a.T


def random_gaussian(rng, d, rank=None):
    return make_gaussian(rng.standard_normal(d), random_spd(rng, d, rank))


def random_orthogonal(rng, d):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def random_plan(rng, x, y):
    """A feasible plan: a Sinkhorn-balanced random positive matrix."""
    m = rng.uniform(0.1, 1.0, (x.size, y.size))
    for _ in range(2000):
        m *= (x.weights / m.sum(axis=1))[:, None]
        m *= (y.weights / m.sum(axis=0))[None, :]
        if np.abs(m.sum(axis=1) - x.weights).max() < 1e-15:
            break
    return CouplingPlan(m, x.weights, y.weights)


def _rel(a, b, scale=None):
    s = max(1.0, abs(a), abs(b)) if scale is None else scale
    return abs(a - b) / s


def _eig_roundtrip(rng):
    d = int(rng.integers(1, 9))
    a = rng.uniform(-5, 5, (d, d))
    a = 0.5 * (a + a.T)
    dec = sorted_eig(a)
    err = np.linalg.norm(dec.reconstruct() - a) / max(np.linalg.norm(a), 1e-300)
    return err <= 1e-9 and bool(np.all(np.diff(dec.eigenvalues) <= 0))


def _sandwich(rng):
    g0 = random_gaussian(rng, int(rng.integers(1, 7)))
    g1 = random_gaussian(rng, int(rng.integers(1, 7)))
    b = gap_bound(g0, g1)
    slack = 1e-9 * b.scale
    return -slack <= b.lower <= b.upper + slack and b.gap <= b.gap_cap + slack


def _symmetry(rng):
    g0 = random_gaussian(rng, int(rng.integers(1, 5)))
    g1 = random_gaussian(rng, int(rng.integers(1, 5)))
    return (_rel(ggw2_squared(g0, g1), ggw2_squared(g1, g0)) <= 1e-9
            and _rel(lgw2_squared(g0, g1), lgw2_squared(g1, g0)) <= 1e-9)


def _isometry(rng):
    d = int(rng.integers(1, 5))
    g0 = random_gaussian(rng, d)
    g1 = random_gaussian(rng, int(rng.integers(1, 5)))
    t = AffineMap(random_orthogonal(rng, d), rng.standard_normal(d))
    moved = push_forward(g0, t)
    return (_rel(ggw2_squared(g0, g1), ggw2_squared(moved, g1)) <= 1e-8
            and _rel(lgw2_squared(g0, g1), lgw2_squared(moved, g1)) <= 1e-8)


def _map_pushforward(rng):
    n = int(rng.integers(1, 4))
    m = int(rng.integers(n, 5))
    g0, g1 = random_gaussian(rng, m), random_gaussian(rng, n)
    signs = rng.choice([-1.0, 1.0], n)
    img = push_forward(g0, ggw_map(g0, g1, signs))
    return np.abs(img.mean - g1.mean).max() <= 1e-8 and np.abs(img.cov - g1.cov).max() <= 1e-8 * max(1.0, np.abs(g1.cov).max())


def _decomposition(rng):
    k0, k1 = int(rng.integers(2, 8)), int(rng.integers(2, 8))
    x = PointCloud.uniform(rng.standard_normal((k0, int(rng.integers(1, 4)))))
    y = PointCloud.uniform(rng.standard_normal((k1, int(rng.integers(1, 4)))))
    x = PointCloud.uniform(x.points - x.mean())
    y = PointCloud.uniform(y.points - y.mean())
    plan = random_plan(rng, x, y)
    ref = gw_objective_reference(x, y, plan)
    return (_rel(gw_objective(x, y, plan), ref) <= 1e-8
            and _rel(gw_objective_decomposed(x, y, plan), ref) <= 1e-8)


def _kstar_feasible(rng):
    m = int(rng.integers(1, 5))
    n = int(rng.integers(1, m + 1))
    d0 = np.sort(rng.uniform(0.1, 3.0, m))[::-1]
    d1 = np.sort(rng.uniform(0.0, 3.0, n))[::-1]
    value, k = max_cross_cov_frobenius(d0, d1)
    return schur_feasible(np.diag(d0), np.diag(d1), k) and _rel(np.sum(k**2), value) <= 1e-12


CHECKS = {
    "eigen round trip": _eig_roundtrip,
    "bounds sandwich and gap cap": _sandwich,
    "bounds symmetry": _symmetry,
    "isometry invariance": _isometry,
    "ggw map pushforward": _map_pushforward,
    "objective decomposition": _decomposition,
    "cross-covariance maximizer feasible": _kstar_feasible,
}


def run_checks(seed=0, count=50):
    """Return ``[(name, passed, failures)]`` after ``count`` random trials per check."""
    results = []
    for i, (name, check) in enumerate(CHECKS.items()):
        rng = np.random.Generator(np.random.PCG64([seed, i]))
        failures = sum(1 for _ in range(count) if not check(rng))
        results.append((name, failures == 0, failures))
    return results
