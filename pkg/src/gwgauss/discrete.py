"""Gromov-Wasserstein objectives and solvers on weighted point clouds.

Squared-distance matrices are never formed: with ``a_i = |x_i|^2`` one has
``Cx = a 1^T + 1 a^T - 2 X X^T``, so every contraction against a plan costs
O(k0 k1 d) instead of O(k^3) or O(k^4).
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidPlan, NotCentered, ScaleError, TooLarge, Unsupported
from .gaussian import PointCloud

MARGINAL_ATOL = 1e-8
REFERENCE_MAX_K = 30
BRUTE_FORCE_MAX_K = 8
# extra Sinkhorn rounds (of max_sinkhorn sweeps each) allowed to meet accuracy targets
MAX_REFINE = 10
INITIAL_TARGET = 1e-3
TARGET_DECAY = 0.25


@dataclass(frozen=True)
class CouplingPlan:
    matrix: np.ndarray
    source_weights: np.ndarray
    target_weights: np.ndarray

    def __post_init__(self):
        k0, k1 = self.source_weights.size, self.target_weights.size
        if self.matrix.shape != (k0, k1):
            raise InvalidPlan(f"plan shape {self.matrix.shape} does not match marginals ({k0}, {k1})")
        if np.any(self.matrix < 0):
            raise InvalidPlan("plan has negative entries")
        if self.marginal_error() > MARGINAL_ATOL:
            raise InvalidPlan(f"marginals violated by {self.marginal_error():.3g}")

    def marginal_error(self):
        rows = np.abs(self.matrix.sum(axis=1) - self.source_weights).max()
        cols = np.abs(self.matrix.sum(axis=0) - self.target_weights).max()
        return float(max(rows, cols))

    @classmethod
    def from_matrix(cls, matrix, x, y):
        return cls(np.asarray(matrix, dtype=np.float64), x.weights, y.weights)

    @classmethod
    def unvalidated(cls, matrix, source_weights, target_weights):
        """Skip the marginal check, for reporting plans that failed to converge."""
        plan = object.__new__(cls)
        object.__setattr__(plan, "matrix", matrix)
        object.__setattr__(plan, "source_weights", source_weights)
        object.__setattr__(plan, "target_weights", target_weights)
        return plan

    @classmethod
    def product(cls, x, y):
        return cls(np.outer(x.weights, y.weights), x.weights, y.weights)

    @classmethod
    def permutation(cls, perm, x, y):
        """Plan sending atom i of ``x`` to atom ``perm[i]`` of ``y`` (uniform, equal sizes)."""
        k = len(perm)
        m = np.zeros((k, k))
        m[np.arange(k), np.asarray(perm)] = 1.0 / k
        return cls(m, x.weights, y.weights)


@dataclass
class SolveReport:
    plan: CouplingPlan
    objective: float
    iterations: int
    converged: bool
    marginal_error: float
    epsilon: float = 0.0
    objective_history: list = field(default_factory=list)
    marginal_error_history: list = field(default_factory=list)
    restarts: int = 0


def _check(x, y, plan):
    if plan.matrix.shape != (x.size, y.size):
        raise InvalidPlan(f"plan shape {plan.matrix.shape} vs clouds ({x.size}, {y.size})")
    if (np.abs(plan.source_weights - x.weights).max() > MARGINAL_ATOL
            or np.abs(plan.target_weights - y.weights).max() > MARGINAL_ATOL):
        raise InvalidPlan("plan marginals do not match cloud weights")


def _centered(cloud):
    return cloud.points - cloud.weights @ cloud.points


def _quartic_self_term(pts, w):
    """sum_ik w_i w_k |x_i - x_k|^4 for centered points."""
    a = np.einsum("ij,ij->i", pts, pts)
    s = (pts * w[:, None]).T @ pts
    ea = w @ a
    return float(2.0 * (w @ a**2) + 2.0 * ea**2 + 4.0 * np.sum(s * s) - 8.0 * ((w * a) @ pts) @ (w @ pts))


def _quartic_row_term(pts, w):
    """Vector f_i = sum_k w_k |x_i - x_k|^4."""
    a = np.einsum("ij,ij->i", pts, pts)
    mu = w @ pts
    eax = (w * a) @ pts
    s = (pts * w[:, None]).T @ pts
    return (a**2 + 2.0 * a * (w @ a) + w @ a**2 - 4.0 * a * (pts @ mu) - 4.0 * pts @ eax
            + 4.0 * np.einsum("ij,jk,ik->i", pts, s, pts))


def _cross_term(xs, ys, pi):
    """sum_ijkl pi_ij pi_kl |x_i - x_k|^2 |y_j - y_l|^2."""
    a = np.einsum("ij,ij->i", xs, xs)
    b = np.einsum("ij,ij->i", ys, ys)
    # two passes over pi: right products with (1, b, Y), left products with (1, a)
    right = pi @ np.column_stack([np.ones(ys.shape[0]), b, ys])
    left = pi.T @ np.column_stack([np.ones(xs.shape[0]), a])
    p, pib, piy = right[:, 0], right[:, 1], right[:, 2:]
    q, pia = left[:, 0], left[:, 1]
    xbar, ybar = p @ xs, q @ ys
    u = ys.T @ pia
    v = xs.T @ pib
    xy = xs.T @ piy
    return float(2.0 * (a @ pib) + 2.0 * (a @ p) * (b @ q) - 4.0 * u @ ybar - 4.0 * v @ xbar + 4.0 * np.sum(xy * xy))


def gw_objective(x, y, plan):
    """Quadratic GW cost ``sum (|x_i - x_k|^2 - |y_j - y_l|^2)^2 pi_ij pi_kl``.

    Parameters
    ----------
    x, y : PointCloud
    plan : CouplingPlan
        Marginals must equal the cloud weights.

    Returns
    -------
    float
    """
    _check(x, y, plan)
    xs, ys = _centered(x), _centered(y)
    value = (_quartic_self_term(xs, x.weights) + _quartic_self_term(ys, y.weights)
             - 2.0 * _cross_term(xs, ys, plan.matrix))
    return max(value, 0.0)


def gw_objective_reference(x, y, plan):
    """Direct quadruple sum; test oracle for ``k <= 30``."""
    _check(x, y, plan)
    if max(x.size, y.size) > REFERENCE_MAX_K:
        raise TooLarge(f"reference path limited to k <= {REFERENCE_MAX_K}")
    cx = np.sum((x.points[:, None, :] - x.points[None, :, :]) ** 2, axis=-1)
    cy = np.sum((y.points[:, None, :] - y.points[None, :, :]) ** 2, axis=-1)
    pi = plan.matrix
    diff = cx[:, None, :, None] - cy[None, :, None, :]
    return float(np.einsum("ijkl,ij,kl->", diff**2, pi, pi))


def gw_objective_decomposed(x, y, plan, atol=1e-10):
    """GW cost as ``C - 2 Z(pi)`` for centered clouds.

    ``C`` depends on the marginals only (second and fourth moments of each
    cloud); ``Z(pi) = 2 E_pi[|x|^2 |y|^2] + 4 |E_pi[x y^T]|_F^2``.

    Raises
    ------
    NotCentered
        If either weighted mean exceeds ``atol`` (relative to the point scale).
    """
    _check(x, y, plan)
    for name, c in (("x", x), ("y", y)):
        scale = max(1.0, float(np.abs(c.points).max()))
        if np.abs(c.mean()).max() > atol * scale:
            raise NotCentered(f"cloud {name} is not centered; align it first")
    pi = plan.matrix

    def moments(c):
        a = np.einsum("ij,ij->i", c.points, c.points)
        s = (c.points * c.weights[:, None]).T @ c.points
        return a, c.weights @ a, c.weights @ a**2, s

    ax, ex2, ex4, sx = moments(x)
    ay, ey2, ey4, sy = moments(y)
    const = (2.0 * ex4 + 2.0 * ex2**2 + 4.0 * np.sum(sx * sx)
             + 2.0 * ey4 + 2.0 * ey2**2 + 4.0 * np.sum(sy * sy)
             - 4.0 * ex2 * ey2)
    cross = x.points.T @ pi @ y.points
    z = 2.0 * (ax @ pi @ ay) + 4.0 * np.sum(cross * cross)
    return float(const - 2.0 * z)


def inner_gw_objective(x, y, plan):
    """``sum (<x_i, x_k> - <y_j, y_l>)^2 pi_ij pi_kl`` (inner-product ground costs)."""
    _check(x, y, plan)
    sx = (x.points * x.weights[:, None]).T @ x.points
    sy = (y.points * y.weights[:, None]).T @ y.points
    cross = x.points.T @ plan.matrix @ y.points
    return float(np.sum(sx * sx) + np.sum(sy * sy) - 2.0 * np.sum(cross * cross))


def inner_gw_objective_reference(x, y, plan):
    _check(x, y, plan)
    if max(x.size, y.size) > REFERENCE_MAX_K:
        raise TooLarge(f"reference path limited to k <= {REFERENCE_MAX_K}")
    gx = x.points @ x.points.T
    gy = y.points @ y.points.T
    diff = gx[:, None, :, None] - gy[None, :, None, :]
    return float(np.einsum("ijkl,ij,kl->", diff**2, plan.matrix, plan.matrix))


def _contract(xs, ys, pi):
    """Cx @ pi @ Cy through the rank-(d+2) factorization of each distance matrix."""
    a = np.einsum("ij,ij->i", xs, xs)
    b = np.einsum("ij,ij->i", ys, ys)
    q = pi.sum(axis=0)
    left = np.outer(a, q) + (a @ pi)[None, :] - 2.0 * xs @ (xs.T @ pi)
    return np.outer(left @ b, np.ones(ys.shape[0])) + np.outer(left.sum(axis=1), b) - 2.0 * (left @ ys) @ ys.T


def _median_sq_dist(pts, rng, max_pairs=20000):
    k = pts.shape[0]
    if k < 2:
        return 1.0
    if k * (k - 1) // 2 <= max_pairs:
        i, j = np.triu_indices(k, 1)
    else:
        i = rng.integers(0, k, max_pairs)
        j = rng.integers(0, k, max_pairs)
        keep = i != j
        i, j = i[keep], j[keep]
    return float(np.median(np.sum((pts[i] - pts[j]) ** 2, axis=1)))


def _lse(m, axis):
    mx = m.max(axis=axis, keepdims=True)
    mx = np.where(np.isfinite(mx), mx, 0.0)
    return np.squeeze(np.log(np.exp(m - mx).sum(axis=axis, keepdims=True)) + mx, axis=axis)


def _sinkhorn_log(log_a, log_b, cost, eps, f, g, target, max_iter, absorb_at=1e30):
    """Log-stabilized Sinkhorn, warm-started from duals (f, g).

    Iterates scaling vectors (u, v) against the kernel ``exp((f + g - C) / eps)``
    and folds them into the duals whenever they leave ``[1/absorb_at, absorb_at]``
    or a kernel row underflows, in which case one exact log-sum-exp sweep
    re-anchors the duals. Columns are exact after each sweep; iteration stops
    when the row-marginal error is at most ``target``.

    Returns (f, g, log_plan, error, iterations).
    """
    a, b = np.exp(log_a), np.exp(log_b)

    def log_sweep(f, g):
        f = eps * log_a - eps * _lse((g[None, :] - cost) / eps, axis=1)
        g = eps * log_b - eps * _lse((f[:, None] - cost) / eps, axis=0)
        return f, g

    def kernel(f, g):
        return np.exp((f[:, None] + g[None, :] - cost) / eps)

    kern = kernel(f, g)
    u = np.ones_like(a)
    v = np.ones_like(b)
    err = np.inf
    it = 0
    while it < max_iter:
        kv = kern @ v
        if not np.all(kv > 0):
            f, g = log_sweep(f + eps * np.log(u), g + eps * np.log(v))
            kern, u, v = kernel(f, g), np.ones_like(a), np.ones_like(b)
            it += 1
            continue
        u = a / kv
        ktu = kern.T @ u
        if not np.all(ktu > 0):
            f, g = log_sweep(f + eps * np.log(u), g + eps * np.log(v))
            kern, u, v = kernel(f, g), np.ones_like(a), np.ones_like(b)
            it += 1
            continue
        v = b / ktu
        it += 1
        err = float(np.abs(u * (kern @ v) - a).max())
        if not np.isfinite(err):
            raise ScaleError(f"Sinkhorn overflow at epsilon={eps:.3g}; use a larger epsilon")
        if err <= target:
            break
        if max(u.max(), v.max()) > absorb_at or min(u.min(), v.min()) < 1.0 / absorb_at:
            f, g = f + eps * np.log(u), g + eps * np.log(v)
            kern, u, v = kernel(f, g), np.ones_like(a), np.ones_like(b)
    f, g = f + eps * np.log(u), g + eps * np.log(v)
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
        raise ScaleError(f"Sinkhorn duals diverged at epsilon={eps:.3g}; use a larger epsilon")
    return f, g, (f[:, None] + g[None, :] - cost) / eps, err, it


def _solve_from(x, y, xs, ys, init, epsilon, eps0, decay, max_outer, max_sinkhorn, tol):
    p, q = x.weights, y.weights
    log_a, log_b = np.log(p), np.log(q)
    const = _quartic_row_term(xs, p)[:, None] + _quartic_row_term(ys, q)[None, :]
    pi = init
    f = np.zeros(x.size)
    g = np.zeros(y.size)
    eps = eps0
    prev_obj = None
    prev_err = np.inf
    tol_schedule = max(tol, INITIAL_TARGET)
    objectives, errors = [], []
    converged = False
    outer = 0
    for outer in range(1, max_outer + 1):
        cost = const - 2.0 * _contract(xs, ys, pi)
        cost = cost - cost.min()
        # loose projections while annealing, tightening geometrically to tol
        target = max(min(tol_schedule, prev_err), 1e-14)
        tol_schedule = max(tol, tol_schedule * TARGET_DECAY)
        f, g, log_plan, err, _ = _sinkhorn_log(log_a, log_b, cost, eps, f, g, target, max_sinkhorn)
        # never accept a projection less accurate than the previous one
        for _ in range(MAX_REFINE):
            if err <= prev_err:
                break
            f, g, log_plan, err, _ = _sinkhorn_log(log_a, log_b, cost, eps, f, g, target, max_sinkhorn)
        pi = np.exp(log_plan)
        if not np.all(np.isfinite(pi)):
            raise ScaleError(f"non-finite plan at epsilon={eps:.3g}; use a larger epsilon")
        obj = _quartic_self_term(xs, p) + _quartic_self_term(ys, q) - 2.0 * _cross_term(xs, ys, pi)
        objectives.append(float(obj))
        errors.append(err)
        prev_err = min(prev_err, err)
        at_final = eps <= epsilon
        if at_final and prev_obj is not None and abs(obj - prev_obj) <= tol * max(abs(obj), 1e-300):
            converged = True
            break
        prev_obj = obj if at_final else None
        eps = max(epsilon, eps * decay)
    if errors and errors[-1] > tol:
        for _ in range(MAX_REFINE):
            f, g, log_plan, err, _ = _sinkhorn_log(log_a, log_b, cost, eps, f, g, tol, max_sinkhorn)
            if err <= tol:
                break
        pi = np.exp(log_plan)
        errors[-1] = min(errors[-1], err)
    return pi, outer, converged, objectives, errors, eps


def entropic_gw_solve(x, y, epsilon, max_outer=200, max_sinkhorn=2000, tol=1e-9, seed=0,
                      restarts=0, decay=0.5):
    """Entropic Gromov-Wasserstein by projected mirror descent.

    Each outer step linearizes the GW cost at the current plan,
    ``L = f 1^T + 1 g^T - 2 Cx pi Cy``, and projects onto the coupling set with
    log-domain Sinkhorn at strength epsilon. Epsilon starts at
    ``median(Cx) * median(Cy)`` (the typical size of a cost entry) and halves
    every outer step until it reaches ``epsilon``; convergence means the
    relative objective change at the final epsilon fell below ``tol``.

    The first run starts from the product plan. ``restarts`` extra runs start
    from random couplings drawn with ``seed``; the best objective wins.

    Parameters
    ----------
    x, y : PointCloud
    epsilon : float
        Final entropic regularization, in the units of the cost (distance^4).
    max_outer : int
    max_sinkhorn : int
        Sinkhorn sweeps per outer step.
    tol : float
        Marginal tolerance for Sinkhorn and relative tolerance on the objective.
    seed : int
    restarts : int

    Returns
    -------
    SolveReport
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if np.any(x.weights <= 0) or np.any(y.weights <= 0):
        raise Unsupported("entropic solver needs strictly positive weights")
    rng = np.random.Generator(np.random.PCG64(seed))
    xs, ys = _centered(x), _centered(y)
    eps0 = max(epsilon, _median_sq_dist(xs, rng) * _median_sq_dist(ys, rng))

    inits = [np.outer(x.weights, y.weights)]
    for _ in range(restarts):
        noise = rng.uniform(0.0, 1.0, (x.size, y.size))
        _, _, log_plan, _, _ = _sinkhorn_log(np.log(x.weights), np.log(y.weights), -np.log(noise),
                                             1.0, np.zeros(x.size), np.zeros(y.size), 1e-12, 1000)
        inits.append(np.exp(log_plan))

    best = None
    for init in inits:
        run = _solve_from(x, y, xs, ys, init, epsilon, eps0, decay, max_outer, max_sinkhorn, tol)
        if best is None or run[3][-1] < best[3][-1]:
            best = run
    pi, outer, converged, objectives, errors, eps = best
    if _within(pi, x, y):
        plan = CouplingPlan(pi, x.weights.copy(), y.weights.copy())
    else:
        # Sinkhorn hit max_sinkhorn before meeting the marginal tolerance
        plan = CouplingPlan.unvalidated(pi, x.weights.copy(), y.weights.copy())
        converged = False
    objective = gw_objective(x, y, plan)
    return SolveReport(
        plan=plan,
        objective=objective,
        iterations=outer,
        converged=converged,
        marginal_error=plan.marginal_error(),
        epsilon=eps,
        objective_history=objectives,
        marginal_error_history=errors,
        restarts=restarts,
    )


def _within(pi, x, y):
    rows = np.abs(pi.sum(axis=1) - x.weights).max()
    cols = np.abs(pi.sum(axis=0) - y.weights).max()
    return max(rows, cols) <= MARGINAL_ATOL and np.all(pi >= 0)


def brute_force_gw(x, y):
    """Exact GW optimum for two uniform clouds of equal size k <= 8.

    With uniform marginals the cost restricted to the transportation polytope
    is concave (both squared-distance matrices are conditionally negative
    definite), so the minimum sits at a vertex, i.e. a permutation.
    """
    k = x.size
    if y.size != k:
        raise Unsupported("brute force needs clouds of equal size")
    if k > BRUTE_FORCE_MAX_K:
        raise TooLarge(f"brute force limited to k <= {BRUTE_FORCE_MAX_K}, got {k}")
    for c in (x, y):
        if np.abs(c.weights - 1.0 / k).max() > 1e-12:
            raise Unsupported("brute force needs uniform weights")
    cx = np.sum((x.points[:, None, :] - x.points[None, :, :]) ** 2, axis=-1)
    cy = np.sum((y.points[:, None, :] - y.points[None, :, :]) ** 2, axis=-1)
    perms = np.array(list(itertools.permutations(range(k))), dtype=np.intp)
    values = np.empty(len(perms))
    chunk = 5040
    for start in range(0, len(perms), chunk):
        ps = perms[start:start + chunk]
        permuted = cy[ps[:, :, None], ps[:, None, :]]
        values[start:start + chunk] = np.sum((cx[None] - permuted) ** 2, axis=(1, 2)) / k**2
    best = int(np.argmin(values))
    plan = CouplingPlan.permutation(perms[best], x, y)
    return SolveReport(
        plan=plan,
        objective=gw_objective(x, y, plan),
        iterations=math.factorial(k),
        converged=True,
        marginal_error=plan.marginal_error(),
    )


def assignment_slope_data(x, y, plan, rel_threshold=1e-3):
    """Rows ``(x_first_coord, y_first_coord, mass)`` for every plan entry above
    ``rel_threshold * max entry``."""
    pi = plan.matrix
    if pi.size == 0:
        return np.zeros((0, 3))
    i, j = np.nonzero(pi > rel_threshold * pi.max())
    return np.column_stack([x.points[i, 0], y.points[j, 0], pi[i, j]])


def map_pairing(x_points, t):
    """Clouds (X, T(X)) with the identity coupling between them."""
    x = PointCloud.uniform(x_points)
    y = PointCloud.uniform(t(x.points))
    k = x.size
    m = np.zeros((k, k))
    np.fill_diagonal(m, 1.0 / k)
    plan = CouplingPlan(m, x.weights, y.weights)
    return x, y, plan
