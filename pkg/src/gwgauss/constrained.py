"""Closed-form maximizers of cross-covariance objectives under a PSD block constraint.

For diagonal blocks ``diag(d0)`` (m x m, positive) and ``diag(d1)`` (n x n),
the feasible cross-covariances K are those for which
``[[diag(d0), K], [K.T, diag(d1)]]`` is PSD.
"""

import numpy as np

from .errors import DegenerateInput, DimError, NotPositiveDefinite


def _as_vector(x, name):
    x = np.array(x, dtype=np.float64, ndmin=1)
    if x.ndim != 1:
        raise DimError(f"{name} must be a vector")
    return x


def max_cross_cov_frobenius(d0, d1, signs=None):
    """Maximize ``||K||_F^2`` over feasible K.

    The maximum is ``sum_i d0[i] * d1[i]`` over the first n entries, attained by
    K* whose top n x n block is ``diag(signs) sqrt(d0[:n] d1)`` and whose
    remaining rows are zero.

    Parameters
    ----------
    d0 : array-like, shape (m,)
        Positive eigenvalues, non-increasing.
    d1 : array-like, shape (n,)
        Nonnegative eigenvalues, non-increasing, ``n <= m``.
    signs : array-like of ±1, shape (n,), optional
        Reflection choice; defaults to all +1.

    Returns
    -------
    value : float
    kstar : ndarray, shape (m, n)
    """
    d0 = _as_vector(d0, "d0")
    d1 = _as_vector(d1, "d1")
    m, n = d0.size, d1.size
    if n > m:
        raise DimError(f"need n <= m, got n={n}, m={m}")
    if np.any(d0 <= 0):
        raise NotPositiveDefinite("d0 must be strictly positive")
    signs = _signs(signs, n)
    kstar = np.zeros((m, n))
    kstar[:n, :n] = np.diag(signs * np.sqrt(d0[:n] * d1))
    return float(d0[:n] @ d1), kstar


def max_trace_rank_one(alpha, beta):
    """Maximize ``sum_ij K[i, j]`` over feasible K.

    Value ``sqrt(sum(alpha) * sum(beta))`` attained at
    ``K* = outer(alpha, beta) / value``; the Schur complement of K* is singular.
    """
    alpha = _as_vector(alpha, "alpha")
    beta = _as_vector(beta, "beta")
    if np.any(alpha <= 0):
        raise NotPositiveDefinite("alpha must be strictly positive")
    if np.any(beta < 0):
        raise DimError("beta must be nonnegative")
    if not np.any(beta > 0):
        raise DegenerateInput("beta is identically zero")
    value = float(np.sqrt(alpha.sum() * beta.sum()))
    return value, np.outer(alpha, beta) / value


def min_decreasing_unit_inner_product(m):
    """Smallest inner product of two sorted nonnegative unit vectors in R^m, with a minimizing pair."""
    if m < 1:
        raise DimError("m must be >= 1")
    u = np.full(m, 1.0 / np.sqrt(m))
    v = np.zeros(m)
    v[0] = 1.0
    return 1.0 / np.sqrt(m), u, v


def _signs(signs, n):
    if signs is None:
        return np.ones(n)
    signs = np.asarray(signs, dtype=np.float64).reshape(-1)
    if signs.size != n:
        raise DimError(f"expected {n} signs, got {signs.size}")
    if not np.all(np.abs(signs) == 1.0):
        raise ValueError("signs must be ±1")
    return signs


def sample_feasible_boundary(d0, d1, size, rng):
    """Random cross-covariances scaled onto the boundary of the feasible set.

    A Gaussian direction K is rescaled by the largest c with
    ``diag(d1) - c^2 K.T diag(1/d0) K`` PSD. That c solves a generalized
    eigenproblem, so it is computed directly and then shrunk in relative steps
    of 1e-12 until the smallest Schur eigenvalue is nonnegative, which leaves it
    within a few ulps of zero.

    ``d0`` and ``d1`` must be strictly positive.

    Returns
    -------
    ndarray, shape (size, m, n)
    """
    d0 = _as_vector(d0, "d0")
    d1 = _as_vector(d1, "d1")
    if np.any(d0 <= 0) or np.any(d1 <= 0):
        raise NotPositiveDefinite("boundary sampling needs strictly positive spectra")
    m, n = d0.size, d1.size
    k = rng.standard_normal((size, m, n))
    gram = np.einsum("sij,i,sil->sjl", k, 1.0 / d0, k)
    inv_sqrt_d1 = 1.0 / np.sqrt(d1)
    whitened = gram * inv_sqrt_d1[None, :, None] * inv_sqrt_d1[None, None, :]
    top = np.linalg.eigvalsh(whitened)[:, -1]
    c = 1.0 / np.sqrt(top)
    # the analytic c can overshoot by rounding; shrink until the complement is PSD
    for _ in range(60):
        schur = np.diag(d1)[None] - (c**2)[:, None, None] * gram
        low = np.linalg.eigvalsh(schur)[:, 0]
        bad = low < 0
        if not np.any(bad):
            break
        c = np.where(bad, c * (1.0 - 1e-12), c)
    return k * c[:, None, None]
