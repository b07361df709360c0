"""Gaussian measures, affine maps, point clouds and Gaussian moment identities."""

from dataclasses import dataclass

import numpy as np

from .errors import DimError, NotPsd, SchemaError
from .linalg import DEFAULT_PSD_TOL, PsdClass, as_symmetric, clamped_spectrum, psd_classify, sorted_eig


@dataclass(frozen=True)
class GaussianMeasure:
    """N(mean, cov). Build through :func:`make_gaussian` to get validation."""

    mean: np.ndarray
    cov: np.ndarray

    @property
    def dim(self):
        return self.mean.shape[0]


@dataclass(frozen=True)
class AffineMap:
    """x -> offset + matrix @ x, with ``matrix`` of shape (n, m)."""

    matrix: np.ndarray
    offset: np.ndarray

    @property
    def in_dim(self):
        return self.matrix.shape[1]

    @property
    def out_dim(self):
        return self.matrix.shape[0]

    def __call__(self, x):
        """Apply to a single point of shape (m,) or to rows of an array (k, m)."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.in_dim:
            raise DimError(f"map expects inputs of dimension {self.in_dim}, got {x.shape[-1]}")
        return x @ self.matrix.T + self.offset

    def compose(self, inner):
        """``self ∘ inner``: first apply ``inner``, then ``self``."""
        if inner.out_dim != self.in_dim:
            raise DimError("incompatible dimensions in composition")
        return AffineMap(self.matrix @ inner.matrix, self.matrix @ inner.offset + self.offset)

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim), np.zeros(dim))


@dataclass(frozen=True)
class PointCloud:
    """Weighted empirical measure; ``points`` has one row per atom."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[0] < 1:
            raise DimError(f"points must be a non-empty 2-D array, got shape {self.points.shape}")
        if self.weights.shape != (self.points.shape[0],):
            raise DimError("one weight per point is required")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise SchemaError("weights must be nonnegative and sum to 1", "weights")

    @classmethod
    def uniform(cls, points):
        points = np.array(points, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, None]
        k = points.shape[0]
        return cls(points, np.full(k, 1.0 / k))

    @property
    def size(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def mean(self):
        return self.weights @ self.points

    def covariance(self):
        """Weighted (population, not Bessel-corrected) covariance."""
        c = self.points - self.mean()
        return (c * self.weights[:, None]).T @ c


def make_gaussian(mean, cov, tol=DEFAULT_PSD_TOL):
    mean = np.array(mean, dtype=np.float64, ndmin=1)
    if mean.ndim != 1:
        raise DimError("mean must be a vector")
    cov = as_symmetric(cov, "cov")
    if cov.shape[0] != mean.shape[0]:
        raise DimError(f"mean has dimension {mean.shape[0]} but cov is {cov.shape}")
    if not np.all(np.isfinite(mean)):
        raise DimError("mean has non-finite entries")
    if psd_classify(cov, tol) is PsdClass.INDEFINITE:
        raise NotPsd("covariance is not positive semi-definite")
    return GaussianMeasure(mean, cov)


def push_forward(g, t):
    """Law of ``t(X)`` for ``X ~ g``, exact for affine ``t``."""
    if t.in_dim != g.dim:
        raise DimError(f"map expects dimension {t.in_dim}, measure has {g.dim}")
    cov = t.matrix @ g.cov @ t.matrix.T
    return GaussianMeasure(t(g.mean), 0.5 * (cov + cov.T))


def pca_align(g):
    """Center and rotate ``g`` into its principal frame.

    Returns the map ``x -> P.T (x - mean)`` and the image measure
    ``N(0, diag(eigenvalues))`` with eigenvalues non-increasing.
    """
    w, p = clamped_spectrum(g.cov)
    t = AffineMap(p.T.copy(), -p.T @ g.mean)
    return t, GaussianMeasure(np.zeros(g.dim), np.diag(w))


def sample(g, k, seed):
    """Draw ``k`` iid points from ``g`` as a uniformly weighted cloud.

    Uses ``numpy.random.Generator(PCG64(seed))`` and the factor
    ``P diag(sqrt(lambda))`` so rank-deficient covariances need no pivoting.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    w, p = clamped_spectrum(g.cov)
    factor = p * np.sqrt(w)
    rng = np.random.Generator(np.random.PCG64(seed))
    z = rng.standard_normal((k, g.dim))
    return PointCloud.uniform(g.mean + z @ factor.T)


def isserlis_fourth_moment(cov, i, j, k, l):
    """E[X_i X_j X_k X_l] for X ~ N(0, cov)."""
    cov = as_symmetric(cov, "cov")
    d = cov.shape[0]
    for idx in (i, j, k, l):
        if not 0 <= idx < d:
            raise DimError(f"index {idx} out of range for dimension {d}")
    return float(cov[i, j] * cov[k, l] + cov[i, k] * cov[j, l] + cov[i, l] * cov[j, k])


def squared_coordinate_covariance(cov):
    """Cov(X_i^2, X_j^2) = 2 cov_ij^2 for a centered Gaussian X."""
    cov = as_symmetric(cov, "cov")
    return 2.0 * cov**2


def fit_gaussian(cloud):
    """Moment-matched Gaussian of a weighted cloud (used for reporting only)."""
    return make_gaussian(cloud.mean(), cloud.covariance())


def principal_spectrum(g):
    """Covariance eigenvalues of ``g``, non-increasing, clamped at zero."""
    return clamped_spectrum(g.cov).eigenvalues


def spectral_frame(g):
    """(eigenvalues, basis) of the covariance, sorted non-increasing."""
    return clamped_spectrum(g.cov)


__all__ = [
    "AffineMap",
    "GaussianMeasure",
    "PointCloud",
    "fit_gaussian",
    "isserlis_fourth_moment",
    "make_gaussian",
    "pca_align",
    "principal_spectrum",
    "push_forward",
    "sample",
    "sorted_eig",
    "spectral_frame",
    "squared_coordinate_covariance",
]
