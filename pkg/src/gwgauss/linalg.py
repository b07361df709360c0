"""Symmetric linear algebra shared by the rest of the package.

All routines work in float64 and never mutate their inputs.
"""

from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DimError, InvalidMatrix, NotPsd, SingularBlock

DEFAULT_PSD_TOL = 1e-9


class PsdClass(Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    POSITIVE_SEMIDEFINITE = "PositiveSemiDefinite"
    INDEFINITE = "Indefinite"


class SpectralDecomposition(NamedTuple):
    """Eigenpairs of a symmetric matrix.

    ``basis[:, i]`` is the eigenvector of ``eigenvalues[i]``; eigenvalues are
    sorted non-increasing.
    """

    eigenvalues: np.ndarray
    basis: np.ndarray

    def reconstruct(self):
        return (self.basis * self.eigenvalues) @ self.basis.T


def as_symmetric(a, name="matrix"):
    """Return ``(a + a.T) / 2`` as a float64 array, validating shape and finiteness."""
    s = np.array(a, dtype=np.float64, ndmin=2)
    if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] < 1:
        raise DimError(f"{name} must be a non-empty square matrix, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise InvalidMatrix(f"{name} has non-finite entries")
    return 0.5 * (s + s.T)


def sorted_eig(s):
    """Eigendecomposition with eigenvalues sorted in decreasing order.

    Each eigenvector is sign-normalized so that its first entry of largest
    magnitude is nonnegative. Ties keep the column order returned by LAPACK
    after that normalization (stable sort), so the output is deterministic.

    Parameters
    ----------
    s : array-like, shape (d, d)
        Symmetric matrix (symmetrized on entry).

    Returns
    -------
    SpectralDecomposition
    """
    s = as_symmetric(s)
    w, v = np.linalg.eigh(s)
    pivots = np.argmax(np.abs(v), axis=0)
    signs = np.where(v[pivots, np.arange(v.shape[1])] < 0, -1.0, 1.0)
    v = v * signs
    order = np.argsort(-w, kind="stable")
    return SpectralDecomposition(w[order], v[:, order])


def _scale(eigenvalues):
    return max(1.0, float(np.max(np.abs(eigenvalues))))


def psd_classify(s, tol=DEFAULT_PSD_TOL):
    """Classify a symmetric matrix by the sign of its spectrum.

    Thresholds are relative to ``max(1, |lambda_max|)``.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    w = np.linalg.eigvalsh(as_symmetric(s))
    scale = _scale(w)
    if np.all(w > tol * scale):
        return PsdClass.POSITIVE_DEFINITE
    if np.all(w >= -tol * scale):
        return PsdClass.POSITIVE_SEMIDEFINITE
    return PsdClass.INDEFINITE


def clamped_spectrum(s, tol=DEFAULT_PSD_TOL):
    """Sorted decomposition of a PSD matrix with tolerated negative eigenvalues set to 0.

    Raises
    ------
    NotPsd
        If some eigenvalue is below ``-tol * max(1, |lambda_max|)``.
    """
    dec = sorted_eig(s)
    w = dec.eigenvalues
    if w.size and w[-1] < -tol * _scale(w):
        raise NotPsd(f"matrix has eigenvalue {w[-1]:.6g} < 0")
    return SpectralDecomposition(np.clip(w, 0.0, None), dec.basis)


def sym_sqrt(s, tol=DEFAULT_PSD_TOL):
    """Unique symmetric PSD square root."""
    w, p = clamped_spectrum(s, tol)
    r = (p * np.sqrt(w)) @ p.T
    return 0.5 * (r + r.T)


def sym_inv_sqrt(s, tol=DEFAULT_PSD_TOL):
    w, p = clamped_spectrum(s, tol)
    if np.any(w <= tol * _scale(w)):
        raise SingularBlock("matrix is singular, no inverse square root")
    r = (p / np.sqrt(w)) @ p.T
    return 0.5 * (r + r.T)


def schur_complement(sigma0, sigma1, k):
    """``sigma1 - k.T @ inv(sigma0) @ k`` for a positive definite ``sigma0``."""
    sigma0 = as_symmetric(sigma0, "sigma0")
    sigma1 = as_symmetric(sigma1, "sigma1")
    k = np.array(k, dtype=np.float64, ndmin=2)
    if k.shape != (sigma0.shape[0], sigma1.shape[0]):
        raise DimError(f"K must have shape {(sigma0.shape[0], sigma1.shape[0])}, got {k.shape}")
    if psd_classify(sigma0) is not PsdClass.POSITIVE_DEFINITE:
        raise SingularBlock("sigma0 must be positive definite")
    s = sigma1 - k.T @ np.linalg.solve(sigma0, k)
    return 0.5 * (s + s.T)


def schur_feasible(sigma0, sigma1, k, tol=DEFAULT_PSD_TOL):
    """True iff the block matrix [[sigma0, k], [k.T, sigma1]] is PSD.

    Checked through the Schur complement, so ``sigma0`` must be positive definite.
    """
    return psd_classify(schur_complement(sigma0, sigma1, k), tol) is not PsdClass.INDEFINITE
