"""Closed-form Gromov-Wasserstein quantities between Gaussian measures.

Everything here depends on the measures only through their sorted covariance
spectra (and principal frames, for maps). Arguments are oriented internally so
that the source is the measure of larger rank; the GW quantities are symmetric,
so this only matters for maps, and the swap is reported in :class:`GwBounds`.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constrained import _signs
from .errors import DimError, GwGaussError, OrientationError
from .gaussian import AffineMap, GaussianMeasure, pca_align, spectral_frame
from .linalg import PsdClass, psd_classify, sym_inv_sqrt, sym_sqrt

# eigenvalues at or below RANK_TOL * lambda_max count as zero
RANK_TOL = 1e-12
PROPORTIONAL_RTOL = 1e-9


@dataclass(frozen=True)
class GwBounds:
    """LGW_2^2 <= GW_2^2 <= GGW_2^2 together with the gap and its a priori cap."""

    lower: float
    upper: float
    exact: Optional[float]
    gap: float
    gap_cap: float
    swapped: bool = False
    source_rank: int = 0
    target_rank: int = 0

    @property
    def scale(self):
        return max(1.0, self.upper)


def _rank(eigenvalues):
    if eigenvalues.size == 0 or eigenvalues[0] <= 0:
        return 0
    return int(np.count_nonzero(eigenvalues > RANK_TOL * eigenvalues[0]))


def reduce_degenerate(g):
    """Project ``g`` onto its support after PCA alignment.

    Returns the centered measure ``N(0, diag(lambda_1..lambda_r))`` on R^r and r.
    A zero covariance yields the point mass at 0 on R^1 with rank 0.
    """
    _, aligned = pca_align(g)
    w = np.diag(aligned.cov)
    r = _rank(w)
    if r == 0:
        return GaussianMeasure(np.zeros(1), np.zeros((1, 1))), 0
    return GaussianMeasure(np.zeros(r), np.diag(w[:r])), r


def _reduced_spectrum(g):
    w = spectral_frame(g).eigenvalues
    return w[: _rank(w)]


def _oriented_spectra(g0, g1):
    """Nonzero sorted spectra (alpha, beta) with len(alpha) >= len(beta), and whether they were swapped."""
    a, b = _reduced_spectrum(g0), _reduced_spectrum(g1)
    if a.size < b.size:
        return b, a, True
    return a, b, False


def ggw2_from_spectra(alpha, beta):
    """GGW_2^2 from non-increasing spectra, ``len(alpha) >= len(beta)``."""
    n = beta.size
    head = alpha[:n]
    return float(4.0 * (alpha.sum() - beta.sum()) ** 2
                 + 8.0 * np.sum((head - beta) ** 2)
                 + 8.0 * np.sum(alpha[n:] ** 2))


def lgw2_from_spectra(alpha, beta):
    """LGW_2^2 from non-increasing spectra, ``len(alpha) >= len(beta)``."""
    n = beta.size
    head = alpha[:n]
    return float(4.0 * (alpha.sum() - beta.sum()) ** 2
                 + 4.0 * (np.linalg.norm(alpha) - np.linalg.norm(beta)) ** 2
                 + 4.0 * np.sum((head - beta) ** 2)
                 + 4.0 * np.sum(alpha[n:] ** 2))


def cauchy_gap(alpha, beta):
    """GGW_2^2 - LGW_2^2 as ``8 (|alpha| |beta| - <alpha[:n], beta>)``."""
    n = beta.size
    return float(8.0 * (np.linalg.norm(alpha) * np.linalg.norm(beta) - alpha[:n] @ beta))


def ggw2_squared(g0, g1):
    """Gromov-Wasserstein cost restricted to Gaussian couplings (upper bound on GW_2^2)."""
    alpha, beta, _ = _oriented_spectra(g0, g1)
    return ggw2_from_spectra(alpha, beta)


def lgw2_squared(g0, g1):
    """Lower bound on GW_2^2 from separately maximizing the order-2 and order-4 co-moment terms."""
    alpha, beta, _ = _oriented_spectra(g0, g1)
    return lgw2_from_spectra(alpha, beta)


def _proportional_exact(alpha, beta):
    if alpha.size == 0:
        return 0.0
    padded = np.zeros_like(alpha)
    padded[: beta.size] = beta
    lam = padded.sum() / alpha.sum()
    ref = np.maximum(np.abs(padded), lam * alpha)
    if not np.all(np.abs(padded - lam * alpha) <= PROPORTIONAL_RTOL * ref):
        return None
    return float((lam - 1.0) ** 2 * (4.0 * alpha.sum() ** 2 + 8.0 * np.sum(alpha**2)))


def gw2_proportional(g0, g1):
    """Exact GW_2^2 when the sorted spectra are proportional, else ``None``.

    With ``beta = lam * alpha`` both bounds coincide and equal
    ``(lam - 1)^2 (4 tr(S0)^2 + 8 |S0|_F^2)``. Spectra are compared after
    dropping null directions and zero-padding the shorter one, with
    ``lam = tr(S1) / tr(S0)``. The optimal map in this case is
    :func:`ggw_map`, which reduces to ``m1 + sqrt(lam) P1 diag(signs) P0.T (x - m0)``.
    """
    alpha, beta, _ = _oriented_spectra(g0, g1)
    return _proportional_exact(alpha, beta)


def gap_bound(g0, g1):
    """Both bounds, the gap between them, its cap and the exact value when known."""
    alpha, beta, swapped = _oriented_spectra(g0, g1)
    upper = ggw2_from_spectra(alpha, beta)
    lower = lgw2_from_spectra(alpha, beta)
    gap = upper - lower
    scale = max(1.0, upper)
    if abs(gap - cauchy_gap(alpha, beta)) > 1e-9 * scale:
        raise GwGaussError("gap identity violated; spectra are numerically unreliable")
    # m is the rank of the source after reduction, so the cap is invariant under it
    m = alpha.size
    cap = 0.0 if m == 0 else 8.0 * np.linalg.norm(alpha) * np.linalg.norm(beta) * (1.0 - 1.0 / np.sqrt(m))
    return GwBounds(
        lower=lower,
        upper=upper,
        exact=_proportional_exact(alpha, beta),
        gap=gap,
        gap_cap=float(cap),
        swapped=swapped,
        source_rank=int(alpha.size),
        target_rank=int(beta.size),
    )


def ggw_map(g0, g1, signs=None):
    """Affine map T with ``(id, T)#g0`` optimal among Gaussian couplings.

    ``T(x) = m1 + P1 A P0.T (x - m0)`` where the only nonzero block of A is
    the leading r1 x r1 diagonal ``signs * sqrt(d1 / d0)``, r1 being the rank
    of the target covariance. Dimensions may be in either order, but the source
    must have rank >= target rank.

    Parameters
    ----------
    g0, g1 : GaussianMeasure
        Source on R^m and target on R^n.
    signs : array-like of ±1, shape (r1,), optional
        Reflection of each principal axis; defaults to all +1.

    Raises
    ------
    OrientationError
        If ``rank(cov0) < rank(cov1)``.
    """
    w0, p0 = spectral_frame(g0)
    w1, p1 = spectral_frame(g1)
    r0, r1 = _rank(w0), _rank(w1)
    if r0 < r1:
        raise OrientationError(f"source rank {r0} < target rank {r1}; swap the measures")
    s = _signs(signs, r1)
    a = np.zeros((g1.dim, g0.dim))
    a[np.arange(r1), np.arange(r1)] = s * np.sqrt(w1[:r1] / w0[:r1])
    matrix = p1 @ a @ p0.T
    return AffineMap(matrix, g1.mean - matrix @ g0.mean)


def w2_squared(g0, g1):
    """Squared 2-Wasserstein distance and, if cov0 is nonsingular, the Monge map.

    Returns
    -------
    value : float
    t : AffineMap or None
    """
    if g0.dim != g1.dim:
        raise DimError(f"W2 needs equal dimensions, got {g0.dim} and {g1.dim}")
    root0 = sym_sqrt(g0.cov)
    cross = sym_sqrt(root0 @ g1.cov @ root0)
    value = float(np.sum((g0.mean - g1.mean) ** 2) + np.trace(g0.cov) + np.trace(g1.cov) - 2.0 * np.trace(cross))
    value = max(value, 0.0)
    if psd_classify(g0.cov) is not PsdClass.POSITIVE_DEFINITE:
        return value, None
    inv_root0 = sym_inv_sqrt(g0.cov)
    a = inv_root0 @ cross @ inv_root0
    a = 0.5 * (a + a.T)
    return value, AffineMap(a, g1.mean - a @ g0.mean)
