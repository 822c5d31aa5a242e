"""Small dense symmetric-matrix helpers used by the conic solver and the
Gaussian sampler.  Problem matrices here are tiny (order < ~200), so the
LAPACK-backed numpy routines are wrapped behind the exact contracts the
rest of the package relies on.
"""

from __future__ import annotations

import numpy as np

__all__ = ["as_symmetric", "eigh", "psd_project", "factor_sqrt"]

_SYM_TOL = 1e-8


def as_symmetric(a: np.ndarray, tol: float = _SYM_TOL) -> np.ndarray:
    """Validate near-symmetry and return the exactly symmetrized copy."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = 1.0 + np.linalg.norm(a, "fro")
    skew = np.max(np.abs(a - a.T)) if a.size else 0.0
    if skew > tol * scale:
        raise ValueError(f"matrix is not symmetric: max |a - a'| = {skew:g}")
    return 0.5 * (a + a.T)


def eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues ascending, orthonormal eigenvectors as columns)
    with a = V diag(w) V'.
    """
    a = as_symmetric(a)
    w, v = np.linalg.eigh(a)
    return w, v


def psd_project(a: np.ndarray) -> np.ndarray:
    """Nearest positive-semidefinite matrix in Frobenius norm (clip eigenvalues)."""
    w, v = eigh(a)
    if w.size and w[0] >= 0.0:
        return as_symmetric(a)
    w = np.clip(w, 0.0, None)
    return 0.5 * ((v * w) @ v.T + ((v * w) @ v.T).T)


def factor_sqrt(a: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """A factor F with F F' = a, for positive-semidefinite a.

    Built from the eigendecomposition, F = V sqrt(clip(w, 0)).  Inputs that
    are indefinite beyond tol (relative to 1 + ||a||_F) are rejected; apply
    psd_project first in that case.
    """
    w, v = eigh(a)
    scale = 1.0 + np.linalg.norm(a, "fro")
    if w.size and w[0] < -tol * scale:
        raise ValueError(
            f"matrix is indefinite (min eigenvalue {w[0]:g}); apply psd_project before factoring"
        )
    return v * np.sqrt(np.clip(w, 0.0, None))
