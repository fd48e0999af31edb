"""Dense linear-algebra helpers for symmetric matrices."""

import numpy as np
from scipy import linalg

SQRT2 = float(np.sqrt(2.0))


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Return (M + M^T) / 2."""
    return 0.5 * (m + m.T)


def max_eig(m: np.ndarray) -> float:
    """Largest eigenvalue of the symmetric part of ``m``."""
    return float(linalg.eigvalsh(symmetrize(m))[-1])


def min_eig(m: np.ndarray) -> float:
    """Smallest eigenvalue of the symmetric part of ``m``."""
    return float(linalg.eigvalsh(symmetrize(m))[0])


def svec(m: np.ndarray) -> np.ndarray:
    """Scaled lower-triangular vectorization of a symmetric matrix.

    Columns of the lower triangle are stacked in order with off-diagonal entries
    multiplied by sqrt(2), so that svec(A) . svec(B) = trace(A B).

    Examples:
        >>> svec(np.array([[1.0, 2.0], [2.0, 3.0]])).round(4).tolist()
        [1.0, 2.8284, 3.0]
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"svec needs a square matrix, got shape {m.shape}")
    n = m.shape[0]
    cols, rows = np.triu_indices(n)  # (col, row) pairs of the lower triangle, column-major
    values = m[rows, cols].copy()
    values[rows != cols] *= SQRT2
    return values


def smat(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`svec`."""
    v = np.asarray(v, dtype=float).reshape(-1)
    n = int(round((np.sqrt(8 * len(v) + 1) - 1) / 2))
    if n * (n + 1) // 2 != len(v):
        raise ValueError(f"Length {len(v)} is not a triangular number")
    cols, rows = np.triu_indices(n)
    values = v.copy()
    values[rows != cols] /= SQRT2
    m = np.zeros((n, n))
    m[rows, cols] = values
    m[cols, rows] = values
    return m


def floor_eigenvalues(m: np.ndarray, floor: float) -> np.ndarray:
    """Project a symmetric matrix onto {M : eig(M) >= floor}."""
    w, v = linalg.eigh(symmetrize(m))
    return symmetrize((v * np.maximum(w, floor)) @ v.T)


def relative_asymmetry(m: np.ndarray) -> float:
    """||M - M^T||_F / ||M||_F (0 for the zero matrix)."""
    norm = float(np.linalg.norm(m))
    if norm == 0.0:
        return 0.0
    return float(np.linalg.norm(m - m.T)) / norm
