"""Dense linear algebra used by the regularizers.

Matrices and vectors are plain numpy arrays (row-major ``float64``).
"""

import numpy as np
from scipy import linalg as sla

from .errors import NotPositiveDefiniteError, ValidationError


def _as_matrix(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValidationError(f"expected a 2-D matrix, got shape {A.shape}")
    return A


def matvec(A, x):
    A = _as_matrix(A)
    x = np.asarray(x, dtype=float)
    if x.shape != (A.shape[1],):
        raise ValidationError(f"matvec: matrix has {A.shape[1]} columns, vector has shape {x.shape}")
    return A @ x


def transpose_matvec(A, y):
    """``A.T @ y`` without forming the transpose."""
    A = _as_matrix(A)
    y = np.asarray(y, dtype=float)
    if y.shape != (A.shape[0],):
        raise ValidationError(f"transpose_matvec: matrix has {A.shape[0]} rows, vector has shape {y.shape}")
    return y @ A


def spectral_norm(A, iters: int = 100, seed: int = 0) -> float:
    """Estimate ``||A||_2`` by power iteration on ``A.T A``.

    The Rayleigh-quotient estimate never exceeds the true norm. The start
    vector is drawn from ``default_rng(seed)``.
    """
    if iters < 1:
        raise ValidationError("iters must be >= 1")
    A = _as_matrix(A)
    v = np.random.default_rng(seed).standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(iters):
        w = transpose_matvec(A, matvec(A, v))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        sigma = np.linalg.norm(matvec(A, v))
    return float(sigma)


def leading_singular_values(A, k: int, iters: int = 300, seed: int = 0) -> np.ndarray:
    """The ``k`` largest singular values by power iteration with Hotelling deflation."""
    A = _as_matrix(A)
    G = A.T @ A
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(min(k, A.shape[1])):
        v = rng.standard_normal(G.shape[0])
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(iters):
            w = G @ v
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            v = w / nw
        lam = float(v @ G @ v)
        out.append(np.sqrt(max(lam, 0.0)))
        G = G - lam * np.outer(v, v)
    return np.array(out)


def spd_factor(S):
    """Cholesky factor of a symmetric positive definite matrix, for reuse with :func:`spd_solve`."""
    S = _as_matrix(S)
    if S.shape[0] != S.shape[1]:
        raise ValidationError(f"SPD solve needs a square matrix, got {S.shape}")
    try:
        return sla.cho_factor(S, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"Cholesky breakdown: {exc}") from exc


def spd_solve(factor, rhs):
    rhs = np.asarray(rhs, dtype=float)
    n = factor[0].shape[0]
    if rhs.shape != (n,):
        raise ValidationError(f"rhs has shape {rhs.shape}, expected ({n},)")
    return sla.cho_solve(factor, rhs)


def solve_spd(S, rhs):
    """Solve ``S x = rhs`` for symmetric positive definite ``S`` by Cholesky.

    Raises
    ------
    NotPositiveDefiniteError
        If a non-positive pivot shows up, which usually means the
        regularization parameter is too small or ``S`` is not symmetric.
    """
    return spd_solve(spd_factor(S), rhs)
