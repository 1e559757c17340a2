"""Independent reference computations in extended precision."""

import mpmath as mp
import numpy as np


def mp_solve(S, rhs, dps=50):
    """Gaussian elimination in ``dps``-digit arithmetic."""
    with mp.workdps(dps):
        x = mp.lu_solve(mp.matrix(S.tolist()), mp.matrix(list(rhs)))
        return np.array([float(v) for v in x])


def mp_least_squares(A, g, dps=50):
    """Normal-equations least-squares solution in ``dps``-digit arithmetic."""
    with mp.workdps(dps):
        Am = mp.matrix(A.tolist())
        gm = mp.matrix(list(g))
        x = mp.lu_solve(Am.T * Am, Am.T * gm)
        return np.array([float(v) for v in x])


def mp_spectral_norm(A, iters=200, dps=40):
    """Power iteration on A^T A carried out in ``dps``-digit arithmetic."""
    with mp.workdps(dps):
        Am = mp.matrix(A.tolist())
        G = Am.T * Am
        v = mp.matrix([1] * A.shape[1])
        for _ in range(iters):
            w = G * v
            v = w / mp.norm(w)
        return float(mp.sqrt(mp.norm(G * v) / mp.norm(v)))


def naive_matvec(A, x):
    out = []
    for i in range(A.shape[0]):
        acc = 0.0
        for j in range(A.shape[1]):
            acc += A[i, j] * x[j]
        out.append(acc)
    return np.array(out)
