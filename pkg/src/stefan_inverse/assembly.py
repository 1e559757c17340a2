"""Discretize the boundary integral identity into a dense system ``A U0 = g``.

Row ``i`` (``i = 1..N``) expresses ``u(s(t_i), t_i) = 0``:

    int_0^b N(s_i, xi; t_i, 0) u0(xi) dxi
        = int_0^t_i N(s_i, s(tau); t_i, tau) sdot(tau) dtau
          - int_0^t_i N(s_i, 0; t_i, tau) h(tau) dtau

with composite Gauss-Legendre quadrature on both axes. Column ``k`` lumps
all quadrature nodes of space cell ``k``, so ``U0[k]`` is the cell value of
``u0`` (compare it with ``u0`` at the cell midpoint).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .kernel import neumann
from .problems import BoundaryTrajectory, ProblemConfig

DEFAULT_POINTS_PER_CELL = 3


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on the reference interval ``[-1, 1]``."""

    points_per_cell: int
    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def gauss_legendre(cls, points_per_cell: int = DEFAULT_POINTS_PER_CELL) -> QuadratureRule:
        if points_per_cell < 1:
            raise ValidationError("points_per_cell must be >= 1")
        x, w = np.polynomial.legendre.leggauss(points_per_cell)
        return cls(points_per_cell, x, w)

    def map_to(self, left, width):
        """Nodes and weights on ``[left, left + width]``, broadcast over arrays of cells."""
        left = np.asarray(left, dtype=float)[..., None]
        half = 0.5 * np.asarray(width, dtype=float)[..., None]
        return left + half * (self.nodes + 1.0), half * self.weights


@dataclass
class DenseSystem:
    A: np.ndarray
    g: np.ndarray
    cell_midpoints: np.ndarray
    space_nodes: np.ndarray
    config: ProblemConfig

    def dump_csv(self, directory) -> None:
        """Write ``A.csv`` (one matrix row per line) and ``g.csv``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        np.savetxt(directory / "A.csv", self.A, delimiter=",", fmt="%.17g")
        np.savetxt(directory / "g.csv", self.g, delimiter=",", fmt="%.17g")


def _check_inputs(traj: BoundaryTrajectory, cfg: ProblemConfig):
    if len(traj) != cfg.N + 1:
        raise ValidationError(f"trajectory has {len(traj)} samples, grid expects N+1={cfg.N + 1}")
    if not np.allclose(traj.times, cfg.times(), rtol=0, atol=1e-12 * cfg.T):
        raise ValidationError("trajectory times do not match the configured time grid")
    if np.any(traj.s <= 0):
        raise ValidationError("front positions must be strictly positive")
    for name in ("s", "sdot", "h"):
        if not np.all(np.isfinite(getattr(traj, name))):
            raise ValidationError(f"trajectory {name} has non-finite entries")


def assemble(traj: BoundaryTrajectory, cfg: ProblemConfig, rule: QuadratureRule | None = None) -> DenseSystem:
    """Build the dense system for trajectory ``traj`` on the grid of ``cfg``.

    The time integrals carry a ``1/sqrt(t_i - tau)`` factor. Each time cell
    is integrated in ``sigma = sqrt(t_i - tau)``, where the integrand is
    smooth, including the cell that ends at the singularity.
    """
    rule = rule or QuadratureRule.gauss_legendre()
    _check_inputs(traj, cfg)
    N, M = cfg.N, cfg.M
    t = cfg.times()
    dxi = cfg.dxi
    xi, wxi = rule.map_to(np.arange(M) * dxi, dxi)  # (M, p)

    A = np.empty((N, M))
    g = np.empty(N)
    for i in range(1, N + 1):
        ti, si = t[i], traj.s[i]
        A[i - 1] = (neumann(si, xi, ti, 0.0) * wxi).sum(axis=1)

        # cell [t_j, t_j+1] becomes sigma in [sqrt(t_i - t_j+1), sqrt(t_i - t_j)]
        # with tau = t_i - sigma^2, dtau = 2 sigma dsigma
        root = np.sqrt(ti - t[: i + 1])
        sig, w_sig = rule.map_to(root[1:], root[:-1] - root[1:])
        sig, w_sig = sig.ravel(), w_sig.ravel()
        tau = ti - sig**2
        integrand = 2.0 * sig * (
            neumann(si, np.interp(tau, t, traj.s), ti, tau) * np.interp(tau, t, traj.sdot)
            - neumann(si, 0.0, ti, tau) * np.interp(tau, t, traj.h)
        )
        g[i - 1] = float(np.dot(w_sig, integrand))

    return DenseSystem(A, g, cfg.cell_midpoints(), xi, cfg)


def collocation_residual(sys: DenseSystem, u0_samples) -> np.ndarray:
    """``A @ u0_samples - g``: how far a candidate initial state is from satisfying every row."""
    u = np.asarray(u0_samples, dtype=float)
    if u.shape != (sys.A.shape[1],):
        raise ValidationError(f"expected {sys.A.shape[1]} samples, got shape {u.shape}")
    return sys.A @ u - sys.g
