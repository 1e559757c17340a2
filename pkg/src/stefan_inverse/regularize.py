"""Iterated Tikhonov and Landweber regularization of ``A U0 = g``.

Both iterations start from zero. They stop at ``max_iters``, when the
relative change of the iterate drops below ``stop_tol``, or, when
``discrepancy_tau`` is set, once ``||A U - g|| <= tau * delta`` with
``delta = noise_level * ||g||``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ValidationError
from .linalg import matvec, spd_factor, spd_solve, spectral_norm, transpose_matvec

Method = Literal["tikhonov", "landweber"]
StopReason = Literal["max_iters", "tol", "discrepancy"]

LANDWEBER_SAFETY = 0.9
DEFAULT_MAX_ITERS = {"tikhonov": 200, "landweber": 20000}
DEFAULT_STOP_TOL = 1e-8
DEFAULT_DISCREPANCY_TAU = 1.1


@dataclass
class RegularizationConfig:
    """Settings for one regularized solve.

    ``lam`` is the Tikhonov penalty, or the Landweber step size. A Landweber
    step left as ``None`` becomes ``0.9 / ||A||^2`` with the norm estimated
    by power iteration.
    """

    method: Method = "tikhonov"
    lam: float | None = None
    max_iters: int | None = None
    stop_tol: float = DEFAULT_STOP_TOL
    discrepancy_tau: float | None = None
    noise_level_estimate: float = 0.0
    project_nonnegative: bool = False

    def __post_init__(self):
        if self.method not in DEFAULT_MAX_ITERS:
            raise ValidationError(f"unknown method {self.method!r}")
        if self.max_iters is None:
            self.max_iters = DEFAULT_MAX_ITERS[self.method]
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if self.lam is not None and not self.lam > 0:
            raise ValidationError(f"lambda must be positive, got {self.lam}")
        if self.discrepancy_tau is not None and self.discrepancy_tau < 1:
            raise ValidationError("discrepancy_tau must be >= 1")
        if self.noise_level_estimate < 0:
            raise ValidationError("noise_level_estimate must be nonnegative")


@dataclass
class Reconstruction:
    u0: np.ndarray
    iterations_run: int
    residual_history: np.ndarray
    rel_change_history: np.ndarray
    stop_reason: StopReason
    lam: float
    method: Method = "tikhonov"
    extra: dict = field(default_factory=dict)

    def trace_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "residual", "rel_change"])
            for k, (r, c) in enumerate(zip(self.residual_history, self.rel_change_history), start=1):
                w.writerow([k, repr(float(r)), repr(float(c))])


def _system_arrays(sys):
    A = getattr(sys, "A", None)
    if A is None:
        A, g = sys
    else:
        g = sys.g
    A = np.asarray(A, dtype=float)
    g = np.asarray(g, dtype=float)
    if A.ndim != 2 or g.shape != (A.shape[0],):
        raise ValidationError(f"incompatible system shapes {A.shape} and {g.shape}")
    return A, g


def _iterate(step, A, g, cfg: RegularizationConfig, lam: float) -> Reconstruction:
    n = A.shape[1]
    u = np.zeros(n)
    target = None
    if cfg.discrepancy_tau is not None:
        target = cfg.discrepancy_tau * cfg.noise_level_estimate * np.linalg.norm(g)
    residuals, changes = [], []
    reason: StopReason = "max_iters"
    for _ in range(cfg.max_iters):
        new = step(u)
        if cfg.project_nonnegative:
            np.maximum(new, 0.0, out=new)
        res = float(np.linalg.norm(matvec(A, new) - g))
        norm_new = np.linalg.norm(new)
        change = float(np.linalg.norm(new - u) / norm_new) if norm_new > 0 else 0.0
        residuals.append(res)
        changes.append(change)
        u = new
        if target is not None and res <= target:
            reason = "discrepancy"
            break
        if change < cfg.stop_tol:
            reason = "tol"
            break
    return Reconstruction(u, len(residuals), np.array(residuals), np.array(changes), reason, lam, cfg.method)


def tikhonov_iterate(sys, cfg: RegularizationConfig) -> Reconstruction:
    """Iterated Tikhonov: solve ``(A^T A + lam I) U_{m+1} = A^T g + lam U_m``.

    ``sys`` is a :class:`~stefan_inverse.assembly.DenseSystem` or an
    ``(A, g)`` pair. The Cholesky factor is computed once.
    """
    if cfg.method != "tikhonov":
        raise ValidationError("config method is not tikhonov")
    if cfg.lam is None:
        raise ValidationError("Tikhonov needs an explicit lambda > 0")
    A, g = _system_arrays(sys)
    lam = cfg.lam
    factor = spd_factor(A.T @ A + lam * np.eye(A.shape[1]))
    atg = transpose_matvec(A, g)
    return _iterate(lambda u: spd_solve(factor, atg + lam * u), A, g, cfg, lam)


def landweber_iterate(sys, cfg: RegularizationConfig, norm_seed: int = 0) -> Reconstruction:
    """Landweber: ``U_{m+1} = U_m - lam A^T (A U_m - g)``, matrix-free."""
    if cfg.method != "landweber":
        raise ValidationError("config method is not landweber")
    A, g = _system_arrays(sys)
    sigma = spectral_norm(A, iters=100, seed=norm_seed)
    if cfg.lam is None:
        lam = LANDWEBER_SAFETY / sigma**2
    else:
        lam = cfg.lam
        if lam * sigma**2 > 1.0:
            raise ValidationError(f"Landweber step {lam:g} exceeds 1/||A||^2 = {1 / sigma**2:g}")
    rec = _iterate(lambda u: u - lam * transpose_matvec(A, matvec(A, u) - g), A, g, cfg, lam)
    rec.extra["sigma_estimate"] = sigma
    return rec


def reconstruct(sys, cfg: RegularizationConfig) -> Reconstruction:
    if cfg.method == "tikhonov":
        return tikhonov_iterate(sys, cfg)
    return landweber_iterate(sys, cfg)
