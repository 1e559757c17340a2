"""Forward solver for the one-phase Stefan problem.

The moving domain ``0 < x < s(t)`` is mapped onto ``0 < y < 1`` with
``y = x / s(t)``; there the temperature obeys

    u_t = u_yy / s^2 + (y sdot / s) u_y,
    u_y(0, t) = -s h(t),   u(1, t) = 0,   sdot = -u_y(1, t) / s.

Each step is backward Euler with centered differences. The front moves by
an explicit predictor followed by one trapezoidal corrector.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .errors import FrontCollapseError, ValidationError
from .problems import BoundaryTrajectory, InitialCondition, ProblemConfig, Provenance

DEFAULT_DT = 1e-3
MIN_J = 16


@dataclass
class DirectSolution:
    """Forward solve output.

    ``field[n, j]`` is ``u(y_j s(t_n), t_n)`` on the solver's own time grid
    ``solver_times``; ``front`` is resampled on the configured N-grid.
    """

    front: BoundaryTrajectory
    field: np.ndarray
    J: int
    solver_times: np.ndarray
    solver_s: np.ndarray
    solver_sdot: np.ndarray

    @property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.J + 1)

    def field_to_csv(self, path) -> None:
        y = self.y
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "y", "u"])
            for tn, row in zip(self.solver_times, self.field):
                for yj, u in zip(y, row):
                    w.writerow([repr(float(tn)), repr(float(yj)), repr(float(u))])


def _front_speed(u, s, dy):
    # second-order one-sided derivative at y = 1
    uy = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * dy)
    return -uy / s


def _implicit_step(u_old, s_new, sdot_new, h_new, dt, y, dy):
    """Backward Euler step of the transformed equation; returns u at the new level."""
    J = len(y) - 1
    diff = dt / (s_new * dy) ** 2
    conv = dt * y * sdot_new / (2.0 * s_new * dy)
    ab = np.zeros((3, J + 1))
    rhs = u_old.copy()
    # interior rows j = 1..J-1
    ab[1, 1:J] = 1.0 + 2.0 * diff
    ab[0, 2:J + 1] = -diff - conv[1:J]  # coefficient of u_{j+1}
    ab[2, 0:J - 1] = -diff + conv[1:J]  # coefficient of u_{j-1}
    # y = 0: ghost node u_{-1} = u_1 + 2 dy s h
    ab[1, 0] = 1.0 + 2.0 * diff
    ab[0, 1] = -2.0 * diff
    rhs[0] += 2.0 * diff * dy * s_new * h_new
    # y = 1: Dirichlet
    ab[1, J] = 1.0
    ab[2, J - 1] = 0.0
    rhs[J] = 0.0
    return solve_banded((1, 1), ab, rhs)


def solve_direct(
    u0: InitialCondition | Callable,
    h: Callable,
    cfg: ProblemConfig,
    J: int | None = None,
    dt: float = DEFAULT_DT,
) -> DirectSolution:
    """Evolve ``(u, s)`` from ``u0`` on ``[0, b]`` with boundary flux ``h`` up to ``cfg.T``.

    Parameters
    ----------
    u0 : callable
        Initial temperature on ``[0, cfg.b]``.
    h : callable
        Boundary flux ``h(t) >= 0``; vectorized over ``t``.
    J : int, optional
        Number of space intervals on ``[0, 1]``; defaults to ``4 M / 5`` so the
        forward grid never coincides with the inverse grid.
    dt : float
        Solver time step; the front is linearly resampled onto ``cfg.times()``.
    """
    if J is None:
        J = max(MIN_J, (4 * cfg.M) // 5)
    if J < MIN_J:
        raise ValidationError(f"J must be >= {MIN_J}, got {J}")
    if not dt > 0:
        raise ValidationError("dt must be positive")
    n_steps = max(1, int(np.ceil(cfg.T / dt - 1e-9)))
    times = np.linspace(0.0, cfg.T, n_steps + 1)
    dt = times[1] - times[0]
    hv = np.asarray(h(times), dtype=float) * np.ones_like(times)
    if np.any(hv < 0) or not np.all(np.isfinite(hv)):
        raise ValidationError("boundary flux must be finite and nonnegative")

    y = np.linspace(0.0, 1.0, J + 1)
    dy = 1.0 / J
    s = cfg.b
    u = np.asarray(u0(y * s), dtype=float)
    u[-1] = 0.0
    sdot = _front_speed(u, s, dy)

    field = np.empty((n_steps + 1, J + 1))
    field[0] = u
    s_hist = np.empty(n_steps + 1)
    sd_hist = np.empty(n_steps + 1)
    s_hist[0], sd_hist[0] = s, sdot

    for n in range(n_steps):
        s_pred = s + dt * sdot
        if s_pred <= 0:
            raise FrontCollapseError(f"front collapsed at t={times[n + 1]:.6g}")
        u_pred = _implicit_step(u, s_pred, sdot, hv[n + 1], dt, y, dy)
        sdot_pred = _front_speed(u_pred, s_pred, dy)
        s_new = s + 0.5 * dt * (sdot + sdot_pred)
        if s_new <= 0 or not np.isfinite(s_new):
            raise FrontCollapseError(f"front collapsed at t={times[n + 1]:.6g}")
        sdot_mid = (s_new - s) / dt
        u = _implicit_step(u, s_new, sdot_mid, hv[n + 1], dt, y, dy)
        sdot = _front_speed(u, s_new, dy)
        s = s_new
        field[n + 1] = u
        s_hist[n + 1], sd_hist[n + 1] = s, sdot

    t_out = cfg.times()
    front = BoundaryTrajectory(
        t_out,
        np.interp(t_out, times, s_hist),
        np.interp(t_out, times, sd_hist),
        np.asarray(h(t_out), dtype=float) * np.ones_like(t_out),
        Provenance.SIMULATED,
    )
    return DirectSolution(front, field, J, times, s_hist, sd_hist)


def direct_stability_gap(data1, data2, cfg: ProblemConfig, J: int | None = None, dt: float = DEFAULT_DT) -> float:
    """``sup_t |s1(t) - s2(t)|`` over the solver grid for two ``(u0, h, b)`` data sets."""
    fronts = []
    for u0, h, b in (data1, data2):
        sol = solve_direct(u0, h, _with_b(cfg, b), J=J, dt=dt)
        fronts.append(sol.solver_s)
    return float(np.max(np.abs(fronts[0] - fronts[1])))


def _with_b(cfg, b):
    from dataclasses import replace

    return cfg if b == cfg.b else replace(cfg, b=b)
