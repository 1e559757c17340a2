"""Fast invariant checks runnable from an installed package (``stefan-inverse selftest``)."""

import math

import numpy as np
from scipy import integrate

from .assembly import assemble
from .kernel import heat_kernel, neumann
from .linalg import matvec, solve_spd, spectral_norm, transpose_matvec
from .problems import example1, example2
from .regularize import RegularizationConfig, landweber_iterate, tikhonov_iterate


def _kernel_normalization():
    x, t = 0.3, 0.7
    w = 40 * math.sqrt(t)
    total = sum(
        integrate.quad(lambda xi: heat_kernel(x, xi, t, 0.0), a, c, epsabs=1e-13, limit=200)[0]
        for a, c in ((x - w, x), (x, x + w))
    )
    return abs(total - 1.0) < 1e-10


def _kernel_symmetry():
    return heat_kernel(0.2, 0.9, 1.3, 0.4) == heat_kernel(0.9, 0.2, 1.3, 0.4) and math.isclose(
        neumann(0.0, 0.4, 1.0, 0.0), 2 * heat_kernel(0.0, 0.4, 1.0, 0.0), rel_tol=1e-15
    )


def _adjoint():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((7, 5))
    x, y = rng.standard_normal(5), rng.standard_normal(7)
    return abs(matvec(A, x) @ y - x @ transpose_matvec(A, y)) < 1e-12


def _spd():
    rng = np.random.default_rng(2)
    B = rng.standard_normal((30, 30))
    S = B.T @ B + np.eye(30)
    rhs = rng.standard_normal(30)
    return np.linalg.norm(S @ solve_spd(S, rhs) - rhs) <= 1e-10 * np.linalg.norm(rhs)


def _power_iteration():
    return abs(spectral_norm(np.diag([3.0, 1.0]), iters=100) - 3.0) < 1e-8


def _regularizer_fixed_point():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((10, 8))
    g = rng.standard_normal(10)
    ls = np.linalg.lstsq(A, g, rcond=None)[0]
    tik = tikhonov_iterate((A, g), RegularizationConfig("tikhonov", lam=1e-3, max_iters=500, stop_tol=0))
    return np.linalg.norm(tik.u0 - ls) < 1e-6


def _landweber_monotone():
    cfg, traj, _ = example2(N=60, M=60)
    rec = landweber_iterate(assemble(traj, cfg), RegularizationConfig("landweber", max_iters=500, stop_tol=0))
    return bool(np.all(np.diff(rec.residual_history) <= 1e-12))


def _assembly_positive():
    cfg, traj, ic = example1(N=60, M=60)
    sys = assemble(traj, cfg)
    bound = cfg.dxi / math.sqrt(math.pi * cfg.dt)
    return bool(np.all(sys.A > 0) and np.all(sys.A <= bound))


CHECKS = [
    ("kernel normalization", _kernel_normalization),
    ("kernel symmetry", _kernel_symmetry),
    ("adjoint identity", _adjoint),
    ("SPD solve residual", _spd),
    ("power iteration on diag(3,1)", _power_iteration),
    ("Tikhonov least-squares fixed point", _regularizer_fixed_point),
    ("Landweber residual monotone", _landweber_monotone),
    ("assembled matrix positive and bounded", _assembly_positive),
]


def run_selftest(emit=print) -> bool:
    ok = True
    for name, check in CHECKS:
        try:
            passed = bool(check())
        except Exception as exc:  # report, keep going
            passed = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        ok &= passed
        emit(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
