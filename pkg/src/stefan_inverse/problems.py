"""Stefan problem instances: configuration, boundary data, benchmarks, noise."""

from __future__ import annotations

import csv
import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import erf

from .errors import ValidationError

DEFAULT_STEPS = 250
DEFAULT_SMOOTHING_WINDOW = 5


@dataclass(frozen=True)
class ProblemConfig:
    """Physical constants and grid sizes of one inverse problem.

    ``H`` bounds the initial slope (``0 <= u0(x) <= H (b - x)``), ``h_bound``
    bounds the boundary flux and ``sobolev_bound`` the H^1 norm of ``u0``.
    """

    b: float
    T: float = 1.0
    N: int = DEFAULT_STEPS
    M: int = DEFAULT_STEPS
    H: float = 1.0
    h_bound: float | None = None
    sobolev_bound: float | None = None

    def __post_init__(self):
        if not self.b > 0 or not self.T > 0:
            raise ValidationError(f"need b > 0 and T > 0, got b={self.b}, T={self.T}")
        if self.N < 2 or self.M < 2:
            raise ValidationError(f"need N, M >= 2, got N={self.N}, M={self.M}")
        if self.H < 0:
            raise ValidationError(f"H must be nonnegative, got {self.H}")

    @property
    def data_bound(self) -> float:
        """``max(||h||_inf, H)``; bounds both the front speed and the temperature slope."""
        if self.h_bound is None:
            return self.H
        return max(self.h_bound, self.H)

    @property
    def dt(self) -> float:
        return self.T / self.N

    @property
    def dxi(self) -> float:
        return self.b / self.M

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.N + 1)

    def cell_midpoints(self) -> np.ndarray:
        return (np.arange(self.M) + 0.5) * self.dxi

    def with_grid(self, N: int | None = None, M: int | None = None) -> ProblemConfig:
        return dataclasses.replace(self, N=self.N if N is None else N, M=self.M if M is None else M)


class Provenance(str, enum.Enum):
    ANALYTIC = "analytic"
    SIMULATED = "simulated"
    NOISY = "noisy"


@dataclass
class BoundaryTrajectory:
    """Front position, front speed and boundary flux sampled at ``times``."""

    times: np.ndarray
    s: np.ndarray
    sdot: np.ndarray
    h: np.ndarray
    provenance: Provenance = Provenance.ANALYTIC

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.s = np.asarray(self.s, dtype=float)
        self.sdot = np.asarray(self.sdot, dtype=float)
        self.h = np.asarray(self.h, dtype=float)
        self.provenance = Provenance(self.provenance)
        n = len(self.times)
        if any(len(v) != n for v in (self.s, self.sdot, self.h)):
            raise ValidationError("times, s, sdot and h must have equal lengths")

    def __len__(self):
        return len(self.times)

    def copy(self) -> BoundaryTrajectory:
        return BoundaryTrajectory(
            self.times.copy(), self.s.copy(), self.sdot.copy(), self.h.copy(), self.provenance
        )

    def to_csv(self, path) -> None:
        """Write one ``t,s,sdot,h`` row per sample, round-trip exact."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "s", "sdot", "h"])
            for row in zip(self.times, self.s, self.sdot, self.h):
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, provenance=Provenance.ANALYTIC) -> BoundaryTrajectory:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if [c.strip() for c in header] != ["t", "s", "sdot", "h"]:
                raise ValidationError(f"{path}: expected header t,s,sdot,h, got {header}")
            rows = np.array([[float(v) for v in r] for r in reader if r], dtype=float)
        if rows.ndim != 2 or rows.shape[1] != 4:
            raise ValidationError(f"{path}: no data rows")
        return cls(rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3], provenance)


@dataclass
class InitialCondition:
    """Initial temperature ``u0`` on ``[0, b]`` with its values at cell midpoints."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    samples: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=float))

    def check_envelope(self, b: float, H: float, n: int = 2001, atol: float = 1e-12) -> bool:
        """True if ``0 <= u0(x) <= H (b - x)`` on a uniform sample of ``[0, b]``."""
        x = np.linspace(0.0, b, n)
        u = self(x)
        return bool(np.all(u >= -atol) and np.all(u <= H * (b - x) + atol))


def _h1_norm(f, df, b):
    val, _ = integrate.quad(lambda x: f(x) ** 2 + df(x) ** 2, 0.0, b, epsabs=1e-13)
    return math.sqrt(val)


def _build(b, s, sdot, h, u0, du0, N, M, T=1.0):
    # H is the steepest initial slope; for both benchmarks that sits at x = 0
    xs = np.linspace(0.0, b, 4001)
    H = float(np.max(np.abs(du0(xs))))
    ts = np.linspace(0.0, T, 4001)
    cfg = ProblemConfig(
        b=b, T=T, N=N, M=M, H=H,
        h_bound=float(np.max(h(ts))),
        sobolev_bound=_h1_norm(u0, du0, b),
    )
    t = cfg.times()
    traj = BoundaryTrajectory(t, s(t), sdot(t), h(t), Provenance.ANALYTIC)
    ic = InitialCondition(u0, u0(cfg.cell_midpoints()))
    return cfg, traj, ic


def _flux1(t):
    return math.exp(0.25) / (2.0 * np.sqrt(np.asarray(t, dtype=float) + 0.25))


def _flux2(t):
    r2 = math.sqrt(2.0)
    return np.exp(1.0 - 1.0 / r2 + np.asarray(t, dtype=float) / 2.0) / r2


def example1(N: int = DEFAULT_STEPS, M: int = DEFAULT_STEPS):
    """Similarity solution with front ``s(t) = sqrt(t + 1/4)`` on ``[0, 1]``, ``b = 1/2``."""
    amp = math.exp(0.25) * math.sqrt(math.pi) / 2.0

    def u0(x):
        return amp * (erf(0.5) - erf(x))

    def du0(x):
        return -amp * 2.0 / math.sqrt(math.pi) * np.exp(-np.square(x))

    return _build(
        0.5,
        lambda t: np.sqrt(t + 0.25),
        lambda t: 0.5 / np.sqrt(t + 0.25),
        _flux1, u0, du0, N, M,
    )


def example2(N: int = DEFAULT_STEPS, M: int = DEFAULT_STEPS):
    """Exponential solution with linear front ``s(t) = sqrt(2) - 1 + t / sqrt(2)``.

    The stored front speed is ``+1/sqrt(2)`` so that ``-u_x(s(t), t) = sdot``
    holds with the same sign as in every other trajectory.
    """
    r2 = math.sqrt(2.0)
    c = 1.0 - 1.0 / r2

    def u0(x):
        return np.exp(c - x / r2) - 1.0

    def du0(x):
        return -np.exp(c - x / r2) / r2

    return _build(
        r2 - 1.0,
        lambda t: r2 - 1.0 + t / r2,
        lambda t: np.full_like(np.asarray(t, dtype=float), 1.0 / r2),
        _flux2, u0, du0, N, M,
    )


def example2_exact(x, t):
    """Temperature field of the second benchmark, defined for ``0 <= x <= s(t)``."""
    r2 = math.sqrt(2.0)
    return np.exp(1.0 - 1.0 / r2 + np.asarray(t) / 2.0 - np.asarray(x) / r2) - 1.0


EXAMPLES = {1: example1, 2: example2}
FLUXES = {1: _flux1, 2: _flux2}


def example_key(example_id) -> int:
    try:
        key = int(str(example_id).removeprefix("example"))
    except ValueError:
        key = None
    if key not in EXAMPLES:
        raise ValidationError(f"unknown example {example_id!r}; choose 1 or 2")
    return key


def load_example(example_id, N: int = DEFAULT_STEPS, M: int = DEFAULT_STEPS):
    return EXAMPLES[example_key(example_id)](N=N, M=M)


def example_flux(example_id):
    """Closed-form boundary flux ``h(t)`` of a benchmark."""
    return FLUXES[example_key(example_id)]


def _moving_average(x, window):
    # symmetric windows that shrink at the ends keep affine data affine
    n = len(x)
    half = window // 2
    idx = np.arange(n)
    r = np.minimum(half, np.minimum(idx, n - 1 - idx))
    csum = np.concatenate(([0.0], np.cumsum(x)))
    return (csum[idx + r + 1] - csum[idx - r]) / (2 * r + 1)


def differentiate_boundary(s_samples, dt: float, smoothing_window: int = 1) -> np.ndarray:
    """Front speed from sampled positions.

    Second-order central differences in the interior, second-order one-sided
    differences at both ends, then a centered moving average of width
    ``smoothing_window``. Away from the ends this equals differencing the
    averaged positions; averaging last keeps the end values second-order
    accurate, since the shrinking end windows never get differenced.
    """
    s = np.asarray(s_samples, dtype=float)
    if s.ndim != 1 or len(s) < 3:
        raise ValidationError("need at least 3 samples to differentiate")
    if smoothing_window < 1 or smoothing_window % 2 == 0:
        raise ValidationError(f"smoothing_window must be odd and >= 1, got {smoothing_window}")
    if not dt > 0:
        raise ValidationError("dt must be positive")
    d = np.gradient(s, dt, edge_order=2)
    if smoothing_window > 1:
        d = _moving_average(d, smoothing_window)
    return d


def add_noise(
    traj: BoundaryTrajectory,
    level: float,
    seed: int,
    smoothing_window: int = DEFAULT_SMOOTHING_WINDOW,
    rederive_sdot: bool = True,
) -> BoundaryTrajectory:
    """Multiply every front sample by ``1 + level * eps``, ``eps ~ N(0, 1)``.

    The flux is left untouched. With ``rederive_sdot`` the front speed is
    recomputed from the perturbed positions; otherwise it is copied.
    A zero level returns an unmodified copy and draws no random numbers.
    """
    if not level >= 0:
        raise ValidationError(f"noise level must be nonnegative, got {level}")
    if level == 0:
        return traj.copy()
    rng = np.random.default_rng(seed)
    s = traj.s * (1.0 + level * rng.standard_normal(len(traj)))
    if rederive_sdot:
        dt = traj.times[1] - traj.times[0]
        sdot = differentiate_boundary(s, dt, smoothing_window)
    else:
        sdot = traj.sdot.copy()
    return BoundaryTrajectory(traj.times.copy(), s, sdot, traj.h.copy(), Provenance.NOISY)
