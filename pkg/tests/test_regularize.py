import numpy as np
import pytest

from stefan_inverse.errors import ValidationError
from stefan_inverse.regularize import (
    RegularizationConfig,
    landweber_iterate,
    reconstruct,
    tikhonov_iterate,
)

from oracles import mp_least_squares


@pytest.fixture(scope="module")
def random_system():
    rng = np.random.default_rng(11)
    A = rng.standard_normal((10, 8))
    g = rng.standard_normal(10)
    return A, g, mp_least_squares(A, g)


class TestConfig:
    def test_defaults(self):
        assert RegularizationConfig("tikhonov", lam=1).max_iters == 200
        assert RegularizationConfig("landweber").max_iters == 20000

    @pytest.mark.parametrize(
        "kw",
        [
            dict(method="cg"),
            dict(method="tikhonov", lam=0.0),
            dict(method="tikhonov", lam=-1.0),
            dict(method="tikhonov", lam=1.0, discrepancy_tau=0.5),
            dict(method="tikhonov", lam=1.0, max_iters=0),
            dict(method="tikhonov", lam=1.0, noise_level_estimate=-0.1),
        ],
    )
    def test_rejects(self, kw):
        with pytest.raises(ValidationError):
            RegularizationConfig(**kw)


class TestTikhonov:
    def test_scalar_recursion(self):
        v = 3.0
        rec = tikhonov_iterate((np.array([[1.0]]), np.array([v])), RegularizationConfig("tikhonov", lam=1.0, max_iters=3, stop_tol=0))
        # U_{m+1} = (v + U_m) / 2: v/2, 3v/4, 7v/8
        assert rec.u0[0] == pytest.approx(7 * v / 8, rel=1e-15)
        np.testing.assert_allclose(rec.residual_history, [v / 2, v / 4, v / 8], rtol=1e-14)

    def test_zero_data(self, rng):
        A = rng.standard_normal((5, 4))
        rec = tikhonov_iterate((A, np.zeros(5)), RegularizationConfig("tikhonov", lam=0.1, max_iters=17, stop_tol=0))
        np.testing.assert_array_equal(rec.u0, 0.0)

    def test_converges_to_least_squares(self, random_system):
        A, g, ls = random_system
        rec = tikhonov_iterate((A, g), RegularizationConfig("tikhonov", lam=1e-3, max_iters=500, stop_tol=0))
        assert np.linalg.norm(rec.u0 - ls) < 1e-6

    def test_one_step_contraction(self):
        A = np.diag([1.0, 2.0, 3.0])
        g = np.array([1.0, -2.0, 0.5])
        star = g / np.diag(A)
        lam = 0.7
        rate = lam / (lam + 1.0)
        prev = np.zeros(3)
        for m in range(1, 8):
            u = tikhonov_iterate((A, g), RegularizationConfig("tikhonov", lam=lam, max_iters=m, stop_tol=0)).u0
            assert np.linalg.norm(u - star) <= rate * np.linalg.norm(prev - star) + 1e-15
            prev = u

    def test_needs_lambda(self):
        with pytest.raises(ValidationError):
            tikhonov_iterate((np.eye(2), np.ones(2)), RegularizationConfig("tikhonov"))

    def test_wrong_method(self):
        with pytest.raises(ValidationError):
            tikhonov_iterate((np.eye(2), np.ones(2)), RegularizationConfig("landweber"))


class TestLandweber:
    def test_identity_one_step(self):
        g = np.array([1.5, -2.0])
        rec = landweber_iterate((np.eye(2), g), RegularizationConfig("landweber", lam=1.0, max_iters=1))
        np.testing.assert_array_equal(rec.u0, g)

    def test_zero_data(self, rng):
        A = rng.standard_normal((5, 4))
        rec = landweber_iterate((A, np.zeros(5)), RegularizationConfig("landweber", max_iters=50, stop_tol=0))
        np.testing.assert_array_equal(rec.u0, 0.0)

    def test_converges_to_least_squares(self, random_system):
        A, g, ls = random_system
        rec = landweber_iterate((A, g), RegularizationConfig("landweber", max_iters=100_000, stop_tol=0))
        assert np.linalg.norm(rec.u0 - ls) < 1e-4

    def test_residual_non_increasing(self, random_system):
        A, g, _ = random_system
        rec = landweber_iterate((A, g), RegularizationConfig("landweber", max_iters=2000, stop_tol=0))
        assert np.all(np.diff(rec.residual_history) <= 1e-12)

    def test_default_step(self, random_system):
        A, g, _ = random_system
        rec = landweber_iterate((A, g), RegularizationConfig("landweber", max_iters=1))
        assert rec.lam == pytest.approx(0.9 / rec.extra["sigma_estimate"] ** 2)
        assert rec.lam * np.linalg.norm(A, 2) ** 2 < 1

    def test_rejects_oversized_step(self):
        with pytest.raises(ValidationError):
            landweber_iterate((2 * np.eye(2), np.ones(2)), RegularizationConfig("landweber", lam=0.3))


@pytest.mark.parametrize("method,lam", [("tikhonov", 1e-2), ("landweber", None)])
def test_linear_in_data(random_system, method, lam):
    A, g, _ = random_system
    cfg = RegularizationConfig(method, lam=lam, max_iters=40, stop_tol=0)
    base = reconstruct((A, g), cfg).u0
    for alpha in (-2.0, 0.37, 5.0):
        scaled = reconstruct((A, alpha * g), cfg).u0
        np.testing.assert_allclose(scaled, alpha * base, rtol=0, atol=1e-10 * max(1, abs(alpha)) * np.linalg.norm(base))


def test_stops_on_tolerance():
    rec = tikhonov_iterate((np.eye(3), np.ones(3)), RegularizationConfig("tikhonov", lam=1e-3, max_iters=200))
    assert rec.stop_reason == "tol"
    assert rec.iterations_run < 200
    assert len(rec.residual_history) == rec.iterations_run


def test_stops_on_discrepancy(random_system):
    A, _, _ = random_system
    rng = np.random.default_rng(0)
    x = rng.standard_normal(8)
    g = A @ x
    cfg = RegularizationConfig("landweber", max_iters=10_000, discrepancy_tau=1.1, noise_level_estimate=0.05)
    rec = landweber_iterate((A, g), cfg)
    assert rec.stop_reason == "discrepancy"
    assert rec.residual_history[-1] <= 1.1 * 0.05 * np.linalg.norm(g)
    assert rec.residual_history[-2] > 1.1 * 0.05 * np.linalg.norm(g)


def test_nonnegative_projection():
    A = np.eye(2)
    g = np.array([1.0, -1.0])
    rec = tikhonov_iterate((A, g), RegularizationConfig("tikhonov", lam=1.0, max_iters=5, project_nonnegative=True))
    assert np.all(rec.u0 >= 0)


def test_trace_csv(tmp_path):
    rec = tikhonov_iterate((np.eye(2), np.ones(2)), RegularizationConfig("tikhonov", lam=1.0, max_iters=4, stop_tol=0))
    path = tmp_path / "trace.csv"
    rec.trace_to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iter,residual,rel_change"
    assert len(lines) == 5
