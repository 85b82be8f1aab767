"""
Unit tests for the Bloch-ball dynamics and stability certificates
"""
import numpy as np
import pytest

from core.dynamics import (
    CONVERGED,
    DYNAMICS_CLASSES,
    FIXED_POINT,
    LEFT_BALL,
    MAX_STEPS,
    apply_v,
    apply_v_tilde,
    certificates,
    dynamics_class,
    find_fixed_points,
    iterate,
    jacobian_v,
    majorant_bound,
    tilde_orbit_probe,
)
from core.models import QqoTensor, StateVec
from core.operator import check_dstar1
from core.sampling import ball_grid, make_rng, random_ball


def contraction_tensor(rng, target):
    """Random tensor scaled so that its contraction constant equals target"""
    t = QqoTensor(rng.normal(size=(3, 3, 3)))
    alpha = certificates(t).alpha
    return t.scaled(np.sqrt(target / alpha))


class TestMaps:
    """Test V, the majorant and the Jacobian"""

    def test_apply_v_v0(self, v0_tensor):
        assert np.allclose(apply_v(v0_tensor, StateVec.of(0.5, 0.3, -0.2)), [0.25, 0, 0])

    def test_apply_v_tilde_uses_absolute_values(self):
        t = QqoTensor.from_entries({(1, 2, 3): -0.5})
        assert np.allclose(apply_v_tilde(t, [1.0, 1.0, 0.0]), [0, 0, 0.5])
        assert np.allclose(apply_v(t, [1.0, 1.0, 0.0]), [0, 0, -0.5])

    def test_jacobian_matches_finite_differences(self):
        rng = np.random.default_rng(60)
        t = QqoTensor(rng.normal(size=(3, 3, 3)))
        f = rng.normal(size=3) * 0.3
        h = 1e-6
        numeric = np.column_stack([
            (apply_v(t, f + h * e) - apply_v(t, f - h * e)) / (2 * h) for e in np.eye(3)
        ])
        assert np.allclose(jacobian_v(t, f), numeric, atol=1e-7)


class TestCertificates:
    """Test alpha, delta and the derived stability flags"""

    def test_v0(self, v0_tensor, default_settings):
        certs = certificates(v0_tensor, default_settings)
        assert certs.alpha == pytest.approx(4.0)
        assert np.allclose(certs.alpha_k, [2, 0, 0])
        assert np.allclose(certs.d, [1, 0, 0])
        assert certs.bb2
        assert not certs.bb_main
        assert certs.bb33_n0 is None
        assert not certs.alfa_contraction
        assert dynamics_class(certs) == "bounded_majorant"

    def test_zero_tensor(self, default_settings):
        certs = certificates(QqoTensor.zeros(), default_settings)
        assert certs.alpha == 0.0
        assert certs.alfa_contraction
        assert dynamics_class(certs) == "contraction"

    def test_bb33_first_index(self, default_settings):
        """Test that the first n with V~^n(d) < 1 is reported"""
        t = QqoTensor.from_entries({(1, 1, 1): 0.5, (2, 2, 2): 0.5, (3, 3, 3): 1.0})
        certs = certificates(t, default_settings)
        assert certs.bb33_n0 is None
        t = QqoTensor.from_entries({(1, 1, 1): 0.5, (2, 2, 2): 0.5, (3, 3, 3): 0.9})
        certs = certificates(t, default_settings)
        assert certs.bb33_n0 == 1
        assert dynamics_class(certs) in ("contraction", "bb_main", "majorant_decay")

    def test_unclassified(self, default_settings):
        t = QqoTensor.from_entries({(1, 1, 1): 2.0})
        certs = certificates(t, default_settings)
        assert not certs.bb2
        assert dynamics_class(certs) == "unclassified"

    def test_bb_main_needs_coupling(self, default_settings):
        """Test that a component with delta < 1 must reach every k"""
        coupled = np.full((3, 3, 3), 1.0 / 9.0)
        coupled[:, :, 0] *= 0.9
        certs = certificates(QqoTensor(coupled), default_settings)
        assert certs.bb2 and certs.bb_main
        assert dynamics_class(certs) in ("contraction", "bb_main")

    def test_lipschitz_bound(self, default_settings):
        """Test |V(f)_k - V(p)_k| <= alpha_k |f - p| on scaled random tensors"""
        rng = np.random.default_rng(61)
        for _ in range(20):
            t = contraction_tensor(rng, rng.uniform(0.3, 0.9))
            certs = certificates(t, default_settings)
            assert certs.alfa_contraction
            fs = random_ball(rng, 200)
            ps = random_ball(rng, 200)
            for f, p in zip(fs, ps):
                lhs = np.abs(apply_v(t, f) - apply_v(t, p))
                assert np.all(lhs <= certs.alpha_k * np.linalg.norm(f - p) + 1e-10)

    def test_contractions_converge(self, default_settings):
        rng = np.random.default_rng(62)
        for _ in range(20):
            t = contraction_tensor(rng, rng.uniform(0.3, 0.9))
            for f0 in random_ball(rng, 10):
                trajectory = iterate(t, f0, max_steps=200, tol=1e-9, settings=default_settings)
                assert trajectory.terminal == CONVERGED
                assert np.linalg.norm(trajectory.points[-1]) <= 1e-9

    def test_bb_main_orbits_converge(self, default_settings):
        """Test that orbits converge to zero on tensors meeting the bb_main hypotheses"""
        rng = np.random.default_rng(63)
        accepted = 0
        while accepted < 100:
            b = np.abs(rng.normal(size=(3, 3, 3))) * rng.choice([-1.0, 1.0], size=(3, 3, 3))
            delta = np.abs(b).sum(axis=(0, 1))
            target = np.array([1.0, rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0)])
            t = QqoTensor(b * (target / delta))
            if not certificates(t, default_settings).bb_main:
                continue
            accepted += 1
            for f0 in random_ball(rng, 5) * 0.99:
                f = f0
                for _ in range(200):
                    f = apply_v(t, f)
                    if np.max(np.abs(f)) <= 1e-9:
                        break
                assert np.max(np.abs(f)) <= 1e-9

    def test_class_labels(self, default_settings):
        rng = np.random.default_rng(67)
        for target in rng.uniform(0.1, 3.0, size=30):
            t = contraction_tensor(rng, target)
            assert dynamics_class(certificates(t, default_settings)) in DYNAMICS_CLASSES


class TestIterate:
    def test_v0_converges(self, v0_tensor):
        trajectory = iterate(v0_tensor, StateVec.of(0.5, 0.3, 0.0))
        assert trajectory.terminal == CONVERGED
        assert np.allclose(trajectory.points[1], [0.25, 0, 0])
        assert np.allclose(trajectory.limit, 0)

    def test_v0_fixed_point(self, v0_tensor):
        trajectory = iterate(v0_tensor, StateVec.of(1.0, 0.0, 0.0))
        assert trajectory.terminal == FIXED_POINT
        assert trajectory.steps == 0
        assert np.allclose(trajectory.limit, [1, 0, 0])

    def test_left_ball(self):
        t = QqoTensor.from_entries({(1, 1, 1): 2.0})
        trajectory = iterate(t, StateVec.of(0.9, 0.0, 0.0))
        assert trajectory.terminal == LEFT_BALL
        assert trajectory.limit is None

    def test_max_steps(self):
        """Test a period-two orbit that never settles"""
        t = QqoTensor.from_entries({(1, 1, 2): 1.0, (2, 2, 1): 1.0})
        trajectory = iterate(t, StateVec.of(1.0, 0.0, 0.0), max_steps=10)
        assert trajectory.terminal == MAX_STEPS
        assert trajectory.steps == 10

    def test_invalid_arguments(self, v0_tensor):
        with pytest.raises(ValueError):
            iterate(v0_tensor, np.zeros(3), max_steps=0)
        with pytest.raises(ValueError):
            iterate(v0_tensor, np.zeros(3), tol=0.0)

    def test_majorant_bound(self, default_settings):
        """Test |V^n(f)_k| <= gamma_f^(2^n) V~^(n-1)(d)_k"""
        rng = np.random.default_rng(64)
        for _ in range(20):
            b = rng.normal(size=(3, 3, 3))
            delta = np.abs(b).sum(axis=(0, 1))
            t = QqoTensor(b * 0.9 / delta.max())
            for f in random_ball(rng, 10):
                f = f * min(1.0, 0.95 / np.max(np.abs(f)))
                g = f
                for n in range(1, 21):
                    g = apply_v(t, g)
                    assert np.all(np.abs(g) <= majorant_bound(t, f, n) + 1e-12)

    def test_dstar1_keeps_orbits_in_ball(self, fast_settings):
        """Test that tensors passing check_dstar1 never leave the ball"""
        rng = np.random.default_rng(65)
        for _ in range(50):
            b = rng.normal(size=(3, 3, 3))
            t = QqoTensor(b * rng.uniform(0.3, 1.0) / np.sqrt(np.sum(b ** 2)))
            assert check_dstar1(t, settings=fast_settings).verdict
            for f0 in random_ball(rng, 10):
                trajectory = iterate(t, f0, max_steps=50, settings=fast_settings)
                assert trajectory.terminal != LEFT_BALL

    def test_majorant_bound_rejects_n0(self, v0_tensor):
        with pytest.raises(ValueError):
            majorant_bound(v0_tensor, np.zeros(3), 0)


class TestTildeOrbit:
    def test_bounded_v0(self, v0_tensor, default_settings):
        orbit = tilde_orbit_probe(v0_tensor, settings=default_settings)
        assert orbit.bounded_up_to_horizon
        assert not orbit.converged_to_zero
        assert orbit.sup_seen == pytest.approx(1.0)
        assert orbit.steps == default_settings.tilde_horizon

    def test_escape(self, default_settings):
        t = QqoTensor.from_entries({(1, 1, 1): 2.0})
        orbit = tilde_orbit_probe(t, settings=default_settings)
        assert not orbit.bounded_up_to_horizon
        assert orbit.sup_seen > default_settings.tolerances.tilde_escape

    def test_decay(self, default_settings):
        t = QqoTensor.from_entries({(1, 1, 1): 0.5})
        orbit = tilde_orbit_probe(t, settings=default_settings)
        assert orbit.converged_to_zero

    def test_zero_tensor(self, default_settings):
        orbit = tilde_orbit_probe(QqoTensor.zeros(), settings=default_settings)
        assert orbit.converged_to_zero and orbit.steps == 0

    def test_delta_at_most_one_stays_bounded(self, default_settings):
        """Test that max delta_k <= 1 keeps V~^n(d) bounded by max delta_k"""
        rng = np.random.default_rng(66)
        for _ in range(200):
            b = rng.normal(size=(3, 3, 3))
            delta = np.abs(b).sum(axis=(0, 1))
            target = rng.uniform(0.2, 1.0)
            t = QqoTensor(b * target / delta.max())
            orbit = tilde_orbit_probe(t, settings=default_settings)
            assert orbit.bounded_up_to_horizon
            assert orbit.sup_seen <= np.abs(t.b).sum(axis=(0, 1)).max() + 1e-12


class TestFixedPoints:
    def test_v0_has_exactly_two(self, v0_tensor, default_settings):
        """Test that a 20^3 ball grid finds exactly (0,0,0) and (1,0,0)"""
        found = find_fixed_points(v0_tensor, ball_grid(20), settings=default_settings)
        assert len(found) == 2
        points = sorted((np.round(p, 8).tolist() for p in found))
        assert np.allclose(points, [[0, 0, 0], [1, 0, 0]], atol=1e-8)

    def test_deterministic_across_workers(self, v0_tensor, default_settings):
        seeds = ball_grid(4)
        single = find_fixed_points(v0_tensor, seeds, settings=default_settings)
        threaded = find_fixed_points(
            v0_tensor, seeds, settings=default_settings.model_copy(update={"workers": 3})
        )
        assert len(single) == len(threaded)
        for a, b in zip(single, threaded):
            assert np.array_equal(a, b)

    def test_residuals(self, default_settings):
        rng = np.random.default_rng(65)
        t = contraction_tensor(rng, 0.5)
        for point in find_fixed_points(t, random_ball(make_rng(1), 20), settings=default_settings):
            assert np.linalg.norm(apply_v(t, point) - point) <= default_settings.fixed_point_residual
            assert np.linalg.norm(point) <= 1.0 + default_settings.tolerances.ball_escape
