"""
Unit tests for the Kadison-Schwarz closed forms, the dense oracle and the scan
"""
import numpy as np
import pytest

from core.families import abc_to_tensor, check_e12
from core.models import PauliElement, QqoTensor, StateVec
from core.operator import (
    apply_delta,
    conditional_expectation,
    search_positivity_violation,
    tensor_square_to_dense,
)
from core.pauli import pauli_mul, pauli_to_dense
from core.ks_cert import (
    CHANNELS,
    ConventionFault,
    KsCertError,
    _checked_scalar,
    dd1_expansion,
    dd2_expansion,
    ef_difference,
    ks11_margin,
    ks2_margin,
    ks_difference_matrix,
    ks_oracle,
    ks_quantities,
    ks_scan,
    ksf_margins,
)

from conftest import FLAGSHIP, bell_tensor, random_bell_vectors

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])


def random_element(rng):
    return PauliElement(rng.normal() + 1j * rng.normal(), rng.normal(size=3) + 1j * rng.normal(size=3))


def random_state(rng):
    f = rng.normal(size=3)
    return f * rng.uniform() / np.linalg.norm(f)


class TestFlagshipConstants:
    """Test the closed-form values for a = b = 1/sqrt(3), c = 0"""

    def test_ks11_margin(self, flagship_tensor, default_settings):
        assert ks11_margin(flagship_tensor, E1, E2, default_settings) == pytest.approx(1 / 3, abs=1e-12)

    def test_ks2_margin(self, flagship_tensor, default_settings):
        assert ks2_margin(flagship_tensor, E1, E2, default_settings) == pytest.approx(-1 / 3, abs=1e-12)

    def test_ks2_margin_accepts_state_vec(self, flagship_tensor, default_settings):
        value = ks2_margin(flagship_tensor, StateVec(E1), E2, default_settings)
        assert value == pytest.approx(-1 / 3, abs=1e-12)

    def test_oracle_sigma2(self, flagship_tensor, default_settings):
        value = ks_oracle(flagship_tensor, PauliElement.sigma(2), default_settings)
        assert value == pytest.approx(-1 / 3, abs=1e-12)

    def test_ef_difference(self, flagship_tensor):
        ef = ef_difference(flagship_tensor, E1, PauliElement.sigma(2))
        assert ef.w0 == pytest.approx(1 / 3, abs=1e-12)
        assert np.allclose(ef.w, [2 / 3, 0, 0], atol=1e-12)

    def test_ksf_matches_general_form(self, flagship_tensor, default_settings):
        first, second = ksf_margins(flagship_tensor, E2, default_settings)
        assert first == pytest.approx(1 / 3, abs=1e-12)
        assert second == pytest.approx(-1 / 3, abs=1e-12)

    def test_scan_finds_violation(self, flagship_tensor, default_settings):
        """Test that default sampling finds ks2 and oracle witnesses"""
        report = ks_scan(flagship_tensor, settings=default_settings)
        assert report.violation_found
        assert report.worst["ks2"].margin <= -1 / 3 + 1e-12
        assert report.oracle_min_eigenvalue <= -1e-3
        assert report.best.channel == "ks2"
        assert report.best.f is not None
        assert report.oracle_min_eigenvalue <= report.best.margin + 1e-9
        # the reported witness reproduces its margin
        witness = report.worst["ks2"]
        assert ks2_margin(flagship_tensor, witness.f, witness.w, default_settings) == pytest.approx(witness.margin)
        oracle = report.worst["oracle"]
        assert ks_oracle(flagship_tensor, oracle.element(), default_settings) == pytest.approx(oracle.margin, abs=1e-9)


class TestClosedForms:
    """Test the Pauli-basis expansions against dense arithmetic"""

    def test_ef_difference_matches_dense(self):
        """Test the closed form against E_phi of the dense 4x4 difference"""
        rng = np.random.default_rng(40)
        for _ in range(100):
            t = QqoTensor(rng.normal(size=(3, 3, 3)))
            x = random_element(rng)
            f = random_state(rng)
            dense = conditional_expectation(ks_difference_matrix(t, x), f)
            assert np.allclose(pauli_to_dense(ef_difference(t, f, x)), dense, atol=1e-10)

    def test_ef_difference_independent_of_w0(self):
        rng = np.random.default_rng(41)
        t = QqoTensor(rng.normal(size=(3, 3, 3)))
        w = rng.normal(size=3) + 1j * rng.normal(size=3)
        f = random_state(rng)
        first = ef_difference(t, f, PauliElement(0, w))
        second = ef_difference(t, f, PauliElement(3 - 2j, w))
        assert np.allclose(pauli_to_dense(first), pauli_to_dense(second))

    def test_ks2_is_smallest_eigenvalue(self, default_settings):
        rng = np.random.default_rng(42)
        for _ in range(50):
            t = QqoTensor(rng.normal(size=(3, 3, 3)))
            w = rng.normal(size=3) + 1j * rng.normal(size=3)
            f = random_state(rng)
            dense = conditional_expectation(ks_difference_matrix(t, PauliElement(0, w)), f)
            lowest = np.linalg.eigvalsh(0.5 * (dense + dense.conj().T))[0]
            assert ks2_margin(t, f, w, default_settings) == pytest.approx(lowest, abs=1e-9)

    def test_dd1_matches_dense(self):
        rng = np.random.default_rng(43)
        for _ in range(50):
            t = QqoTensor(rng.normal(size=(3, 3, 3)))
            x = random_element(rng)
            expected = tensor_square_to_dense(apply_delta(t, pauli_mul(x.adjoint(), x)))
            assert np.allclose(tensor_square_to_dense(dd1_expansion(t, x)), expected, atol=1e-10)

    def test_dd2_matches_dense(self):
        rng = np.random.default_rng(44)
        for _ in range(50):
            t = QqoTensor(rng.normal(size=(3, 3, 3)))
            x = random_element(rng)
            image = tensor_square_to_dense(apply_delta(t, x))
            expected = image.conj().T @ image
            assert np.allclose(tensor_square_to_dense(dd2_expansion(t, x)), expected, atol=1e-10)

    def test_ks_quantities_antisymmetric(self):
        rng = np.random.default_rng(45)
        t = QqoTensor(rng.normal(size=(3, 3, 3)))
        kq = ks_quantities(t, random_state(rng), rng.normal(size=3) + 1j * rng.normal(size=3))
        assert np.allclose(kq.alpha, -kq.alpha.T)
        assert np.allclose(kq.gamma, -kq.gamma.transpose(1, 0, 2))

    def test_h_is_q_at_e1(self):
        rng = np.random.default_rng(46)
        t = QqoTensor(rng.normal(size=(3, 3, 3)))
        kq = ks_quantities(t, E1, rng.normal(size=3) + 1j * rng.normal(size=3))
        assert np.allclose(kq.q, kq.h)

    def test_ksf_matches_general_margins(self, default_settings):
        rng = np.random.default_rng(47)
        for _ in range(20):
            t = QqoTensor(rng.normal(size=(3, 3, 3)))
            w = rng.normal(size=3) + 1j * rng.normal(size=3)
            first, second = ksf_margins(t, w, default_settings)
            assert first == pytest.approx(ks11_margin(t, E1, w, default_settings), abs=1e-10)
            assert second == pytest.approx(ks2_margin(t, E1, w, default_settings), abs=1e-10)

    def test_e12_matches_ksf(self, default_settings):
        """Test the reduced family form against the first ksf margin"""
        rng = np.random.default_rng(48)
        t = abc_to_tensor(FLAGSHIP)
        for _ in range(20):
            w = rng.normal(size=3) + 1j * rng.normal(size=3)
            first, _ = ksf_margins(t, w, default_settings)
            assert check_e12(FLAGSHIP, w, default_settings).margin == pytest.approx(first, abs=1e-10)


class TestConventionFault:
    def test_imaginary_residue_raises(self, default_settings):
        with pytest.raises(ConventionFault):
            _checked_scalar(np.array([1.0 + 1e-6j]), np.array([[1.0, 0, 0]]), default_settings)
        assert issubclass(ConventionFault, KsCertError)

    def test_real_scalar_passes(self, default_settings):
        values = _checked_scalar(np.array([0.25 + 0j]), np.array([[1.0, 0, 0]]), default_settings)
        assert values[0] == 0.25


class TestScan:
    """Test ks_scan on operators with known answers"""

    def test_zero_tensor_has_no_violation(self, fast_settings):
        report = ks_scan(QqoTensor.zeros(), settings=fast_settings)
        assert not report.violation_found
        assert report.worst["ks11"].margin == pytest.approx(1.0)
        assert report.worst["ks2"].margin == pytest.approx(1.0)
        assert report.oracle_min_eigenvalue > 0

    def test_counts(self, fast_settings):
        report = ks_scan(QqoTensor.zeros(), settings=fast_settings)
        assert report.pairs_evaluated == 3 * 169 + fast_settings.ks_pairs
        assert report.oracle_samples == fast_settings.oracle_samples + 2

    def test_rejects_zero_samples(self, flagship_tensor):
        with pytest.raises(ValueError):
            ks_scan(flagship_tensor, sample_count=0)

    def test_independent_of_workers(self, flagship_tensor, fast_settings):
        """Test identical witnesses for one and several workers"""
        single = ks_scan(flagship_tensor, settings=fast_settings)
        threaded = ks_scan(flagship_tensor, settings=fast_settings.model_copy(update={"workers": 4}))
        assert set(single.worst) == set(CHANNELS)
        for channel in CHANNELS:
            assert single.worst[channel].margin == threaded.worst[channel].margin
            assert np.array_equal(single.worst[channel].w, threaded.worst[channel].w)

    def test_seed_is_reproducible(self, flagship_tensor, fast_settings):
        first = ks_scan(flagship_tensor, seed=1, settings=fast_settings)
        second = ks_scan(flagship_tensor, seed=1, settings=fast_settings)
        assert first.worst["oracle"].margin == second.worst["oracle"].margin

    def test_necessity_on_completely_positive_tensors(self, fast_settings):
        """Test that no margin goes negative where the dense oracle finds no violation"""
        rng = np.random.default_rng(49)
        checked = fast_settings.model_copy(update={"oracle_samples": 2048})
        for i in range(30):
            t = bell_tensor(random_bell_vectors(rng)).scaled(rng.uniform(0.2, 1.0))
            report = ks_scan(t, seed=i, settings=checked)
            assert report.oracle_min_eigenvalue >= -1e-10
            assert report.worst["ks11"].margin >= -1e-8
            assert report.worst["ks2"].margin >= -1e-8
            assert not report.violation_found

    def test_bell_tensor_is_positive(self, fast_settings):
        rng = np.random.default_rng(50)
        t = bell_tensor(random_bell_vectors(rng))
        assert search_positivity_violation(t, settings=fast_settings).min_eigenvalue >= -1e-12
