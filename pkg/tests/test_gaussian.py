"""Tests for the Gaussian-state engine."""

import math

import numpy as np
import pytest

from tnli_afm import gaussian
from tnli_afm.errors import InvalidArgumentError, NumericalError
from tnli_afm.gaussian import GaussianState, MeasurementCombination, SymplecticOp


class TestVacuum:
    def test_identity_covariance(self):
        state = gaussian.vacuum_state(2)
        assert np.array_equal(state.cov, np.eye(4))
        assert np.array_equal(state.mean, np.zeros(4))

    def test_is_pure_and_physical(self):
        state = gaussian.vacuum_state(3)
        assert state.is_physical()
        assert state.purity() == pytest.approx(1.0)

    @pytest.mark.parametrize("n", [0, -1, 1.5])
    def test_rejects_bad_mode_count(self, n):
        with pytest.raises(InvalidArgumentError):
            gaussian.vacuum_state(n)

    def test_state_is_immutable(self):
        state = gaussian.vacuum_state(1)
        with pytest.raises(ValueError):
            state.cov[0, 0] = 2.0


class TestGaussianState:
    def test_rejects_asymmetric_covariance(self):
        with pytest.raises(InvalidArgumentError):
            GaussianState(np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_rejects_mismatched_mean(self):
        with pytest.raises(InvalidArgumentError):
            GaussianState(np.zeros(3), np.eye(4))

    def test_uncertainty_violation_is_unphysical(self):
        state = GaussianState(np.zeros(2), np.diag([0.5, 0.5]))
        assert not state.is_physical()

    def test_squeezed_state_is_physical(self):
        # Smallest eigenvalue is e^{-2r} < 1, yet the state is valid.
        state = gaussian.two_mode_squeeze(gaussian.vacuum_state(2), 0, 1, 1.2)
        assert np.min(np.linalg.eigvalsh(state.cov)) < 1
        assert state.is_physical()

    def test_thermal_purity(self):
        state = GaussianState(np.zeros(2), 3.0 * np.eye(2))
        assert state.purity() == pytest.approx(1 / 3)


class TestTwoModeSqueeze:
    def test_single_mode_variance(self):
        r = 0.7
        state = gaussian.two_mode_squeeze(gaussian.vacuum_state(2), 0, 1, r)
        assert state.cov[0, 0] == pytest.approx(math.cosh(2 * r))
        assert state.cov[3, 3] == pytest.approx(math.cosh(2 * r))

    def test_correlations(self):
        r = 0.7
        state = gaussian.two_mode_squeeze(gaussian.vacuum_state(2), 0, 1, r)
        assert state.cov[0, 2] == pytest.approx(math.sinh(2 * r))
        assert state.cov[1, 3] == pytest.approx(-math.sinh(2 * r))

    def test_phase_sum_variance(self):
        r = 0.5
        state = gaussian.two_mode_squeeze(gaussian.vacuum_state(2), 0, 1, r)
        stats = gaussian.measure_stats(state, MeasurementCombination.phase_sum(2))
        assert stats.variance == pytest.approx(math.exp(-2 * r))

    def test_zero_r_is_identity(self):
        vacuum = gaussian.vacuum_state(2)
        state = gaussian.two_mode_squeeze(vacuum, 0, 1, 0.0)
        assert np.allclose(state.cov, vacuum.cov)

    def test_negative_r_rejected(self):
        with pytest.raises(InvalidArgumentError):
            gaussian.two_mode_squeeze(gaussian.vacuum_state(2), 0, 1, -0.1)

    def test_same_mode_rejected(self):
        with pytest.raises(InvalidArgumentError):
            gaussian.two_mode_squeeze(gaussian.vacuum_state(2), 1, 1, 0.3)

    def test_out_of_range_mode_rejected(self):
        with pytest.raises(InvalidArgumentError):
            gaussian.two_mode_squeeze(gaussian.vacuum_state(2), 0, 2, 0.3)

    def test_preserves_purity(self):
        state = gaussian.two_mode_squeeze(gaussian.vacuum_state(2), 0, 1, 1.5)
        assert state.purity() == pytest.approx(1.0, rel=1e-9)


class TestPhaseRotate:
    def test_rotation_equals_shifted_homodyne(self):
        state = gaussian.two_mode_squeeze(gaussian.vacuum_state(2), 0, 1, 0.6)
        state = gaussian.displace(state, 0, 3.0 + 1.0j)
        comb = MeasurementCombination((0.4, 1.1), (1.0, 0.8))
        rotated = gaussian.phase_rotate(state, 0, 0.3)
        direct = gaussian.measure_stats(rotated, comb)
        shifted = gaussian.measure_stats(state, comb.shifted(0, -0.3))
        assert direct.mean == pytest.approx(shifted.mean, abs=1e-12)
        assert direct.variance == pytest.approx(shifted.variance, rel=1e-12)

    def test_quarter_turn_maps_x_to_p(self):
        state = gaussian.displace(gaussian.vacuum_state(1), 0, 1.0)
        rotated = gaussian.phase_rotate(state, 0, math.pi / 2)
        assert rotated.mean == pytest.approx([0.0, 2.0], abs=1e-12)


class TestLossChannel:
    def test_vacuum_is_invariant(self):
        state = gaussian.loss_channel(gaussian.vacuum_state(2), 0, 0.3)
        assert np.allclose(state.cov, np.eye(4))

    def test_variance_map(self):
        state = GaussianState(np.zeros(2), np.diag([4.0, 0.25]))
        lossy = gaussian.loss_channel(state, 0, 0.5)
        assert np.allclose(np.diag(lossy.cov), [2.5, 0.625])

    def test_total_loss_gives_vacuum(self):
        state = gaussian.two_mode_squeeze(gaussian.vacuum_state(2), 0, 1, 1.0)
        state = gaussian.displace(state, 0, 5.0)
        lossy = gaussian.loss_channel(state, 0, 0.0)
        assert np.allclose(lossy.cov[:2, :2], np.eye(2))
        assert np.allclose(lossy.mean[:2], 0.0)

    def test_mean_scales_with_amplitude(self):
        state = gaussian.displace(gaussian.vacuum_state(1), 0, 2.0)
        lossy = gaussian.loss_channel(state, 0, 0.25)
        assert lossy.mean[0] == pytest.approx(2.0)

    @pytest.mark.parametrize("eta", [-0.1, 1.1])
    def test_rejects_out_of_range(self, eta):
        with pytest.raises(InvalidArgumentError):
            gaussian.loss_channel(gaussian.vacuum_state(1), 0, eta)

    def test_single_arm_loss_penalty(self):
        # 5 dB of phase-sum squeezing, 5% loss on one arm.
        r = 0.25 * math.log(10.0)
        state = gaussian.two_mode_squeeze(gaussian.vacuum_state(2), 0, 1, r)
        before = gaussian.measure_stats(state, MeasurementCombination.phase_sum())
        after = gaussian.measure_stats(
            gaussian.loss_channel(state, 0, 0.95), MeasurementCombination.phase_sum()
        )
        assert -10 * math.log10(before.variance) == pytest.approx(5.0, abs=1e-9)
        assert -10 * math.log10(after.variance) == pytest.approx(4.77, abs=0.05)


class TestBeamsplitter:
    def test_balanced_splitter_on_coherent_input(self):
        state = gaussian.displace(gaussian.vacuum_state(2), 0, 2.0)
        split = gaussian.beamsplitter(state, 0, 1, 0.5)
        assert split.mean[0] == pytest.approx(4.0 / math.sqrt(2))
        assert abs(split.mean[2]) == pytest.approx(4.0 / math.sqrt(2))

    def test_rejects_bad_transmissivity(self):
        with pytest.raises(InvalidArgumentError):
            gaussian.beamsplitter(gaussian.vacuum_state(2), 0, 1, 1.5)


class TestSymplecticOp:
    def test_rejects_non_symplectic(self):
        with pytest.raises(NumericalError):
            SymplecticOp(np.diag([2.0, 2.0]))

    def test_rejects_odd_dimension(self):
        with pytest.raises(InvalidArgumentError):
            SymplecticOp(np.eye(3))

    def test_composition_order(self):
        squeeze = gaussian.two_mode_squeeze_op(2, 0, 1, 0.4)
        rotate = gaussian.rotation_op(2, 0, 0.9)
        vacuum = gaussian.vacuum_state(2)
        composed = (rotate @ squeeze).apply(vacuum)
        stepwise = rotate.apply(squeeze.apply(vacuum))
        assert np.allclose(composed.cov, stepwise.cov)

    def test_mode_count_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            gaussian.rotation_op(1, 0, 0.1).apply(gaussian.vacuum_state(2))


class TestMeasureStats:
    def test_vacuum_homodyne_is_shot_noise(self):
        comb = MeasurementCombination.single(2, 1, 0.37)
        stats = gaussian.measure_stats(gaussian.vacuum_state(2), comb)
        assert stats.variance == pytest.approx(1.0)
        assert stats.mean == 0.0

    @pytest.mark.parametrize("mode", [2, -1])
    def test_single_rejects_bad_mode(self, mode):
        with pytest.raises(InvalidArgumentError, match="out of range"):
            MeasurementCombination.single(2, mode, 0.0)

    def test_shifted_rejects_bad_mode(self):
        with pytest.raises(InvalidArgumentError, match="out of range"):
            MeasurementCombination.phase_sum(2).shifted(-1, 0.1)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            gaussian.measure_stats(
                gaussian.vacuum_state(2), MeasurementCombination.phase_sum(3)
            )

    def test_all_zero_weights_rejected(self):
        with pytest.raises(InvalidArgumentError):
            MeasurementCombination((0.0, 0.0), (0.0, 0.0))
