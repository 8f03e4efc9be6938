"""Property-based tests for the Gaussian engine, the measurement model and the analyzer."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tnli_afm import gaussian, tnli
from tnli_afm.gaussian import MeasurementCombination
from tnli_afm.models import TnliConfig
from tnli_afm.spectrum import PhotocurrentRecord, psd_estimate, random_stream
from tnli_afm.units import parse_quantity

angles = st.floats(min_value=0.0, max_value=2 * math.pi)
efficiencies = st.floats(min_value=0.0, max_value=1.0)
squeezing = st.floats(min_value=0.0, max_value=2.0)
gains = st.floats(min_value=1.0, max_value=20.0)

MANY = settings(max_examples=500, deadline=None)
SOME = settings(max_examples=100, deadline=None)


@st.composite
def gaussian_operations(draw):
    """A random sequence of two-mode squeezers, rotations and beamsplitters."""
    ops = []
    for _ in range(draw(st.integers(min_value=1, max_value=4))):
        kind = draw(st.sampled_from(["squeeze", "rotate", "split"]))
        if kind == "squeeze":
            r = draw(st.floats(min_value=0.0, max_value=1.0))
            ops.append(gaussian.two_mode_squeeze_op(2, 0, 1, r, draw(angles)))
        elif kind == "rotate":
            ops.append(gaussian.rotation_op(2, draw(st.integers(0, 1)), draw(angles)))
        else:
            ops.append(gaussian.beamsplitter_op(2, 0, 1, draw(efficiencies)))
    return ops


class TestGaussianEngine:
    @MANY
    @given(gaussian_operations())
    def test_compositions_stay_symplectic(self, ops):
        total = ops[0]
        for op in ops[1:]:
            total = op @ total
        assert total.symplectic_error() < 1e-9

    @MANY
    @given(gaussian_operations())
    def test_unitaries_preserve_purity(self, ops):
        state = gaussian.vacuum_state(2)
        for op in ops:
            state = op.apply(state)
        assert state.is_physical()
        assert state.purity() == pytest.approx(1.0, rel=1e-6)

    @MANY
    @given(squeezing, efficiencies, efficiencies)
    def test_loss_keeps_state_physical(self, r, eta_a, eta_b):
        state = gaussian.two_mode_squeeze(gaussian.vacuum_state(2), 0, 1, r)
        state = gaussian.loss_channel(state, 0, eta_a)
        state = gaussian.loss_channel(state, 1, eta_b)
        assert state.is_physical()
        assert state.purity() <= 1.0 + 1e-9

    @MANY
    @given(squeezing, angles, angles, angles)
    def test_rotation_is_an_angle_shift(self, r, phi, theta_a, theta_b):
        state = gaussian.two_mode_squeeze(gaussian.vacuum_state(2), 0, 1, r)
        comb = MeasurementCombination((theta_a, theta_b), (1.0, 0.7))
        rotated = gaussian.measure_stats(gaussian.phase_rotate(state, 0, phi), comb)
        shifted = gaussian.measure_stats(state, comb.shifted(0, -phi))
        assert rotated.variance == pytest.approx(shifted.variance, rel=1e-9, abs=1e-12)


class TestMeasurementModel:
    @settings(max_examples=1000, deadline=None)
    @given(squeezing, efficiencies, angles, angles, angles)
    def test_closed_form_matches_engine(self, r, eta, theta_p, theta_c, phi):
        config = TnliConfig(r=r, eta=eta, theta_p=theta_p, theta_c=theta_c, phi=phi)
        engine = tnli.build_scene(config).stats().variance
        formula = tnli.dual_homodyne_variance(config.r, eta, theta_p, theta_c, phi)
        assert engine == pytest.approx(formula, rel=1e-10)

    @MANY
    @given(gains, efficiencies, angles, angles, angles)
    def test_variance_is_positive(self, gain, eta, theta_p, theta_c, phi):
        r = tnli.gain_to_r(gain)
        assert tnli.dual_homodyne_variance(r, eta, theta_p, theta_c, phi) > 0

    @MANY
    @given(st.floats(min_value=0.1, max_value=10.0))
    def test_target_gain_round_trip(self, target_db):
        r = tnli.r_for_target_db(target_db)
        variance = tnli.dual_homodyne_variance(r, 1.0, math.pi / 2, math.pi / 2, 0.0)
        assert tnli.squeezing_db(variance) == pytest.approx(target_db, abs=1e-9)

    @SOME
    @given(st.floats(min_value=1.0, max_value=5.0), st.floats(min_value=0.1, max_value=1.0))
    def test_snr_gap_is_the_noise_reduction(self, gain, eta):
        squeezed = TnliConfig(gain=gain, eta=eta)
        coherent = TnliConfig(gain=1.0, eta=eta)
        gap = tnli.snr_db(squeezed, 1e-12) - tnli.snr_db(coherent, 1e-12)
        expected = tnli.squeezing_db(tnli.build_scene(squeezed).stats().variance)
        assert gap == pytest.approx(expected, abs=1e-6)


class TestAnalyzer:
    @SOME
    @given(
        st.integers(min_value=0, max_value=2**63),
        st.floats(min_value=0.1, max_value=10.0),
        st.sampled_from([5e3, 10e3, 20e3]),
    )
    def test_parseval(self, seed, variance, rbw):
        fs = 2.56e6
        samples = math.sqrt(variance) * random_stream(seed).standard_normal(2**16)
        trace = psd_estimate(PhotocurrentRecord(samples, fs, seed), rbw)
        assert trace.total_power() == pytest.approx(np.var(samples), rel=0.01)


class TestUnits:
    @MANY
    @given(
        st.floats(min_value=1e-3, max_value=1e3),
        st.sampled_from([("p", 1e-12), ("n", 1e-9), ("u", 1e-6), ("m", 1e-3), ("", 1.0), ("k", 1e3)]),
    )
    def test_prefixed_power(self, value, prefix):
        symbol, factor = prefix
        parsed = parse_quantity(f"{value!r} {symbol}W", "W")
        assert parsed == pytest.approx(value * factor, rel=1e-12)
