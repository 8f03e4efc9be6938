"""Truncated nonlinear interferometer measurement model.

The optical scene has two modes, probe (0) and conjugate (1), produced by a
two-mode squeezer of gain ``G = cosh^2 r``. Local oscillators are classical
phase references: they set the homodyne angles ``theta_p`` and ``theta_c``
and only enter the radiometric calculators through their powers.

The dual-homodyne observable is the gain-weighted sum
``M = X_p(theta_p) + tanh(2r) X_c(theta_c)``; its variance normalised to the
``r -> 0`` value (shot noise, 1) is given in closed form by
:func:`dual_homodyne_variance`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from scipy.optimize import brentq

from tnli_afm import gaussian
from tnli_afm.constants import PLANCK_H, SNR_FLOOR_DB, SPEED_OF_LIGHT
from tnli_afm.errors import InvalidArgumentError, NumericalError
from tnli_afm.gaussian import GaussianState, MeasurementCombination
from tnli_afm.models import TnliConfig, Topology

logger = logging.getLogger(__name__)

PROBE = 0
CONJUGATE = 1

# Upper end of the squeezing search (cosh 2r ~ 1.1e4)
_R_SEARCH_MAX = 5.0


def r_to_gain(r: float) -> float:
    """``G = cosh^2 r``."""
    if not r >= 0:
        raise InvalidArgumentError(f"squeezing parameter must be >= 0, got {r}")
    return math.cosh(r) ** 2


def gain_to_r(gain: float) -> float:
    """``r = arccosh(sqrt(G))``, so that ``cosh 2r = 2G - 1``."""
    if not gain >= 1:
        raise InvalidArgumentError(f"gain must be >= 1, got {gain}")
    return math.acosh(math.sqrt(gain))


def dual_homodyne_variance(
    r: float, eta: float, theta_p: float, theta_c: float, phi: float
) -> float:
    """Closed-form variance of the dual-homodyne phase-sum measurement.

    Normalised so that ``r = 0`` gives 1. ``eta`` is the composite detection
    efficiency, ``theta_p`` and ``theta_c`` the homodyne phases, ``phi`` the
    probe-arm phase shift.
    """
    if not r >= 0:
        raise InvalidArgumentError(f"squeezing parameter must be >= 0, got {r}")
    if not 0.0 <= eta <= 1.0:
        raise InvalidArgumentError(f"eta must lie in [0, 1], got {eta}")
    s, c, t = math.sinh(2 * r), math.cosh(2 * r), math.tanh(2 * r)
    # eta (2 s t cos(x) + c - t^2 + s t - 1) + t^2 + 1, regrouped using
    # c - s t = 1/c and 1 + cos(x) = 2 cos^2(x/2) so the ideal point has no
    # cancellation at high gain.
    half = 0.5 * (theta_p + theta_c - phi)
    correlated = 4.0 * s * t * math.cos(half) ** 2 + 1.0 / c
    return eta * correlated + (1.0 - eta) * (1.0 + t**2)


def ideal_noise_ratio(gain: float) -> float:
    """Noise relative to shot noise at unit efficiency and optimal phases: ``1/(2G-1)``."""
    if not gain >= 1:
        raise InvalidArgumentError(f"gain must be >= 1, got {gain}")
    return 1.0 / (2.0 * gain - 1.0)


def squeezing_db(variance_ratio: float) -> float:
    """Decibels below shot noise, ``-10 log10(ratio)``."""
    if not variance_ratio > 0:
        raise InvalidArgumentError(
            f"variance ratio must be positive, got {variance_ratio}"
        )
    return -10.0 * math.log10(variance_ratio)


def ratio_from_db(db: float) -> float:
    """Inverse of :func:`squeezing_db`."""
    return 10.0 ** (-db / 10.0)


def displacement_to_phase(displacement: float, wavelength: float) -> float:
    """Round-trip phase ``4 pi d / lambda`` of a normal-incidence reflection."""
    if not wavelength > 0:
        raise InvalidArgumentError(f"wavelength must be positive, got {wavelength}")
    return 4.0 * math.pi * displacement / wavelength


def photon_flux(power: float, wavelength: float) -> float:
    """Photons per second, ``P lambda / (h c)``."""
    return power * wavelength / (PLANCK_H * SPEED_OF_LIGHT)


def r_for_target_db(
    target_db: float,
    eta: float = 1.0,
    theta_p: float = math.pi / 2,
    theta_c: float = math.pi / 2,
    phi: float = 0.0,
) -> float:
    """Smallest ``r`` at which :func:`dual_homodyne_variance` reaches ``target_db``.

    Raises:
        InvalidArgumentError: If the target is not reachable at this efficiency.
    """
    target = ratio_from_db(target_db)
    if target_db <= 0:
        raise InvalidArgumentError(
            f"target must be a positive number of dB below shot noise, got {target_db}"
        )

    # Below 2/3 efficiency the variance first rises above shot noise and
    # peaks at cosh 2r = 2(1 - eta)/eta; it only falls from there on.
    r_lo = 0.0
    if 0 < eta < 2.0 / 3.0:
        r_lo = 0.5 * math.acosh(2.0 * (1.0 - eta) / eta)

    def excess(r: float) -> float:
        return dual_homodyne_variance(r, eta, theta_p, theta_c, phi) - target

    if excess(_R_SEARCH_MAX) > 0:
        best = dual_homodyne_variance(_R_SEARCH_MAX, eta, theta_p, theta_c, phi)
        raise InvalidArgumentError(
            f"{target_db} dB is not reachable at eta={eta} "
            f"(variance {best:.4f} of shot noise at r={_R_SEARCH_MAX})"
        )
    return float(brentq(excess, r_lo, _R_SEARCH_MAX, xtol=1e-14, rtol=1e-14))


@dataclass(frozen=True)
class Scene:
    """The optical state at the detectors and the observable read out from it."""

    config: TnliConfig
    state: GaussianState
    combination: MeasurementCombination

    def stats(self) -> gaussian.QuadratureStats:
        return gaussian.measure_stats(self.state, self.combination)


def build_scene(config: TnliConfig, delta_phi: float = 0.0) -> Scene:
    """Build the detected two-mode state for ``config``.

    ``p_probe`` is the detected probe power, so the seed is scaled by
    ``1/cosh r`` and squeezed and coherent runs share the same bright probe.
    ``delta_phi`` is added to ``config.phi`` (used for signal responses).
    """
    r = config.r
    phi = config.phi + delta_phi
    alpha_out = math.sqrt(photon_flux(config.p_probe, config.wavelength))
    theta_p = config.theta_p

    state = gaussian.vacuum_state(2)
    state = gaussian.displace(state, PROBE, alpha_out / math.cosh(r))
    state = gaussian.two_mode_squeeze(state, PROBE, CONJUGATE, r)

    match config.topology:
        case Topology.PROBE_ON_CANTILEVER:
            state = gaussian.loss_channel(state, PROBE, config.cantilever_reflectivity)
            state = gaussian.phase_rotate(state, PROBE, phi)
        case Topology.LO_ON_CANTILEVER:
            # A phase on the LO shifts the angle it reads out instead.
            theta_p -= phi
        case Topology.DUAL_ON_CANTILEVER:
            for mode in (PROBE, CONJUGATE):
                state = gaussian.loss_channel(
                    state, mode, config.cantilever_reflectivity
                )
                state = gaussian.phase_rotate(state, mode, phi)

    for mode in (PROBE, CONJUGATE):
        state = gaussian.loss_channel(state, mode, config.eta)

    combination = MeasurementCombination(
        (theta_p, config.theta_c), (1.0, math.tanh(2 * r))
    )
    return Scene(config=config, state=state, combination=combination)


def signal_response(config: TnliConfig, delta_phi: float) -> float:
    """Change of the mean observable when the cantilever adds ``delta_phi``."""
    moved = build_scene(config, delta_phi).stats().mean
    rest = build_scene(config).stats().mean
    return moved - rest


def phase_sum_squeezing_db(scene: Scene) -> float:
    """Squeezing of the balanced phase-sum quadrature of the scene, in dB."""
    variance = gaussian.measure_stats(
        scene.state, MeasurementCombination.phase_sum(scene.state.n_modes)
    ).variance
    return squeezing_db(variance)


def _signal_path_transmission(config: TnliConfig) -> float:
    if config.topology is Topology.LO_ON_CANTILEVER:
        return config.eta
    return config.eta * config.cantilever_reflectivity


def snr_db(config: TnliConfig, displacement: float) -> float:
    """Signal-to-noise ratio of a cantilever displacement, in dB.

    ``SNR = (Delta <M>)^2 / (Var(M) Delta f)`` with the mean response taken
    from the Gaussian engine. Absolute values depend on the photon-flux
    normalisation of the probe; differences between configurations with the
    same signal path do not.

    Returns:
        The SNR in dB, or ``SNR_FLOOR_DB`` for zero displacement.

    Raises:
        InvalidArgumentError: For a negative displacement.
        NumericalError: If no light reaches the detectors or the noise is degenerate.
    """
    if not displacement >= 0:
        raise InvalidArgumentError(
            f"displacement amplitude must be >= 0, got {displacement}"
        )
    if _signal_path_transmission(config) == 0:
        raise NumericalError(
            "degenerate configuration: no light reaches the detectors "
            f"(eta={config.eta}, reflectivity={config.cantilever_reflectivity})"
        )
    if displacement == 0:
        return SNR_FLOOR_DB

    variance = build_scene(config).stats().variance
    if not (variance > 0 and math.isfinite(variance)):
        raise NumericalError(f"degenerate noise variance {variance}")

    signal = signal_response(
        config, displacement_to_phase(displacement, config.wavelength)
    )
    if signal == 0:
        return SNR_FLOOR_DB
    logger.debug(
        "snr: d=%.3e m signal=%.6e variance=%.6f", displacement, signal, variance
    )
    return 10.0 * math.log10(signal**2 / (variance * config.delta_f))
