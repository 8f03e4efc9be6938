"""Displacement-noise calculators: shot noise, backaction, SQL and the squeezed floor.

Each calculator returns a :class:`DisplacementNoise` holding the variance
over the measurement bandwidth (m^2) and its square root (m). With the
default ``delta_f = 1 Hz`` these read directly as m^2/Hz and m/sqrt(Hz).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

from tnli_afm.constants import PLANCK_H, SPEED_OF_LIGHT
from tnli_afm.errors import InvalidArgumentError
from tnli_afm.models import CantileverParams, TnliConfig, Topology
from tnli_afm.tnli import build_scene
from tnli_afm.utils.formatting import to_jsonable

logger = logging.getLogger(__name__)

_LEVELS = ("snl", "backaction", "sql", "squeezed_floor", "ratio_floor")


@dataclass(frozen=True)
class DisplacementNoise:
    """A displacement noise level over a bandwidth ``delta_f``."""

    variance: float  # m^2 within delta_f
    delta_f: float  # Hz

    @property
    def amplitude(self) -> float:
        """RMS displacement within ``delta_f``, in meters."""
        return math.sqrt(self.variance)

    @property
    def psd(self) -> float:
        """m^2/Hz."""
        return self.variance / self.delta_f

    @property
    def asd(self) -> float:
        """m/sqrt(Hz)."""
        return math.sqrt(self.psd)

    @classmethod
    def from_amplitude(cls, amplitude: float, delta_f: float) -> DisplacementNoise:
        return cls(variance=amplitude**2, delta_f=delta_f)


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise InvalidArgumentError(f"{name} must be positive, got {value}")


def snl_displacement(
    wavelength: float, p_tot: float, delta_f: float
) -> DisplacementNoise:
    """Shot-noise-limited displacement, ``(1/4 pi^2) h c lambda delta_f / (2 P_tot)``.

    Args:
        wavelength: Optical wavelength in meters.
        p_tot: Total optical power on the detectors in watts.
        delta_f: Measurement bandwidth in hertz.
    """
    _require_positive(wavelength=wavelength, p_tot=p_tot, delta_f=delta_f)
    variance = (
        PLANCK_H * SPEED_OF_LIGHT * wavelength * delta_f / (2.0 * p_tot)
    ) / (4.0 * math.pi**2)
    return DisplacementNoise(variance=variance, delta_f=delta_f)


def backaction_displacement(
    q: float, k: float, power: float, wavelength: float, delta_f: float
) -> DisplacementNoise:
    """Radiation-pressure backaction, ``(4 Q^2 / k^2) 2 P h delta_f / (c lambda)``.

    ``power`` is the optical power incident on the cantilever and may be zero.
    """
    if not q >= 1:
        raise InvalidArgumentError(f"quality factor must be >= 1, got {q}")
    if not power >= 0:
        raise InvalidArgumentError(f"power must be >= 0, got {power}")
    _require_positive(k=k, wavelength=wavelength, delta_f=delta_f)
    variance = (4.0 * q**2 / k**2) * (
        2.0 * power * PLANCK_H * delta_f / (SPEED_OF_LIGHT * wavelength)
    )
    return DisplacementNoise(variance=variance, delta_f=delta_f)


def sql_displacement(
    snl: DisplacementNoise, backaction: DisplacementNoise
) -> DisplacementNoise:
    """Standard quantum limit: quadrature sum of shot noise and backaction."""
    if snl.delta_f != backaction.delta_f:
        raise InvalidArgumentError("shot noise and backaction bandwidths differ")
    return DisplacementNoise(
        variance=snl.variance + backaction.variance, delta_f=snl.delta_f
    )


def squeezed_min_displacement(
    wavelength: float, p_tot: float, delta_f: float, r: float
) -> DisplacementNoise:
    """Smallest resolvable displacement with squeezing ``r``.

    ``(1 / (2 pi e^r)) sqrt(h c lambda delta_f / (2 P_tot))``, returned as an
    amplitude; ``r = 0`` recovers :func:`snl_displacement`.
    """
    _require_positive(wavelength=wavelength, p_tot=p_tot, delta_f=delta_f)
    if not r >= 0:
        raise InvalidArgumentError(f"squeezing parameter must be >= 0, got {r}")
    amplitude = math.sqrt(
        PLANCK_H * SPEED_OF_LIGHT * wavelength * delta_f / (2.0 * p_tot)
    ) / (2.0 * math.pi * math.exp(r))
    return DisplacementNoise.from_amplitude(amplitude, delta_f)


def power_on_cantilever(config: TnliConfig, lo_scale: float = 1.0) -> float:
    """Optical power reflected from the cantilever for the configured topology."""
    match config.topology:
        case Topology.PROBE_ON_CANTILEVER:
            return config.p_probe
        case Topology.LO_ON_CANTILEVER:
            return config.p_lo_probe * lo_scale
        case Topology.DUAL_ON_CANTILEVER:
            return config.p_probe + config.p_conj


@dataclass(frozen=True)
class NoiseBudget:
    """Displacement noise report for one configuration, all in m/sqrt(Hz)."""

    topology: Topology
    snl_asd: float
    backaction_asd: float
    sql_asd: float
    squeezed_floor_asd: float
    ratio_floor_asd: float
    noise_ratio: float
    p_tot: float
    p_cantilever: float
    config: TnliConfig = field(repr=False)
    cantilever: CantileverParams = field(repr=False)
    notes: tuple[str, ...] = ()

    @property
    def snl_psd(self) -> float:
        return self.snl_asd**2

    @property
    def backaction_psd(self) -> float:
        return self.backaction_asd**2

    @property
    def sql_psd(self) -> float:
        return self.sql_asd**2

    @property
    def squeezed_floor_psd(self) -> float:
        return self.squeezed_floor_asd**2

    def db_rel_snl(self, asd: float) -> float:
        """Power ratio of ``asd`` to the shot-noise floor, in dB."""
        if asd == 0:
            return float("-inf")
        return 20.0 * math.log10(asd / self.snl_asd)

    def to_report(self) -> dict[str, Any]:
        """JSON-ready view with m/sqrt(Hz), m^2/Hz and dB-rel-SNL for every level.

        The generating optics and cantilever parameters are echoed under
        ``config`` and ``cantilever`` (LO powers already scaled).
        """
        report: dict[str, Any] = {
            "topology": self.topology,
            "noise_ratio": self.noise_ratio,
            "p_tot": self.p_tot,
            "p_cantilever": self.p_cantilever,
        }
        for name in _LEVELS:
            asd = getattr(self, f"{name}_asd")
            report[f"{name}_asd"] = asd
            report[f"{name}_psd"] = asd**2
            report[f"{name}_db_rel_snl"] = self.db_rel_snl(asd)
        report["config"] = self.config
        report["cantilever"] = self.cantilever
        report["notes"] = list(self.notes)
        return to_jsonable(report)


def budget_report(
    config: TnliConfig, cantilever: CantileverParams, lo_scale: float = 1.0
) -> NoiseBudget:
    """Aggregate shot noise, backaction, SQL and squeezed floors for ``config``.

    ``lo_scale`` multiplies both LO powers (for LO-power scaling studies).
    The squeezed floor is reported twice: from the ``1/e^r`` law
    (``squeezed_floor_asd``) and as the shot-noise floor scaled by the
    engine's noise ratio (``ratio_floor_asd``).

    Raises:
        InvalidArgumentError: If no power reaches the detectors.
    """
    if not lo_scale > 0:
        raise InvalidArgumentError(f"lo_scale must be positive, got {lo_scale}")
    scaled = config.model_copy(
        update={
            "p_lo_probe": config.p_lo_probe * lo_scale,
            "p_lo_conj": config.p_lo_conj * lo_scale,
        }
    )
    p_tot = scaled.p_tot
    if not p_tot > 0:
        raise InvalidArgumentError("total detected power is zero")
    p_cantilever = power_on_cantilever(config, lo_scale)

    snl = snl_displacement(config.wavelength, p_tot, config.delta_f)
    backaction = backaction_displacement(
        cantilever.q, cantilever.k, p_cantilever, config.wavelength, config.delta_f
    )
    sql = sql_displacement(snl, backaction)
    floor = squeezed_min_displacement(config.wavelength, p_tot, config.delta_f, config.r)
    noise_ratio = build_scene(scaled).stats().variance
    logger.debug(
        "budget %s: P_tot=%.3e W, P_cantilever=%.3e W, noise ratio %.4f",
        config.topology,
        p_tot,
        p_cantilever,
        noise_ratio,
    )
    return NoiseBudget(
        topology=config.topology,
        snl_asd=snl.asd,
        backaction_asd=backaction.asd,
        sql_asd=sql.asd,
        squeezed_floor_asd=floor.asd,
        ratio_floor_asd=snl.asd * math.sqrt(noise_ratio),
        noise_ratio=noise_ratio,
        p_tot=p_tot,
        p_cantilever=p_cantilever,
        config=scaled,
        cantilever=cantilever,
        notes=(
            "thermal (Brownian) cantilever noise is not included",
            "squeezed_floor_asd follows the 1/e^r law; ratio_floor_asd scales "
            "the shot-noise floor by the dual-homodyne noise ratio",
        ),
    )
