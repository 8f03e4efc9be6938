"""Experiment description: optics, cantilever, analyzer and acquisition settings.

All models are frozen and reject unknown keys. Every quantity accepts either a
plain SI number or a unit-suffixed string (see :mod:`tnli_afm.units`).
"""

from __future__ import annotations

import math
from enum import StrEnum
from typing import Annotated, Any, Literal

from pydantic import (
    AliasChoices,
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)

from tnli_afm.constants import SCHEMA_VERSION
from tnli_afm.errors import ConfigError
from tnli_afm.units import parse_quantity, quantity
from tnli_afm.utils.resolution import resolve_topology


class Topology(StrEnum):
    """Which beam is reflected from the cantilever."""

    PROBE_ON_CANTILEVER = "probe"
    LO_ON_CANTILEVER = "lo"
    DUAL_ON_CANTILEVER = "dual"


_TOPOLOGY_ALIASES: dict[str, Topology] = {
    "probe": Topology.PROBE_ON_CANTILEVER,
    "probe_on_cantilever": Topology.PROBE_ON_CANTILEVER,
    "lo": Topology.LO_ON_CANTILEVER,
    "lo_on_cantilever": Topology.LO_ON_CANTILEVER,
    "dual": Topology.DUAL_ON_CANTILEVER,
    "dual_on_cantilever": Topology.DUAL_ON_CANTILEVER,
}

Dimensionless = Annotated[float, BeforeValidator(quantity(""))]
Fraction = Annotated[float, BeforeValidator(quantity("")), Field(ge=0.0, le=1.0)]
Angle = Annotated[float, BeforeValidator(quantity("rad")), Field(allow_inf_nan=False)]
Power = Annotated[float, BeforeValidator(quantity("W")), Field(ge=0.0)]
Frequency = Annotated[float, BeforeValidator(quantity("Hz")), Field(gt=0.0)]
Duration = Annotated[float, BeforeValidator(quantity("s")), Field(gt=0.0)]

_FROZEN = ConfigDict(frozen=True, extra="forbid")


class TnliConfig(BaseModel):
    """Optical side of the experiment.

    The amplifier gain may be given as ``gain`` (G) or as the squeezing
    parameter ``r``; the two are related by ``G = cosh^2 r``.
    """

    model_config = _FROZEN

    gain: Annotated[Dimensionless, Field(ge=1.0)] = 1.88
    eta: Fraction = 0.9
    theta_p: Angle = math.pi / 2
    theta_c: Angle = math.pi / 2
    phi: Angle = 0.0
    wavelength: Annotated[
        float,
        BeforeValidator(quantity("m")),
        Field(gt=0.0, validation_alias=AliasChoices("wavelength", "lambda")),
    ] = 795e-9
    p_probe: Power = 1.5e-6
    p_conj: Power = 1.4e-6
    p_lo_probe: Power = 110e-6
    p_lo_conj: Power = 70e-6
    delta_f: Frequency = 1.0
    topology: Topology = Topology.LO_ON_CANTILEVER
    cantilever_reflectivity: Fraction = 0.95

    @model_validator(mode="before")
    @classmethod
    def _gain_from_r(cls, data: Any) -> Any:
        if not isinstance(data, dict) or "r" not in data:
            return data
        data = dict(data)
        if "gain" in data:
            raise ValueError("give either 'gain' or 'r', not both")
        r = parse_quantity(data.pop("r"))
        if not r >= 0:
            raise ValueError(f"r must be >= 0, got {r}")
        data["gain"] = math.cosh(r) ** 2
        return data

    @field_validator("topology", mode="before")
    @classmethod
    def _topology_alias(cls, value: Any) -> Any:
        if isinstance(value, str) and not isinstance(value, Topology):
            try:
                return resolve_topology(value, _TOPOLOGY_ALIASES)
            except ConfigError as exc:
                raise ValueError(str(exc)) from exc
        return value

    @property
    def r(self) -> float:
        """Squeezing parameter, ``arccosh(sqrt(G))``."""
        return math.acosh(math.sqrt(self.gain))

    @property
    def p_tot(self) -> float:
        """Total power on the detectors: both squeezed fields and both LOs."""
        return self.p_probe + self.p_conj + self.p_lo_probe + self.p_lo_conj


class CantileverParams(BaseModel):
    """Cantilever and piezo drive."""

    model_config = _FROZEN

    k: Annotated[float, BeforeValidator(quantity("N/m")), Field(gt=0.0)] = 0.2
    q: Annotated[
        Dimensionless, Field(ge=1.0, validation_alias=AliasChoices("q", "Q"))
    ] = 1.0
    f0: Frequency = 13e3
    drive_freq: Frequency = 737e3
    drive_amplitude: Annotated[
        float,
        BeforeValidator(quantity("V")),
        Field(
            ge=0.0,
            validation_alias=AliasChoices("drive_amplitude", "drive_amplitude_volts"),
        ),
    ] = 0.18
    volts_to_meters: Annotated[
        float, BeforeValidator(quantity("m/V")), Field(ge=0.0)
    ] = 3.2e-10

    @property
    def drive_displacement(self) -> float:
        """Peak cantilever displacement in meters at the configured drive."""
        return self.drive_amplitude * self.volts_to_meters


class AnalyzerSettings(BaseModel):
    """Spectrum-analyzer front panel."""

    model_config = _FROZEN

    rbw: Frequency = 10e3
    vbw: Frequency = 30.0
    sweep_time: Duration = 0.5
    averages: Annotated[int, Field(ge=1)] = 20
    center: Frequency = 737e3
    span: Frequency = 400e3

    @property
    def start(self) -> float:
        return self.center - self.span / 2

    @property
    def stop(self) -> float:
        return self.center + self.span / 2


class AcquisitionSettings(BaseModel):
    """Digitizer settings for the Monte Carlo photocurrent records."""

    model_config = _FROZEN

    sample_rate: Frequency = 2.56e6
    record_duration: Duration = 2**16 / 2.56e6
    seed: int | None = None

    @property
    def record_samples(self) -> int:
        return round(self.sample_rate * self.record_duration)


class Experiment(BaseModel):
    """Root of an experiment file."""

    model_config = _FROZEN

    schema_version: Literal[1]
    optics: TnliConfig = TnliConfig()
    cantilever: CantileverParams = CantileverParams()
    analyzer: AnalyzerSettings = AnalyzerSettings()
    acquisition: AcquisitionSettings = AcquisitionSettings()

    @classmethod
    def default(cls) -> Experiment:
        return cls(schema_version=SCHEMA_VERSION)
