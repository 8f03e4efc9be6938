"""Monte Carlo photocurrent synthesis and spectrum-analyzer emulation.

Records are drawn from the exact Gaussian statistics of a scene: quadrature
vectors are sampled from the scene covariance and projected onto the
measurement combination, then the cantilever tone is added. The detector is
AC coupled, so the scene mean is not part of the record.

Spectra are expressed in shot-noise units: white noise of per-sample
variance ``V`` reads ``V`` (``10 log10 V`` dB) in every bin.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import signal

from tnli_afm.constants import HANN_ENBW_BINS, MIN_RECORD_SAMPLES, MIN_WELCH_SEGMENTS
from tnli_afm.errors import InvalidArgumentError, NumericalError
from tnli_afm.models import AcquisitionSettings, AnalyzerSettings, CantileverParams
from tnli_afm.tnli import Scene, displacement_to_phase, signal_response

logger = logging.getLogger(__name__)

_SEED_MASK = 2**64 - 1

# Half-width of the region around the drive excluded from floor estimates, in RBW
FLOOR_EXCLUSION_RBW = 3.0

TechnicalPsd = Callable[[NDArray[np.float64]], NDArray[np.float64]]


def random_stream(seed: int, *key: int) -> np.random.Generator:
    """Independent PCG64 stream for ``(seed, *key)``.

    Streams for different keys are statistically independent, so draws can be
    generated in any order or in parallel with identical results.
    """
    sequence = np.random.SeedSequence(int(seed) & _SEED_MASK, spawn_key=key)
    return np.random.Generator(np.random.PCG64(sequence))


@dataclass(frozen=True, eq=False)
class PhotocurrentRecord:
    samples: NDArray[np.float64]
    sample_rate: float
    seed: int

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True, eq=False)
class SpectrumTrace:
    """Frequency-binned power in dB relative to shot noise."""

    freq_bins: NDArray[np.float64]
    power: NDArray[np.float64]
    settings: AnalyzerSettings
    seed: int
    sample_rate: float

    def __post_init__(self) -> None:
        if self.freq_bins.shape != self.power.shape:
            raise InvalidArgumentError("frequency and power arrays differ in length")
        if not np.all(np.isfinite(self.power)):
            raise NumericalError("trace contains non-finite power values")

    @property
    def power_linear(self) -> NDArray[np.float64]:
        return 10.0 ** (self.power / 10.0)

    @property
    def bin_width(self) -> float:
        return float(self.freq_bins[1] - self.freq_bins[0])

    def total_power(self) -> float:
        """Integral of the one-sided density over the trace, in per-sample variance units."""
        density = self.power_linear * 2.0 / self.sample_rate
        return float(np.sum(density) * self.bin_width)


def sample_photocurrent(
    scene: Scene,
    cantilever: CantileverParams,
    sample_rate: float,
    duration: float,
    seed: int,
    *,
    stream_key: tuple[int, ...] = (),
    technical_psd: TechnicalPsd | None = None,
) -> PhotocurrentRecord:
    """Draw one photocurrent record of the scene's combined observable.

    The tone amplitude per sample is ``2 Delta<M> / sqrt(f_s)``, so the
    tone-to-floor ratio of a spectrum taken at resolution bandwidth ``B``
    equals the analytic SNR at ``delta_f = B``.

    Args:
        scene: Scene whose covariance sets the noise.
        cantilever: Drive frequency and displacement of the tone.
        sample_rate: Samples per second.
        duration: Record length in seconds.
        seed: Base seed; the record uses stream ``(seed, *stream_key)``.
        stream_key: Extra stream indices (trace index, draw index).
        technical_psd: Optional extra noise PSD in shot-noise units as a
            function of frequency.

    Raises:
        InvalidArgumentError: If the record is too short or the drive is
            above the Nyquist frequency.
    """
    n_samples = round(sample_rate * duration)
    if n_samples < MIN_RECORD_SAMPLES:
        raise InvalidArgumentError(
            f"record of {n_samples} samples is shorter than {MIN_RECORD_SAMPLES}"
        )
    if not cantilever.drive_freq < sample_rate / 2:
        raise InvalidArgumentError(
            f"drive at {cantilever.drive_freq:g} Hz is undersampled at "
            f"{sample_rate:g} samples/s"
        )

    rng = random_stream(seed, *stream_key)
    projection = np.linalg.cholesky(scene.state.cov).T @ scene.combination.vector()
    samples = rng.standard_normal((n_samples, projection.size)) @ projection

    if technical_psd is not None:
        freqs = np.fft.rfftfreq(n_samples, 1.0 / sample_rate)
        shape = np.asarray(technical_psd(freqs), dtype=np.float64)
        if shape.shape != freqs.shape or np.any(shape < 0):
            raise InvalidArgumentError("technical PSD must be non-negative per bin")
        white = np.fft.rfft(rng.standard_normal(n_samples))
        samples += np.fft.irfft(white * np.sqrt(shape), n_samples)

    displacement = cantilever.drive_displacement
    if displacement > 0:
        config = scene.config
        delta = signal_response(
            config, displacement_to_phase(displacement, config.wavelength)
        )
        amplitude = 2.0 * delta / math.sqrt(sample_rate)
        t = np.arange(n_samples) / sample_rate
        samples += amplitude * np.sin(2.0 * np.pi * cantilever.drive_freq * t)

    return PhotocurrentRecord(samples=samples, sample_rate=sample_rate, seed=seed)


def welch_segment_length(sample_rate: float, rbw: float) -> int:
    """Hann segment length whose equivalent noise bandwidth equals ``rbw``."""
    return max(2, round(HANN_ENBW_BINS * sample_rate / rbw))


def psd_estimate(record: PhotocurrentRecord, rbw: float) -> SpectrumTrace:
    """Welch periodogram (Hann, 50% overlap) in shot-noise units.

    Raises:
        InvalidArgumentError: If fewer than ``MIN_WELCH_SEGMENTS`` segments fit.
    """
    if not rbw > 0:
        raise InvalidArgumentError(f"rbw must be positive, got {rbw}")
    fs = record.sample_rate
    nperseg = welch_segment_length(fs, rbw)
    step = nperseg - nperseg // 2
    n_segments = 0 if record.samples.size < nperseg else 1 + (
        record.samples.size - nperseg
    ) // step
    if n_segments < MIN_WELCH_SEGMENTS:
        raise InvalidArgumentError(
            f"only {n_segments} segments of {nperseg} samples fit at RBW {rbw:g} Hz "
            f"(need {MIN_WELCH_SEGMENTS})"
        )

    freqs, density = signal.welch(
        record.samples,
        fs=fs,
        window="hann",
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend=False,
        scaling="density",
    )
    with np.errstate(divide="ignore"):
        power = 10.0 * np.log10(density * fs / 2.0)
    settings = AnalyzerSettings(
        rbw=rbw,
        vbw=rbw,
        sweep_time=record.duration,
        averages=1,
        center=fs / 4,
        span=fs / 2,
    )
    return SpectrumTrace(
        freq_bins=freqs, power=power, settings=settings, seed=record.seed, sample_rate=fs
    )


def _video_filter(
    linear: NDArray[np.float64], bin_width: float, settings: AnalyzerSettings
) -> NDArray[np.float64]:
    """Single-pole lowpass across bins, as the sweep passes them in time."""
    dwell = bin_width * settings.sweep_time / settings.span
    a = math.exp(-2.0 * math.pi * settings.vbw * dwell)
    b, den = [1.0 - a], [1.0, -a]
    zi = signal.lfilter_zi(b, den)[np.newaxis, :] * linear[:, :1]
    smoothed, _ = signal.lfilter(b, den, linear, axis=-1, zi=zi)
    return smoothed


def emulate_analyzer(
    traces: SpectrumTrace | Sequence[SpectrumTrace], settings: AnalyzerSettings
) -> SpectrumTrace:
    """Crop to the span, apply the video filter and average ``settings.averages`` draws.

    A VBW wider than the RBW disables the video filter with a warning.

    Raises:
        InvalidArgumentError: If fewer draws than averages are supplied, the
            draws disagree on their bins, or no bin falls inside the span.
    """
    draws = [traces] if isinstance(traces, SpectrumTrace) else list(traces)
    if len(draws) < settings.averages:
        raise InvalidArgumentError(
            f"{settings.averages} averages requested, {len(draws)} draws supplied"
        )
    draws = draws[: settings.averages]
    reference = draws[0]
    if any(not np.array_equal(d.freq_bins, reference.freq_bins) for d in draws):
        raise InvalidArgumentError("draws do not share frequency bins")

    in_span = (reference.freq_bins >= settings.start) & (
        reference.freq_bins <= settings.stop
    )
    if not in_span.any():
        raise InvalidArgumentError(
            f"span {settings.start:g}-{settings.stop:g} Hz contains no bins"
        )
    freqs = reference.freq_bins[in_span]
    linear = np.stack([d.power_linear[in_span] for d in draws])

    if settings.vbw > settings.rbw:
        logger.warning(
            "VBW %.3g Hz exceeds RBW %.3g Hz; video filter bypassed",
            settings.vbw,
            settings.rbw,
        )
    elif freqs.size > 1:
        linear = _video_filter(linear, reference.bin_width, settings)

    return SpectrumTrace(
        freq_bins=freqs,
        power=10.0 * np.log10(linear.mean(axis=0)),
        settings=settings,
        seed=reference.seed,
        sample_rate=reference.sample_rate,
    )


def _outside_drive(trace: SpectrumTrace, f_drive: float) -> NDArray[np.bool_]:
    return np.abs(trace.freq_bins - f_drive) > FLOOR_EXCLUSION_RBW * trace.settings.rbw


def extract_snr(trace: SpectrumTrace, f_drive: float) -> float:
    """Tone-to-floor ratio at ``f_drive`` in dB.

    The tone power is the largest bin within one bin of the drive; the floor
    is the median of the bins further than 3 RBW from it.

    Raises:
        InvalidArgumentError: If the drive lies outside the trace or too few
            floor bins remain.
        NumericalError: If the tone bin is absent or not finite.
    """
    freqs = trace.freq_bins
    if not freqs[0] <= f_drive <= freqs[-1]:
        raise InvalidArgumentError(
            f"drive {f_drive:g} Hz outside trace span {freqs[0]:g}-{freqs[-1]:g} Hz"
        )
    linear = trace.power_linear
    index = int(np.argmin(np.abs(freqs - f_drive)))
    peak = float(np.max(linear[max(index - 1, 0) : index + 2]))

    floor_bins = linear[_outside_drive(trace, f_drive)]
    if floor_bins.size < 3:
        raise InvalidArgumentError(
            "span too narrow to estimate the floor outside +/-3 RBW of the drive"
        )
    floor = float(np.median(floor_bins))
    if not (math.isfinite(peak) and peak > 0 and floor > 0):
        raise NumericalError(
            f"no usable tone at {f_drive:g} Hz (peak {peak!r}, floor {floor!r})"
        )
    return 10.0 * math.log10(peak / floor)


def floor_db(trace: SpectrumTrace, f_drive: float | None = None) -> float:
    """Mean floor power in dB, excluding +/-3 RBW around ``f_drive`` if given."""
    linear = trace.power_linear
    if f_drive is not None:
        linear = linear[_outside_drive(trace, f_drive)]
    return 10.0 * math.log10(float(np.mean(linear)))


def acquire_trace(
    scene: Scene,
    cantilever: CantileverParams,
    analyzer: AnalyzerSettings,
    acquisition: AcquisitionSettings,
    seed: int,
    stream: int = 0,
    technical_psd: TechnicalPsd | None = None,
) -> SpectrumTrace:
    """Record ``analyzer.averages`` independent draws and emulate the analyzer."""
    draws = [
        psd_estimate(
            sample_photocurrent(
                scene,
                cantilever,
                acquisition.sample_rate,
                acquisition.record_duration,
                seed,
                stream_key=(stream, draw),
                technical_psd=technical_psd,
            ),
            analyzer.rbw,
        )
        for draw in range(analyzer.averages)
    ]
    logger.debug(
        "acquired stream %d: %d draws of %d samples",
        stream,
        analyzer.averages,
        acquisition.record_samples,
    )
    return emulate_analyzer(draws, analyzer)
