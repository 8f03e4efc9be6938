"""Physical constants and analyzer constants shared across modules."""

from __future__ import annotations

# CODATA 2018 exact values
PLANCK_H = 6.62607015e-34  # J s
SPEED_OF_LIGHT = 299792458.0  # m / s

# Hann window equivalent noise bandwidth, in bins
HANN_ENBW_BINS = 1.5

# Smallest record the Monte Carlo sampler accepts
MIN_RECORD_SAMPLES = 2**14

# Minimum number of Welch segments behind any PSD estimate
MIN_WELCH_SEGMENTS = 8

# Reported in place of an SNR when there is no signal at all
SNR_FLOOR_DB = float("-inf")

SCHEMA_VERSION = 1
