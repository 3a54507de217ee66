"""Sonar-equation SNR models and the dB-to-linear-power bridge.

All levels are in dB and every ``log`` is a base-10 logarithm, following the
usual sonar-equation convention.  Absolute references (re 1 uPa) are carried
implicitly: only SNR differences enter the information matrices, so the
reference is metadata.

Passive listening:  SNR = SL - TL - NL, where the source level depends on the
target speed, weight and listening frequency, transmission loss on range, and
the noise level on wind speed and frequency (wind is the dominant ambient
source in low-traffic seas).  Spreading is a spherical/cylindrical compromise
realized as 17 log10(r).

Active (bistatic) sensing:  SNR = SL_active + TS - TL(r1) - TL(r2) - NL, with
SL_active = 171 + 10 log10(P) for transmit power P in watts and a fixed
target strength of -16 dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .noise import NoiseModel

TARGET_STRENGTH_DB = -16.0


@dataclass(frozen=True)
class Environment:
    """Sea-state and receiver inputs to the noise/source levels."""

    wind_speed_knots: float = 6.0
    listening_frequency_khz: float = 6.0

    def __post_init__(self):
        if self.wind_speed_knots < 0.0:
            raise ValueError("wind_speed_knots must be >= 0")
        if self.listening_frequency_khz <= 0.0:
            raise ValueError("listening_frequency_khz must be positive")


def _require_positive(**values: float) -> None:
    bad = [name for name, v in values.items() if not (v > 0.0 and math.isfinite(v))]
    if bad:
        raise ValueError(f"arguments must be positive and finite: {', '.join(bad)}")


def source_level_passive_db(speed_knots: float, weight_tonnes: float,
                            frequency_khz: float) -> float:
    """Radiated-noise source level of a moving target, dB."""
    _require_positive(speed_knots=speed_knots, weight_tonnes=weight_tonnes,
                      frequency_khz=frequency_khz)
    return (60.0 * math.log10(speed_knots) + 9.0 * math.log10(weight_tonnes)
            - 20.0 * math.log10(frequency_khz) + 35.0)


def transmission_loss_db(range_m: float) -> float:
    """One-way propagation loss over ``range_m`` meters, dB."""
    _require_positive(range_m=range_m)
    return 17.0 * math.log10(range_m)


def noise_level_db(wind_speed_knots: float, frequency_khz: float) -> float:
    """Wind-driven ambient noise level, dB."""
    if wind_speed_knots < 0.0:
        raise ValueError("wind_speed_knots must be >= 0")
    _require_positive(frequency_khz=frequency_khz)
    return 35.0 + 24.0 * math.log10(1.0 + wind_speed_knots) - 17.0 * math.log10(frequency_khz)


def passive_snr_db(range_m: float, frequency_khz: float, speed_knots: float,
                   weight_tonnes: float, wind_speed_knots: float) -> float:
    """Single-sensor SNR of the target's radiated noise at the given range."""
    return (source_level_passive_db(speed_knots, weight_tonnes, frequency_khz)
            - transmission_loss_db(range_m)
            - noise_level_db(wind_speed_knots, frequency_khz))


def active_source_level_db(power_watt: float) -> float:
    """Transmitted source level for ``power_watt`` watts, dB."""
    _require_positive(power_watt=power_watt)
    return 171.0 + 10.0 * math.log10(power_watt)


def active_snr_db(power_watt: float, r1_m: float, r2_m: float,
                  frequency_khz: float, wind_speed_knots: float) -> float:
    """Receiver SNR of the target-reflected communication signal.

    ``r1_m`` and ``r2_m`` are the transmitter-to-target and target-to-receiver
    ranges; the expression is symmetric in the two.
    """
    return (active_source_level_db(power_watt) + TARGET_STRENGTH_DB
            - transmission_loss_db(r1_m) - transmission_loss_db(r2_m)
            - noise_level_db(wind_speed_knots, frequency_khz))


def snr_db_to_signal_power(snr_db: float, noise_model: NoiseModel) -> float:
    """Linear signal power that realizes ``snr_db`` against the AR(1) noise.

    The noise lag-0 variance is 1 / (1 - a^2), not unity, so the returned
    power is 10^(snr/10) times that variance.  Used both for the emitted
    passive power and for scaling the bistatic received amplitude.
    """
    if not math.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    return 10.0 ** (snr_db / 10.0) * noise_model.lag0_variance
