"""Link budget: dual-slope pathloss, thermal noise, SNR/SINR and goodput.

The pathloss is 32.4 + 20*log10(f_GHz) + 10*alpha*log10(d) with the slope
switching from 2.1 to 3.4 at the breakpoint distance; it is applied as
printed, so the curve is discontinuous at the breakpoint. Interfering
transmissions carry the same beamforming gain as serving ones (directional
transmitter, omni-directional receiver).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ChannelParams:
    """Transmission parameters; defaults are the standard 28 GHz setup."""

    carrier_ghz: float = 28.0
    bandwidth_hz: float = 50e6
    tx_power_dbm: float = 20.0
    beamforming_gain_db: float = 9.0
    noise_figure_db: float = 7.0
    snr_threshold_db: float = -5.0
    alpha_near: float = 2.1
    alpha_far: float = 3.4
    breakpoint_m: float = 54.0

    def __post_init__(self):
        if self.carrier_ghz <= 0 or self.bandwidth_hz <= 0:
            raise ValueError("carrier and bandwidth must be positive")
        if self.breakpoint_m <= 0:
            raise ValueError("breakpoint distance must be positive")


@dataclass(frozen=True)
class LinkSample:
    """One link evaluation: SNR, SINR, decodability and achieved rate."""

    snr_db: float
    sinr_db: float
    decodable: bool
    goodput_bps: float


def pathloss_db(params: ChannelParams, d: float) -> float:
    """Dual-slope pathloss in dB at distance d meters."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    alpha = params.alpha_near if d < params.breakpoint_m else params.alpha_far
    return 32.4 + 20.0 * math.log10(params.carrier_ghz) + 10.0 * alpha * math.log10(d)


def noise_power_dbm(params: ChannelParams) -> float:
    """Thermal noise floor over the configured bandwidth plus noise figure."""
    return -174.0 + 10.0 * math.log10(params.bandwidth_hz) + params.noise_figure_db


def rx_power_dbm(params: ChannelParams, d: float) -> float:
    """Received power from a beamformed transmitter at distance d."""
    return params.tx_power_dbm + params.beamforming_gain_db - pathloss_db(params, d)


def snr_db(params: ChannelParams, d: float) -> float:
    return rx_power_dbm(params, d) - noise_power_dbm(params)


def practical_beam_radius(params: ChannelParams) -> float:
    """Largest range where the SNR still meets the threshold.

    Solved on the far pathloss slope by bisection to 1e-6 m. Raises if the
    threshold is already unmet at the breakpoint (radius would fall on the
    near slope, outside this model's operating regime).
    """
    lo = params.breakpoint_m
    if snr_db(params, lo) < params.snr_threshold_db:
        raise ValueError("SNR threshold unreachable on the far slope")
    hi = lo
    while snr_db(params, hi) >= params.snr_threshold_db:
        hi *= 2.0
        if hi > 1e9:
            raise ValueError("SNR threshold never reached; check parameters")
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if snr_db(params, mid) >= params.snr_threshold_db:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def sinr_db(params: ChannelParams, serving_d: float,
            interferer_ds=()) -> float:
    """SINR of a link with co-channel interferers at the given distances.

    Whether an interferer counts (receiver inside its sector) is the
    caller's decision; every distance passed here contributes.
    """
    signal_mw = _dbm_to_mw(rx_power_dbm(params, serving_d))
    noise_mw = _dbm_to_mw(noise_power_dbm(params))
    interference_mw = sum(_dbm_to_mw(rx_power_dbm(params, d)) for d in interferer_ds)
    return 10.0 * math.log10(signal_mw / (noise_mw + interference_mw))


def goodput_bps(params: ChannelParams, sinr_value_db: float, mode: str) -> float:
    """Achieved rate for a tick at the given SINR.

    Geometric mode is the binary service model: one normalized unit/s when
    interference-free (callers pass +inf SINR for clean, -inf for interfered).
    Practical mode yields the Shannon rate when decodable, zero otherwise.
    """
    if mode == "geometric":
        return 1.0 if sinr_value_db >= params.snr_threshold_db else 0.0
    if mode == "practical":
        if sinr_value_db < params.snr_threshold_db:
            return 0.0
        return params.bandwidth_hz * math.log2(1.0 + 10.0 ** (sinr_value_db / 10.0))
    raise ValueError(f"unknown goodput mode {mode!r}")


def evaluate_link(params: ChannelParams, serving_d: float, interferer_ds=(),
                  mode: str = "practical") -> LinkSample:
    """Full link evaluation: SNR, SINR, threshold test and rate."""
    snr = snr_db(params, serving_d)
    sinr = sinr_db(params, serving_d, interferer_ds)
    return LinkSample(
        snr_db=snr,
        sinr_db=sinr,
        decodable=sinr >= params.snr_threshold_db,
        goodput_bps=goodput_bps(params, sinr, mode),
    )
