"""Measurement sinks: BER counting, PSD estimation, constellation capture.

Alignment policy: the analytic modem delay is authoritative; a
cross-correlation search over +- lags is available as a fallback
(``delay_bits=None``), which also makes the comparison symmetric in its
two arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as _signal
from scipy.special import erfc

from .errors import InsufficientDataError, ParameterError
from .frames import BitFrame, ComplexFrame

__all__ = [
    "BerReport",
    "SpectrumEstimate",
    "measure_ber",
    "estimate_psd",
    "constellation_snapshot",
    "theoretical_qam_ber",
]

MAX_DELAY_SEARCH_BITS = 4096


@dataclass(frozen=True)
class BerReport:
    bit_errors: int
    bits_compared: int
    alignment_delay_bits: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_compared

    def as_dict(self) -> dict:
        return {
            "bit_errors": self.bit_errors,
            "bits_compared": self.bits_compared,
            "ber": self.ber,
            "alignment_delay_bits": self.alignment_delay_bits,
        }


@dataclass(frozen=True)
class SpectrumEstimate:
    frequencies_hz: np.ndarray
    psd_w_per_hz: np.ndarray
    resolution_bw_hz: float


def _best_delay(a: np.ndarray, b: np.ndarray, max_lag: int) -> int:
    """Lag of maximum bit agreement between a and b (positive = b delayed)."""
    sa = 1.0 - 2.0 * a.astype(np.float64)
    sb = 1.0 - 2.0 * b.astype(np.float64)
    # full cross-correlation: index j holds sum_i sa[i] * sb[i + j - (la-1)]
    corr = _signal.correlate(sb, sa, mode="full", method="fft")
    lags = np.arange(corr.size) - (sa.size - 1)
    keep = np.abs(lags) <= max_lag
    lags, corr = lags[keep], corr[keep]
    overlap = np.where(
        lags >= 0, np.minimum(sa.size, sb.size - lags), np.minimum(sb.size, sa.size + lags)
    )
    valid = overlap > 0
    lags, corr, overlap = lags[valid], corr[valid], overlap[valid]
    score = corr / overlap
    # prefer the smallest |lag|, then the non-negative one, on ties
    best = max(range(lags.size), key=lambda i: (score[i], -abs(lags[i]), lags[i] >= 0))
    return int(lags[best])


def measure_ber(
    tx_bits: BitFrame, rx_bits: BitFrame, delay_bits: int | None = None
) -> BerReport:
    """Count bit errors over the overlapping region after delay removal.

    With an explicit ``delay_bits`` the receive stream is taken as delayed
    by that many bits.  With ``None`` the delay is found by correlation
    search over +-MAX_DELAY_SEARCH_BITS lags; the report then carries the
    magnitude of the detected lag.
    """
    a, b = tx_bits.bits, rx_bits.bits
    if delay_bits is None:
        max_lag = min(MAX_DELAY_SEARCH_BITS, a.size - 1, b.size - 1)
        lag = _best_delay(a, b, max_lag)
        if lag < 0:
            a, b = b, a
            lag = -lag
    else:
        lag = int(delay_bits)
        if lag < 0:
            raise ParameterError("delay_bits must be >= 0")
    if lag >= b.size or a.size == 0:
        raise InsufficientDataError(
            f"no overlap: delay {lag} bits, stream lengths {a.size}/{b.size}"
        )
    n = min(a.size, b.size - lag)
    errors = int(np.count_nonzero(a[:n] != b[lag : lag + n]))
    return BerReport(bit_errors=errors, bits_compared=n, alignment_delay_bits=lag)


def estimate_psd(
    x: ComplexFrame, segment_len: int, overlap_fraction: float = 0.5
) -> SpectrumEstimate:
    """Welch-averaged, Hann-windowed two-sided PSD over [-fs/2, fs/2).

    Density normalization: the PSD integrated over frequency equals the
    mean signal power.
    """
    if segment_len > len(x):
        raise ParameterError(
            f"segment_len {segment_len} exceeds frame length {len(x)}"
        )
    if not 0.0 <= overlap_fraction < 1.0:
        raise ParameterError("overlap_fraction must be in [0, 1)")
    fs = x.sample_rate_hz
    noverlap = int(segment_len * overlap_fraction)
    freqs, psd = _signal.welch(
        x.samples,
        fs=fs,
        window="hann",
        nperseg=segment_len,
        noverlap=noverlap,
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    return SpectrumEstimate(
        frequencies_hz=np.fft.fftshift(freqs),
        psd_w_per_hz=np.maximum(np.fft.fftshift(psd).real, 0.0),
        resolution_bw_hz=fs / segment_len,
    )


def constellation_snapshot(x: ComplexFrame, max_points: int) -> np.ndarray:
    """First ``max_points`` symbols as an (n, 2) array of (re, im) rows."""
    if max_points <= 0:
        raise ParameterError("max_points must be > 0")
    pts = x.samples[:max_points]
    return np.column_stack([pts.real, pts.imag])


def theoretical_qam_ber(es_n0_db: float, m_ary: int) -> float:
    """Nearest-neighbour Gray bit-error probability for square M-QAM on AWGN.

    Pb = (1 - 1/sqrt(M)) / log2(sqrt(M)) * erfc(sqrt(3/(2(M-1)) * Es/N0));
    for M=16 this reduces to (3/8) * erfc(sqrt(Es/N0 / 10)).
    """
    if m_ary < 4 or (4 ** int(round(math.log(m_ary, 4)))) != m_ary:
        raise ParameterError(f"m_ary must be square (a power of 4), got {m_ary}")
    q = int(round(math.sqrt(m_ary)))
    es_n0 = 10.0 ** (es_n0_db / 10.0)
    arg = math.sqrt(3.0 * es_n0 / (2.0 * (m_ary - 1)))
    return (1.0 - 1.0 / q) / math.log2(q) * float(erfc(arg))
