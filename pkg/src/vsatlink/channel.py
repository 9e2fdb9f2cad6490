"""RF impairments: Saleh TWTA, dB gains, path loss, rotation, noise, I/Q skew.

The full transponder chain (:class:`SatelliteChannel`) composes, in order:
TWTA -> Tx dish gain -> uplink path loss -> satellite Rx gain -> transponder
amplifier gain -> satellite Tx gain -> downlink path loss -> phase/Doppler
rotation -> Rx dish gain -> receiver thermal noise -> I/Q imbalance.

Two power modes:

* ``physical`` - every dB term is applied literally; noise is kTB from the
  receiver noise temperature.  If the transponder amplifier gain is left
  unset it is auto-closed so the mean pre-noise received power equals the
  channel-input power (the published gain/loss figures do not close the
  link by themselves); the value used is reported.
* ``normalized`` - the dB terms are replaced by a single renormalization
  back to the input waveform's own power before noise injection, and noise
  comes from a target Es/N0 instead of a temperature.  With all impairments
  neutral this mode is an exact identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import ParameterError, PipelineError
from .frames import ComplexFrame

__all__ = [
    "BOLTZMANN_J_PER_K",
    "SalehParams",
    "ImpairmentConfig",
    "LinkGains",
    "saleh_amplify",
    "apply_gain_db",
    "fspl_attenuate",
    "phase_freq_offset",
    "PhaseFrequencyRotator",
    "thermal_noise",
    "iq_imbalance",
    "SatelliteChannel",
    "ChannelLog",
    "run_channel",
]

BOLTZMANN_J_PER_K = 1.380649e-23


def _db_to_amplitude(db: float) -> float:
    return 10.0 ** (db / 20.0)


@dataclass(frozen=True)
class SalehParams:
    """TWTA AM/AM and AM/PM coefficients plus dB drive scalings.

    AM/AM: A(r) = amam_alpha * r / (1 + amam_beta * r^2)
    AM/PM: phi(r) = ampm_alpha * r^2 / (1 + ampm_beta * r^2)   [radians]
    applied to the input amplitude after ``input_scale_db``; the result is
    scaled by ``output_scale_db``.
    """

    input_scale_db: float = -16.1821
    amam_alpha: float = 2.1587
    amam_beta: float = 1.1517
    ampm_alpha: float = 4.0033
    ampm_beta: float = 9.1040
    output_scale_db: float = 32.9118

    def __post_init__(self):
        if self.amam_beta < 0 or self.ampm_beta < 0:
            raise ParameterError("Saleh beta coefficients must be >= 0")

    @classmethod
    def linear(cls) -> "SalehParams":
        """A transparent amplifier: A(r) = r, phi(r) = 0, unity scalings."""
        return cls(0.0, 1.0, 0.0, 0.0, 1.0, 0.0)

    @property
    def amam_peak_input(self) -> float:
        """Input amplitude at which AM/AM saturates (scalings removed)."""
        if self.amam_beta == 0:
            return np.inf
        return 1.0 / np.sqrt(self.amam_beta)

    @property
    def amam_peak_output(self) -> float:
        """Maximum AM/AM output amplitude (scalings removed)."""
        if self.amam_beta == 0:
            return np.inf
        return self.amam_alpha / (2.0 * np.sqrt(self.amam_beta))


@dataclass(frozen=True)
class ImpairmentConfig:
    """Link impairment settings (all transparent at their zero defaults)."""

    phase_offset_deg: float = 0.0
    freq_offset_hz: float = 0.0
    noise_temperature_k: float = 0.0
    iq_amplitude_imbalance_db: float = 0.0
    iq_phase_imbalance_deg: float = 0.0
    dc_offset_i: float = 0.0
    dc_offset_q: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.noise_temperature_k < 0:
            raise ParameterError("noise_temperature_k must be >= 0")


@dataclass(frozen=True)
class LinkGains:
    """Fixed dB gains and path losses along the transponder chain."""

    tx_dish_gain_db: float = 52.48
    sat_rx_gain_db: float = 38.2
    transponder_amp_gain_db: Optional[float] = None  # None -> auto-closure
    sat_tx_gain_db: float = 31.0
    rx_dish_gain_db: float = 36.85
    uplink_loss_db: float = 221.0
    downlink_loss_db: float = 217.0

    def __post_init__(self):
        if self.uplink_loss_db < 0 or self.downlink_loss_db < 0:
            raise ParameterError("path losses must be >= 0 dB")


def saleh_amplify(x: ComplexFrame, p: SalehParams) -> ComplexFrame:
    """Memoryless TWTA model: apply AM/AM and AM/PM to every sample.

    Computed in complex-gain form, x * alpha/(1+beta*r^2) * exp(j*phi(r)),
    which is the same A(r)*exp(j(arg x + phi)) without a polar round trip.
    """
    xs = x.samples * _db_to_amplitude(p.input_scale_db)
    r2 = xs.real * xs.real + xs.imag * xs.imag
    gain = p.amam_alpha / (1.0 + p.amam_beta * r2)
    phi = p.ampm_alpha * r2 / (1.0 + p.ampm_beta * r2)
    out = xs * gain * np.exp(1j * phi) * _db_to_amplitude(p.output_scale_db)
    return x.with_samples(out)


def apply_gain_db(x: ComplexFrame, gain_db: float) -> ComplexFrame:
    """Scale amplitudes by 10^(gain_db/20)."""
    return x.with_samples(x.samples * _db_to_amplitude(gain_db))


def fspl_attenuate(x: ComplexFrame, loss_db: float) -> ComplexFrame:
    """Free-space attenuation; ``loss_db`` must be non-negative."""
    if loss_db < 0:
        raise ParameterError(f"path loss must be >= 0 dB, got {loss_db}")
    return apply_gain_db(x, -loss_db)


class PhaseFrequencyRotator:
    """Rotates samples by phi0 + 2*pi*f*n/fs with a persistent counter.

    The counter continues across frames so the impairment does not depend on
    how the stream is blocked.  ``sign=-1`` gives the exact inverse used by
    the receiver-side correction.
    """

    def __init__(self, phase_deg: float, freq_hz: float, sign: int = +1):
        if sign not in (+1, -1):
            raise ParameterError("sign must be +1 or -1")
        self.phase_rad = np.deg2rad(phase_deg)
        self.freq_hz = float(freq_hz)
        self.sign = sign
        self.sample_counter = 0

    def process(self, x: ComplexFrame) -> ComplexFrame:
        n = self.sample_counter + np.arange(len(x))
        theta = 2.0 * np.pi * self.freq_hz * n / x.sample_rate_hz + self.phase_rad
        out = x.samples * np.exp(1j * self.sign * theta)
        self.sample_counter += len(x)
        return x.with_samples(out)


def phase_freq_offset(x: ComplexFrame, phase_deg: float, freq_hz: float) -> ComplexFrame:
    """One-shot rotation; sample 0 of the frame continues the frame's own
    global clock (``x.start_sample``)."""
    rot = PhaseFrequencyRotator(phase_deg, freq_hz, sign=+1)
    rot.sample_counter = x.start_sample
    return rot.process(x)


def thermal_noise(x: ComplexFrame, temperature_k: float, seed: int) -> ComplexFrame:
    """Add circularly-symmetric Gaussian noise of total variance kTB.

    B is the frame sample rate; the variance splits equally between the real
    and imaginary parts.  Deterministic for a fixed seed.
    """
    if temperature_k < 0:
        raise ParameterError("temperature must be >= 0 K")
    sigma2 = BOLTZMANN_J_PER_K * temperature_k * x.sample_rate_hz
    if sigma2 == 0.0:
        return x.with_samples(x.samples)
    rng = np.random.default_rng(seed)
    std = np.sqrt(sigma2 / 2.0)
    noise = std * (rng.standard_normal(len(x)) + 1j * rng.standard_normal(len(x)))
    return x.with_samples(x.samples + noise)


def _awgn(x: ComplexFrame, sigma2: float, rng: np.random.Generator) -> ComplexFrame:
    if sigma2 == 0.0:
        return x.with_samples(x.samples)
    std = np.sqrt(sigma2 / 2.0)
    noise = std * (rng.standard_normal(len(x)) + 1j * rng.standard_normal(len(x)))
    return x.with_samples(x.samples + noise)


def iq_imbalance(x: ComplexFrame, cfg: ImpairmentConfig) -> ComplexFrame:
    """Amplitude/phase mismatch between branches plus DC offsets.

    Split-phase convention with the amplitude imbalance on the Q branch:
        I' = Re(x) cos(t/2) + Im(x) g sin(t/2) + dc_i
        Q' = Re(x) sin(t/2) + Im(x) g cos(t/2) + dc_q
    """
    g = _db_to_amplitude(cfg.iq_amplitude_imbalance_db)
    theta = np.deg2rad(cfg.iq_phase_imbalance_deg)
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    re, im = x.samples.real, x.samples.imag
    i_out = re * c + im * g * s + cfg.dc_offset_i
    q_out = re * s + im * g * c + cfg.dc_offset_q
    return x.with_samples(i_out + 1j * q_out)


@dataclass
class ChannelLog:
    """Effective parameters of one channel run (for the run log)."""

    mode: str
    transponder_amp_gain_db: float = 0.0
    normalization_factor: float = 1.0
    noise_variance_w: float = 0.0
    net_fixed_gain_db: float = 0.0


class SatelliteChannel:
    """Stateful transponder chain (owns the rotation clock and noise stream)."""

    def __init__(
        self,
        gains: LinkGains,
        saleh: SalehParams,
        impairments: ImpairmentConfig,
        mode: Literal["physical", "normalized"] = "physical",
        target_es_n0_db: Optional[float] = None,
        reference_symbol_power: float = 10.0,
    ):
        if mode not in ("physical", "normalized"):
            raise ParameterError(f"mode must be 'physical' or 'normalized', got {mode!r}")
        self.gains = gains
        self.saleh = saleh
        self.impairments = impairments
        self.mode = mode
        self.target_es_n0_db = target_es_n0_db
        self.reference_symbol_power = float(reference_symbol_power)
        self._rotator = PhaseFrequencyRotator(
            impairments.phase_offset_deg, impairments.freq_offset_hz, sign=+1
        )
        self._rng = np.random.default_rng(impairments.seed)
        self.last_log: Optional[ChannelLog] = None

    def _fixed_gain_db(self, transponder_db: float) -> float:
        g = self.gains
        return (
            g.tx_dish_gain_db
            - g.uplink_loss_db
            + g.sat_rx_gain_db
            + transponder_db
            + g.sat_tx_gain_db
            - g.downlink_loss_db
            + g.rx_dish_gain_db
        )

    def run(self, x: ComplexFrame) -> ComplexFrame:
        imp = self.impairments
        log = ChannelLog(mode=self.mode)
        p_in = x.mean_power

        y = saleh_amplify(x, self.saleh)

        if self.mode == "physical":
            transponder_db = self.gains.transponder_amp_gain_db
            if transponder_db is None:
                # Auto-closure: make mean pre-noise received power equal the
                # channel-input power.  The post-TWTA blocks are all linear,
                # so closing against the measured TWTA output is exact.
                p_sig = y.mean_power
                if p_in <= 0.0 or p_sig <= 0.0:
                    raise PipelineError(
                        "channel", "cannot auto-close transponder gain on a zero-power signal"
                    )
                fixed_without = self._fixed_gain_db(0.0)
                transponder_db = 10.0 * np.log10(p_in / p_sig) - fixed_without
            net_db = self._fixed_gain_db(transponder_db)
            log.transponder_amp_gain_db = float(transponder_db)
            log.net_fixed_gain_db = float(net_db)
            # All dB blocks up to the Rx dish commute with the rotation; the
            # pre-rotation part is applied first to keep the listed order.
            pre_rot_db = net_db - self.gains.rx_dish_gain_db
            y = apply_gain_db(y, pre_rot_db)
            y = self._rotator.process(y)
            y = apply_gain_db(y, self.gains.rx_dish_gain_db)
            y = thermal_noise_from_rng(y, imp.noise_temperature_k, self._rng)
            log.noise_variance_w = BOLTZMANN_J_PER_K * imp.noise_temperature_k * y.sample_rate_hz
        else:
            y = self._rotator.process(y)
            p_sig = y.mean_power
            if p_in > 0.0 and p_sig > 0.0:
                factor = np.sqrt(p_in / p_sig)
            else:
                factor = 1.0
            log.normalization_factor = float(factor)
            if factor != 1.0:
                y = y.with_samples(y.samples * factor)
            if self.target_es_n0_db is not None:
                es_n0 = 10.0 ** (self.target_es_n0_db / 10.0)
                sigma2 = self.reference_symbol_power / es_n0
                log.noise_variance_w = sigma2
                y = _awgn(y, sigma2, self._rng)

        y = iq_imbalance(y, imp)
        self.last_log = log
        return y


def thermal_noise_from_rng(
    x: ComplexFrame, temperature_k: float, rng: np.random.Generator
) -> ComplexFrame:
    """kTB noise drawn from an existing generator (streaming use)."""
    if temperature_k < 0:
        raise ParameterError("temperature must be >= 0 K")
    sigma2 = BOLTZMANN_J_PER_K * temperature_k * x.sample_rate_hz
    return _awgn(x, sigma2, rng)


def run_channel(
    x: ComplexFrame,
    gains: LinkGains,
    saleh: SalehParams,
    impairments: ImpairmentConfig,
    mode: Literal["physical", "normalized"] = "physical",
    target_es_n0_db: Optional[float] = None,
    reference_symbol_power: float = 10.0,
) -> ComplexFrame:
    """One-shot convenience wrapper around :class:`SatelliteChannel`."""
    chan = SatelliteChannel(
        gains, saleh, impairments, mode, target_es_n0_db, reference_symbol_power
    )
    return chan.run(x)
