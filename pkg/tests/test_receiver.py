"""Receiver tests: DC estimator, AGC loop, data-aided de-rotation."""

from dataclasses import replace

import numpy as np
import pytest

import oracles
from vsatlink import (
    AgcConfig,
    AutomaticGainControl,
    ComplexFrame,
    DcOffsetCompensator,
    ModemConfig,
    ParameterError,
    agc,
    dc_offset_remove,
    generate_bits,
    phase_freq_correct,
    phase_freq_offset,
    qam_demodulate,
    qam_modulate,
)
from vsatlink.pipeline import simulate
from vsatlink.receiver import DC_FORGETTING_FACTOR

FS = 50_000.0


def frame(samples, fs=FS):
    return ComplexFrame(np.asarray(samples, dtype=complex), fs)


def rand_frame(n, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    return frame(scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n)))


class TestDcOffsetRemoval:
    def test_zero_mean_input_nearly_unchanged(self):
        x = rand_frame(20_000, 1)
        y = dc_offset_remove(x)
        rms_in = np.sqrt(x.mean_power)
        rms_diff = np.sqrt(np.mean(np.abs(y.samples - x.samples) ** 2))
        assert rms_diff <= 0.05 * rms_in

    def test_constant_input_decays_geometrically(self):
        c = 1.0 - 2.0j
        n = 10_000
        y = dc_offset_remove(frame(np.full(n, c)))
        w = DC_FORGETTING_FACTOR
        assert abs(y.samples[-1]) <= abs(c) * 1e-4
        # exact geometric-decay oracle: residual after n samples is c * w^n
        expected = c * w**n
        assert y.samples[-1] == pytest.approx(expected, rel=1e-9)

    def test_offset_recovery_leaves_signal_mean(self):
        # zero-mean carrier plus a DC offset: the long-run output mean returns
        # to the signal mean (0) once the estimator has locked onto the offset
        n = np.arange(64_000)
        x = np.exp(2j * np.pi * n / 16)
        y = dc_offset_remove(frame(x + (0.5 - 0.25j)))
        tail = slice(16_000, 64_000)  # whole carrier periods
        assert abs(np.mean(y.samples[tail]) - np.mean(x[tail])) <= 1e-3

    def test_estimator_recovers_pure_offsets(self):
        # dc offsets injected by the I/Q block land in the estimator state
        comp = DcOffsetCompensator()
        comp.process(frame(np.full(20_000, 0.5 - 0.25j)))
        assert comp.estimate == pytest.approx(0.5 - 0.25j, abs=1e-6)

    def test_empty_frame_rejected(self):
        with pytest.raises(ParameterError):
            dc_offset_remove(frame(np.empty(0)))

    def test_streaming_matches_one_shot(self):
        x = rand_frame(4000, 3)
        comp = DcOffsetCompensator()
        a = comp.process(frame(x.samples[:1500]))
        b = comp.process(frame(x.samples[1500:]))
        whole = dc_offset_remove(x)
        assert np.allclose(np.concatenate([a.samples, b.samples]), whole.samples, atol=1e-15)


class TestAgc:
    def test_input_at_reference_keeps_unity_gain(self):
        cfg = AgcConfig(reference_power=2.0)
        x = frame(np.full(2000, np.sqrt(2.0) + 0j))
        y = agc(x, cfg)
        assert np.allclose(y.samples, x.samples, rtol=1e-12)

    def test_converges_from_low_input(self):
        cfg = AgcConfig(reference_power=10.0, step_size=0.01)
        x = frame(np.full(8000, np.sqrt(0.1) + 0j))  # 0.01x reference power
        y = agc(x, cfg)
        steady = np.mean(np.abs(y.samples[5000:]) ** 2)
        assert steady == pytest.approx(10.0, rel=0.05)

    @pytest.mark.parametrize("alpha2", [1e-4, 1e-2, 1e2, 1e4])
    def test_scale_invariant_steady_state(self, alpha2):
        cfg = AgcConfig(reference_power=10.0)
        x = frame(np.full(60_000, np.sqrt(10.0 * alpha2) + 0j))
        y = agc(x, cfg)
        steady = np.mean(np.abs(y.samples[-5000:]) ** 2)
        assert steady == pytest.approx(10.0, rel=0.05)

    def test_all_zero_input(self):
        cfg = AgcConfig(max_gain_db=60.0)
        loop = AutomaticGainControl(cfg)
        y = loop.process(frame(np.zeros(2000)))
        assert not y.samples.any()
        assert loop.gain == pytest.approx(10 ** (60 / 20))

    def test_invalid_config(self):
        with pytest.raises(ParameterError):
            AgcConfig(reference_power=0.0)
        with pytest.raises(ParameterError):
            AgcConfig(step_size=0.0)

    def test_streaming_matches_one_shot(self):
        x = rand_frame(3000, 4, scale=0.3)
        loop = AutomaticGainControl()
        a = loop.process(frame(x.samples[:1000]))
        b = loop.process(frame(x.samples[1000:]))
        whole = agc(x)
        assert np.allclose(np.concatenate([a.samples, b.samples]), whole.samples, atol=1e-15)


class TestPhaseFreqCorrection:
    def test_correct_after_offset_is_identity(self):
        x = rand_frame(5000, 5)
        warped = phase_freq_offset(x, 15.0, 2.0)
        restored = phase_freq_correct(warped, 15.0, 2.0)
        assert np.allclose(restored.samples, x.samples, rtol=1e-12, atol=1e-14)

    def test_zero_params_identity(self):
        x = rand_frame(100, 6)
        y = phase_freq_correct(x, 0.0, 0.0)
        assert np.allclose(y.samples, x.samples, rtol=1e-15)

    def test_partial_correction_leaves_winding(self):
        """Correcting only the 15 deg tilt with 2 Hz still spinning leaves the
        uniform-rotation error floor (0.414 by enumeration)."""
        cfg = ModemConfig()
        bits = generate_bits(200_000, 0.5, 7)
        s = qam_modulate(bits, cfg)
        spun = phase_freq_offset(s, 15.0, 2.0)  # 2 Hz at symbol rate: slow spin
        corrected = phase_freq_correct(spun, 15.0, 0.0)
        ber = np.mean(qam_demodulate(corrected, cfg).bits != bits.bits)
        expected = oracles.uniform_rotation_average_ber(1440)
        assert ber == pytest.approx(expected, abs=0.02)


class TestReceiverChain:
    def test_full_receiver_deterministic(self, reference_scenario):
        a = simulate(reference_scenario, total_bits=20_000, with_spectra=False)
        b = simulate(reference_scenario, total_bits=20_000, with_spectra=False)
        assert a.ber.as_dict() == b.ber.as_dict()
        assert np.array_equal(
            a.constellation_rx_postcorrection, b.constellation_rx_postcorrection
        )

    @pytest.mark.xfail(
        strict=True,
        reason="at the published TWTA operating point the AM/PM conversion "
        "displaces the corner clusters by ~0.5 (> 0.15*d); the amplifier "
        "backoff needed to meet 0.15*d is not published. The linearized-"
        "amplifier variant re-centers exactly (see acceptance figure tests).",
    )
    def test_compensated_clusters_within_015d(self, reference_scenario):
        result = simulate(reference_scenario, total_bits=60_000, with_spectra=False)
        pts = result.constellation_rx_postcorrection
        received = pts[:, 0] + 1j * pts[:, 1]
        lattice = [complex(i, q) for i in (-3, -1, 1, 3) for q in (-3, -1, 1, 3)]
        for target in lattice:
            cluster = received[np.abs(received - target) < 1.0]
            assert cluster.size > 0
            assert abs(cluster.mean() - target) <= 0.15 * 2.0

    def test_chain_order_dc_agc_correct_then_match(self, reference_scenario):
        # the pipeline applies DC -> AGC -> phase/freq -> matched filter;
        # with everything enabled the compensated BER sits near zero while
        # the uncompensated one is dominated by the spinning constellation
        on = simulate(reference_scenario, total_bits=20_000, with_spectra=False)
        comp_off = replace(
            reference_scenario,
            compensation=replace(reference_scenario.compensation, phase_freq=False),
        )
        off = simulate(comp_off, total_bits=20_000, with_spectra=False)
        assert on.ber.ber < 0.01
        assert off.ber.ber > 0.3
