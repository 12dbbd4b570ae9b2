import json

import numpy as np
import pytest

from gfscma.channel import (SUBCARRIER_SPACING_HZ, add_awgn, data_tone_freqs,
                            freq_response, get_profile, load_custom_profile,
                            pilot_tone_freqs, sample_realization)


class TestProfiles:
    def test_builtin_names(self):
        assert get_profile("epa").n_taps == 7
        assert get_profile("eva").n_taps == 9
        assert get_profile("flat").n_taps == 1

    def test_powers_normalized(self):
        for name in ("epa", "eva", "flat"):
            assert get_profile(name).powers_lin.sum() == pytest.approx(1.0)

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown"):
            get_profile("etu2")

    def test_custom_roundtrip(self, tmp_path):
        path = tmp_path / "prof.json"
        path.write_text(json.dumps({"name": "two-tap",
                                    "delays_ns": [0, 500],
                                    "powers_db": [0, -3]}))
        prof = load_custom_profile(path)
        assert prof.n_taps == 2
        assert prof.powers_lin.sum() == pytest.approx(1.0)

    def test_custom_missing_field(self, tmp_path):
        path = tmp_path / "prof.json"
        path.write_text(json.dumps({"delays_ns": [0]}))
        with pytest.raises(ValueError, match="powers_db"):
            load_custom_profile(path)


class TestFreqResponse:
    def test_single_tap_at_zero_delay_is_flat(self):
        tones = pilot_tone_freqs(16)
        H = freq_response(np.array([0.3 - 0.4j]), np.array([0.0]), tones)
        assert np.allclose(H, 0.3 - 0.4j)

    def test_zero_taps_vector(self):
        H = freq_response(np.zeros(3, complex), np.array([0.0, 1e-7, 2e-7]),
                          pilot_tone_freqs(8))
        assert np.allclose(H, 0.0)

    def test_two_tap_comb_matches_closed_form(self):
        # equal taps with delay difference tau give H(f) = a(1 + exp(-2j*pi*f*tau))
        a, tau = 0.5 + 0.1j, 1.0 / (2 * 72 * SUBCARRIER_SPACING_HZ)
        tones = pilot_tone_freqs(72)
        H = freq_response(np.array([a, a]), np.array([0.0, tau]), tones)
        expected = a * (1 + np.exp(-2j * np.pi * tones * tau))
        assert np.allclose(H, expected, atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="equal length"):
            freq_response(np.ones(2, complex), np.zeros(3), pilot_tone_freqs(4))

    def test_data_tones_adjacent_to_pilot_band(self):
        f = data_tone_freqs(72, 4)
        assert f[0] == 72 * SUBCARRIER_SPACING_HZ
        assert np.allclose(np.diff(f), SUBCARRIER_SPACING_HZ)


class TestSampleRealization:
    def test_flat_profile_gives_constant_response(self, rng):
        re = sample_realization(get_profile("flat"), Q=72, T=4, rng=rng)
        assert np.allclose(re.H_pilot, re.taps[0])
        assert np.allclose(re.H_data, re.taps[0])

    @pytest.mark.slow
    def test_unit_average_tap_power(self):
        # Monte Carlo of the stated distribution: E[sum |taps|^2] = 1 +- 0.02
        rng = np.random.default_rng(7)
        prof = get_profile("epa")
        total = 0.0
        n = 10**5
        p = prof.powers_lin
        taps = (rng.standard_normal((n, p.size)) + 1j * rng.standard_normal((n, p.size)))
        taps *= np.sqrt(p / 2)
        total = (np.abs(taps) ** 2).sum(axis=1).mean()
        assert total == pytest.approx(1.0, abs=0.02)

    @pytest.mark.slow
    def test_eva_decorrelates_faster_than_epa(self):
        # EVA has the larger delay spread, so |corr(H[f], H[f+df])| drops faster
        rng = np.random.default_rng(3)
        shift = 12
        corrs = {}
        for name in ("epa", "eva"):
            prof = get_profile(name)
            acc = 0.0
            n = 4000
            for _ in range(n):
                re = sample_realization(prof, Q=72, T=4, rng=rng)
                acc += np.vdot(re.H_pilot[:-shift], re.H_pilot[shift:])
            corrs[name] = abs(acc) / (n * (72 - shift))
        assert corrs["eva"] < corrs["epa"]

    def test_determinism(self):
        prof = get_profile("eva")
        a = sample_realization(prof, 72, 4, np.random.default_rng(99))
        b = sample_realization(prof, 72, 4, np.random.default_rng(99))
        assert np.array_equal(a.taps, b.taps)
        assert np.array_equal(a.H_pilot, b.H_pilot)


class TestAwgn:
    def test_zero_variance_exact(self, rng):
        x = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        y = add_awgn(x, 0.0, rng)
        assert np.array_equal(x, y)

    def test_negative_variance_rejected(self, rng):
        with pytest.raises(ValueError, match=">= 0"):
            add_awgn(np.zeros(4, complex), -1.0, rng)

    @pytest.mark.slow
    def test_component_variance(self):
        # per-component variance over 10^6 samples within 1%; halves per part
        rng = np.random.default_rng(11)
        sigma2 = 0.37
        n = add_awgn(np.zeros(10**6, complex), sigma2, rng)
        assert (np.abs(n) ** 2).mean() == pytest.approx(sigma2, rel=0.01)
        assert n.real.var() == pytest.approx(sigma2 / 2, rel=0.02)
        assert n.imag.var() == pytest.approx(sigma2 / 2, rel=0.02)
