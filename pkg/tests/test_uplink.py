import numpy as np
import pytest

from gfscma.channel import get_profile, sample_realization
from gfscma.uplink import ActiveUe, Scenario, draw_scenario, synth_data_rx, synth_pilot_rx


def _manual_scenario(pool, graph, books, pilots, rng, profile="flat", payload=4):
    ues = []
    for k in pilots:
        group = int(pool.group_of[k])
        cb = books[group - 1]
        ch = sample_realization(get_profile(profile), pool.Q, graph.T, rng)
        bits = rng.integers(0, 2, size=payload * 2)
        from gfscma.codebooks import encode
        stream, words = encode(bits, cb)
        ues.append(ActiveUe(pilot=k, group=group, channel=ch, bits=bits,
                            symbol_indices=stream.symbols, codewords=words))
    return Scenario(K_total=pool.K, active=tuple(ues))


class TestPilotSynthesis:
    def test_empty_noiseless_is_zero(self, default_pool, rng):
        scenario = Scenario(K_total=default_pool.K, active=())
        y = synth_pilot_rx(scenario, default_pool, 0.0, rng)
        assert np.array_equal(y, np.zeros(72, complex))

    def test_single_flat_unit_ue_reproduces_pilot(self, default_pool, default_graph,
                                                  default_books, rng):
        sc = _manual_scenario(default_pool, default_graph, default_books, [5], rng)
        flat_tap = sc.active[0].channel.taps[0]
        y = synth_pilot_rx(sc, default_pool, 0.0, rng)
        assert np.allclose(y, flat_tap * default_pool.sequences[5], atol=1e-12)

    def test_two_ue_superposition_matches_direct_sum(self, default_pool, default_graph,
                                                     default_books, rng):
        sc = _manual_scenario(default_pool, default_graph, default_books, [2, 9], rng,
                              profile="eva")
        y = synth_pilot_rx(sc, default_pool, 0.0, rng)
        # independent summation oracle
        expected = np.zeros(72, complex)
        for ue in sc.active:
            expected = expected + ue.channel.H_pilot * default_pool.sequences[ue.pilot]
        assert np.allclose(y, expected, atol=1e-12)

    @pytest.mark.slow
    def test_energy_accounting(self, default_pool, default_graph, default_books):
        # E||y||^2 = |A|*Q + Q*sigma2 within 3% over 10^4 trials
        sigma2 = 0.25
        total = 0.0
        n = 10**4
        for t in range(n):
            r = np.random.default_rng((42, t))
            sc = draw_scenario(default_pool, default_graph, default_books,
                               get_profile("epa"), n_active=6, payload_symbols=1, rng=r)
            y = synth_pilot_rx(sc, default_pool, sigma2, r)
            total += (np.abs(y) ** 2).sum()
        expected = 6 * 72 + 72 * sigma2
        assert total / n == pytest.approx(expected, rel=0.03)


class TestDataSynthesis:
    def test_single_flat_unit_ue_noiseless(self, default_pool, default_graph,
                                           default_books, rng):
        sc = _manual_scenario(default_pool, default_graph, default_books, [0], rng)
        tap = sc.active[0].channel.taps[0]
        y = synth_data_rx(sc, default_graph, 0.0, rng)
        assert np.allclose(y, tap * sc.active[0].codewords, atol=1e-12)

    def test_inactive_ue_contributes_nothing(self, default_pool, default_graph,
                                             default_books, rng):
        sc1 = _manual_scenario(default_pool, default_graph, default_books, [3], rng)
        empty = Scenario(K_total=default_pool.K, active=())
        y_empty = synth_data_rx(empty, default_graph, 0.0, rng, n_symbols=4)
        assert np.allclose(y_empty, 0.0)
        y1 = synth_data_rx(sc1, default_graph, 0.0, rng)
        combined = Scenario(K_total=default_pool.K, active=sc1.active + empty.active)
        y2 = synth_data_rx(combined, default_graph, 0.0, rng)
        assert np.array_equal(y1, y2)

    def test_superposition_linearity(self, default_pool, default_graph, default_books, rng):
        sc_ab = _manual_scenario(default_pool, default_graph, default_books, [1, 10], rng,
                                 profile="eva")
        a, b = sc_ab.active
        y_ab = synth_data_rx(sc_ab, default_graph, 0.0, rng)
        y_a = synth_data_rx(Scenario(18, (a,)), default_graph, 0.0, rng)
        y_b = synth_data_rx(Scenario(18, (b,)), default_graph, 0.0, rng)
        assert np.allclose(y_ab - y_b, y_a, atol=1e-12)


class TestDrawScenario:
    def test_distinct_pilots_by_default(self, default_pool, default_graph, default_books):
        for t in range(50):
            r = np.random.default_rng((7, t))
            sc = draw_scenario(default_pool, default_graph, default_books,
                               get_profile("flat"), 6, 2, r)
            assert len(set(sc.active_pilots)) == 6

    def test_group_follows_pilot(self, default_pool, default_graph, default_books, rng):
        sc = draw_scenario(default_pool, default_graph, default_books,
                           get_profile("flat"), 6, 2, rng)
        for ue in sc.active:
            assert ue.group == default_pool.group_of[ue.pilot]

    def test_bad_pilot_index_rejected(self, default_pool, default_graph,
                                      default_books, rng):
        sc = _manual_scenario(default_pool, default_graph, default_books, [0], rng)
        bad = ActiveUe(pilot=99, group=1, channel=sc.active[0].channel,
                       bits=sc.active[0].bits, symbol_indices=sc.active[0].symbol_indices,
                       codewords=sc.active[0].codewords)
        with pytest.raises(ValueError, match="outside pool"):
            synth_pilot_rx(Scenario(18, (bad,)), default_pool, 0.0, rng)
