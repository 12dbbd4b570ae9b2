import json

import numpy as np
import pytest

from gfscma.codebooks import (CodebookFormatError, bits_to_indices, build_factor_graph,
                              default_codebooks, encode, indices_to_bits,
                              load_codebook_file)


class TestFactorGraph:
    def test_default_instance(self, default_graph):
        assert default_graph.occupancy.shape == (4, 6)
        # columns are all 2-subsets of 4 rows in lexicographic order
        cols = [tuple(np.where(default_graph.occupancy[:, j])[0]) for j in range(6)]
        assert cols == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        assert list(default_graph.degrees) == [3, 3, 3, 3]

    def test_single_full_column(self):
        g = build_factor_graph(T=4, J=1, N=4)
        assert g.occupancy[:, 0].tolist() == [1, 1, 1, 1]
        assert list(g.degrees) == [1, 1, 1, 1]

    def test_infeasible_combination_rejected(self):
        with pytest.raises(ValueError, match="C\\(4,2\\)=6"):
            build_factor_graph(T=4, J=7, N=2)

    def test_column_weight_invariant(self, default_graph):
        assert (default_graph.occupancy.sum(axis=0) == 2).all()

    def test_total_occupancy(self, default_graph):
        # sum over resources of per-UE occupancy equals N*J slots
        assert default_graph.occupancy.sum() == 2 * 6


class TestDefaultCodebooks:
    def test_six_groups_loaded(self, default_books):
        assert [cb.group_id for cb in default_books] == [1, 2, 3, 4, 5, 6]
        assert all(cb.M == 4 for cb in default_books)

    def test_sparsity_matches_graph(self, default_graph, default_books):
        for j, cb in enumerate(default_books):
            col = default_graph.occupancy[:, j].astype(bool)
            nz = np.abs(cb.entries) > 0
            assert (nz.sum(axis=1) == 2).all()
            assert not (nz & ~col[None, :]).any()

    def test_mean_energy_unit(self, default_books):
        for cb in default_books:
            energy = (np.abs(cb.entries) ** 2).sum(axis=1).mean()
            assert energy == pytest.approx(1.0, abs=1e-9)


class TestLoadErrors:
    def _write(self, tmp_path, payload):
        path = tmp_path / "cb.json"
        path.write_text(json.dumps(payload))
        return path

    def test_sparsity_mismatch(self, tmp_path, default_graph, default_books):
        payload = {"T": 4, "M": 4, "N": 2, "codebooks": []}
        for cb in default_books:
            entries = [[[c.real, c.imag] for c in row] for row in cb.entries]
            payload["codebooks"].append({"group": cb.group_id, "entries": entries})
        payload["codebooks"][0]["entries"][0][2] = [0.5, 0.0]  # third nonzero
        with pytest.raises(CodebookFormatError, match="nonzero"):
            load_codebook_file(self._write(tmp_path, payload), default_graph)

    def test_energy_violation(self, tmp_path, default_graph, default_books):
        payload = {"T": 4, "M": 4, "N": 2, "codebooks": []}
        for cb in default_books:
            entries = [[[c.real * 1.01, c.imag * 1.01] for c in row] for row in cb.entries]
            payload["codebooks"].append({"group": cb.group_id, "entries": entries})
        with pytest.raises(CodebookFormatError, match="energy"):
            load_codebook_file(self._write(tmp_path, payload), default_graph)

    def test_empty_file(self, tmp_path, default_graph):
        path = tmp_path / "cb.json"
        path.write_text("")
        with pytest.raises(CodebookFormatError, match="JSON"):
            load_codebook_file(path, default_graph)

    def test_wrong_group_count(self, tmp_path, default_graph):
        with pytest.raises(CodebookFormatError, match="codebooks"):
            load_codebook_file(
                self._write(tmp_path, {"T": 4, "M": 4, "N": 2, "codebooks": []}),
                default_graph)


class TestEncode:
    def test_symbol_count(self, default_books):
        bits = np.zeros(14, dtype=int)
        stream, words = encode(bits, default_books[0])
        assert stream.symbols.size == 7
        assert stream.bits_consumed == 14
        assert words.shape == (7, 4)

    def test_bit_pair_convention_big_endian(self, default_books):
        cb = default_books[0]
        _, words = encode([0, 0], cb)
        assert np.allclose(words[0], cb.entries[0])
        stream, _ = encode([0, 1, 1, 0, 1, 1], cb)
        assert stream.symbols.tolist() == [1, 2, 3]

    def test_every_codeword_has_n_nonzeros(self, default_books, rng):
        bits = rng.integers(0, 2, size=40)
        for cb in default_books:
            _, words = encode(bits, cb)
            assert ((np.abs(words) > 0).sum(axis=1) == 2).all()

    def test_length_not_divisible_rejected(self, default_books):
        with pytest.raises(ValueError, match="divisible"):
            encode([0, 1, 1], default_books[0])

    def test_round_trip_by_codeword_matching(self, default_books):
        # index recovered from the emitted vector (nearest codeword) matches
        for cb in default_books:
            for m in range(cb.M):
                word = cb.entries[m]
                dists = np.linalg.norm(cb.entries - word[None, :], axis=1)
                assert dists.argmin() == m

    def test_bits_indices_round_trip(self, rng):
        bits = rng.integers(0, 2, size=64)
        assert np.array_equal(indices_to_bits(bits_to_indices(bits, 4), 4), bits)
