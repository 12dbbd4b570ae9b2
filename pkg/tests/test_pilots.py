import numpy as np
import pytest

from gfscma.pilots import (build_pilot_pool, largest_prime_below, pilot_matrix,
                           pilot_matrix_csv, zc_sequence)


class TestZcSequence:
    def test_first_element_is_one(self):
        for root in (1, 3, 7):
            assert zc_sequence(root, 11)[0] == pytest.approx(1.0)

    def test_unit_modulus(self):
        s = zc_sequence(5, 71)
        assert np.allclose(np.abs(s), 1.0, atol=1e-12)

    @pytest.mark.parametrize("root,n", [(1, 71), (4, 71), (2, 11)])
    def test_ideal_circular_autocorrelation(self, root, n):
        # direct numeric evaluation of the correlation sum at every nonzero lag
        s = zc_sequence(root, n)
        for lag in range(1, n):
            r = np.vdot(s, np.roll(s, lag))
            assert abs(r) <= 1e-9 * n

    def test_rejects_non_prime_length(self):
        with pytest.raises(ValueError, match="prime"):
            zc_sequence(1, 72)

    def test_rejects_bad_root(self):
        with pytest.raises(ValueError, match="root"):
            zc_sequence(0, 71)
        with pytest.raises(ValueError, match="root"):
            zc_sequence(71, 71)


class TestPilotPool:
    def test_default_dimensions(self, default_pool):
        assert default_pool.K == 18
        assert default_pool.Q == 72
        assert default_pool.n_zc == 71

    def test_unit_modulus_entries(self, default_pool):
        assert np.allclose(np.abs(default_pool.sequences), 1.0, atol=1e-12)

    def test_group_indexing(self, default_pool):
        # pilots 0..2 share group 1; groups cover 1..J with fibers of size L
        assert list(default_pool.group_of[:3]) == [1, 1, 1]
        groups, counts = np.unique(default_pool.group_of, return_counts=True)
        assert list(groups) == list(range(1, 7))
        assert all(c == 3 for c in counts)

    def test_same_group_pilots_are_cyclic_shifts(self, default_pool):
        stride = default_pool.n_zc // default_pool.L
        base = default_pool.sequences[0][:default_pool.n_zc]
        shifted = default_pool.sequences[1][:default_pool.n_zc]
        assert np.allclose(np.roll(base, -stride), shifted, atol=1e-12)

    def test_minimal_pool(self):
        pool = build_pilot_pool(J=1, L=1, rb_count=1)
        assert pool.K == 1 and pool.Q == 12 and pool.n_zc == 11

    def test_l_larger_than_zc_length_rejected(self):
        with pytest.raises(ValueError, match="exceeds"):
            build_pilot_pool(J=1, L=12, rb_count=1)

    def test_largest_prime_below(self):
        assert largest_prime_below(72) == 71
        assert largest_prime_below(12) == 11


class TestPilotMatrix:
    def test_shape_and_column_norms(self, default_pool, default_S):
        assert default_S.shape == (72, 18)
        assert np.allclose(np.linalg.norm(default_S, axis=0), 1.0, atol=1e-12)

    def test_same_root_orthogonality_before_extension(self, default_pool):
        # restricted to the ZC length the shifted pairs are exactly orthogonal
        n = default_pool.n_zc
        for a, b in [(0, 1), (0, 2), (3, 5)]:
            if default_pool.group_of[a] != default_pool.group_of[b]:
                continue
            r = np.vdot(default_pool.sequences[a][:n], default_pool.sequences[b][:n])
            assert abs(r) <= 1e-9 * n

    def test_same_root_coherence_after_extension(self, default_S, default_pool):
        for a in range(default_pool.K):
            for b in range(a + 1, default_pool.K):
                if default_pool.group_of[a] == default_pool.group_of[b]:
                    assert abs(np.vdot(default_S[:, a], default_S[:, b])) <= 0.05

    def test_cross_root_coherence_bound(self, default_S, default_pool):
        # max |<s_i, s_j>| over different-root pairs <= 2 / sqrt(n_zc)
        bound = 2.0 / np.sqrt(default_pool.n_zc)
        for a in range(default_pool.K):
            for b in range(a + 1, default_pool.K):
                if default_pool.group_of[a] != default_pool.group_of[b]:
                    assert abs(np.vdot(default_S[:, a], default_S[:, b])) <= bound

    def test_csv_dump_shape(self, default_pool):
        text = pilot_matrix_csv(default_pool)
        rows = text.strip().split("\n")
        assert len(rows) == 72
        assert len(rows[0].split(",")) == 2 * 18
