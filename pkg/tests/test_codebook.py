import itertools
import math

import numpy as np
import pytest

from ofdmim.codebook import (
    Codebook,
    ConfigurationError,
    PepConvention,
    SystemConfig,
    build_codebook,
    enumerate_saps,
    gray_decode,
    gray_encode,
    map_index_bits,
    psk_point,
    unrank_sap,
)

# reflected Gray sequences written out by hand, position = phase index
GRAY_TABLE = {
    2: ["0", "1"],
    4: ["00", "01", "11", "10"],
    8: ["000", "001", "011", "010", "110", "111", "101", "100"],
}


class TestSystemConfig:
    def test_bit_counts(self):
        cfg = SystemConfig(4, 2, 2)
        assert cfg.index_bits == 2
        assert cfg.total_bits == 4
        assert cfg.n_blocks == 16

    @pytest.mark.parametrize("n,k,m,p,B", [
        (4, 2, 4, 2, 6), (8, 4, 2, 6, 10), (1, 1, 2, 0, 1), (3, 3, 2, 0, 3), (5, 2, 8, 3, 9),
    ])
    def test_bits(self, n, k, m, p, B):
        cfg = SystemConfig(n, k, m)
        assert cfg.index_bits == p == math.floor(math.log2(math.comb(n, k)))
        assert cfg.total_bits == B
        assert cfg.n_blocks == 2 ** p * m ** k

    @pytest.mark.parametrize("kwargs", [
        dict(n_subcarriers=4, n_active=0),
        dict(n_subcarriers=4, n_active=5),
        dict(n_subcarriers=0, n_active=0),
        dict(n_subcarriers=33, n_active=2),
        dict(n_subcarriers=4, n_active=2, psk_order=3),
        dict(n_subcarriers=4, n_active=2, psk_order=1),
        dict(n_subcarriers=4, n_active=2, psk_order=128),
        dict(n_subcarriers=4, n_active=2, mean_channel_gain=0.0),
        dict(n_subcarriers=4, n_active=2, mean_channel_gain=-1.0),
        dict(n_subcarriers=4.0, n_active=2),
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            SystemConfig(**kwargs)

    def test_convention_from_string(self):
        assert SystemConfig(4, 2, pep_convention="paper").pep_convention is PepConvention.PAPER_LITERAL


class TestSaps:
    def test_n4_k2(self):
        got = [s.active_set for s in enumerate_saps(4, 2)]
        assert got == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]

    def test_full_activation(self):
        assert [s.active_set for s in enumerate_saps(3, 3)] == [(1, 2, 3)]

    def test_n5_k2(self):
        saps = enumerate_saps(5, 2)
        assert len(saps) == 10
        assert saps[0].active_set == (1, 2)
        assert saps[-1].active_set == (4, 5)

    def test_sorted_lexicographically(self):
        saps = [s.active_set for s in enumerate_saps(7, 3)]
        assert saps == sorted(saps)
        assert len(set(saps)) == math.comb(7, 3)

    @pytest.mark.parametrize("n,k", [(4, 2), (6, 3), (8, 4), (9, 1), (10, 7)])
    def test_unrank_matches_enumeration(self, n, k):
        saps = enumerate_saps(n, k)
        assert [unrank_sap(r, n, k) for r in range(len(saps))] == saps

    def test_invalid(self):
        with pytest.raises(ConfigurationError):
            enumerate_saps(3, 4)
        with pytest.raises(ConfigurationError):
            enumerate_saps(3, 0)

    @pytest.mark.parametrize("bits,n,k,expected", [
        ("00", 4, 2, (1, 2)), ("11", 4, 2, (2, 3)), ("", 3, 3, (1, 2, 3)),
        ("01", 4, 2, (1, 3)), ("10", 4, 2, (1, 4)),
    ])
    def test_map_index_bits(self, bits, n, k, expected):
        assert map_index_bits(bits, n, k).active_set == expected

    def test_map_index_bits_wrong_length(self):
        with pytest.raises(ValueError):
            map_index_bits("0", 4, 2)
        with pytest.raises(ValueError):
            map_index_bits("000", 4, 2)

    def test_reachable_saps_are_lexicographic_prefix(self):
        cfg = SystemConfig(6, 3, 2)
        cb = build_codebook(cfg)
        used = sorted({b.sap.active_set for b in cb.blocks})
        expected = [s.active_set for s in enumerate_saps(6, 3)[: 2 ** cfg.index_bits]]
        assert used == expected


class TestPsk:
    def test_bpsk(self):
        assert psk_point("0", 2) == 1
        assert psk_point("1", 2) == -1

    def test_qpsk_11(self):
        assert psk_point("11", 4) == pytest.approx(-1)

    @pytest.mark.parametrize("m", [2, 4, 8])
    def test_against_hand_gray_table(self, m):
        for idx, label in enumerate(GRAY_TABLE[m]):
            expected = np.exp(2j * np.pi * idx / m)
            assert abs(psk_point(label, m) - expected) < 1e-15

    @pytest.mark.parametrize("m", [2, 4, 8, 16, 32, 64])
    def test_gray_neighbours_differ_in_one_bit(self, m):
        q = m.bit_length() - 1
        labels = {}
        for v in range(m):
            pt = psk_point(format(v, f"0{q}b"), m)
            idx = round(np.angle(pt) / (2 * np.pi / m)) % m
            labels[idx] = v
        assert sorted(labels) == list(range(m))
        for i in range(m):
            assert bin(labels[i] ^ labels[(i + 1) % m]).count("1") == 1

    @pytest.mark.parametrize("m", [2, 4, 8, 16, 32, 64])
    def test_unit_modulus(self, m):
        q = m.bit_length() - 1
        for v in range(m):
            assert abs(abs(psk_point(format(v, f"0{q}b"), m)) - 1) < 1e-15

    def test_gray_roundtrip(self):
        for v in range(1024):
            assert gray_decode(gray_encode(v)) == v

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            psk_point("01", 2)


class TestCodebook:
    def test_n4_k2_bpsk(self):
        cb = build_codebook(SystemConfig(4, 2, 2))
        assert cb.X == 16
        assert cb.bits_per_block == 4

    def test_degenerate_bpsk(self):
        cb = build_codebook(SystemConfig(1, 1, 2))
        assert cb.X == 2 and cb.bits_per_block == 1
        np.testing.assert_array_equal(cb.dense, [[1], [-1]])

    def test_layout_0011(self):
        cb = build_codebook(SystemConfig(4, 2, 2))
        blk = cb.block_of_bits("0011")
        assert blk.sap.active_set == (1, 2)
        assert blk.symbols == (-1, -1)
        np.testing.assert_array_equal(blk.dense, [-1, -1, 0, 0])

    def test_layout_symbol_groups_ascending(self):
        # index bits "10" -> SAP {1,4}; symbols "0","1" go to subcarriers 1 and 4
        cb = build_codebook(SystemConfig(4, 2, 2))
        np.testing.assert_array_equal(cb.block_of_bits("1001").dense, [1, 0, 0, -1])

    def test_layout_against_independent_construction(self):
        cfg = SystemConfig(5, 2, 4)
        cb = build_codebook(cfg)
        subsets = list(itertools.combinations(range(5), 2))
        for bits_t in itertools.product("01", repeat=cfg.total_bits):
            bits = "".join(bits_t)
            sap = subsets[int(bits[:3], 2)]
            expect = np.zeros(5, complex)
            for i, sc in enumerate(sap):
                g = bits[3 + 2 * i: 5 + 2 * i]
                expect[sc] = np.exp(2j * np.pi * GRAY_TABLE[4].index(g) / 4)
            np.testing.assert_allclose(cb.block_of_bits(bits).dense, expect, atol=1e-15)

    @pytest.mark.parametrize("n,k,m", [(4, 2, 2), (4, 2, 4), (8, 4, 2), (6, 2, 8)])
    def test_bijection_exhaustive(self, n, k, m):
        cfg = SystemConfig(n, k, m)
        cb = build_codebook(cfg)
        B = cfg.total_bits
        seen = set()
        for v in range(2 ** B):
            bits = format(v, f"0{B}b")
            blk = cb.block_of_bits(bits)
            assert Codebook.bits_of_block(blk) == bits
            assert blk.ordinal == v
            seen.add(blk.dense.tobytes())
        assert len(seen) == cb.X == 2 ** B

    @pytest.mark.parametrize("n,k,m", [(4, 2, 2), (4, 2, 4), (7, 3, 2)])
    def test_dense_has_k_unit_entries(self, n, k, m):
        cb = build_codebook(SystemConfig(n, k, m))
        nz = np.abs(cb.dense) > 0
        assert np.all(nz.sum(axis=1) == k)
        np.testing.assert_allclose(np.abs(cb.dense[nz]), 1.0, atol=1e-15)
        for blk in cb.blocks:
            assert tuple(np.flatnonzero(blk.dense) + 1) == blk.sap.active_set

    def test_dense_is_read_only(self):
        cb = build_codebook(SystemConfig(4, 2, 2))
        with pytest.raises(ValueError):
            cb.dense[0, 0] = 5

    def test_wrong_bit_length(self):
        cb = build_codebook(SystemConfig(4, 2, 2))
        with pytest.raises(ValueError):
            cb.block_of_bits("000")
