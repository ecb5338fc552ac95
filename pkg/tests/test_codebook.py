import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from starisac.codebook import (
    Codebook,
    assemble_code_sequence,
    build_codebooks,
    codewords_from_text,
    hadamard,
    radar_only_codes,
)
from starisac.geometry import HalfSpace

S = 1.0 / math.sqrt(2.0)


class TestHadamard:
    def test_order_four(self):
        expected = np.array([
            [1, 1, 1, 1],
            [1, -1, 1, -1],
            [1, 1, -1, -1],
            [1, -1, -1, 1],
        ])
        np.testing.assert_array_equal(hadamard(4), expected)

    @pytest.mark.parametrize("n", [3, 0, -2, 12])
    def test_rejects_non_power_of_two(self, n):
        with pytest.raises(ValueError):
            hadamard(n)

    @pytest.mark.parametrize("n", [1, 2, 8, 64])
    def test_orthogonality(self, n):
        h = hadamard(n)
        np.testing.assert_array_equal(h.T @ h, n * np.eye(n, dtype=np.int64))


class TestBuildCodebooks:
    def test_natural_order_m4_b1(self):
        tr, re = build_codebooks(4, 1, "natural")
        np.testing.assert_allclose(tr.codewords, S * np.array([[1, 1, 1, 1], [1, -1, 1, -1]]))
        np.testing.assert_allclose(re.codewords, S * np.array([[1, 1, -1, -1], [1, -1, -1, 1]]))

    def test_reversed_tr_order_m4_b1(self):
        tr, re = build_codebooks(4, 1, "reversed_tr")
        # transmissive block enumerated right to left; reflective unchanged
        np.testing.assert_allclose(tr.codewords, S * np.array([[1, -1, 1, -1], [1, 1, 1, 1]]))
        np.testing.assert_allclose(re.codewords, S * np.array([[1, 1, -1, -1], [1, -1, -1, 1]]))

    def test_default_order_is_reversed_tr(self):
        tr_default, _ = build_codebooks(8, 2)
        tr_explicit, _ = build_codebooks(8, 2, "reversed_tr")
        np.testing.assert_array_equal(tr_default.codewords, tr_explicit.codewords)
        assert tr_default.column_order == "reversed_tr"

    def test_same_codeword_sets_under_both_orders(self):
        for side_idx in (0, 1):
            nat = build_codebooks(8, 2, "natural")[side_idx]
            rev = build_codebooks(8, 2, "reversed_tr")[side_idx]
            set_nat = {tuple(row) for row in nat.codewords.tolist()}
            set_rev = {tuple(row) for row in rev.codewords.tolist()}
            assert set_nat == set_rev

    @pytest.mark.parametrize("m,b,order", [(4, 1, "natural"), (8, 1, "natural"),
                                           (8, 2, "reversed_tr"), (16, 3, "natural"),
                                           (16, 2, "reversed_tr")])
    def test_cross_book_orthogonality_and_energy(self, m, b, order):
        tr, re = build_codebooks(m, b, order)
        stacked = np.vstack([tr.codewords, re.codewords])  # (2^(b+1), m)
        gram = stacked @ stacked.T
        np.testing.assert_allclose(gram, (m / 2.0) * np.eye(stacked.shape[0]), atol=1e-12)

    @pytest.mark.parametrize("m,b", [(4, 2), (2, 1), (8, 3)])
    def test_rejects_books_that_do_not_fit(self, m, b):
        with pytest.raises(ValueError):
            build_codebooks(m, b)

    def test_rejects_bad_slot_length_and_order(self):
        with pytest.raises(ValueError):
            build_codebooks(12, 1)
        with pytest.raises(ValueError):
            build_codebooks(8, 1, "sideways")
        with pytest.raises(ValueError):
            build_codebooks(8, -1)

    def test_bits_round_trip(self):
        tr, _ = build_codebooks(16, 3)
        for idx in range(tr.n_codewords):
            bits = tr.index_to_bits(idx)
            assert len(bits) == 3
            assert tr.bits_to_index(bits) == idx
        assert tr.index_to_bits(5) == (1, 0, 1)  # MSB first
        with pytest.raises(ValueError):
            tr.bits_to_index((0, 1))

    def test_text_round_trip(self):
        tr, _ = build_codebooks(8, 2)
        parsed = codewords_from_text(tr.to_text())
        np.testing.assert_array_equal(parsed, tr.codewords)


class TestAssemble:
    def test_two_slot_example_natural_order(self):
        book_tr, _ = build_codebooks(4, 1, "natural")
        seq = assemble_code_sequence(book_tr, [1, 0], 8)
        np.testing.assert_allclose(seq.values, S * np.array([1, -1, 1, -1, 1, 1, 1, 1]))
        assert seq.messages == (1, 0)
        assert seq.slot_len == 4
        assert seq.n_pulses == 8
        np.testing.assert_allclose(seq.slot_values(1), S * np.ones(4))

    def test_two_slot_example_default_order(self):
        book_tr, _ = build_codebooks(4, 1)
        seq = assemble_code_sequence(book_tr, [1, 0], 8)
        np.testing.assert_allclose(seq.values, S * np.array([1, 1, 1, 1, 1, -1, 1, -1]))

    def test_rejects_wrong_message_count(self):
        book_tr, _ = build_codebooks(4, 1)
        with pytest.raises(ValueError):
            assemble_code_sequence(book_tr, [0], 8)

    def test_rejects_partial_slot(self):
        book_tr, _ = build_codebooks(4, 1)
        with pytest.raises(ValueError):
            assemble_code_sequence(book_tr, [0, 1], 6)

    def test_rejects_message_out_of_range(self):
        book_tr, _ = build_codebooks(4, 1)
        with pytest.raises(ValueError):
            assemble_code_sequence(book_tr, [2, 0], 8)

    @given(
        m_exp=st.integers(min_value=2, max_value=4),
        b=st.integers(min_value=0, max_value=3),
        order=st.sampled_from(("natural", "reversed_tr")),
        seed=st.integers(min_value=0, max_value=2**31 - 1),
    )
    def test_per_pulse_energy_split(self, m_exp, b, order, seed):
        m = 1 << m_exp
        if (1 << (b + 1)) > m:
            b = m_exp - 1
        tr, re = build_codebooks(m, b, order)
        rng = np.random.default_rng(seed)
        n_slots = 3
        msgs_tr = rng.integers(0, tr.n_codewords, n_slots)
        msgs_re = rng.integers(0, re.n_codewords, n_slots)
        s_tr = assemble_code_sequence(tr, msgs_tr, n_slots * m)
        s_re = assemble_code_sequence(re, msgs_re, n_slots * m)
        np.testing.assert_allclose(s_tr.values**2 + s_re.values**2, 1.0, atol=1e-12)


class TestRadarOnly:
    @pytest.mark.parametrize("p", [2, 8, 32])
    def test_columns_and_energy(self, p):
        c_tr, c_re = radar_only_codes(p)
        h = hadamard(p)
        np.testing.assert_allclose(c_tr.values, S * h[:, 0])
        np.testing.assert_allclose(c_re.values, S * h[:, p - 1])
        np.testing.assert_allclose(c_tr.values**2 + c_re.values**2, 1.0, atol=1e-12)
        assert c_tr.side is HalfSpace.TRANSMISSIVE
        assert c_re.side is HalfSpace.REFLECTIVE
        assert float(c_tr.values @ c_re.values) == pytest.approx(0.0, abs=1e-12)
