import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from specdiff.core import (
    AllZeroWeights, NonPositiveTemperature, SeededRng, Vocab, derive_seed, normalize, overlap,
    residual_distribution, sample, temperature_scale,
)

weights = st.lists(st.floats(0, 100, allow_nan=False), min_size=2, max_size=12).filter(lambda w: sum(w) > 1e-6)


def categorical(n):
    return st.lists(st.floats(0, 1, allow_nan=False), min_size=n, max_size=n).filter(
        lambda w: sum(w) > 1e-6).map(lambda w: np.asarray(w) / sum(w))


pairs = st.integers(2, 8).flatmap(lambda n: st.tuples(categorical(n), categorical(n)))


class TestNormalize:
    def test_symmetric(self):
        np.testing.assert_allclose(normalize([2, 2, 0, 0]), [0.5, 0.5, 0, 0], atol=1e-12)

    def test_identity(self):
        np.testing.assert_array_equal(normalize([1, 0, 0]), [1, 0, 0])

    def test_divides_by_sum(self):
        np.testing.assert_allclose(normalize([0.3, 0.1, 0.2]), [0.5, 1 / 6, 1 / 3], atol=1e-12)

    def test_all_zero_raises(self):
        with pytest.raises(AllZeroWeights):
            normalize([0, 0, 0])

    @given(weights)
    def test_sums_to_one(self, w):
        assert abs(normalize(w).sum() - 1) < 1e-9


class TestTemperature:
    def test_unit_temperature_is_identity(self):
        np.testing.assert_array_equal(temperature_scale(np.array([0.5, 0.5]), 1.0), [0.5, 0.5])

    def test_low_temperature_approaches_argmax(self):
        out = temperature_scale(np.array([0.8, 0.2]), 0.01)
        assert out[0] > 1 - 1e-12

    def test_square_root_at_two(self):
        expected = np.sqrt([0.8, 0.2]) / np.sqrt([0.8, 0.2]).sum()
        out = temperature_scale(np.array([0.8, 0.2]), 2.0)
        np.testing.assert_allclose(out, expected, atol=1e-12)
        np.testing.assert_allclose(out, [0.6667, 0.3333], atol=1e-4)

    @pytest.mark.parametrize("t", [0.0, -1.0])
    def test_non_positive_raises(self, t):
        with pytest.raises(NonPositiveTemperature):
            temperature_scale(np.array([0.5, 0.5]), t)


class TestSample:
    def test_degenerate(self):
        rng = SeededRng(0, 1)
        assert all(sample(np.array([1.0, 0, 0]), rng) == 0 for _ in range(200))

    def test_fair_coin_frequency(self):
        rng = SeededRng(1, 1)
        draws = np.array([sample(np.array([0.5, 0.5]), rng) for _ in range(100_000)])
        assert abs(draws.mean() - 0.5) < 0.01

    def test_reproducible(self):
        r1, r2 = SeededRng(42, 1), SeededRng(42, 1)
        assert [sample(np.array([0.3, 0.7]), r1) for _ in range(500)] == \
               [sample(np.array([0.3, 0.7]), r2) for _ in range(500)]

    def test_chi_square_goodness_of_fit(self):
        p = np.array([0.1, 0.2, 0.3, 0.4])
        rng = SeededRng(7, 1)
        counts = np.bincount([sample(p, rng) for _ in range(100_000)], minlength=4)
        assert stats.chisquare(counts, p * counts.sum()).pvalue > 0.001

    def test_never_returns_zero_mass_id(self):
        rng = SeededRng(3, 1)
        p = np.array([0.0, 0.5, 0.0, 0.5])
        assert {sample(p, rng) for _ in range(2000)} == {1, 3}


class TestResidual:
    def test_examples(self):
        np.testing.assert_allclose(residual_distribution(np.array([0.5, 0.5]), np.array([0.9, 0.1])), [0, 1])
        np.testing.assert_allclose(
            residual_distribution(np.array([0.6, 0.3, 0.1]), np.array([0.2, 0.3, 0.5])), [1, 0, 0])

    def test_zero_residual_falls_back_to_p(self):
        p = np.full(4, 0.25)
        np.testing.assert_array_equal(residual_distribution(p, p.copy()), p)

    @given(pairs)
    def test_zero_where_p_not_above_q(self, pq):
        p, q = pq
        res = residual_distribution(p, q)
        if np.any(p > q):
            assert np.all(res[p <= q] == 0)
        assert abs(res.sum() - 1) < 1e-9


class TestOverlap:
    def test_examples(self):
        assert overlap(np.array([0.5, 0.5]), np.array([0.5, 0.5])) == 1.0
        assert overlap(np.array([1.0, 0]), np.array([0, 1.0])) == 0.0
        assert overlap(np.array([0.5, 0.5]), np.array([0.9, 0.1])) == pytest.approx(0.6, abs=1e-12)

    @settings(max_examples=200)
    @given(pairs)
    def test_complements_positive_part(self, pq):
        p, q = pq
        assert abs(overlap(p, q) + np.maximum(p - q, 0).sum() - 1) < 1e-12


class TestVocabAndRng:
    def test_reserved_symbols(self):
        v = Vocab.from_text("abba")
        assert v.symbols[:2] == ("a", "b")
        assert v.mask_id != v.bos_id
        assert not v.emittable[v.mask_id] and not v.emittable[v.bos_id]

    def test_round_trip_text(self):
        v = Vocab.from_text("hello world")
        assert v.decode(v.encode("hello world")) == "hello world"

    def test_whitespace_mode(self):
        v = Vocab.from_text("the cat the dog", mode="whitespace")
        assert v.decode(v.encode("the dog")) == "the dog"

    def test_duplicate_symbols_rejected(self):
        with pytest.raises(ValueError):
            Vocab(("a", "a", "<bos>", "<mask>"))

    def test_streams_are_independent_of_call_order(self):
        a1 = SeededRng(5, 1).random(3)
        SeededRng(5, 2).random(10)
        np.testing.assert_array_equal(a1, SeededRng(5, 1).random(3))
        assert not np.array_equal(a1, SeededRng(5, 2).random(3))

    def test_derive_seed(self):
        assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
        assert len({derive_seed(1, 2, k) for k in range(100)}) == 100

    def test_seed_range(self):
        with pytest.raises(ValueError):
            SeededRng(-1)
