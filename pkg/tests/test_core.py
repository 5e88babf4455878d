import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bcr.core import (
    Alphabet,
    DegeneratePosteriorError,
    History,
    Interaction,
    as_distribution,
    kl_bits,
    logsumexp,
    make_rng,
    normalize,
    sample,
)

# frozen from direct evaluation: 0.8*log2(9), 0.2*log2(1.5) and their sum
KL_ACTIONS = 2.53594000115385
KL_OBS = 0.11699250014423124
D_MAX = 2.652932501298081


def simplex(n):
    return arrays(np.float64, n, elements=st.floats(1e-6, 1.0)).map(lambda x: x / x.sum())


class TestTypes:
    def test_alphabet_labels_must_match_size(self):
        assert Alphabet(2, ("zero", "one")).label(1) == "one"
        with pytest.raises(ValueError):
            Alphabet(2, ("only",))
        with pytest.raises(ValueError):
            Alphabet(0)

    def test_alphabet_check(self):
        a = Alphabet(3)
        assert a.check(2) == 2
        with pytest.raises(ValueError):
            a.check(3)

    def test_history_roundtrip(self):
        h = History().with_action(1).with_observation(0).with_action(0)
        assert h.steps == (Interaction(1, 0),)
        assert h.pending_action == 0
        assert h.complete() == History.from_pairs([(1, 0)])
        with pytest.raises(ValueError):
            h.with_action(1)
        with pytest.raises(ValueError):
            History().with_observation(0)

    def test_distribution_validation(self):
        p = as_distribution([0.25, 0.75])
        assert not p.flags.writeable
        for bad in ([0.5, 0.6], [-0.1, 1.1], [], [[0.5, 0.5]], [np.nan, 1.0]):
            with pytest.raises(ValueError):
                as_distribution(bad)
        as_distribution([0.5, 0.5 + 5e-13])
        with pytest.raises(ValueError):
            as_distribution([0.5, 0.5 + 5e-12])


class TestNormalize:
    def test_symmetric(self):
        np.testing.assert_allclose(normalize([0.0, 0.0]), [0.5, 0.5], atol=1e-15)

    def test_hand_normalization(self):
        out = normalize([math.log(0.9 * 0.5), math.log(0.1 * 0.5)])
        np.testing.assert_allclose(out, [0.9, 0.1], atol=1e-12)

    def test_single_live_hypothesis(self):
        assert normalize([0.0, -np.inf]).tolist() == [1.0, 0.0]

    def test_all_dead_is_degenerate(self):
        with pytest.raises(DegeneratePosteriorError):
            normalize([-np.inf, -np.inf])

    def test_no_underflow(self):
        out = normalize([-5000.0, -5001.0])
        np.testing.assert_allclose(out, [1 / (1 + math.exp(-1)), 1 - 1 / (1 + math.exp(-1))], atol=1e-12)

    @given(arrays(np.float64, st.integers(1, 6), elements=st.floats(-700, 0)),
           st.floats(-300, 300))
    def test_shift_invariance(self, lw, c):
        a = normalize(lw)
        b = normalize(lw + c)
        np.testing.assert_allclose(a, b, atol=1e-12)
        assert abs(a.sum() - 1) < 1e-12

    def test_batched_logsumexp_matches_rows(self):
        lw = np.log(np.random.default_rng(0).dirichlet(np.ones(3), size=5))
        rows = np.array([logsumexp(r) for r in lw])
        assert np.array_equal(rows, logsumexp(lw))


class TestSample:
    def test_point_mass(self):
        rng = make_rng(3)
        assert all(sample([1.0, 0.0], rng) == 0 for _ in range(200))
        assert all(sample([0.0, 1.0], rng) == 1 for _ in range(200))

    def test_reproducible(self):
        r1, r2 = make_rng(99), make_rng(99)
        assert [sample([0.5, 0.5], r1) for _ in range(50)] == [sample([0.5, 0.5], r2) for _ in range(50)]

    def test_consumes_one_draw(self):
        r1, r2 = make_rng(5), make_rng(5)
        sample([0.2, 0.3, 0.5], r1)
        r2.random()
        assert r1.random() == r2.random()

    def test_frequency(self):
        rng = make_rng(2024)
        n = 100_000
        freq = np.mean([sample([0.1, 0.9], rng) for _ in range(n)])
        assert 0.89 <= freq <= 0.91

    @pytest.mark.parametrize("p", [0.05, 0.3, 0.5, 0.77])
    def test_frequency_within_three_sigma(self, p):
        rng = make_rng(7, int(p * 100))
        n = 100_000
        freq = np.mean([sample([1 - p, p], rng) for _ in range(n)])
        assert abs(freq - p) <= 3 * math.sqrt(p * (1 - p) / n)

    def test_streams_keyed_by_run(self):
        a = make_rng(1, 0).random(4)
        b = make_rng(1, 1).random(4)
        assert not np.array_equal(a, b)
        assert np.array_equal(a, make_rng((1, 0)).random(4))


class TestKL:
    def test_identical(self):
        assert kl_bits([0.5, 0.5], [0.5, 0.5]) == 0.0

    def test_action_term(self):
        assert kl_bits([0.9, 0.1], [0.1, 0.9]) == pytest.approx(KL_ACTIONS, abs=1e-12)

    def test_observation_term(self):
        assert kl_bits([0.6, 0.4], [0.4, 0.6]) == pytest.approx(KL_OBS, abs=1e-12)

    def test_maximum_deviation(self):
        total = kl_bits([0.9, 0.1], [0.1, 0.9]) + kl_bits([0.6, 0.4], [0.4, 0.6])
        assert total == pytest.approx(D_MAX, abs=1e-12)
        assert round(total, 3) == 2.653

    def test_zero_conventions(self):
        assert kl_bits([1.0, 0.0], [0.5, 0.5]) == pytest.approx(1.0)
        assert kl_bits([0.5, 0.5], [1.0, 0.0]) == math.inf

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            kl_bits([0.5, 0.5], [1 / 3] * 3)

    @settings(max_examples=1000)
    @given(st.integers(1, 6).flatmap(simplex))
    def test_self_divergence_is_zero(self, p):
        assert kl_bits(p, p) == pytest.approx(0.0, abs=1e-12)

    @given(st.integers(1, 6).flatmap(lambda n: st.tuples(simplex(n), simplex(n))))
    def test_gibbs(self, pq):
        p, q = pq
        assert kl_bits(p, q) >= -1e-12
