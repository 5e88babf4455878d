import math
from itertools import permutations

import numpy as np
import pytest

from bcr.core import History
from bcr.models import (
    InteractionSystem,
    MemorylessModel,
    all_histories,
    complement,
    make_memoryless,
    default_suite,
    seq_loglik_full,
    seq_loglik_intervened,
)


def test_default_models():
    p0, p1 = default_suite()
    assert p1.pa.tolist() == [0.1, 0.9] and p1.po.tolist() == [0.4, 0.6]
    assert p0.pa.tolist() == [0.9, 0.1] and p0.po.tolist() == [0.6, 0.4]


def test_memoryless_ignores_history():
    m = make_memoryless([0.1, 0.9], [0.4, 0.6])
    for h in list(all_histories(2, 2, 2))[:5]:
        assert m.action_dist(h) is m.pa
        assert m.obs_dist(h, 1) is m.po


def test_invalid_distribution_rejected():
    with pytest.raises(ValueError):
        make_memoryless([0.2, 0.9], [0.5, 0.5])


def test_complement():
    p0, p1 = default_suite()
    assert complement(p1) == p0
    assert complement(complement(p1)) == p1
    flat = make_memoryless([0.5, 0.5], [0.5, 0.5])
    assert complement(flat) == flat
    with pytest.raises(NotImplementedError):
        complement(make_memoryless([0.2, 0.3, 0.5], [0.5, 0.5]))


def test_degenerate_model_likelihood():
    m = make_memoryless([1, 0], [1, 0])
    assert seq_loglik_full(m, History.from_pairs([(0, 0)] * 3)) == 0.0
    assert seq_loglik_full(m, History.from_pairs([(0, 1)])) == -math.inf


def test_full_likelihood_examples():
    p0, p1 = default_suite()
    h = History.from_pairs([(1, 1)])
    assert seq_loglik_full(p1, h) == pytest.approx(math.log(0.54), abs=1e-14)
    assert seq_loglik_full(p0, h) == pytest.approx(math.log(0.04), abs=1e-14)
    assert seq_loglik_full(p1, History()) == 0.0


def test_pending_action_included_only_in_full():
    _, p1 = default_suite()
    h = History.from_pairs([(1, 1)], pending_action=0)
    assert seq_loglik_full(p1, h) == pytest.approx(math.log(0.54 * 0.1))
    assert seq_loglik_intervened(p1, h) == pytest.approx(math.log(0.6))


def test_intervened_likelihood_examples():
    _, p1 = default_suite()
    assert seq_loglik_intervened(p1, History.from_pairs([(1, 1)])) == pytest.approx(math.log(0.6))
    assert seq_loglik_intervened(p1, History()) == 0.0
    h = History.from_pairs([(0, 1), (1, 1)])
    assert seq_loglik_intervened(p1, h) == pytest.approx(math.log(0.36))


@pytest.mark.parametrize("length", range(5))
def test_full_is_intervened_plus_action_terms(suite, length):
    for m in suite:
        for h in all_histories(2, 2, length):
            expected = seq_loglik_intervened(m, h) + sum(math.log(m.pa[a]) for a in h.actions())
            assert seq_loglik_full(m, h) == pytest.approx(expected, abs=1e-12)


def test_intervened_depends_only_on_observation_multiset(suite):
    _, p1 = suite
    for h in all_histories(2, 2, 3):
        ref = seq_loglik_intervened(p1, h)
        for perm in permutations(h.steps):
            assert seq_loglik_intervened(p1, History(tuple(perm))) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("length", range(5))
def test_probability_conservation(suite, length):
    for m in (*suite, make_memoryless([0.3, 0.7], [1.0, 0.0])):
        total = sum(math.exp(seq_loglik_full(m, h)) for h in all_histories(2, 2, length))
        assert total == pytest.approx(1.0, abs=1e-12)


def test_history_enumeration_count():
    assert len(list(all_histories(2, 2, 3))) == 64
    assert list(all_histories(2, 2, 0)) == [History()]


def test_interaction_system_alphabets():
    p0, p1 = default_suite()
    sys_ = InteractionSystem(p0, p1)
    assert sys_.action_dist(History()) is p0.pa
    assert sys_.obs_dist(History(), 0) is p1.po
    with pytest.raises(ValueError):
        InteractionSystem(p0, MemorylessModel([0.5, 0.5], [0.2, 0.3, 0.5]))
