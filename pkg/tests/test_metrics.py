import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semalloc import metrics as M

from oracles import brute_bleu, cosine, sampled_aoi

words = st.sampled_from("the a cat dog sat on mat ran".split())
sentences = st.lists(words, min_size=1, max_size=8)


def tok(s):
    return M.tokenize(s)


class TestBleu:
    def test_identity(self):
        assert M.bleu(tok("the cat sat"), [tok("the cat sat")], 1) == 1.0

    def test_clipping(self):
        # "the" appears 3 times but only once in the reference: 1/3
        assert M.bleu(tok("the the the"), [tok("the cat sat")], 1) == pytest.approx(1 / 3, abs=1e-15)

    def test_no_overlap(self):
        assert M.bleu(tok("dogs bark"), [tok("the cat sat")], 1) == 0.0

    def test_brevity_penalty(self):
        score = M.bleu(tok("the cat"), [tok("the cat sat on the mat")], 1)
        assert score == pytest.approx(math.exp(1 - 6 / 2))

    def test_zero_higher_order_is_zero(self):
        assert M.bleu(tok("cat the"), [tok("the cat")], 2) == 0.0

    def test_tokenizer_lowercases(self):
        assert M.bleu(tok("The CAT sat"), [tok("the cat SAT")], 3) == 1.0

    @pytest.mark.parametrize("cand,refs,n", [
        ([], [["a"]], 1),
        (["a"], [], 1),
        (["a"], [[]], 1),
        (["a", "b"], [["a"]], 3),
        (["a"], [["a"]], 0),
    ])
    def test_invalid_input(self, cand, refs, n):
        with pytest.raises(M.MetricInputError):
            M.bleu(cand, refs, n)

    @settings(max_examples=200, deadline=None)
    @given(sentences, st.data())
    def test_self_bleu_is_one(self, x, data):
        n = data.draw(st.integers(1, len(x)))
        assert M.bleu(x, [x], n) == 1.0

    @settings(max_examples=100, deadline=None)
    @given(sentences, st.lists(sentences, min_size=1, max_size=4), st.randoms())
    def test_reference_order_irrelevant(self, cand, refs, rnd):
        shuffled = list(refs)
        rnd.shuffle(shuffled)
        assert M.bleu(cand, refs, 1) == M.bleu(cand, shuffled, 1)
        assert M.cider(cand, refs, 1) == pytest.approx(M.cider(cand, shuffled, 1), abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(sentences, st.lists(sentences, min_size=1, max_size=3), st.randoms())
    def test_unigram_precision_ignores_candidate_order(self, cand, refs, rnd):
        shuffled = list(cand)
        rnd.shuffle(shuffled)
        assert M.modified_precision(cand, refs, 1) == M.modified_precision(shuffled, refs, 1)

    def test_matches_brute_force_on_random_pairs(self):
        rng = random.Random(1234)
        vocab = "the a cat dog sat on mat ran big red".split()
        for _ in range(300):
            cand = [rng.choice(vocab) for _ in range(rng.randint(1, 7))]
            refs = [[rng.choice(vocab) for _ in range(rng.randint(1, 7))] for _ in range(rng.randint(1, 3))]
            n = rng.randint(1, min(4, len(cand)))
            assert M.bleu(cand, refs, n) == brute_bleu(cand, refs, n)


class TestCider:
    def test_identity(self):
        assert M.cider(tok("the cat sat on the mat"), [tok("the cat sat on the mat")], 4) == pytest.approx(1.0)

    def test_disjoint(self):
        assert M.cider(tok("dogs bark loudly"), [tok("the cat sat")], 2) == 0.0

    def test_two_reference_hand_case(self):
        # frozen from an independent dict-based TF-IDF computation
        score = M.cider(tok("the cat sat on the mat"),
                        [tok("the cat is on the mat"), tok("a cat sat on a mat")], 2)
        assert score == pytest.approx(0.5582449137012186, abs=1e-12)

    def test_bounded(self):
        score = M.cider(tok("the cat the cat"), [tok("the cat"), tok("a dog")], 2)
        assert 0.0 <= score <= 1.0

    def test_invalid(self):
        with pytest.raises(M.MetricInputError):
            M.cider([], [["a"]], 1)


class TestSimilarity:
    @pytest.mark.parametrize("a,b,expected", [
        ((1, 1), (1, 1), 1.0),
        ((1, 0), (0, 1), 0.0),
        ((1, 2), (2, 1), 0.8),
    ])
    def test_hand_cases(self, a, b, expected):
        assert M.sentence_similarity(a, b) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("a,b", [((1, 2), (1, 2, 3)), ((0, 0), (1, 1)), ((), ())])
    def test_invalid(self, a, b):
        with pytest.raises(M.MetricInputError):
            M.sentence_similarity(a, b)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(-10, 10), min_size=3, max_size=3),
           st.lists(st.floats(-10, 10), min_size=3, max_size=3),
           st.floats(0.01, 100))
    def test_symmetric_and_scale_invariant(self, a, b, k):
        a, b = np.array(a), np.array(b)
        if np.linalg.norm(a) < 1e-3 or np.linalg.norm(b) < 1e-3:
            return
        s = M.sentence_similarity(a, b)
        assert s == pytest.approx(M.sentence_similarity(b, a), abs=1e-12)
        assert s == pytest.approx(M.sentence_similarity(k * a, b), abs=1e-12)
        assert s == pytest.approx(cosine(a, b), abs=1e-12)


class TestAge:
    def test_aoi_after_delivery(self):
        trace = [(0, "x", "x", 0), (2, "x", "x", 1)]
        assert M.aoi_at(trace, 2) == 1

    def test_no_deliveries_is_triangle(self):
        assert M.average_aoi([(0, "x", "x", 0)], 6.0) == 3.0

    def test_three_delivery_sawtooth(self):
        trace = [(0, "x", "x", 0), (1, "x", "x", 0.5), (2.5, "x", "x", 2), (4, "x", "x", 3.5)]
        # segment areas: 0.5, (1.5*(1.75-0.5)), (1.5*(3.25-2)), (1*(4.5-3.5)) over horizon 5
        exact = (0.5 + 1.875 + 1.875 + 1.0) / 5
        assert M.average_aoi(trace, 5.0) == pytest.approx(exact, abs=1e-12)
        assert M.average_aoi(trace, 5.0) == pytest.approx(sampled_aoi(trace, 5.0), abs=1e-4)

    def test_aoii_always_correct(self):
        trace = [(0, "a", "a", 0), (1, "b", "b", 1), (2, "c", "c", 2)]
        assert M.average_aoii(trace, 3) == 0.0

    def test_aoii_wrong_then_corrected(self):
        trace = [(0, "a", "a", 0), (1, "b", "a", 0), (3, "b", "b", 3)]
        assert M.average_aoii(trace, 4) == pytest.approx(0.5, abs=1e-12)

    def test_aoii_permanently_wrong(self):
        assert M.average_aoii([(0, "a", "b", 0)], 10.0) == 5.0

    def test_aoii_wrong_streak_spans_source_changes(self):
        # still wrong after the source moves again: the clock keeps running from t=1
        trace = [(0, "a", "a", 0), (1, "b", "a", 0), (2, "c", "a", 0), (3, "c", "c", 3)]
        assert M.average_aoii(trace, 3) == pytest.approx(2 / 3, abs=1e-12)

    @pytest.mark.parametrize("trace", [
        [],
        [(1, "a", "a", 0)],
        [(0, "a", "a", 0), (0, "a", "a", 0)],
        [(0, "a", "a", 0), (1, "a", "a", 2)],
    ])
    def test_invalid_traces(self, trace):
        with pytest.raises(M.MetricInputError):
            M.average_aoi(trace, 5)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.floats(0.01, 2), st.sampled_from("ab"), st.sampled_from("ab")),
                    min_size=1, max_size=8))
    def test_aoii_bounded_by_forced_wrong(self, steps):
        t, events = 0.0, []
        for dt, s, e in steps:
            events.append((t, s, e, 0.0))
            t += dt
        horizon = t
        forced = [(ev[0], "a", "b", 0.0) for ev in events]
        assert 0 <= M.average_aoii(events, horizon) <= M.average_aoii(forced, horizon) + 1e-12

    def test_deterministic(self):
        trace = [(0, "a", "b", 0), (1.3, "a", "a", 1.1), (2.9, "b", "a", 2.0)]
        assert M.average_aoii(trace, 4.1) == M.average_aoii(trace, 4.1)
        assert M.average_aoi(trace, 4.1) == M.average_aoi(trace, 4.1)
