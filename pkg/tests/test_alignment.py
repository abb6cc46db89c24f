import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taxoeval.alignment import (
    AlignmentSet,
    align,
    normalize_title,
    retrieval_scores,
)
from taxoeval.embedding import TableSimilarity


class TestNormalizeTitle:
    def test_whitespace_and_case(self):
        assert normalize_title("  The  Title!  ") == "the title"

    def test_punctuation_to_space(self):
        assert normalize_title("GPT-4o: A Study") == "gpt 4o a study"

    def test_empty(self):
        assert normalize_title("") == ""
        assert normalize_title("!!!") == ""

    def test_unicode_nfc(self):
        # combining accent composes, then strips to the base letters
        assert normalize_title("Café Embeddings") == normalize_title("Café Embeddings")


class TestAlign:
    def test_identical_titles_score_one(self, hash_similarity):
        result = align(["An Amazing Survey"], ["an amazing survey!"], hash_similarity)
        assert len(result.pairs) == 1
        assert result.pairs[0].score == 1.0

    def test_containment_branch(self):
        table = TableSimilarity({("attention survey", "attention survey extended"): 0.7})
        result = align(["Attention Survey"], ["Attention Survey: Extended"], table)
        assert len(result.pairs) == 1
        assert result.pairs[0].score == pytest.approx(0.7)

    def test_above_threshold_without_containment_not_aligned(self):
        table = TableSimilarity({("attention survey", "survey of attention"): 0.7})
        result = align(["Attention Survey"], ["Survey of Attention"], table)
        assert result.pairs == ()
        assert result.unmatched_expert == ("attention survey",)

    def test_below_threshold_with_containment_not_aligned(self):
        table = TableSimilarity({("gpt", "gpt 4"): 0.5})
        assert align(["GPT"], ["GPT-4"], table).pairs == ()

    def test_highest_score_candidate_wins(self):
        table = TableSimilarity(
            {
                ("models survey", "models survey v2"): 0.8,
                ("models survey", "models survey extended edition"): 0.7,
            }
        )
        result = align(
            ["Models Survey"],
            ["Models Survey v2", "Models Survey Extended Edition"],
            table,
        )
        assert result.pairs[0].model == "models survey v2"
        assert result.unmatched_model == ("models survey extended edition",)

    def test_tie_broken_by_edit_distance(self):
        table = TableSimilarity(
            {
                ("survey a", "survey a 2024"): 0.8,
                ("survey a", "survey a with a much longer suffix"): 0.8,
            }
        )
        result = align(
            ["Survey A"], ["Survey A (2024)", "Survey A, With a Much Longer Suffix"], table
        )
        assert result.pairs[0].model == "survey a 2024"

    def test_one_to_one_under_competition(self):
        # two expert papers both contain the single model title; only the
        # better-scoring one claims it
        table = TableSimilarity(
            {
                ("deep nets", "deep nets survey"): 0.9,
                ("deep nets extended", "deep nets survey"): 0.0,
            }
        )
        result = align(["Deep Nets", "Deep Nets Extended"], ["Deep Nets Survey"], table)
        assert len(result.pairs) == 1
        assert result.pairs[0].expert == "deep nets"
        assert result.unmatched_expert == ("deep nets extended",)

    def test_removing_model_paper_never_adds_pairs(self, hash_similarity):
        expert = ["alpha beta survey", "gamma delta methods", "epsilon overview"]
        model = ["alpha beta survey", "gamma delta methods extended", "zeta report"]
        full = align(expert, model, hash_similarity)
        for drop in range(len(model)):
            reduced = align(expert, model[:drop] + model[drop + 1:], hash_similarity)
            assert set(p.expert for p in reduced.pairs) <= set(p.expert for p in full.pairs)

    @given(
        st.lists(st.sampled_from(["alpha", "beta", "gamma", "alpha beta", "beta gamma",
                                  "alpha survey", "beta survey"]), max_size=8),
        st.lists(st.sampled_from(["alpha", "beta", "gamma extended", "alpha beta survey",
                                  "beta gamma", "survey"]), max_size=8),
    )
    @settings(max_examples=60, deadline=None)
    def test_one_to_one_property(self, expert, model):
        from taxoeval.embedding import EmbeddingSimilarity, HashEncoder

        result = align(expert, model, EmbeddingSimilarity(HashEncoder()))
        experts = [p.expert for p in result.pairs]
        models = [p.model for p in result.pairs]
        assert len(experts) == len(set(experts))
        assert len(models) == len(set(models))
        for pair in result.pairs:
            assert pair.score == 1.0 or (
                0.6 <= pair.score < 1.0
                and (pair.expert in pair.model or pair.model in pair.expert)
            )


class TestRetrievalScores:
    def _alignment(self, n):
        pairs = tuple(
            align([f"paper {i}"], [f"paper {i}"], TableSimilarity()).pairs[0]
            for i in range(n)
        )
        return AlignmentSet(pairs=pairs, unmatched_expert=(), unmatched_model=())

    def test_perfect_overlap(self):
        scores = retrieval_scores(self._alignment(5), 5, 5)
        assert (scores.recall, scores.precision, scores.f1) == (1.0, 1.0, 1.0)

    def test_disjoint(self):
        empty = AlignmentSet(pairs=(), unmatched_expert=("a",), unmatched_model=("b",))
        scores = retrieval_scores(empty, 1, 1)
        assert (scores.recall, scores.precision, scores.f1) == (0.0, 0.0, 0.0)

    def test_half(self):
        scores = retrieval_scores(self._alignment(1), 2, 2)
        assert (scores.recall, scores.precision, scores.f1) == (0.5, 0.5, 0.5)

    def test_zero_denominators_are_null(self):
        empty = AlignmentSet(pairs=(), unmatched_expert=(), unmatched_model=())
        scores = retrieval_scores(empty, 0, 3)
        assert scores.recall is None
        assert scores.precision == 0.0
        assert scores.f1 is None

    @given(st.integers(0, 6), st.integers(0, 10), st.integers(0, 10))
    @settings(max_examples=50, deadline=None)
    def test_bounds(self, matched, extra_expert, extra_model):
        n_expert = matched + extra_expert
        n_model = matched + extra_model
        scores = retrieval_scores(self._alignment(matched), n_expert, n_model)
        if scores.recall is not None:
            assert 0.0 <= scores.recall <= 1.0
        if scores.precision is not None:
            assert 0.0 <= scores.precision <= 1.0
        if scores.f1 is not None and scores.f1 > 0:
            low = min(scores.recall, scores.precision)
            high = max(scores.recall, scores.precision)
            assert low - 1e-12 <= scores.f1 <= high + 1e-12


def test_alignment_deterministic_under_input_order(hash_similarity):
    expert = ["b title two", "a title one", "c title three"]
    model = ["c title three", "a title one", "b title two"]
    r1 = align(expert, model, hash_similarity)
    r2 = align(list(reversed(expert)), list(reversed(model)), hash_similarity)
    assert r1 == r2


def test_random_title_multisets_stay_one_to_one(hash_similarity):
    rng = random.Random(7)
    vocab = ["graph", "survey", "deep", "model", "agents", "review"]
    for _ in range(25):
        expert = [" ".join(rng.choices(vocab, k=rng.randint(1, 3))) for _ in range(rng.randint(0, 6))]
        model = [" ".join(rng.choices(vocab, k=rng.randint(1, 3))) for _ in range(rng.randint(0, 6))]
        result = align(expert, model, hash_similarity)
        models = [p.model for p in result.pairs]
        experts = [p.expert for p in result.pairs]
        assert len(models) == len(set(models))
        assert len(experts) == len(set(experts))
