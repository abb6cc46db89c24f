import random

import pytest

from taxoeval.embedding import EmbeddingSimilarity, HashEncoder, TableSimilarity
from taxoeval.softcard import collect_labels, soft_cardinality, soft_recall_precision_f1
from taxoeval.tree import CategoryNode, hierarchy_of, parse_taxonomy
from treegen import random_tree

# the analytic counterexample configuration: one label fully similar to two
# mutually dissimilar labels; impossible for a genuine embedding geometry,
# so it is injected through an explicit similarity table
CE2 = TableSimilarity({("a", "b1"): 1.0, ("a", "b2"): 1.0, ("b1", "b2"): 0.0})


class TestCollectLabels:
    def test_two_node_hierarchy(self):
        h = hierarchy_of(parse_taxonomy('{"name":"R","subtopics":[{"name":"A","papers":[]}]}'))
        assert collect_labels(h) == ["R", "A"]

    def test_root_only(self):
        h = hierarchy_of(parse_taxonomy('{"name":"R","papers":["p"]}'))
        assert collect_labels(h) == ["R"]

    def test_duplicate_labels_retained(self):
        root = CategoryNode("R", children=(CategoryNode("A"), CategoryNode("A")))
        assert collect_labels(root) == ["R", "A", "A"]


class TestSoftCardinality:
    def test_singleton(self):
        assert soft_cardinality(["a"], CE2) == pytest.approx(1.0, abs=1e-9)

    def test_two_dissimilar(self):
        assert soft_cardinality(["b1", "b2"], CE2) == pytest.approx(2.0, abs=1e-9)

    def test_concatenation_value(self):
        assert soft_cardinality(["a", "b1", "b2"], CE2) == pytest.approx(4.0 / 3.0, abs=1e-9)

    def test_never_exceeds_length(self):
        rng = random.Random(0)
        provider = EmbeddingSimilarity(HashEncoder())
        for _ in range(30):
            labels = collect_labels(random_tree(rng, rng.randint(1, 12)))
            assert soft_cardinality(labels, provider) <= len(labels) + 1e-9


class TestSoftRecallPrecision:
    def test_counterexample_values(self):
        nsr, nsp, f1 = soft_recall_precision_f1(["a"], ["b1", "b2"], CE2)
        assert nsr == pytest.approx(5.0 / 3.0, abs=1e-9)
        assert nsp == pytest.approx(5.0 / 6.0, abs=1e-9)
        assert f1 == pytest.approx(2 * nsr * nsp / (nsr + nsp), abs=1e-9)
        assert nsr > 1.0  # documented pathology, not a bug

    def test_permutation_scores_one(self):
        provider = EmbeddingSimilarity(HashEncoder())
        rng = random.Random(1)
        for _ in range(20):
            labels = collect_labels(random_tree(rng, rng.randint(2, 10)))
            shuffled = labels[:]
            rng.shuffle(shuffled)
            nsr, nsp, _ = soft_recall_precision_f1(labels, shuffled, provider)
            assert nsr == pytest.approx(1.0, abs=1e-9)
            assert nsp == pytest.approx(1.0, abs=1e-9)

    def test_identical_singletons(self):
        nsr, nsp, f1 = soft_recall_precision_f1(["x"], ["x"], TableSimilarity())
        assert (nsr, nsp, f1) == (1.0, 1.0, 1.0)

    def test_order_invariance(self):
        provider = EmbeddingSimilarity(HashEncoder())
        a = ["agents survey", "planning", "memory systems"]
        b = ["planning", "tool use", "agents survey"]
        rng = random.Random(2)
        base = soft_recall_precision_f1(a, b, provider)
        for _ in range(5):
            aa, bb = a[:], b[:]
            rng.shuffle(aa)
            rng.shuffle(bb)
            assert soft_recall_precision_f1(aa, bb, provider) == pytest.approx(base, abs=1e-12)

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            soft_recall_precision_f1([], ["a"], CE2)
