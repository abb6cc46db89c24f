"""Soft-cardinality label-coverage baselines (node soft recall/precision).

These scores compare the two hierarchies' label inventories only: the soft
cardinality of a label list discounts near-duplicates through pairwise
similarity, and recall/precision follow from an inclusion-exclusion over
the concatenated list. They are auxiliary diagnostics, not structural
scores: any label-preserving rewiring of a tree leaves them at exactly 1,
and adding labels similar to existing ones can push them above 1. Both
pathologies are pinned by regression tests rather than "fixed" here.
"""
from __future__ import annotations

from typing import Sequence

from .embedding import as_similarity
from .tree import walk

__all__ = [
    "collect_labels",
    "soft_cardinality",
    "soft_recall_precision_f1",
]


def collect_labels(h) -> list[str]:
    """Hierarchy node labels in preorder, root included, papers excluded.

    Multiplicities are preserved; every consumer is order-invariant.
    """
    root = h if hasattr(h, "children") else h.root
    return [node.label for node, _, _ in walk(root)]


def soft_cardinality(labels: Sequence[str], provider) -> float:
    """Similarity-discounted count: sum over i of 1 / sum_j sim(l_i, l_j).

    Each row sum includes the self-similarity term 1, so every summand is
    in (0, 1] and the result never exceeds the plain length.
    """
    simprov = as_similarity(provider)
    total = 0.0
    for a in labels:
        row = sum(simprov.sim(a, b) for b in labels)
        if row <= 0.0:
            raise ArithmeticError(f"zero similarity row sum for label {a!r}")
        total += 1.0 / row
    return total


def soft_recall_precision_f1(
    labels_a: Sequence[str], labels_b: Sequence[str], provider
) -> tuple[float, float, float]:
    """Node soft recall/precision/F1 between two label lists.

    overlap = c(A) + c(B) - c(A ++ B) with ++ the multiset union implemented
    as list concatenation; recall divides by c(A), precision by c(B).
    """
    if not labels_a or not labels_b:
        raise ValueError("label lists must be non-empty")
    c_a = soft_cardinality(labels_a, provider)
    c_b = soft_cardinality(labels_b, provider)
    c_union = soft_cardinality(list(labels_a) + list(labels_b), provider)
    overlap = c_a + c_b - c_union
    recall = overlap / c_a
    precision = overlap / c_b
    f1 = (
        0.0
        if recall + precision == 0.0
        else 2.0 * precision * recall / (precision + recall)
    )
    return recall, precision, f1
