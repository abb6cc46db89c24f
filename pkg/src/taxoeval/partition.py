"""Leaf-level partition agreement between paper-to-category assignments.

Expert and model assignments over a shared paper universe are compared as
flat partitions: the adjusted Rand index (pair-counting agreement corrected
for chance) and the entropy-based homogeneity/completeness/V-measure
family. Two additional views support end-to-end evaluation where retrieval
gates what can be organized: restriction to the aligned intersection, and
extension of the model assignment with a dedicated unretrieved label over
the full expert universe.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, log

import numpy as np

from .alignment import AlignmentSet
from .tree import UNRETRIEVED, PaperAssignment

__all__ = [
    "ContingencyTable",
    "contingency",
    "adjusted_rand_index",
    "homogeneity_completeness_v",
    "restrict_to_intersection",
    "extend_e2e",
]


@dataclass(frozen=True)
class ContingencyTable:
    """Cross-tabulation of two assignments: counts[i, j] is the number of
    papers in expert category i and model category j."""

    counts: np.ndarray
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def contingency(
    u_star: PaperAssignment, u_hat: PaperAssignment, universe
) -> ContingencyTable:
    """Build the contingency table over the categories actually used.

    Every paper in the universe must be present in both assignments.
    """
    papers = sorted(universe)
    for paper in papers:
        if paper not in u_star.entries:
            raise ValueError(f"paper {paper!r} missing from the expert assignment")
        if paper not in u_hat.entries:
            raise ValueError(f"paper {paper!r} missing from the model assignment")
    rows = sorted({u_star.entries[p] for p in papers})
    cols = sorted({u_hat.entries[p] for p in papers})
    row_index = {label: i for i, label in enumerate(rows)}
    col_index = {label: j for j, label in enumerate(cols)}
    counts = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for p in papers:
        counts[row_index[u_star.entries[p]], col_index[u_hat.entries[p]]] += 1
    return ContingencyTable(counts=counts, row_labels=tuple(rows), col_labels=tuple(cols))


def _is_identical_partition(table: ContingencyTable) -> bool:
    # identical as set partitions == the table has at most one nonzero
    # entry per row and per column
    nonzero = table.counts > 0
    return bool(
        np.all(nonzero.sum(axis=0) <= 1) and np.all(nonzero.sum(axis=1) <= 1)
    )


def adjusted_rand_index(table: ContingencyTable) -> float:
    """Chance-corrected pairwise agreement in [-1, 1].

    Computed from the contingency table with exact integer pair counts:
    (Index - Expected) / (MaxIndex - Expected). When the normalizer
    degenerates (both partitions trivial, or fewer than two papers) the
    result is 1 for identical set partitions and 0 otherwise.
    """
    n = table.total
    if n < 2:
        return 1.0 if _is_identical_partition(table) else 0.0
    index = int(sum(comb(int(v), 2) for v in table.counts.flat))
    sum_rows = int(sum(comb(int(a), 2) for a in table.row_sums))
    sum_cols = int(sum(comb(int(b), 2) for b in table.col_sums))
    expected = sum_rows * sum_cols / comb(n, 2)
    max_index = (sum_rows + sum_cols) / 2.0
    if max_index == expected:
        return 1.0 if _is_identical_partition(table) else 0.0
    return (index - expected) / (max_index - expected)


def _entropy(sums: np.ndarray, n: int) -> float:
    return -sum(s / n * log(s / n) for s in sums if s > 0)


def homogeneity_completeness_v(table: ContingencyTable) -> tuple[float, float, float]:
    """Entropy-based agreement (natural log; the base cancels in ratios).

    homogeneity = 1 - H(expert|model)/H(expert), completeness the converse,
    V their harmonic mean. By convention a zero reference entropy yields a
    perfect score on that axis, and V is 0 when both components are 0.
    """
    n = table.total
    if n == 0:
        return 1.0, 1.0, 1.0
    h_expert = _entropy(table.row_sums, n)
    h_model = _entropy(table.col_sums, n)

    h_expert_given_model = 0.0
    h_model_given_expert = 0.0
    for i in range(table.counts.shape[0]):
        for j in range(table.counts.shape[1]):
            nij = int(table.counts[i, j])
            if nij == 0:
                continue
            h_expert_given_model -= nij / n * log(nij / table.col_sums[j])
            h_model_given_expert -= nij / n * log(nij / table.row_sums[i])

    hom = 1.0 if h_expert == 0.0 else 1.0 - h_expert_given_model / h_expert
    comp = 1.0 if h_model == 0.0 else 1.0 - h_model_given_expert / h_model
    v = 0.0 if hom + comp == 0.0 else 2.0 * hom * comp / (hom + comp)
    return hom, comp, v


def restrict_to_intersection(
    u_star: PaperAssignment, u_hat: PaperAssignment, alignment: AlignmentSet
) -> tuple[PaperAssignment, PaperAssignment, tuple[str, ...]]:
    """Restrict both assignments to the aligned expert papers.

    The model assignment is transported through the alignment: each aligned
    expert paper takes the category of its matched model paper. Feeds the
    intersection-restricted scores; an empty alignment yields an empty
    universe (callers report those metrics as undefined).
    """
    universe = tuple(
        sorted(
            p.expert
            for p in alignment.pairs
            if p.expert in u_star.entries and p.model in u_hat.entries
        )
    )
    mapping = alignment.expert_to_model()
    star = PaperAssignment({p: u_star.entries[p] for p in universe})
    hat = PaperAssignment({p: u_hat.entries[mapping[p]] for p in universe})
    return star, hat, universe


def extend_e2e(
    u_hat: PaperAssignment, alignment: AlignmentSet, expert_universe
) -> PaperAssignment:
    """Extend the model assignment to the full expert universe: aligned
    papers keep their matched model category, everything else maps to the
    single unretrieved label."""
    mapping = alignment.expert_to_model()
    entries = {}
    for paper in sorted(expert_universe):
        matched = mapping.get(paper)
        if matched is not None and matched in u_hat.entries:
            entries[paper] = u_hat.entries[matched]
        else:
            entries[paper] = UNRETRIEVED
    return PaperAssignment(entries)
