"""Paper-title normalization and expert/model paper alignment.

Alignment gates every paper-conditioned metric: retrieval scores are pair
counts over it, and path-consistency scoring averages over its pairs. A
pair is admitted when the similarity score is exactly 1, or when it is in
[threshold, 1) and one normalized title contains the other. Exact-title
match and containment make the procedure robust to version-variant titles
without relying on DOIs or arXiv ids.
"""
from __future__ import annotations

import unicodedata
from dataclasses import dataclass

from .embedding import as_similarity

__all__ = [
    "AlignedPair",
    "AlignmentSet",
    "RetrievalScores",
    "normalize_title",
    "align",
    "retrieval_scores",
]

DEFAULT_THRESHOLD = 0.6


def normalize_title(raw: str) -> str:
    """Canonical title form: NFC, lowercase, every character outside
    [a-z0-9] becomes a space, whitespace collapsed."""
    text = unicodedata.normalize("NFC", raw).lower()
    cleaned = [c if ("a" <= c <= "z" or "0" <= c <= "9") else " " for c in text]
    return " ".join("".join(cleaned).split())


def _levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb))
            )
        previous = current
    return previous[-1]


@dataclass(frozen=True)
class AlignedPair:
    expert: str  # normalized expert title
    model: str  # normalized model title
    score: float


@dataclass(frozen=True)
class AlignmentSet:
    pairs: tuple[AlignedPair, ...]
    unmatched_expert: tuple[str, ...]
    unmatched_model: tuple[str, ...]

    def expert_to_model(self) -> dict[str, str]:
        return {p.expert: p.model for p in self.pairs}

    def model_to_expert(self) -> dict[str, str]:
        return {p.model: p.expert for p in self.pairs}

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class RetrievalScores:
    recall: float | None
    precision: float | None
    f1: float | None


def _admissible(score: float, expert: str, model: str, threshold: float) -> bool:
    if score >= 1.0:
        return True
    if score < threshold:
        return False
    return expert in model or model in expert


def align(
    expert_titles,
    model_titles,
    provider,
    threshold: float = DEFAULT_THRESHOLD,
) -> AlignmentSet:
    """One-to-one alignment between expert and model paper titles.

    Titles are normalized first; duplicates within a side collapse to one
    entry. Identical normalized titles score exactly 1. Candidate pairs
    must pass the score rule above; each expert title keeps its best-scoring
    candidate (ties: smaller edit distance, then lexicographic). Expert
    titles are processed in descending best-score order, claiming model
    titles greedily, which makes the pairing deterministic and one-to-one.
    """
    simprov = as_similarity(provider)
    expert_norm = sorted({normalize_title(t) for t in expert_titles} - {""})
    model_norm = sorted({normalize_title(t) for t in model_titles} - {""})

    candidates: dict[str, list[tuple[float, int, str, str]]] = {}
    for e in expert_norm:
        ranked = []
        for m in model_norm:
            score = 1.0 if e == m else simprov.sim(e, m)
            if score > 1.0 - 1e-9:  # absorb float noise in the exact-match branch
                score = 1.0
            if _admissible(score, e, m, threshold):
                ranked.append((-score, _levenshtein(e, m), m, e))
        if ranked:
            ranked.sort()
            candidates[e] = [(-s, lev, m, e) for s, lev, m, e in ranked]

    order = sorted(
        candidates, key=lambda e: (-candidates[e][0][0], e)
    )  # best score first, then title
    claimed: set[str] = set()
    pairs: list[AlignedPair] = []
    for e in order:
        for score, _lev, m, _e in candidates[e]:
            if m not in claimed:
                claimed.add(m)
                pairs.append(AlignedPair(expert=e, model=m, score=score))
                break

    matched_expert = {p.expert for p in pairs}
    return AlignmentSet(
        pairs=tuple(sorted(pairs, key=lambda p: p.expert)),
        unmatched_expert=tuple(t for t in expert_norm if t not in matched_expert),
        unmatched_model=tuple(t for t in model_norm if t not in claimed),
    )


def retrieval_scores(
    alignment: AlignmentSet, n_expert: int, n_model: int
) -> RetrievalScores:
    """Recall, precision and F1 from aligned-pair counts.

    A zero denominator makes the corresponding score undefined (None) so
    macro-averaging can exclude it rather than silently reading it as 0;
    F1 is 0 when both components exist but sum to zero.
    """
    matched = len(alignment.pairs)
    recall = matched / n_expert if n_expert > 0 else None
    precision = matched / n_model if n_model > 0 else None
    if recall is None or precision is None:
        f1 = None
    elif recall + precision == 0.0:
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return RetrievalScores(recall=recall, precision=precision, f1=f1)
