"""Seeded random generators for trees, taxonomies, and partitions."""
from __future__ import annotations

import random

from taxoeval.tree import CategoryNode, Taxonomy

_WORDS = (
    "agents", "alignment", "attention", "benchmarks", "code", "decoding",
    "distillation", "embeddings", "evaluation", "graphs", "inference",
    "memory", "multimodal", "planning", "pretraining", "prompting",
    "reasoning", "retrieval", "safety", "scaling", "tools", "tuning",
)


def random_label(rng: random.Random, index: int) -> str:
    # a unique token plus a shared vocabulary word: distinct labels stay
    # distinguishable while some token overlap keeps similarities varied
    return f"t{index} {rng.choice(_WORDS)}"


def random_tree(rng: random.Random, n_nodes: int, label_offset: int = 0) -> CategoryNode:
    """Random rooted tree with distinct labels, built by attaching each new
    node to a uniformly chosen existing parent."""
    assert n_nodes >= 1
    children: list[list[int]] = [[] for _ in range(n_nodes)]
    for i in range(1, n_nodes):
        children[rng.randrange(i)].append(i)

    def build(i: int) -> CategoryNode:
        return CategoryNode(
            label=random_label(rng, label_offset + i),
            children=tuple(build(c) for c in children[i]),
        )

    return build(0)


def random_taxonomy(rng: random.Random, n_nodes: int, n_papers: int) -> Taxonomy:
    """Random taxonomy: a random tree with papers spread over its leaves."""
    root = random_tree(rng, n_nodes)
    leaves: list[CategoryNode] = []

    def find_leaves(node: CategoryNode):
        if node.is_terminal:
            leaves.append(node)
        for c in node.children:
            find_leaves(c)

    find_leaves(root)
    placements: dict[int, list[str]] = {}
    for p in range(n_papers):
        leaf = rng.randrange(len(leaves))
        placements.setdefault(leaf, []).append(f"paper {p} on {rng.choice(_WORDS)}")

    def attach(node: CategoryNode) -> CategoryNode:
        if node.is_terminal:
            index = next(i for i, leaf in enumerate(leaves) if leaf is node)
            return CategoryNode(
                label=node.label, papers=tuple(placements.get(index, ()))
            )
        return CategoryNode(
            label=node.label, children=tuple(attach(c) for c in node.children)
        )

    return Taxonomy(root=attach(root), survey_id="random")


def random_partition(rng: random.Random, n_items: int, max_clusters: int) -> list[str]:
    k = rng.randint(1, max_clusters)
    return [f"c{rng.randrange(k)}" for _ in range(n_items)]


def swappable_pairs(root: CategoryNode) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """All (path_a, path_b) pairs with different parents, neither node an
    ancestor of the other; suitable targets for a label-preserving rewire."""
    paths: list[tuple[tuple[str, ...], tuple[str, ...]]] = []  # (labels, parent labels)

    def collect(node: CategoryNode, path: tuple[str, ...]):
        for c in node.children:
            child_path = path + (c.label,)
            paths.append((child_path, path))
            collect(c, child_path)

    collect(root, (root.label,))
    result = []
    for i in range(len(paths)):
        for j in range(i + 1, len(paths)):
            (pa, parent_a), (pb, parent_b) = paths[i], paths[j]
            if parent_a == parent_b:
                continue  # same-parent swaps change nothing structurally
            if pa == pb[: len(pa)] or pb == pa[: len(pb)]:
                continue  # ancestor/descendant
            result.append((pa, pb))
    return result
