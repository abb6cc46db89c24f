"""Controlled taxonomy edits for validating metric behavior.

Each perturbation is a pure, deterministic transformation of a valid
taxonomy: sibling shuffles (must leave the tree distance at zero),
label-preserving subtree swaps (leave label-coverage baselines at their
maximum while structural metrics move), leaf splits (the over-segmentation
failure mode), node contraction (granularity coarsening), and relabeling.
Targets are addressed by their root-inclusive label path.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .alignment import normalize_title
from .tree import CategoryNode, Taxonomy

__all__ = [
    "PerturbationError",
    "Perturbation",
    "shuffle_siblings",
    "rewire_swap",
    "split_leaf",
    "contract_node",
    "relabel",
    "apply_perturbation",
    "PERTURBATION_KINDS",
]


class PerturbationError(ValueError):
    """Invalid perturbation target or parameters."""


def _resolve(root: CategoryNode, path: Sequence[str]) -> tuple[CategoryNode, ...]:
    """Nodes from the root to the target addressed by a label path."""
    if not path:
        raise PerturbationError("empty target path")
    if path[0] != root.label:
        raise PerturbationError(f"path must start at the root {root.label!r}, got {path[0]!r}")
    chain = [root]
    for label in path[1:]:
        matches = [c for c in chain[-1].children if c.label == label]
        if not matches:
            raise PerturbationError(f"no child {label!r} under {chain[-1].label!r}")
        if len(matches) > 1:
            raise PerturbationError(f"ambiguous child {label!r} under {chain[-1].label!r}")
        chain.append(matches[0])
    return tuple(chain)


def _rebuild(
    chain: tuple[CategoryNode, ...], replacement: CategoryNode | None
) -> CategoryNode:
    """Replace the node at the end of ``chain`` (None splices its children
    into the parent) and rebuild the ancestors."""
    node = replacement
    for parent, old_child in zip(reversed(chain[:-1]), reversed(chain)):
        children = []
        for c in parent.children:
            if c is old_child:
                if node is not None:
                    children.append(node)
                else:
                    children.extend(old_child.children)
            else:
                children.append(c)
        node = CategoryNode(label=parent.label, children=tuple(children), papers=parent.papers)
    assert node is not None
    return node


def _with_tree(t: Taxonomy, root: CategoryNode) -> Taxonomy:
    return Taxonomy(root=root, survey_id=t.survey_id, warnings=t.warnings)


def shuffle_siblings(t: Taxonomy, seed: int) -> Taxonomy:
    """Permute every children list with a seeded generator. Edges, labels
    and paper placements are untouched; structural metrics must not move."""
    rng = random.Random(seed)

    def shuffle(node: CategoryNode) -> CategoryNode:
        children = [shuffle(c) for c in node.children]
        rng.shuffle(children)
        return CategoryNode(label=node.label, children=tuple(children), papers=node.papers)

    return _with_tree(t, shuffle(t.root))


def rewire_swap(t: Taxonomy, path_a: Sequence[str], path_b: Sequence[str]) -> Taxonomy:
    """Exchange the parents of two subtrees; the label multiset is
    preserved. The targets must not be ancestors of each other."""
    chain_a = _resolve(t.root, path_a)
    chain_b = _resolve(t.root, path_b)
    node_a, node_b = chain_a[-1], chain_b[-1]
    if node_a is node_b:
        return t
    # ancestor checks must use identity: value equality would conflate
    # structurally identical subtrees at different positions
    if any(x is node_a for x in chain_b) or any(x is node_b for x in chain_a):
        raise PerturbationError("cannot swap a node with its own ancestor")

    def swap(node: CategoryNode) -> CategoryNode:
        if node is node_a:
            return node_b
        if node is node_b:
            return node_a
        return CategoryNode(
            label=node.label,
            children=tuple(swap(c) for c in node.children),
            papers=node.papers,
        )

    return _with_tree(t, swap(t.root))


def split_leaf(t: Taxonomy, leaf_path: Sequence[str], parts: int) -> Taxonomy:
    """Fragment a terminal node: its papers are dealt round-robin (in
    normalized-title order) into ``parts`` new children named
    '<label> / part i', and the node becomes internal."""
    if parts < 2:
        raise PerturbationError("parts must be at least 2")
    chain = _resolve(t.root, leaf_path)
    target = chain[-1]
    if not target.is_terminal:
        raise PerturbationError(f"{target.label!r} is not a terminal node")
    if len(target.papers) < parts:
        raise PerturbationError(
            f"{target.label!r} holds {len(target.papers)} papers, fewer than {parts}"
        )
    ordered = sorted(target.papers, key=normalize_title)
    buckets: list[list[str]] = [[] for _ in range(parts)]
    for i, title in enumerate(ordered):
        buckets[i % parts].append(title)
    children = tuple(
        CategoryNode(label=f"{target.label} / part {i + 1}", papers=tuple(bucket))
        for i, bucket in enumerate(buckets)
    )
    return _with_tree(t, _rebuild(chain, CategoryNode(label=target.label, children=children)))


def contract_node(t: Taxonomy, path: Sequence[str]) -> Taxonomy:
    """Remove an internal non-root node, attaching its children to its
    parent. Affected ancestor chains shorten by exactly one label."""
    chain = _resolve(t.root, path)
    target = chain[-1]
    if len(chain) == 1:
        raise PerturbationError("cannot contract the root")
    if target.is_terminal:
        raise PerturbationError(f"{target.label!r} is terminal; nothing to contract")
    return _with_tree(t, _rebuild(chain, None))


def relabel(t: Taxonomy, path: Sequence[str], new_label: str) -> Taxonomy:
    """Rename one node; the label must stay non-empty."""
    label = " ".join(new_label.split())
    if not label:
        raise PerturbationError("new label is empty")
    chain = _resolve(t.root, path)
    target = chain[-1]
    replacement = CategoryNode(label=label, children=target.children, papers=target.papers)
    if len(chain) == 1:
        return _with_tree(t, replacement)
    return _with_tree(t, _rebuild(chain, replacement))


PERTURBATION_KINDS = (
    "sibling-shuffle",
    "rewire-swap",
    "split-leaf",
    "contract-node",
    "relabel",
)


@dataclass(frozen=True)
class Perturbation:
    """A perturbation request: kind plus its kind-specific parameters."""

    kind: str
    seed: int = 0
    path: tuple[str, ...] = ()
    path_b: tuple[str, ...] = ()
    parts: int = 2
    new_label: str = ""
    extra: dict = field(default_factory=dict)


def apply_perturbation(t: Taxonomy, spec: Perturbation) -> Taxonomy:
    if spec.kind == "sibling-shuffle":
        return shuffle_siblings(t, spec.seed)
    if spec.kind == "rewire-swap":
        return rewire_swap(t, spec.path, spec.path_b)
    if spec.kind == "split-leaf":
        return split_leaf(t, spec.path, spec.parts)
    if spec.kind == "contract-node":
        return contract_node(t, spec.path)
    if spec.kind == "relabel":
        return relabel(t, spec.path, spec.new_label)
    raise PerturbationError(f"unknown perturbation kind {spec.kind!r}")
