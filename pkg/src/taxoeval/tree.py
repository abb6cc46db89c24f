"""Taxonomy trees: parsing, validation, and the derived evaluation views.

The benchmark JSON shape is a rooted tree of ``{"name": ...}`` objects
where internal nodes carry ``"subtopics"`` and terminal nodes carry
``"papers"`` (a list of title strings). Expert ground truth may instead be
a directory tree: folders are categories, file stems are paper titles.

From a parsed taxonomy three views feed the metrics:
  * the category hierarchy (papers stripped) for structural comparison,
  * the paper-to-category assignment for partition agreement,
  * root-to-paper ancestor label chains for path consistency.

Parsed structures are immutable, so they are safe to share across worker
threads.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

from .alignment import normalize_title

__all__ = [
    "UNRETRIEVED",
    "ValidationIssue",
    "TaxonomyError",
    "CategoryNode",
    "Taxonomy",
    "CategoryHierarchy",
    "PaperAssignment",
    "parse_taxonomy",
    "diagnose",
    "load_taxonomy",
    "read_taxonomy_dir",
    "hierarchy_of",
    "assignment_of",
    "ancestor_paths",
    "subtree_size",
    "paper_titles",
    "node_to_json",
    "taxonomy_to_json",
    "walk",
]

# Category label assigned to expert papers the model failed to retrieve in
# end-to-end scoring. Deliberately outside the plausible label space.
UNRETRIEVED = "__unretrieved__"

_KNOWN_KEYS = {"name", "subtopics", "papers"}


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.path}: {self.message}"


class TaxonomyError(ValueError):
    """Validation failure; carries one issue per violation."""

    def __init__(self, issues: list[ValidationIssue]):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues) or "invalid taxonomy")


@dataclass(frozen=True)
class CategoryNode:
    label: str
    children: tuple["CategoryNode", ...] = ()
    papers: tuple[str, ...] = ()

    @property
    def is_terminal(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class Taxonomy:
    root: CategoryNode
    survey_id: str = ""
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class CategoryHierarchy:
    """The paper-free category tree; input to the structural metrics."""

    root: CategoryNode

    def node_count(self) -> int:
        return subtree_size(self.root)


@dataclass(frozen=True)
class PaperAssignment:
    """Map from paper id (normalized title) to the id of its category."""

    entries: Mapping[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, paper_id: str) -> str:
        return self.entries[paper_id]

    def restrict(self, universe) -> "PaperAssignment":
        return PaperAssignment({p: self.entries[p] for p in universe})


# ---------------------------------------------------------------------------
# Parsing and validation


class _Builder:
    """Shared JSON-shape validator/builder.

    ``strict`` rejects with the full issue list, ``lenient`` applies the
    documented repairs and records warnings, ``diagnose`` never raises and
    reports every violation it can reach.
    """

    def __init__(self, mode: str, survey_id: str):
        if mode not in ("strict", "lenient", "diagnose"):
            raise ValueError(f"unknown parse mode: {mode!r}")
        self.mode = mode
        self.survey_id = survey_id
        self.issues: list[ValidationIssue] = []
        self.fatal: list[ValidationIssue] = []  # not repairable in lenient mode
        self.warnings: list[str] = []
        self.seen_papers: dict[str, str] = {}  # normalized title -> first path

    def issue(self, code: str, path: str, message: str, repaired: bool = False):
        entry = ValidationIssue(code, path, message)
        self.issues.append(entry)
        if not repaired:
            self.fatal.append(entry)
        elif self.mode == "lenient":
            self.warnings.append(str(entry))

    def build(self, obj, path: str) -> CategoryNode | None:
        if not isinstance(obj, dict):
            self.issue("malformed-node", path, f"expected an object, got {type(obj).__name__}")
            return None

        for key in sorted(set(obj) - _KNOWN_KEYS):
            self.warnings.append(f"ignored-field at {path}: unknown field {key!r}")

        name = obj.get("name")
        if not isinstance(name, str):
            self.issue("missing-name", path, "node has no string 'name'")
            return None
        label = " ".join(name.split())
        if not label:
            # empty labels are rejected in every mode: they cannot be embedded
            self.issue("empty-label", path, "node label is empty")
            return None

        has_subtopics = "subtopics" in obj
        has_papers = "papers" in obj
        papers = self._paper_list(obj.get("papers"), path) if has_papers else []

        if has_subtopics and has_papers:
            if papers:
                self.issue(
                    "dual-role",
                    path,
                    f"node {label!r} has both subtopics and papers; "
                    f"papers moved under synthetic child {label + ' (misc)'!r}",
                    repaired=True,
                )
            else:
                self.issue(
                    "dual-role", path, f"node {label!r} has both subtopics and papers",
                    repaired=True,
                )

        if has_subtopics:
            subtopics = obj.get("subtopics")
            if not isinstance(subtopics, list):
                self.issue("malformed-node", path, "'subtopics' is not an array")
                return None
            children = []
            for i, child_obj in enumerate(subtopics):
                child = self.build(child_obj, f"{path}/subtopics/{i}")
                if child is not None:
                    children.append(child)
            if has_papers and papers:
                children.append(self._misc_child(label, papers, path))
            if not children:
                self.issue(
                    "empty-internal",
                    path,
                    f"internal node {label!r} has no children; treated as terminal",
                    repaired=True,
                )
                return CategoryNode(label=label, papers=())
            return CategoryNode(label=label, children=tuple(children))

        if has_papers:
            return CategoryNode(label=label, papers=tuple(papers))

        self.issue(
            "no-role",
            path,
            f"node {label!r} has neither subtopics nor papers; treated as terminal",
            repaired=True,
        )
        return CategoryNode(label=label, papers=())

    def _misc_child(self, label: str, papers: list[str], path: str) -> CategoryNode:
        return CategoryNode(label=f"{label} (misc)", papers=tuple(papers))

    def _paper_list(self, raw, path: str) -> list[str]:
        if not isinstance(raw, list):
            self.issue("malformed-node", path, "'papers' is not an array")
            return []
        papers = []
        for i, title in enumerate(raw):
            where = f"{path}/papers/{i}"
            if not isinstance(title, str):
                self.issue("malformed-node", where, "paper title is not a string")
                continue
            normalized = normalize_title(title)
            if not normalized:
                self.issue(
                    "empty-paper-title", where, "paper title is empty; dropped",
                    repaired=True,
                )
                continue
            first = self.seen_papers.get(normalized)
            if first is not None:
                self.issue(
                    "duplicate-paper",
                    where,
                    f"paper {title!r} already appears at {first}; "
                    "first preorder occurrence kept",
                    repaired=True,
                )
                continue
            self.seen_papers[normalized] = where
            papers.append(title)
        return papers

    def root_from(self, data) -> CategoryNode | None:
        if isinstance(data, list):
            label = self.survey_id or "survey"
            self.issue(
                "multiple-roots",
                "/",
                f"top-level array wrapped under synthetic root {label!r}",
                repaired=True,
            )
            return self.build({"name": label, "subtopics": data}, "/")
        return self.build(data, "/")

    def finish(self, root: CategoryNode | None) -> Taxonomy:
        if self.mode == "strict" and self.issues:
            raise TaxonomyError(self.issues)
        if self.mode == "lenient" and self.fatal:
            raise TaxonomyError(self.fatal)
        if root is None:
            raise TaxonomyError(
                self.issues or [ValidationIssue("malformed-node", "/", "no usable root")]
            )
        return Taxonomy(
            root=root, survey_id=self.survey_id, warnings=tuple(self.warnings)
        )


def parse_taxonomy(json_text: str, mode: str = "strict", survey_id: str = "") -> Taxonomy:
    """Parse and validate a taxonomy document.

    In strict mode any violation raises :class:`TaxonomyError` naming the
    offending path. In lenient mode repairable violations (duplicate
    papers, multiple roots, dual-role nodes, role-less nodes) are repaired
    deterministically and surface as ``Taxonomy.warnings``.
    """
    try:
        data = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise TaxonomyError(
            [ValidationIssue("malformed-json", f"offset {exc.pos}", exc.msg)]
        ) from exc
    builder = _Builder(mode, survey_id)
    return builder.finish(builder.root_from(data))


def diagnose(json_text: str, survey_id: str = "") -> list[ValidationIssue]:
    """All strict-mode violations in a document, without modifying it."""
    try:
        data = json.loads(json_text)
    except json.JSONDecodeError as exc:
        return [ValidationIssue("malformed-json", f"offset {exc.pos}", exc.msg)]
    builder = _Builder("diagnose", survey_id)
    builder.root_from(data)
    return builder.issues


def read_taxonomy_dir(path, mode: str = "strict", survey_id: str | None = None) -> Taxonomy:
    """Read the directory representation: folders are categories, file
    stems are paper titles. Entries are processed in sorted order so the
    result is independent of filesystem enumeration order."""
    root_dir = Path(path)
    if not root_dir.is_dir():
        raise TaxonomyError(
            [ValidationIssue("not-a-directory", str(root_dir), "expected a directory")]
        )

    def convert(directory: Path) -> dict:
        node: dict = {"name": directory.name}
        subdirs, files = [], []
        for entry in sorted(directory.iterdir(), key=lambda p: p.name):
            if entry.name.startswith("."):
                continue
            (subdirs if entry.is_dir() else files).append(entry)
        if subdirs:
            node["subtopics"] = [convert(d) for d in subdirs]
        if files or not subdirs:
            node["papers"] = [f.stem for f in files]
        return node

    builder = _Builder(mode, survey_id if survey_id is not None else root_dir.name)
    return builder.finish(builder.build(convert(root_dir), "/"))


def load_taxonomy(path, mode: str = "strict", survey_id: str | None = None) -> Taxonomy:
    """Load a taxonomy from a JSON file or from a directory tree."""
    p = Path(path)
    if p.is_dir():
        return read_taxonomy_dir(p, mode=mode, survey_id=survey_id)
    text = p.read_text(encoding="utf-8")
    return parse_taxonomy(
        text, mode=mode, survey_id=survey_id if survey_id is not None else p.stem
    )


# ---------------------------------------------------------------------------
# Derived views


def walk(root: CategoryNode) -> Iterator[tuple[CategoryNode, tuple[str, ...], tuple[int, ...]]]:
    """Preorder traversal yielding (node, label path, child-index path)."""
    stack = [(root, (root.label,), ())]
    while stack:
        node, labels, index = stack.pop()
        yield node, labels, index
        for i in range(len(node.children) - 1, -1, -1):
            child = node.children[i]
            stack.append((child, labels + (child.label,), index + (i,)))


def _root_of(t) -> CategoryNode:
    if isinstance(t, CategoryNode):
        return t
    return t.root


def subtree_size(n: CategoryNode) -> int:
    """Number of category nodes in n's subtree, n included."""
    return 1 + sum(subtree_size(c) for c in n.children)


def hierarchy_of(t) -> CategoryHierarchy:
    """Strip papers from every node, keeping topology and labels."""

    def strip(node: CategoryNode) -> CategoryNode:
        return CategoryNode(label=node.label, children=tuple(strip(c) for c in node.children))

    return CategoryHierarchy(root=strip(_root_of(t)))


def _terminal_category_ids(root: CategoryNode) -> dict[tuple[int, ...], str]:
    """Stable ids for terminal nodes: the label path, suffixed with an
    occurrence counter when several terminals share one label path."""
    paths = [
        (labels, index)
        for node, labels, index in walk(root)
        if node.is_terminal
    ]
    counts: dict[tuple[str, ...], int] = {}
    for labels, _ in paths:
        counts[labels] = counts.get(labels, 0) + 1
    ids: dict[tuple[int, ...], str] = {}
    seen: dict[tuple[str, ...], int] = {}
    for labels, index in paths:
        base = " / ".join(labels)
        if counts[labels] > 1:
            seen[labels] = seen.get(labels, 0) + 1
            ids[index] = f"{base} #{seen[labels]}"
        else:
            ids[index] = base
    return ids


def assignment_of(t) -> PaperAssignment:
    """One entry per distinct paper, mapped to its terminal category id."""
    root = _root_of(t)
    ids = _terminal_category_ids(root)
    entries: dict[str, str] = {}
    for node, _labels, index in walk(root):
        if node.is_terminal:
            for title in node.papers:
                entries.setdefault(normalize_title(title), ids[index])
    return PaperAssignment(entries=entries)


def ancestor_paths(t, paper_title: str) -> list[tuple[str, ...]]:
    """Root-to-paper label chains with the paper node removed, one per
    occurrence of the title; empty when the paper is absent."""
    target = normalize_title(paper_title)
    if not target:
        return []
    found = []
    for node, labels, _index in walk(_root_of(t)):
        if node.is_terminal and any(normalize_title(p) == target for p in node.papers):
            found.append(labels)
    return found


def paper_titles(t) -> list[str]:
    """Raw paper titles in preorder."""
    return [title for node, _, _ in walk(_root_of(t)) for title in node.papers]


# ---------------------------------------------------------------------------
# Serialization


def node_to_json(node: CategoryNode) -> dict:
    if node.children:
        return {"name": node.label, "subtopics": [node_to_json(c) for c in node.children]}
    return {"name": node.label, "papers": list(node.papers)}


def taxonomy_to_json(t: Taxonomy | CategoryHierarchy) -> dict:
    return node_to_json(_root_of(t))
