"""Batch evaluation driver: pair expert/model taxonomies, score, aggregate.

Surveys pair by identical relative name under the expert and model roots.
A survey is either a ``<id>.json`` file or a directory-format taxonomy (a
top-level folder containing no JSON files). Each pair is scored with every
applicable metric for the chosen mode; per-survey failures become error
entries and the run continues, while an encoder transport failure aborts
with the partial report flagged incomplete.

Undefined metric values are reported as JSON null, never 0; macro averages
are taken over the non-null entries and the report records how many
surveys were excluded per metric.
"""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .alignment import align, normalize_title, retrieval_scores
from .embedding import (
    DEFAULT_REMOTE_MODEL,
    EmbeddingCache,
    EmbeddingSimilarity,
    HashEncoder,
    RemoteEncoder,
    TransportError,
)
from .hierarchy import path_consistency, unordered_tree_distance
from .partition import (
    adjusted_rand_index,
    contingency,
    extend_e2e,
    homogeneity_completeness_v,
    restrict_to_intersection,
)
from .softcard import collect_labels, soft_recall_precision_f1
from .tree import (
    Taxonomy,
    assignment_of,
    hierarchy_of,
    load_taxonomy,
    paper_titles,
)

__all__ = [
    "EvaluationConfig",
    "MetricReport",
    "SCHEMA_VERSION",
    "build_similarity",
    "evaluate_pair",
    "evaluate",
    "discover_surveys",
    "report_to_json",
    "report_to_csv",
]

SCHEMA_VERSION = 1

MODES = ("bottom-up", "deep-research")

# Report column order; retrieval and intersection-restricted families only
# exist in deep-research mode.
_FIELDS_DEEP = (
    "recall", "precision", "f1",
    "ari", "ari_cap", "hom", "comp", "v", "v_cap",
    "us_ted", "us_nted_pct", "sem_path",
    "nsr", "nsp", "soft_f1",
    "n_expert_papers", "n_model_papers", "n_aligned",
)
_FIELDS_BOTTOM_UP = tuple(
    f for f in _FIELDS_DEEP if f not in ("recall", "precision", "f1", "ari_cap", "v_cap")
)

_NOTES = (
    "nsr/nsp/soft_f1 are auxiliary label-coverage diagnostics, not structural scores",
    "paper alignment uses normalized titles only",
    "ari/v and friends are raw fractions in [0, 1]; us_nted_pct is scaled by 100",
)


@dataclass
class EvaluationConfig:
    mode: str
    expert_path: Path
    model_path: Path
    encoder: str = "test"  # "test" | "remote"
    encoder_id: str = DEFAULT_REMOTE_MODEL
    endpoint: str | None = None
    penalty: float = 1.0  # per extra ancestor node in path alignment
    alignment_threshold: float = 0.6
    parse_mode: str = "lenient"
    cache_path: Path | None = None
    workers: int = 4

    def __post_init__(self):
        self.expert_path = Path(self.expert_path)
        self.model_path = Path(self.model_path)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.encoder not in ("test", "remote"):
            raise ValueError(f"encoder must be 'test' or 'remote', got {self.encoder!r}")
        if not (0.0 < self.alignment_threshold <= 1.0):
            raise ValueError("alignment threshold must be in (0, 1]")
        if self.penalty < 0.0:
            raise ValueError("penalty must be non-negative")
        if self.parse_mode not in ("strict", "lenient"):
            raise ValueError(f"parse mode must be strict or lenient, got {self.parse_mode!r}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def snapshot(self) -> dict:
        return {
            "mode": self.mode,
            "expert_path": str(self.expert_path),
            "model_path": str(self.model_path),
            "encoder": self.encoder,
            "encoder_id": self.encoder_id if self.encoder == "remote" else None,
            "endpoint": self.endpoint,
            "lambda": self.penalty,
            "alignment_threshold": self.alignment_threshold,
            "parse_mode": self.parse_mode,
            "notes": list(_NOTES),
        }


@dataclass
class MetricReport:
    mode: str
    config: dict
    per_survey: dict[str, dict] = field(default_factory=dict)
    macro: dict[str, float | None] = field(default_factory=dict)
    excluded: dict[str, int] = field(default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)
    incomplete: bool = False

    def as_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "mode": self.mode,
            "incomplete": self.incomplete,
            "config": self.config,
            "per_survey": self.per_survey,
            "macro": {"values": self.macro, "excluded_null_counts": self.excluded},
            "errors": self.errors,
        }


def build_similarity(config: EvaluationConfig) -> EmbeddingSimilarity:
    cache = EmbeddingCache(config.cache_path)
    if config.encoder == "test":
        return EmbeddingSimilarity(HashEncoder(), cache)
    encoder = RemoteEncoder(endpoint=config.endpoint, model=config.encoder_id)
    return EmbeddingSimilarity(encoder, cache)


def evaluate_pair(
    expert: Taxonomy,
    model: Taxonomy,
    mode: str,
    provider,
    penalty: float = 1.0,
    threshold: float = 0.6,
) -> dict:
    """Score one expert/model taxonomy pair; returns the per-survey report
    entry (metric fields in a fixed order, then accumulated warnings)."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    warnings = list(expert.warnings) + list(model.warnings)

    expert_titles = paper_titles(expert)
    model_titles = paper_titles(model)
    universe_star = {normalize_title(t) for t in expert_titles} - {""}
    universe_hat = {normalize_title(t) for t in model_titles} - {""}

    if hasattr(provider, "warm"):
        h_labels = collect_labels(hierarchy_of(expert)) + collect_labels(hierarchy_of(model))
        provider.warm(h_labels + sorted(universe_star | universe_hat))

    alignment = align(expert_titles, model_titles, provider, threshold=threshold)
    u_star = assignment_of(expert)
    u_hat = assignment_of(model)
    h_star = hierarchy_of(expert)
    h_hat = hierarchy_of(model)

    metrics: dict = {}

    if mode == "deep-research":
        scores = retrieval_scores(alignment, len(universe_star), len(universe_hat))
        metrics["recall"] = scores.recall
        metrics["precision"] = scores.precision
        metrics["f1"] = scores.f1

        star_r, hat_r, intersection = restrict_to_intersection(u_star, u_hat, alignment)
        if intersection:
            table = contingency(star_r, hat_r, intersection)
            metrics["ari_cap"] = adjusted_rand_index(table)
            _, _, v_cap = homogeneity_completeness_v(table)
            metrics["v_cap"] = v_cap
        else:
            metrics["ari_cap"] = None
            metrics["v_cap"] = None
            warnings.append("empty aligned intersection; intersection metrics undefined")

        if universe_star:
            u_e2e = extend_e2e(u_hat, alignment, universe_star)
            table = contingency(u_star, u_e2e, universe_star)
            metrics["ari"] = adjusted_rand_index(table)
            hom, comp, v = homogeneity_completeness_v(table)
            metrics["hom"], metrics["comp"], metrics["v"] = hom, comp, v
        else:
            metrics["ari"] = metrics["hom"] = metrics["comp"] = metrics["v"] = None
            warnings.append("expert taxonomy holds no papers; leaf metrics undefined")
    else:  # bottom-up: the paper universe is the expert set, no retrieval gate
        if alignment.unmatched_expert:
            warnings.append(
                "bottom-up run, but the model output covers only "
                f"{len(alignment.pairs)}/{len(universe_star)} expert papers"
            )
        if alignment.unmatched_model:
            warnings.append(
                f"bottom-up run, but the model output adds {len(alignment.unmatched_model)} "
                "papers outside the expert set"
            )
        star_r, hat_r, intersection = restrict_to_intersection(u_star, u_hat, alignment)
        if intersection:
            table = contingency(star_r, hat_r, intersection)
            metrics["ari"] = adjusted_rand_index(table)
            hom, comp, v = homogeneity_completeness_v(table)
            metrics["hom"], metrics["comp"], metrics["v"] = hom, comp, v
        else:
            metrics["ari"] = metrics["hom"] = metrics["comp"] = metrics["v"] = None
            warnings.append("no aligned papers; leaf metrics undefined")

    dist = unordered_tree_distance(h_star, h_hat, provider)
    metrics["us_ted"] = dist.distance
    metrics["us_nted_pct"] = dist.normalized * 100.0

    paths = path_consistency(expert, model, alignment, penalty=penalty, provider=provider)
    metrics["sem_path"] = paths.score
    if paths.score is None:
        warnings.append("no aligned papers; path consistency undefined")

    nsr, nsp, soft_f1 = soft_recall_precision_f1(
        collect_labels(h_star), collect_labels(h_hat), provider
    )
    metrics["nsr"], metrics["nsp"], metrics["soft_f1"] = nsr, nsp, soft_f1

    metrics["n_expert_papers"] = len(universe_star)
    metrics["n_model_papers"] = len(universe_hat)
    metrics["n_aligned"] = len(alignment.pairs)

    fields = _FIELDS_DEEP if mode == "deep-research" else _FIELDS_BOTTOM_UP
    entry = {name: metrics[name] for name in fields}
    entry["warnings"] = warnings
    return entry


def discover_surveys(root: Path) -> dict[str, Path]:
    """Map survey ids to their taxonomy sources under one root.

    JSON files anywhere below the root are surveys keyed by relative path
    without the suffix; a top-level directory containing no JSON files is
    read as a directory-format taxonomy keyed by its name.
    """
    root = Path(root)
    surveys: dict[str, Path] = {}
    for path in sorted(root.rglob("*.json")):
        if any(part.startswith(".") for part in path.relative_to(root).parts):
            continue
        surveys[str(path.relative_to(root).with_suffix(""))] = path
    for path in sorted(p for p in root.iterdir() if p.is_dir()):
        if path.name.startswith("."):
            continue
        if not any(path.rglob("*.json")):
            surveys[path.name] = path
    return surveys


def evaluate(
    config: EvaluationConfig, provider: EmbeddingSimilarity | None = None
) -> MetricReport:
    """Run the full benchmark evaluation described by ``config``."""
    simprov = provider if provider is not None else build_similarity(config)
    report = MetricReport(mode=config.mode, config=config.snapshot())

    expert_surveys = discover_surveys(config.expert_path)
    model_surveys = discover_surveys(config.model_path)
    if not expert_surveys:
        raise FileNotFoundError(f"no surveys found under {config.expert_path}")

    for survey_id in sorted(set(model_surveys) - set(expert_surveys)):
        report.errors[survey_id] = "model taxonomy has no expert counterpart"
    jobs: list[tuple[str, Path, Path]] = []
    for survey_id in sorted(expert_surveys):
        if survey_id not in model_surveys:
            report.errors[survey_id] = "no model taxonomy for this survey"
            continue
        jobs.append((survey_id, expert_surveys[survey_id], model_surveys[survey_id]))

    def run(job: tuple[str, Path, Path]) -> tuple[str, dict | None, str | None]:
        survey_id, expert_path, model_path = job
        try:
            expert = load_taxonomy(expert_path, mode=config.parse_mode, survey_id=survey_id)
            model = load_taxonomy(model_path, mode=config.parse_mode, survey_id=survey_id)
            entry = evaluate_pair(
                expert,
                model,
                mode=config.mode,
                provider=simprov,
                penalty=config.penalty,
                threshold=config.alignment_threshold,
            )
            return survey_id, entry, None
        except TransportError:
            raise
        except Exception as exc:  # per-survey failure; the run continues
            return survey_id, None, f"{type(exc).__name__}: {exc}"

    results: dict[str, tuple[dict | None, str | None]] = {}
    try:
        with ThreadPoolExecutor(max_workers=min(config.workers, max(1, len(jobs)))) as pool:
            for survey_id, entry, error in pool.map(run, jobs):
                results[survey_id] = (entry, error)
    except TransportError as exc:
        report.incomplete = True
        report.errors["<run>"] = f"encoder transport failure: {exc}"

    for survey_id in sorted(results):
        entry, error = results[survey_id]
        if error is not None:
            report.errors[survey_id] = error
        elif entry is not None:
            report.per_survey[survey_id] = entry

    fields = _FIELDS_DEEP if config.mode == "deep-research" else _FIELDS_BOTTOM_UP
    for name in fields:
        values = [
            entry[name]
            for entry in report.per_survey.values()
            if entry.get(name) is not None
        ]
        nulls = sum(1 for entry in report.per_survey.values() if entry.get(name) is None)
        report.macro[name] = sum(values) / len(values) if values else None
        report.excluded[name] = nulls
    return report


def report_to_json(report: MetricReport) -> str:
    return json.dumps(report.as_dict(), indent=2, ensure_ascii=False, sort_keys=False) + "\n"


def report_to_csv(report: MetricReport) -> str:
    fields = _FIELDS_DEEP if report.mode == "deep-research" else _FIELDS_BOTTOM_UP
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["survey_id", *fields, "n_warnings"])

    def cell(value):
        return "" if value is None else value

    for survey_id in sorted(report.per_survey):
        entry = report.per_survey[survey_id]
        writer.writerow(
            [survey_id, *(cell(entry.get(f)) for f in fields), len(entry.get("warnings", []))]
        )
    writer.writerow(["macro", *(cell(report.macro.get(f)) for f in fields), ""])
    return buffer.getvalue()


def write_report(
    report: MetricReport, out_path: Path, csv_path: Path | None = None
) -> None:
    Path(out_path).write_text(report_to_json(report), encoding="utf-8")
    if csv_path is not None:
        Path(csv_path).write_text(report_to_csv(report), encoding="utf-8")
