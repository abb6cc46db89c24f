"""Command-line interface: evaluate taxonomy pairs, perturb a taxonomy,
validate a document, or serve the HTTP API.

Exit codes: 0 success, 2 partial (some surveys errored), 1 fatal.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .embedding import ENDPOINT_ENV_VAR
from .harness import EvaluationConfig, evaluate, write_report
from .perturb import PERTURBATION_KINDS, Perturbation, PerturbationError, apply_perturbation
from .tree import TaxonomyError, diagnose, load_taxonomy, taxonomy_to_json


@click.group()
def main():
    """Score model-generated survey taxonomies against expert references."""


def _parse_path(value: str | None) -> tuple[str, ...]:
    return tuple(p for p in value.split("/")) if value else ()


@main.command("evaluate")
@click.option("--mode", type=click.Choice(["bottom-up", "deep-research"]), required=True)
@click.option("--expert", "expert_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--model", "model_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--encoder", type=click.Choice(["test", "remote"]), default="test", show_default=True)
@click.option("--endpoint", default=None, envvar=ENDPOINT_ENV_VAR,
              help=f"Remote encoder URL (falls back to ${ENDPOINT_ENV_VAR}).")
@click.option("--encoder-id", default=None, help="Remote encoder model id.")
@click.option("--lambda", "penalty", type=float, default=1.0, show_default=True,
              help="Penalty per unmatched extra ancestor in path alignment.")
@click.option("--threshold", type=float, default=0.6, show_default=True,
              help="Minimum title similarity for containment-based alignment.")
@click.option("--parse", "parse_mode", type=click.Choice(["strict", "lenient"]),
              default="lenient", show_default=True)
@click.option("--workers", type=int, default=4, show_default=True)
@click.option("--embedding-cache", type=click.Path(path_type=Path), default=None,
              help="Persistent embedding cache file.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.option("--csv", "csv_path", type=click.Path(path_type=Path), default=None)
def evaluate_cmd(mode, expert_path, model_path, encoder, endpoint, encoder_id,
                 penalty, threshold, parse_mode, workers, embedding_cache,
                 out_path, csv_path):
    """Evaluate every expert/model survey pair and write a report."""
    kwargs = dict(
        mode=mode,
        expert_path=expert_path,
        model_path=model_path,
        encoder=encoder,
        endpoint=endpoint,
        penalty=penalty,
        alignment_threshold=threshold,
        parse_mode=parse_mode,
        cache_path=embedding_cache,
        workers=workers,
    )
    if encoder_id is not None:
        kwargs["encoder_id"] = encoder_id
    try:
        config = EvaluationConfig(**kwargs)
        report = evaluate(config)
    except (ValueError, FileNotFoundError) as exc:
        raise click.ClickException(str(exc))
    write_report(report, out_path, csv_path)
    n_ok = len(report.per_survey)
    n_err = len(report.errors)
    click.echo(f"evaluated {n_ok} survey(s), {n_err} error(s) -> {out_path}")
    if report.incomplete:
        click.echo("run incomplete: encoder failure; report flagged", err=True)
        sys.exit(1)
    if n_err:
        for survey, message in report.errors.items():
            click.echo(f"  {survey}: {message}", err=True)
        sys.exit(2)


@main.command("perturb")
@click.option("--in", "in_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--kind", type=click.Choice(PERTURBATION_KINDS), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--path", "target", default=None,
              help="Target node as a root-inclusive label path, e.g. 'Root/Topic/Leaf'.")
@click.option("--path-b", default=None, help="Second target for rewire-swap.")
@click.option("--parts", type=int, default=2, show_default=True, help="Children for split-leaf.")
@click.option("--new-label", default=None, help="Replacement label for relabel.")
@click.option("--parse", "parse_mode", type=click.Choice(["strict", "lenient"]),
              default="strict", show_default=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
def perturb_cmd(in_path, kind, seed, target, path_b, parts, new_label, parse_mode, out_path):
    """Apply one controlled edit to a taxonomy and write the result."""
    try:
        taxonomy = load_taxonomy(in_path, mode=parse_mode)
        spec = Perturbation(
            kind=kind,
            seed=seed,
            path=_parse_path(target),
            path_b=_parse_path(path_b),
            parts=parts,
            new_label=new_label or "",
        )
        result = apply_perturbation(taxonomy, spec)
    except (TaxonomyError, PerturbationError) as exc:
        raise click.ClickException(str(exc))
    payload = json.dumps(taxonomy_to_json(result), indent=2, ensure_ascii=False) + "\n"
    Path(out_path).write_text(payload, encoding="utf-8")
    click.echo(f"{kind} applied -> {out_path}")


@main.command("validate")
@click.option("--in", "in_path", type=click.Path(exists=True, path_type=Path), required=True)
def validate_cmd(in_path):
    """List every constraint violation in a taxonomy document."""
    path = Path(in_path)
    if path.is_dir():
        # directory-format taxonomies validate through the reader
        try:
            load_taxonomy(path, mode="strict")
            issues = []
        except TaxonomyError as exc:
            issues = exc.issues
    else:
        issues = diagnose(path.read_text(encoding="utf-8"), survey_id=path.stem)
    for issue in issues:
        click.echo(str(issue))
    if issues:
        sys.exit(1)
    click.echo("ok")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--encoder", type=click.Choice(["test", "remote"]), default="test", show_default=True)
@click.option("--endpoint", default=None, envvar=ENDPOINT_ENV_VAR)
@click.option("--encoder-id", default=None)
def serve_cmd(host, port, encoder, endpoint, encoder_id):
    """Run the evaluation HTTP service."""
    import uvicorn

    from .service.app import create_app

    app = create_app(encoder=encoder, endpoint=endpoint, encoder_id=encoder_id)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
