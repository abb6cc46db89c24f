"""FastAPI wrapper around the core evaluation operations.

One long-running process serves many clients and keeps the embedding cache
warm across requests. Taxonomies arrive inline as JSON documents, so the
service stays stateless with respect to the filesystem; the batch CLI
remains the tool of choice for directory-sized runs.
"""
from __future__ import annotations

import json
import os

from fastapi import FastAPI, HTTPException

from ..embedding import EmbeddingCache, EmbeddingSimilarity, HashEncoder, RemoteEncoder
from ..harness import evaluate_pair
from ..perturb import Perturbation, PerturbationError, apply_perturbation
from ..tree import TaxonomyError, diagnose, parse_taxonomy, taxonomy_to_json
from .schemas import (
    EvaluatePairRequest,
    EvaluatePairResponse,
    HealthResponse,
    IssueModel,
    PerturbRequest,
    PerturbResponse,
    ValidateRequest,
    ValidateResponse,
)


def create_app(
    encoder: str = "test",
    endpoint: str | None = None,
    encoder_id: str | None = None,
    cache_path: str | None = None,
) -> FastAPI:
    if encoder == "remote":
        provider = RemoteEncoder(endpoint=endpoint, model=encoder_id) if encoder_id \
            else RemoteEncoder(endpoint=endpoint)
    else:
        provider = HashEncoder()
    similarity = EmbeddingSimilarity(provider, EmbeddingCache(cache_path))

    app = FastAPI(title="taxoeval", version="0.1.0")

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", encoder=similarity.identity)

    @app.post("/evaluate", response_model=EvaluatePairResponse)
    def evaluate_endpoint(request: EvaluatePairRequest) -> EvaluatePairResponse:
        try:
            expert = parse_taxonomy(
                json.dumps(request.expert), mode=request.parse_mode,
                survey_id=request.survey_id,
            )
            model = parse_taxonomy(
                json.dumps(request.model), mode=request.parse_mode,
                survey_id=request.survey_id,
            )
            entry = evaluate_pair(
                expert,
                model,
                mode=request.mode,
                provider=similarity,
                penalty=request.extra_node_penalty,
                threshold=request.alignment_threshold,
            )
        except (TaxonomyError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        warnings = entry.pop("warnings")
        return EvaluatePairResponse(
            survey_id=request.survey_id,
            mode=request.mode,
            metrics=entry,
            warnings=warnings,
        )

    @app.post("/perturb", response_model=PerturbResponse)
    def perturb_endpoint(request: PerturbRequest) -> PerturbResponse:
        try:
            request.validate_kind()
            taxonomy = parse_taxonomy(
                json.dumps(request.taxonomy), mode=request.parse_mode
            )
            result = apply_perturbation(
                taxonomy,
                Perturbation(
                    kind=request.kind,
                    seed=request.seed,
                    path=tuple(request.path),
                    path_b=tuple(request.path_b),
                    parts=request.parts,
                    new_label=request.new_label,
                ),
            )
        except (TaxonomyError, PerturbationError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return PerturbResponse(
            taxonomy=taxonomy_to_json(result), warnings=list(result.warnings)
        )

    @app.post("/validate", response_model=ValidateResponse)
    def validate_endpoint(request: ValidateRequest) -> ValidateResponse:
        issues = diagnose(json.dumps(request.taxonomy))
        return ValidateResponse(
            valid=not issues,
            issues=[IssueModel(code=i.code, path=i.path, message=i.message) for i in issues],
        )

    return app


# default instance for `uvicorn taxoeval.service.app:app`
app = create_app(
    encoder=os.environ.get("TAXOEVAL_SERVICE_ENCODER", "test"),
    endpoint=os.environ.get("TAXOEVAL_ENDPOINT"),
    encoder_id=os.environ.get("TAXOEVAL_ENCODER_ID"),
)
