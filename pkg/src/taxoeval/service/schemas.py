"""Request/response models for the evaluation HTTP API."""
from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field

from ..perturb import PERTURBATION_KINDS


class HealthResponse(BaseModel):
    status: str
    encoder: str


class EvaluatePairRequest(BaseModel):
    mode: str = Field(pattern="^(bottom-up|deep-research)$")
    expert: dict[str, Any]
    model: dict[str, Any]
    survey_id: str = "survey"
    parse_mode: str = Field(default="lenient", pattern="^(strict|lenient)$")
    alignment_threshold: float = Field(default=0.6, gt=0.0, le=1.0)
    extra_node_penalty: float = Field(default=1.0, ge=0.0, alias="lambda")

    model_config = {"populate_by_name": True}


class EvaluatePairResponse(BaseModel):
    survey_id: str
    mode: str
    metrics: dict[str, Any]
    warnings: list[str]


class PerturbRequest(BaseModel):
    taxonomy: dict[str, Any]
    kind: str
    seed: int = 0
    path: list[str] = Field(default_factory=list)
    path_b: list[str] = Field(default_factory=list)
    parts: int = 2
    new_label: str = ""
    parse_mode: str = Field(default="strict", pattern="^(strict|lenient)$")

    def validate_kind(self) -> str:
        if self.kind not in PERTURBATION_KINDS:
            raise ValueError(f"kind must be one of {PERTURBATION_KINDS}")
        return self.kind


class PerturbResponse(BaseModel):
    taxonomy: dict[str, Any]
    warnings: list[str]


class ValidateRequest(BaseModel):
    taxonomy: dict[str, Any]


class IssueModel(BaseModel):
    code: str
    path: str
    message: str


class ValidateResponse(BaseModel):
    valid: bool
    issues: list[IssueModel]
