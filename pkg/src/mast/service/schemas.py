"""Request/response bodies for the what-if HTTP API."""

from __future__ import annotations

from typing import Annotated

from pydantic import BaseModel, Field

from ..model import DEFAULT_BASE_COST

Impact = Annotated[float, Field(ge=0, le=10)]


class FactorInfo(BaseModel):
    id: str
    label: str
    impact: float


class CreateModelRequest(BaseModel):
    impacts: list[Impact] = Field(min_length=4, max_length=4)
    base_cost: float = Field(default=DEFAULT_BASE_COST, ge=0)


class ImpactsPatch(BaseModel):
    impacts: list[Impact] = Field(min_length=4, max_length=4)


class ModelCreated(BaseModel):
    model_id: str
    factors: list[FactorInfo]
    revision: int


class EvidenceWrite(BaseModel):
    state: str


class RevisionResponse(BaseModel):
    revision: int


class SessionSnapshot(BaseModel):
    model_id: str
    factors: list[FactorInfo]
    base_cost: float
    evidence: dict[str, str]
    revision: int
    created_at: str
    updated_at: str


class InferResponse(BaseModel):
    probability: float
    percentage: float
    cost: float
    posterior: dict[str, float]
    evidence: dict[str, str]
    revision: int


class SensitivityRequest(BaseModel):
    vary: str


class SensitivityRowBody(BaseModel):
    state: str
    posterior: dict[str, float]
    expected_utility: float


class SensitivityResponse(BaseModel):
    vary: str
    target_state: str
    rows: list[SensitivityRowBody]
    spread: float
    revision: int
