"""Request and response bodies for the HTTP API."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

MaterialTypeName = Literal["Homogeneous", "Heterogeneous"]


class MaterialSummary(BaseModel):
    name: str
    material_type: MaterialTypeName
    default_k: int


class MaterialVariant(BaseModel):
    """One selectable (name, type) combination with its k rules."""

    material_type: MaterialTypeName
    applicable: bool  # whether the k choice applies to this variant
    allowed_k: list[int]
    default_k: int
    sample_count: Optional[int] = None
    analytic: bool = False


class MaterialDetail(BaseModel):
    name: str
    variants: list[MaterialVariant]


class PreviewRequest(BaseModel):
    # `type` and `k` are validated in the handler, not here: rule
    # violations must surface as 400s with speaking messages, and pydantic
    # rejections would turn them into 422s.
    model_config = ConfigDict(extra="forbid")

    material: str
    type: str
    k: Optional[int] = None
    seed: Optional[int] = Field(default=None, ge=0)


class JobCreated(BaseModel):
    job_id: str
    status_url: str


class JobStateOut(BaseModel):
    id: str
    status: Literal["Queued", "Running", "Done", "Failed"]
    progress: float
    result: Optional[dict[str, Any]] = None
    error: Optional[str] = None


class BenchLatest(BaseModel):
    times: list[dict[str, Any]]
    storage: list[dict[str, Any]]
    aggregates: list[dict[str, Any]]
