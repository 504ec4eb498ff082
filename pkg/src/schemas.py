from pydantic import BaseModel, Field
from typing import Any, Optional

class CheckRequest(BaseModel):
    """Request model for checking a whole .auk document"""
    source: str
    document: str = "<request>"

class EvalRequest(BaseModel):
    """Request model for evaluating one model of a document"""
    source: str
    model: str
    edge: Optional[str] = None
    list_bound: Optional[int] = Field(default=None, ge=0)

class EqcheckRequest(BaseModel):
    """Request model for certifying two context maps in their JSON form"""
    left: dict[str, Any]
    right: dict[str, Any]
    certificate: Optional[dict[str, Any]] = None

class ReportResponse(BaseModel):
    """Response model for any checking endpoint"""
    ok: bool
    records: list[dict[str, Any]]
    certificate: Optional[dict[str, Any]] = None

class HealthResponse(BaseModel):
    """Response model for health check"""
    status: str
    version: str
    settings: dict[str, Any]
