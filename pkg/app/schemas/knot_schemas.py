from pydantic import BaseModel, Field, field_validator
from typing import Any, Dict, List, Literal, Optional


def _nonzero(v: int) -> int:
    if v == 0:
        raise ValueError("p = 0 is the unknot")
    return v


# ============================================================================
# Sequences
# ============================================================================

class SequenceValueResponse(BaseModel):
    """J_p(n) or Jhat_p(n) as a Laurent polynomial in q"""
    p: int
    n: int
    sequence: Literal["jones", "jhat"]
    value: str = Field(..., description="Laurent polynomial, e.g. 'q + q^3 - q^4'")

    class Config:
        json_schema_extra = {
            "example": {"p": 1, "n": 2, "sequence": "jones", "value": "q + q^3 - q^4"}
        }


# ============================================================================
# Recursions
# ============================================================================

class RecursionResponse(BaseModel):
    p: int
    order: int
    mode: Literal["symbolic", "pointwise"]
    coeffs: List[str]
    rhs: Optional[str] = None
    certificates: List[str] = []
    denominator: Optional[str] = None
    orientation: Optional[str] = None
    certified_points: List[Dict[str, str]] = []
    cached: bool = False


class Q1ShadowResponse(BaseModel):
    p: int
    operator: str
    rhs: str
    order: int
    degree_drop: bool


# ============================================================================
# Verification
# ============================================================================

class VerifyRequest(BaseModel):
    p: int = Field(..., description="twist parameter, nonzero")
    nmax: Optional[int] = Field(None, ge=0, le=40, description="last n of the annihilation check")
    mode: Literal["auto", "symbolic", "pointwise"] = "auto"

    @field_validator("p")
    @classmethod
    def validate_p(cls, v):
        return _nonzero(v)

    class Config:
        json_schema_extra = {"example": {"p": -1, "nmax": 8, "mode": "auto"}}


class VerifyResponse(BaseModel):
    p: int
    order: Optional[int] = None
    mode: str
    passed: bool
    status: Literal["passed", "failed", "search-exhausted"]
    fixture: Optional[Dict[str, Any]] = None
    annihilation: Optional[Dict[str, Any]] = None
    aj: Optional[Dict[str, Any]] = None
    errors: List[str] = []
    skipped: List[str] = []
    search_exhausted: Optional[Dict[str, Any]] = None


class StepCheckResponse(BaseModel):
    p: int
    holds: List[str]
    tried: List[str]
    errors: List[str] = []
    conjectural: bool = True


class GenfunResponse(BaseModel):
    p: int
    identity_ok: bool
    printed_identity_ok: bool
    corrected_certificate: Optional[str] = None
    delta: Optional[int] = None
    deltas: Dict[str, Optional[int]] = {}
    closed_form_recursion_ok: bool
    series_match_up_to: Optional[int] = None
    first_difference: Optional[int] = None
    printed_equality_holds: bool
    cyclotomic_equality_holds: bool
    passed: bool
