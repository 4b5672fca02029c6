"""
Knots Router - sequences and recursions of twist knots

Computed recursions are cached in the recursion_records table per
(p, mode, seed); the symbolic solves for |p| >= 2 take minutes.
"""

from fastapi import APIRouter, Depends, HTTPException, Query, status, Request
from sqlalchemy.orm import Session
from slowapi import Limiter
from slowapi.util import get_remote_address
import logging

from app.core.config import settings
from app.core.database import get_db
from app.core.errors import QtelError, http_error
from app.core.oreops import InhomRec
from app.core.twistknot import MODES, colored_jones, derive, jhat, resolve_mode, specialize_q1
from app.models.recursion_record import RecursionRecord
from app.schemas.knot_schemas import Q1ShadowResponse, RecursionResponse, SequenceValueResponse

logging.basicConfig(level=settings.LOG_LEVEL)
logger = logging.getLogger(__name__)

limiter = Limiter(key_func=get_remote_address)

router = APIRouter()

MAX_N = 60


# ============================================================================
# Helper Functions
# ============================================================================

def get_or_compute_recursion(db: Session, p: int, mode: str) -> RecursionRecord:
    """Read the cached recursion or run the pipeline and store it"""
    mode = resolve_mode(p, mode)

    record = db.query(RecursionRecord).filter(
        RecursionRecord.p == p,
        RecursionRecord.mode == mode,
        RecursionRecord.seed == str(settings.SEED),
    ).first()
    if record:
        logger.info(f"recursion for p={p} ({mode}) served from cache")
        return record

    result = derive(p, mode)
    record = RecursionRecord(
        p=p,
        mode=mode,
        seed=str(settings.SEED),
        order=result.order,
        payload=result.to_json(),
        orientation="telescoped" if result.boundary_sign < 0 else "printed",
        pointwise=result.pointwise,
    )
    db.add(record)
    db.commit()
    db.refresh(record)
    logger.info(f"stored recursion for p={p} ({mode}), order {record.order}")
    return record


def _check_p(p: int):
    if p == 0:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail="p = 0 is the unknot")


# ============================================================================
# Endpoints
# ============================================================================

@router.get("/{p}/jones/{n}", response_model=SequenceValueResponse)
def get_colored_jones(p: int, n: int):
    """J_p(n) by direct double summation"""
    _check_p(p)
    if not 0 <= n <= MAX_N:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=f"n must lie in 0..{MAX_N}")
    try:
        return SequenceValueResponse(p=p, n=n, sequence="jones", value=str(colored_jones(p, n)))
    except QtelError as e:
        raise http_error(e)


@router.get("/{p}/jhat/{n}", response_model=SequenceValueResponse)
def get_jhat(p: int, n: int):
    """Jhat_p(n), the cyclotomic function"""
    _check_p(p)
    if not 0 <= n <= MAX_N:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=f"n must lie in 0..{MAX_N}")
    try:
        return SequenceValueResponse(p=p, n=n, sequence="jhat", value=str(jhat(p, n)))
    except QtelError as e:
        raise http_error(e)


@router.get("/{p}/recursion", response_model=RecursionResponse)
@limiter.limit(settings.RATE_LIMIT)
def get_recursion(
    request: Request,
    p: int,
    mode: str = Query("auto", pattern="^(" + "|".join(MODES) + ")$"),
    db: Session = Depends(get_db)
):
    """The inhomogeneous recursion (A^nh_p, B_p)"""
    _check_p(p)
    try:
        before = db.query(RecursionRecord).count()
        record = get_or_compute_recursion(db, p, mode)
        payload = record.payload
        return RecursionResponse(
            p=p,
            order=record.order,
            mode=record.mode,
            coeffs=payload["coeffs"],
            rhs=payload.get("rhs"),
            certificates=payload.get("certificates", []),
            denominator=payload.get("denominator"),
            orientation=record.orientation,
            certified_points=payload.get("certified_points", []),
            cached=db.query(RecursionRecord).count() == before,
        )
    except QtelError as e:
        logger.error(f"Error computing recursion for p={p}: {e.message}")
        raise http_error(e)


@router.get("/{p}/specialize", response_model=Q1ShadowResponse)
@limiter.limit(settings.RATE_LIMIT)
def get_specialization(
    request: Request,
    p: int,
    mode: str = Query("auto", pattern="^(" + "|".join(MODES) + ")$"),
    db: Session = Depends(get_db)
):
    """The recursion at q = 1 with x -> Q, E -> L"""
    _check_p(p)
    try:
        record = get_or_compute_recursion(db, p, mode)
        shadow = specialize_q1(InhomRec.from_json(record.payload))
        return Q1ShadowResponse(p=p, **shadow.to_dict())
    except QtelError as e:
        raise http_error(e)
