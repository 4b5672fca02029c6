"""
Verification Router - checks against published data

1. Fixture comparison, annihilation of J_p and the AJ factorization
2. The conjectural step operator in p
3. Generating function identities
"""

from fastapi import APIRouter, HTTPException, Query, status, Request
from slowapi import Limiter
from slowapi.util import get_remote_address
import logging

from app.core.config import settings
from app.core.errors import QtelError, http_error
from app.core.genfun import genfun_report
from app.core.twistknot import hoste_shanahan_check, verify
from app.schemas.knot_schemas import GenfunResponse, StepCheckResponse, VerifyRequest, VerifyResponse

logging.basicConfig(level=settings.LOG_LEVEL)
logger = logging.getLogger(__name__)

limiter = Limiter(key_func=get_remote_address)

router = APIRouter()


@router.post("/verify", response_model=VerifyResponse)
@limiter.limit(settings.RATE_LIMIT)
def run_verification(request: Request, body: VerifyRequest):
    """Fixture comparison, annihilation and AJ check for one twist knot"""
    try:
        report = verify(body.p, body.nmax, body.mode)
        logger.info(f"verification for p={body.p}: {report.status}")
        return VerifyResponse(**report.to_dict())
    except QtelError as e:
        logger.error(f"Error verifying p={body.p}: {e.message}")
        raise http_error(e)


@router.get("/step/{p}", response_model=StepCheckResponse)
@limiter.limit(settings.RATE_LIMIT)
def run_step_check(request: Request, p: int):
    """Second-order step in p on the q = 1 shadows and the A-polynomials; never fails"""
    try:
        return StepCheckResponse(**hoste_shanahan_check(p).to_dict())
    except QtelError as e:
        raise http_error(e)


@router.get("/genfun", response_model=GenfunResponse)
@limiter.limit(settings.RATE_LIMIT)
def run_genfun_check(
    request: Request,
    p: int = Query(1),
    k_max: int = Query(6, ge=0, le=12),
    n: int = Query(20, ge=0, le=30),
):
    """WZ pair, the z-shift of H(k, z) and both computations of F(z, q)"""
    if p == 0:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail="p = 0 is the unknot")
    try:
        return GenfunResponse(**genfun_report(p, k_max, n).to_dict())
    except QtelError as e:
        raise http_error(e)
