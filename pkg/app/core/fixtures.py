"""
Published recursions and A-polynomials, stored as text in the expression grammar.

fixtures/thm0/p{1,-1,2,-2}.json  recursions for |p| <= 2
fixtures/appB/p{3,-3}.json       recursions for |p| = 3
fixtures/appC/apoly.json         A-polynomials A_p(L, M), -3 <= p <= 3
"""
import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, ValidationError, field_validator

from app.core.config import settings
from app.core.errors import FixtureError, UnsupportedKnotError
from app.core.exactfield import QXY
from app.core.expressions import parse_operator, parse_polynomial, parse_ratfun
from app.core.oreops import InhomRec, OreOp

logger = logging.getLogger(__name__)

DEFAULT_FIXTURE_DIR = Path(__file__).resolve().parents[2] / "fixtures"


class OperatorFixture(BaseModel):
    p: int
    order: int
    operator: str
    rhs: Optional[str] = None

    @field_validator("p")
    @classmethod
    def validate_p(cls, v):
        if v == 0:
            raise ValueError("p = 0 is the unknot")
        return v

    def to_rec(self) -> InhomRec:
        op = OreOp.from_coeffs(parse_operator(self.operator, "E"))
        rhs = parse_ratfun(self.rhs) if self.rhs else QXY.zero
        if op.order != self.order:
            raise FixtureError(f"fixture for p={self.p} declares order {self.order} but the operator has order {op.order}")
        return InhomRec(op, rhs)


class APolyFixture(BaseModel):
    variables: List[str]
    polynomials: Dict[str, str]

    @field_validator("variables")
    @classmethod
    def validate_variables(cls, v):
        if v != ["L", "M"]:
            raise ValueError(f"expected variables [L, M], got {v}")
        return v


def fixture_dir(override: Optional[str] = None) -> Path:
    """The --fixture-dir flag, then QTEL_FIXTURES, then the bundled directory"""
    if override:
        return Path(override)
    if settings.QTEL_FIXTURES:
        return Path(settings.QTEL_FIXTURES)
    return DEFAULT_FIXTURE_DIR


def _read(path: Path) -> dict:
    if not path.exists():
        raise FixtureError(f"fixture not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise FixtureError(f"fixture {path} is not valid JSON: {str(e)}")


@lru_cache(maxsize=32)
def _load_fixture(p: int, directory: str) -> InhomRec:
    section = "thm0" if abs(p) <= 2 else "appB"
    path = Path(directory) / section / f"p{p}.json"
    try:
        fixture = OperatorFixture(**_read(path))
    except ValidationError as e:
        raise FixtureError(f"malformed fixture {path}: {str(e)}")
    if fixture.p != p:
        raise FixtureError(f"fixture {path} is for p={fixture.p}")
    logger.debug(f"loaded recursion fixture for p={p} from {path}")
    return fixture.to_rec()


def load_fixture(p: int, directory: Optional[str] = None) -> InhomRec:
    """The published recursion (A^nh_p, B_p)"""
    if p == 0:
        raise UnsupportedKnotError("p = 0 is the unknot")
    return _load_fixture(p, str(fixture_dir(directory)))


@lru_cache(maxsize=32)
def _load_apoly(p: int, directory: str):
    path = Path(directory) / "appC" / "apoly.json"
    try:
        fixture = APolyFixture(**_read(path))
    except ValidationError as e:
        raise FixtureError(f"malformed fixture {path}: {str(e)}")
    if str(p) not in fixture.polynomials:
        raise FixtureError(f"no A-polynomial for p={p} in {path}")
    return parse_polynomial(fixture.polynomials[str(p)], fixture.variables)


def load_apoly(p: int, directory: Optional[str] = None):
    """A_p(L, M) as a polynomial in the shadow ring (L, M)"""
    if p == 0:
        raise UnsupportedKnotError("p = 0 is the unknot")
    return _load_apoly(p, str(fixture_dir(directory)))
