"""
Twist knots K_p: cyclotomic kernel, cyclotomic function, colored Jones function
and the inhomogeneous non-commutative A-polynomial with its verifications.

    J_p(n) = sum_{k=0}^{n} c(n, k) Jhat_p(k)
    c(n, k) = (-1)^k q^(-k(k+1)/2) (q^(1-n); q)_k (q^(1+n); q)_k
"""
import logging
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from sympy import QQ

from app.core.config import settings
from app.core.errors import AJCheckError, ConventionError, DomainError, SearchExhaustedError, UnsupportedKnotError
from app.core.exactfield import (
    QXY,
    Q,
    X,
    Y,
    QPoly,
    RatFun,
    as_ratfun,
    evaluate,
    laurent_qpoch,
    qfactorial,
    random_point,
    substitute,
    x_to_y,
)
from app.core.expressions import format_expr, shadow_ring
from app.core.fixtures import fixture_dir, load_apoly, load_fixture
from app.core.oreops import (
    BiOreOp,
    InhomRec,
    equal_up_to_unit,
    evaluate_rec,
    first_mismatch,
    normalize_rec,
)
from app.core.telescope import (
    CertSet,
    HyperTerm,
    MulticertSystem,
    TelescopeResult,
    boundary_value,
    default_denominator,
    find_recursion,
    jhat_summand,
    qzeilberger,
)

logger = logging.getLogger(__name__)

MODES = ("auto", "symbolic", "pointwise")
PUBLISHED_MAX_P = 3  # fixtures cover -3 <= p <= 3


def _check_p(p: int):
    if p == 0:
        raise UnsupportedKnotError("p = 0 is the unknot")


def expected_order(p: int) -> int:
    _check_p(p)
    return 2 * p - 1 if p > 0 else 2 * abs(p)


# -------------------------
# Sequences
# -------------------------

def kernel_value(n: int, k: int) -> QPoly:
    """c(n, k) as a Laurent polynomial; zero outside k == 0 or k < n"""
    if n < 0 or k < 0:
        raise DomainError(f"c({n}, {k}) is defined for n, k >= 0")
    if k and k >= n:
        return QPoly.zero()
    value = laurent_qpoch(1 - n, k) * laurent_qpoch(1 + n, k)
    return value * QPoly.monomial(-k * (k + 1) // 2, -1 if k % 2 else 1)


def cyclotomic_kernel() -> HyperTerm:
    return HyperTerm(
        name="cyclotomic kernel",
        s=(1 - 1 / X) * (1 - Q * X * Y) / ((1 - Y / X) * (1 - Q * X)),
        t=-(1 - Q * Y / X) * (1 - Q * X * Y) / (Q * Y),
        evaluator=lambda n, k: kernel_value(n, k).to_ratfun(),
        support=lambda n, k: k == 0 or 0 <= k < n,
        boundary=QXY.one,
    )


@lru_cache(maxsize=1024)
def jhat(p: int, n: int) -> QPoly:
    """
    Jhat_p(n), summed over a common denominator (q;q)_(2n+1):
    each term times (q;q)_(2n+1) is q^e (-1)^(n+k+1) (q^(2k+1) - 1) (q^(n-k+1); q)_k (q^(n+k+2); q)_(n-k)
    """
    _check_p(p)
    if n < 0:
        raise DomainError("jhat needs n >= 0")
    total = QPoly.zero()
    for k in range(n + 1):
        e = n * (n + 3) // 2 + p * k * (k + 1) + k * (k - 1) // 2
        sign = -1 if (n + k + 1) % 2 else 1
        term = QPoly.monomial(e, sign) * (QPoly.monomial(2 * k + 1) - 1)
        term = term * laurent_qpoch(n - k + 1, k) * laurent_qpoch(n + k + 2, n - k)
        total = total + term
    return total.exquo(qfactorial(2 * n + 1))


def jhat_values(p: int, nmax: int) -> Tuple[QPoly, ...]:
    return tuple(jhat(p, n) for n in range(nmax + 1))


@lru_cache(maxsize=1024)
def colored_jones(p: int, n: int) -> QPoly:
    """J_p(n) = sum_k c(n, k) Jhat_p(k)"""
    _check_p(p)
    if n < 0:
        raise DomainError("colored_jones needs n >= 0")
    total = QPoly.zero()
    for k in range(n + 1):
        c = kernel_value(n, k)
        if not c.is_zero:
            total = total + c * jhat(p, k)
    return total


def jones_values(p: int, nmax: int) -> Tuple[QPoly, ...]:
    return tuple(colored_jones(p, n) for n in range(nmax + 1))


@lru_cache(maxsize=16)
def jhat_recursion(p: int) -> BiOreOp:
    """The order |p| recursion sum_i r_i(y) Jhat(k+i) = 0 with r_|p| = 1"""
    _check_p(p)
    found = qzeilberger(jhat_summand(p), max_order=abs(p), rng=random.Random(settings.SEED))
    if found is None:
        raise SearchExhaustedError(f"no recursion of order <= {abs(p)} for jhat with p={p}")
    rec, _ = found
    if not rec.is_homogeneous:
        raise SearchExhaustedError(f"jhat recursion for p={p} came out inhomogeneous")

    coeffs = [x_to_y(a) for a in rec.op.coeffs]
    op = BiOreOp.from_coeffs([a / coeffs[-1] for a in coeffs])

    values = jhat_values(p, settings.ANNIHILATION_NMAX + op.order)
    skipped: List[int] = []
    failing = first_mismatch(InhomRec(op, QXY.zero), values, skipped=skipped)
    if failing is not None:
        raise SearchExhaustedError(f"jhat recursion for p={p} fails at k={failing}")
    if len(skipped) == len(values) - op.order:
        raise SearchExhaustedError(f"jhat recursion for p={p} has a pole at every checked k")
    if skipped:
        logger.warning(f"jhat recursion for p={p} not checked at k={skipped}")
    logger.info(f"jhat recursion for p={p} has order {op.order}")
    return op


# -------------------------
# Non-commutative A-polynomial
# -------------------------

def resolve_mode(p: int, mode: str) -> str:
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}")
    if mode == "auto":
        if abs(p) <= settings.SYMBOLIC_P_LIMIT or abs(p) > PUBLISHED_MAX_P:
            return "symbolic"
        return "pointwise"
    return mode


def _symbolic(p: int, max_order: int, max_numdeg: int) -> TelescopeResult:
    nmax = settings.ANNIHILATION_NMAX + max_order
    return find_recursion(
        cyclotomic_kernel(),
        jhat_recursion(p),
        p,
        jhat_values(p, max_order + abs(p)),
        jones_values(p, nmax),
        max_order=max_order,
        max_numdeg=max_numdeg,
        rng=random.Random(settings.SEED),
    )


def _pointwise(p: int, max_numdeg: int, directory: Optional[str]) -> TelescopeResult:
    """
    Certify the published pair (A, B): at seeded rational points the
    multi-certificate system solved over QQ must reproduce the normalized
    coefficients of A, and the boundary term of its certificates must give B
    with one orientation shared by every point.
    """
    published = normalize_rec(load_fixture(p, directory))
    m = expected_order(p)
    if published.order != m:
        raise SearchExhaustedError(f"published recursion for p={p} has order {published.order}, expected {m}")

    kernel = cyclotomic_kernel()
    D = default_denominator(p)
    system = MulticertSystem(kernel, jhat_recursion(p), m, D)
    initial = jhat_values(p, abs(p))
    rng = random.Random(settings.SEED)
    points = [random_point(rng) for _ in range(settings.POINTWISE_POINTS)]

    r_d = system.ansatz.first_degree(max_numdeg, points[0])
    if r_d is None:
        raise SearchExhaustedError(f"no order {m} solution at q={points[0]['q']}, x={points[0]['x']} for p={p}", [{"m": m, "r_d": None}])

    attempts = []
    signs = {-1, 1}
    for point in points:
        q_val, x_val = point["q"], point["x"]
        attempt = {"q": str(q_val), "x": str(x_val)}
        attempts.append(attempt)
        theirs, rhs = evaluate_rec(published, q_val, x_val)

        solution = system.point_solution(r_d, point)
        attempt["operator"] = solution is not None and solution[0] == theirs
        if not attempt["operator"]:
            raise SearchExhaustedError(f"published operator for p={p} disagrees at q={q_val}, x={x_val}", attempts)

        at_point = TelescopeResult(rec=published, certs=solution[1], denominator=D, r_d=r_d)
        G0 = evaluate(boundary_value(at_point, kernel, initial), q_val, x_val)
        signs &= {s for s in (-1, 1) if s * G0 == rhs}
        attempt["rhs"] = bool(signs)
        if not signs:
            raise SearchExhaustedError(f"published rhs for p={p} is not the boundary term at q={q_val}, x={x_val}", attempts)

    # both signs survive only when B and G(n, 0) vanish at every point
    sign = -1 if -1 in signs else 1
    logger.info(f"p={p}: published recursion and rhs certified at {len(points)} points")
    return TelescopeResult(
        rec=published,
        certs=CertSet(()),
        denominator=D,
        r_d=r_d,
        boundary_sign=sign,
        pointwise=True,
        points=tuple((a["q"], a["x"]) for a in attempts),
    )


@lru_cache(maxsize=32)
def _derive(p: int, mode: str, seed: int, max_order: int, max_numdeg: int, directory: Optional[str]) -> TelescopeResult:
    if mode == "symbolic":
        return _symbolic(p, max_order, max_numdeg)
    return _pointwise(p, max_numdeg, directory)


def derive(p: int, mode: str = "auto", max_order: Optional[int] = None,
           max_numdeg: Optional[int] = None, directory: Optional[str] = None) -> TelescopeResult:
    """The telescoping result behind noncomm_A"""
    _check_p(p)
    mode = resolve_mode(p, mode)
    max_order = settings.MAX_ORDER if max_order is None else max_order
    max_numdeg = settings.MAX_NUMDEG if max_numdeg is None else max_numdeg
    # only the pointwise mode reads fixtures
    source = str(fixture_dir(directory)) if mode == "pointwise" else None
    logger.info(f"deriving the recursion for p={p} in {mode} mode")
    return _derive(p, mode, settings.SEED, max_order, max_numdeg, source)


def noncomm_A(p: int, mode: str = "auto", max_order: Optional[int] = None,
              max_numdeg: Optional[int] = None, directory: Optional[str] = None) -> InhomRec:
    """(A^nh_p, B_p), normalized"""
    return derive(p, mode, max_order, max_numdeg, directory).rec


# -------------------------
# Verification
# -------------------------

@dataclass
class FixtureComparison:
    p: int
    method: str  # "structural", "pointwise" or "certified"
    passed: bool
    points: List[Dict[str, str]] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {"p": self.p, "method": self.method, "passed": self.passed, "points": self.points}


def compare_with_fixture(p: int, rec: InhomRec, directory: Optional[str] = None) -> FixtureComparison:
    """Structural comparison up to a unit for |p| <= 2, exact comparison at seeded points for |p| = 3"""
    published = load_fixture(p, directory)
    if abs(p) <= 2:
        passed = equal_up_to_unit(normalize_rec(rec), normalize_rec(published))
        return FixtureComparison(p, "structural", passed)

    rng = random.Random(settings.SEED)
    points = []
    passed = rec.order == published.order
    for _ in range(settings.POINTWISE_POINTS):
        point = random_point(rng)
        ours = evaluate_rec(rec, point["q"], point["x"])
        theirs = evaluate_rec(published, point["q"], point["x"])
        same = ours == theirs
        points.append({"q": str(point["q"]), "x": str(point["x"]), "match": str(same).lower()})
        passed = passed and same
    return FixtureComparison(p, "pointwise", passed, points)


@dataclass
class AnnihilationReport:
    p: int
    nmax: int
    passed: bool
    failing_n: Optional[int] = None
    skipped_n: List[int] = field(default_factory=list)  # coefficient poles, not checked

    def to_dict(self) -> Dict:
        return {
            "p": self.p,
            "nmax": self.nmax,
            "passed": self.passed,
            "failing_n": self.failing_n,
            "skipped_n": self.skipped_n,
        }


def annihilation_check(p: int, nmax: int, rec: Optional[InhomRec] = None) -> AnnihilationReport:
    """A^nh_p J_p(n) = B_p(q^n) for n = 0..nmax - order, J_p by direct double summation"""
    rec = rec or noncomm_A(p)
    if nmax < rec.order:
        raise DomainError(f"nmax={nmax} is below the recursion order {rec.order}")
    skipped: List[int] = []
    failing = first_mismatch(rec, jones_values(p, nmax), skipped=skipped)
    if failing is not None:
        logger.error(f"annihilation check for p={p} fails at n={failing}")
    checked = nmax + 1 - rec.order - len(skipped)
    return AnnihilationReport(p, nmax, failing is None and checked > 0, failing, skipped)


@dataclass
class Q1Shadow:
    """A recursion at q = 1 with x -> Q and E -> L"""

    operator: object
    rhs: object
    order: int
    degree_drop: bool

    def to_dict(self) -> Dict:
        return {
            "operator": format_expr(self.operator),
            "rhs": format_expr(self.rhs),
            "order": self.order,
            "degree_drop": self.degree_drop,
        }


def _at_q1(f: RatFun) -> Dict[int, object]:
    """{x-degree: coefficient} of a polynomial in x, q after q -> 1"""
    value = as_ratfun(substitute(f, q_val=1)) if f else QXY.zero
    if not value.denom.is_ground:
        raise DomainError(f"{format_expr(f)} is not a polynomial at q = 1")
    unit = value.denom.LC
    terms: Dict[int, object] = {}
    for monom, coeff in value.numer.iterterms():
        terms[monom[0]] = terms.get(monom[0], QQ.zero) + coeff / unit
    return terms


def specialize_q1(rec: InhomRec) -> Q1Shadow:
    rec = normalize_rec(rec)
    LQ = shadow_ring(("L", "Q"))
    operator = {}
    for i, a in enumerate(rec.op.coeffs):
        for degree, coeff in _at_q1(a).items():
            operator[(i, degree)] = coeff
    rhs = {(0, degree): coeff for degree, coeff in _at_q1(rec.rhs).items()}

    operator = LQ.from_dict({m: c for m, c in operator.items() if c})
    rhs = LQ.from_dict({m: c for m, c in rhs.items() if c})
    drop = not _at_q1(rec.op.leading)
    if drop:
        logger.warning(f"L-degree drops at q = 1 for a recursion of order {rec.order}")
    return Q1Shadow(operator, rhs, rec.order, drop)


@dataclass
class AJReport:
    p: int
    a_nh_at_1: object
    a_poly: object
    quotient: object
    remainder: object
    degree_drop: bool

    @property
    def passed(self) -> bool:
        L_free = all(m[0] == 0 for m in self.quotient.itermonoms())
        return not self.remainder and bool(self.quotient) and L_free and not self.degree_drop

    def to_dict(self) -> Dict:
        return {
            "p": self.p,
            "a_nh_at_1": format_expr(self.a_nh_at_1),
            "a_poly": format_expr(self.a_poly),
            "quotient": format_expr(self.quotient),
            "remainder": format_expr(self.remainder),
            "degree_drop": self.degree_drop,
            "passed": self.passed,
        }


def meridian_squared(apoly) -> object:
    """A_p(L, M) with M^2 -> Q; every M exponent must be even"""
    LQ = shadow_ring(("L", "Q"))
    terms = {}
    for (a, b), coeff in apoly.iterterms():
        if b % 2:
            raise ConventionError(f"A-polynomial has an odd power M^{b}")
        terms[(a, b // 2)] = coeff
    return LQ.from_dict(terms)


def check_AJ(p: int, rec: Optional[InhomRec] = None, directory: Optional[str] = None, strict: bool = True) -> AJReport:
    """A^nh_p(L, Q, 1) = A_p(L, M^2) F_p with F_p free of L"""
    rec = rec or noncomm_A(p)
    shadow = specialize_q1(rec)
    apoly = meridian_squared(load_apoly(p, directory))
    quotient, remainder = divmod(shadow.operator, apoly)
    report = AJReport(p, shadow.operator, apoly, quotient, remainder, shadow.degree_drop)
    if report.passed:
        logger.info(f"AJ check for p={p} passes with F_p = {format_expr(quotient)}")
    elif strict:
        raise AJCheckError(f"A-polynomial of p={p} does not divide the q = 1 recursion", report)
    return report


# -------------------------
# Step operator in p
# -------------------------

def _step_coefficients():
    LM = shadow_ring(("L", "M"))
    L, M = LM.gens
    c0 = M ** 2 * (M - 1) ** 4 * (M + 1) ** 4 * (L + M) ** 4
    c1 = (M - 1) ** 2 * (M + 1) ** 2 * (
        M ** 4 - L * M ** 4 + 2 * L * M ** 3 + L ** 2 * M ** 2 + M ** 2 + 2 * L * M ** 2 + 2 * L * M + L ** 2 - L
    )
    return c0, c1


def _in_meridian(poly, squared: bool):
    LM = shadow_ring(("L", "M"))
    return LM.from_dict({(a, 2 * b if squared else b): c for (a, b), c in poly.iterterms()})


@dataclass
class StepReport:
    """Which reading of the step operator annihilates p -> f_p; never fatal"""

    p: int
    holds: List[str] = field(default_factory=list)
    tried: List[str] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)  # readings that could not be formed

    @property
    def passed(self) -> bool:
        return bool(self.holds)

    def to_dict(self) -> Dict:
        return {"p": self.p, "holds": self.holds, "tried": self.tried, "errors": self.errors, "conjectural": True}


def step_identity(f, c0, c1, p_positive: bool, signs=(1, 1)) -> bool:
    """c0 f_p - c1 f_(p+1) + f_(p+2) = 0 (p > 0) or f_p - c1 f_(p+1) + c0 f_(p+2) = 0 (p < 0), up to the signs of f_(p+1), f_(p+2)"""
    f0, f1, f2 = f[0], signs[0] * f[1], signs[1] * f[2]
    if p_positive:
        return not (c0 * f0 - c1 * f1 + f2)
    return not (f0 - c1 * f1 + c0 * f2)


def hoste_shanahan_check(p: int, mode: str = "auto", directory: Optional[str] = None) -> StepReport:
    """
    Conjectural second-order step in p, tried on the q = 1 shadows of the
    recursions (M^2 = Q and M = Q) and on the A-polynomials themselves.
    """
    triple = (p, p + 1, p + 2)
    if 0 in triple or (p < 0) != (p + 2 < 0):
        raise DomainError(f"p={p}: p, p+1, p+2 must lie on the same side of 0")
    c0, c1 = _step_coefficients()
    report = StepReport(p)

    sequences = {}
    try:
        shadows = [specialize_q1(noncomm_A(j, mode, directory=directory)).operator for j in triple]
        sequences["shadow, M^2 = Q"] = [_in_meridian(s, True) for s in shadows]
        sequences["shadow, M = Q"] = [_in_meridian(s, False) for s in shadows]
    except SearchExhaustedError as e:
        logger.warning(f"step check for p={p}: recursions unavailable ({e.message})")
        report.errors.append(f"shadow readings skipped: {e.message}")
    sequences["A-polynomial"] = [load_apoly(j, directory) for j in triple]

    for label, f in sequences.items():
        for signs in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            reading = f"{label}, signs {signs[0]:+d} {signs[1]:+d}"
            report.tried.append(reading)
            if step_identity(f, c0, c1, p > 0, signs):
                report.holds.append(reading)

    if not report.holds:
        logger.warning(f"step operator identity fails for p={p} under every reading tried")
    return report


# -------------------------
# Aggregated verification
# -------------------------

@dataclass
class VerifyReport:
    p: int
    order: Optional[int]
    mode: str
    fixture: Optional[FixtureComparison] = None
    annihilation: Optional[AnnihilationReport] = None
    aj: Optional[AJReport] = None
    errors: List[str] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)
    search_exhausted: Optional[Dict] = None  # unpublished p whose search ran out of bounds or budget

    @property
    def passed(self) -> bool:
        if self.search_exhausted is not None:
            return False
        checks = {"fixture": self.fixture, "annihilation": self.annihilation, "aj": self.aj}
        required = [c for name, c in checks.items() if name not in self.skipped]
        return not self.errors and all(c is not None and c.passed for c in required)

    @property
    def status(self) -> str:
        if self.search_exhausted is not None:
            return "search-exhausted"
        return "passed" if self.passed else "failed"

    def to_dict(self) -> Dict:
        return {
            "p": self.p,
            "order": self.order,
            "mode": self.mode,
            "fixture": self.fixture.to_dict() if self.fixture else None,
            "annihilation": self.annihilation.to_dict() if self.annihilation else None,
            "aj": self.aj.to_dict() if self.aj else None,
            "errors": self.errors,
            "skipped": self.skipped,
            "search_exhausted": self.search_exhausted,
            "passed": self.passed,
            "status": self.status,
        }


def verify(p: int, nmax: Optional[int] = None, mode: str = "auto", directory: Optional[str] = None) -> VerifyReport:
    """
    Fixture comparison, annihilation and AJ check on one recursion.

    For p without published data only the annihilation check runs, and an
    exhausted search is reported instead of raised.
    """
    _check_p(p)
    nmax = settings.ANNIHILATION_NMAX if nmax is None else nmax
    published = abs(p) <= PUBLISHED_MAX_P
    resolved = resolve_mode(p, mode)
    try:
        result = derive(p, mode, directory=directory)
    except SearchExhaustedError as e:
        if published:
            raise
        logger.warning(f"p={p}: search exhausted, annihilation not run ({e.message})")
        return VerifyReport(
            p, None, resolved,
            skipped=["fixture", "annihilation", "aj"],
            search_exhausted={"message": e.message, "attempts": e.attempts},
        )

    rec = result.rec
    report = VerifyReport(p, rec.order, resolved)
    if rec.order != expected_order(p):
        report.errors.append(f"order {rec.order} differs from the expected {expected_order(p)}")

    report.annihilation = annihilation_check(p, max(nmax, rec.order), rec)
    if not published:
        logger.warning(f"p={p}: no published recursion or A-polynomial, annihilation check only")
        report.skipped = ["fixture", "aj"]
    else:
        if result.pointwise:
            points = [{"q": q, "x": x, "match": "true"} for q, x in result.points]
            report.fixture = FixtureComparison(p, "certified", True, points)
        else:
            report.fixture = compare_with_fixture(p, rec, directory)
        report.aj = check_AJ(p, rec, directory, strict=False)
    logger.info(f"verification for p={p}: {report.status}")
    return report
