"""
Summation engines for proper q-hypergeometric terms F(n, k), x = q^n, y = q^k.

* ``celine_q``: sum_{i,j} a_ij(n) F(n+i, k+j) = 0 (Sister Celine's ansatz)
* ``qzeilberger``: sum_i a_i(n) F(n+i, k) = (E_k - 1)(Cert F)
* ``multicert_telescope``: a kernel c(n, k) times a sequence with a known
  recursion of order p in k, telescoped with p certificates C_0..C_{p-1}

Every engine sets up an ansatz whose unknowns are the operator coefficients
and the numerator coefficients of a certificate over a fixed denominator,
multiplies through by the lcm of all denominators, matches powers of y and
hands the system to ``linsolve``. The rank is computed first at an exact rational
point; symbolic elimination only runs once that point shows a solution.
"""
import logging
import random
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from sympy.polys.matrices import DomainMatrix
from sympy import QQ

from app.core.config import settings
from app.core.errors import (
    AnsatzError,
    BoundaryError,
    DomainError,
    NormalizationError,
    PoleError,
    SearchExhaustedError,
    UnsupportedKnotError,
)
from app.core.exactfield import (
    QXY,
    RING,
    RQ,
    RY,
    Q,
    X,
    Y,
    Y_INDEX,
    QPoly,
    RatFun,
    as_ratfun,
    at_power,
    qfactorial,
    random_point,
    shift_x,
    shift_y,
    substitute,
    to_fraction,
    to_qq,
)
from app.core.expressions import format_expr
from app.core.linsolve import FFMatrix, nullspace
from app.core.oreops import BiOreOp, InhomRec, OreOp, first_mismatch, normalize_op, normalize_rec

logger = logging.getLogger(__name__)


# -------------------------
# Terms
# -------------------------

@dataclass(frozen=True)
class HyperTerm:
    """F(n, k) given by s = F(n+1,k)/F(n,k), t = F(n,k+1)/F(n,k) and an exact evaluator"""

    name: str
    s: RatFun
    t: RatFun
    evaluator: Callable[[int, int], RatFun] = field(compare=False, repr=False)
    support: Callable[[int, int], bool] = field(compare=False, repr=False)
    boundary: Optional[RatFun] = None  # F(n, 0) when it is rational in x
    natural_boundaries: bool = False  # the sum over the full support telescopes to zero

    def eval(self, n: int, k: int) -> RatFun:
        if not self.support(n, k):
            return QXY.zero
        return as_ratfun(self.evaluator(n, k))

    def column(self, j: int) -> RatFun:
        """F(n, j) as a function of x"""
        if self.boundary is None:
            raise BoundaryError(f"{self.name} has no rational boundary value F(n, 0)")
        value = self.boundary
        for l in range(j):
            value *= as_ratfun(substitute(self.t, y_val=Q ** l))
        return value


@lru_cache(maxsize=512)
def s_product(term: HyperTerm, i: int) -> RatFun:
    """F(n+i, k)/F(n, k)"""
    if i == 0:
        return QXY.one
    return s_product(term, i - 1) * shift_x(term.s, i - 1)


@lru_cache(maxsize=512)
def t_product(term: HyperTerm, i: int, j: int) -> RatFun:
    """F(n+i, k+j)/F(n, k)"""
    if j == 0:
        return s_product(term, i)
    return t_product(term, i, j - 1) * shift_y(shift_x(term.t, i), j - 1)


def check_consistency(term: HyperTerm, nmax: int = 8) -> List[Tuple[int, int, str]]:
    """(n, k, quotient) triples where s or t disagrees with the evaluator"""
    failures = []
    for n in range(nmax + 1):
        for k in range(n + 1):
            base = term.eval(n, k)
            if not base:
                continue
            for label, quotient, other in (("s", term.s, term.eval(n + 1, k)), ("t", term.t, term.eval(n, k + 1))):
                try:
                    predicted = at_power(quotient, n, k) * base
                except PoleError:
                    continue
                if predicted != other:
                    failures.append((n, k, label))
    return failures


def q_binomial_term() -> HyperTerm:
    """q^(k(k-1)/2) [n, k]_q; sums to (-1; q)_n"""

    def evaluator(n, k):
        value = QPoly.make(qfactorial(n)).to_ratfun()
        value /= QPoly.make(qfactorial(k) * qfactorial(n - k)).to_ratfun()
        return value * Q ** (k * (k - 1) // 2)

    return HyperTerm(
        name="q-binomial",
        s=(1 - Q * X) / (1 - Q * X / Y),
        t=Y * (1 - X / Y) / (1 - Q * Y),
        evaluator=evaluator,
        support=lambda n, k: 0 <= k <= n,
        boundary=QXY.one,
        natural_boundaries=True,
    )


def jhat_summand(p: int) -> HyperTerm:
    """
    Summand of the cyclotomic function of the twist knot K_p:
    q^(n(n+3)/2 + p k(k+1) + k(k-1)/2) (-1)^(n+k+1) (q^(2k+1) - 1) (q;q)_n / ((q;q)_(n+k+1) (q;q)_(n-k))
    """
    if p == 0:
        raise UnsupportedKnotError("p = 0 is the unknot")

    def evaluator(n, k):
        e = n * (n + 3) // 2 + p * k * (k + 1) + k * (k - 1) // 2
        sign = -1 if (n + k + 1) % 2 else 1
        value = sign * Q ** e * (Q ** (2 * k + 1) - 1)
        value *= QPoly.make(qfactorial(n)).to_ratfun()
        return value / QPoly.make(qfactorial(n + k + 1) * qfactorial(n - k)).to_ratfun()

    return HyperTerm(
        name=f"jhat[{p}]",
        s=-Q ** 2 * X * (1 - Q * X) / ((1 - Q ** 2 * X * Y) * (1 - Q * X / Y)),
        t=-Q ** (2 * p) * Y ** (2 * p + 1) * (Q ** 3 * Y ** 2 - 1) * (1 - X / Y) / ((Q * Y ** 2 - 1) * (1 - Q ** 2 * X * Y)),
        evaluator=evaluator,
        support=lambda n, k: 0 <= k <= n,
        natural_boundaries=True,
    )


# -------------------------
# Results
# -------------------------

@dataclass(frozen=True)
class CertSet:
    certs: Tuple[RatFun, ...]

    def __len__(self):
        return len(self.certs)

    def __getitem__(self, j):
        return self.certs[j]

    def __iter__(self):
        return iter(self.certs)

    def scale(self, u: RatFun) -> "CertSet":
        return CertSet(tuple(u * c for c in self.certs))

    def to_json(self) -> List[str]:
        return [format_expr(c) for c in self.certs]


@dataclass(frozen=True)
class TelescopeResult:
    rec: InhomRec
    certs: CertSet
    denominator: RatFun
    r_d: int
    boundary_sign: int = -1  # rhs = boundary_sign * G(n, 0)
    pointwise: bool = False
    points: Tuple[Tuple[str, str], ...] = ()  # (q, x) pairs a pointwise result was certified at

    @property
    def order(self) -> int:
        return self.rec.order

    def to_json(self) -> Dict:
        payload = self.rec.to_json()
        payload["certificates"] = self.certs.to_json()
        payload["denominator"] = format_expr(self.denominator)
        payload["orientation"] = "telescoped" if self.boundary_sign < 0 else "printed"
        if self.pointwise:
            payload["certified_points"] = [{"q": q, "x": x} for q, x in self.points]
        return payload


@dataclass(frozen=True)
class CelineRelation:
    """sum_{i,j} a_ij(x) F(n+i, k+j) = 0 and the collapsed operator sum_i (sum_j a_ij) E^i"""

    coeffs: Dict[Tuple[int, int], RatFun] = field(hash=False)
    op: OreOp

    def residual(self, term: HyperTerm, n: int, k: int) -> RatFun:
        total = QXY.zero
        for (i, j), a in self.coeffs.items():
            if a:
                total += at_power(a, n) * term.eval(n + i, k + j)
        return total


# -------------------------
# Ansatz assembly
# -------------------------

def _times(f: RatFun, L) -> object:
    return f.numer * L.exquo(f.denom)


def _group_by_y(polys: Sequence) -> Dict[int, Dict[int, Dict[tuple, object]]]:
    rows: Dict[int, Dict[int, Dict[tuple, object]]] = {}
    for c, poly in enumerate(polys):
        for monom, coeff in poly.iterterms():
            key = list(monom)
            key[Y_INDEX] = 0
            rows.setdefault(monom[Y_INDEX], {}).setdefault(c, {})[tuple(key)] = coeff
    return rows


class _Ansatz:
    """
    Columns: the fixed functions f_0..f_m, then for e = 0..r the functions
    y^e * sum_(w, B) q^(e w) B. The unknowns multiplying the second group are
    the numerator coefficients d_e of a certificate.
    """

    def __init__(self, fixed: Sequence[RatFun], blocks: Sequence[Tuple[int, RatFun]] = ()):
        self.fixed = [as_ratfun(f) for f in fixed]
        self.blocks = [(w, as_ratfun(B)) for w, B in blocks]
        self.q_shift = max([0] + [-w for w, _ in self.blocks])
        self._symbolic = None
        self._numeric: Dict[Tuple, Tuple] = {}

    @property
    def nfixed(self) -> int:
        return len(self.fixed)

    @staticmethod
    def _clear(fixed, blocks):
        L = RING.one
        for f in list(fixed) + [B for _, B in blocks]:
            if f:
                L = L.lcm(f.denom)
        return [_times(f, L) for f in fixed], [(w, _times(B, L)) for w, B in blocks]

    def _columns(self, cleared, r: int, power) -> List:
        fixed_polys, block_polys = cleared
        columns = list(fixed_polys)
        if block_polys:
            for e in range(r + 1):
                column = RING.zero
                for w, poly in block_polys:
                    column += poly * power(e * (w + self.q_shift))
                columns.append(column * RY ** e)
        return columns

    def numeric_basis(self, r: int, point: Dict[str, Fraction]) -> List[List[Fraction]]:
        key = (point["q"], point["x"])
        if key not in self._numeric:
            fixed = [as_ratfun(substitute(f, q_val=point["q"], x_val=point["x"])) for f in self.fixed]
            blocks = [(w, as_ratfun(substitute(B, q_val=point["q"], x_val=point["x"]))) for w, B in self.blocks]
            self._numeric[key] = self._clear(fixed, blocks)
        q_val = to_qq(point["q"])
        columns = self._columns(self._numeric[key], r, lambda e: q_val ** e)

        grouped = _group_by_y(columns)
        ncols = len(columns)
        if not grouped:
            return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
        data = []
        for e in sorted(grouped):
            row = grouped[e]
            data.append([sum(row.get(c, {}).values(), QQ.zero) for c in range(ncols)])
        basis = DomainMatrix(data, (len(data), ncols), QQ).nullspace().to_list()
        return [[to_fraction(v) for v in vector] for vector in basis]

    def matrix(self, r: int) -> FFMatrix:
        if self._symbolic is None:
            self._symbolic = self._clear(self.fixed, self.blocks)
        columns = self._columns(self._symbolic, r, lambda e: RQ ** e)
        grouped = _group_by_y(columns)
        rows = []
        for e in sorted(grouped):
            row = grouped[e]
            rows.append([RING.from_dict(row.get(c, {})) for c in range(len(columns))])
        logger.debug(f"ansatz matrix {len(rows)} x {len(columns)} at numerator degree {r}")
        return FFMatrix.from_rows(rows, len(columns))

    def symbolic_basis(self, r: int, point: Optional[Dict[str, Fraction]] = None) -> List[List[RatFun]]:
        """Nullspace vectors with the certificate coefficients rescaled to d_e"""
        basis = nullspace(self.matrix(r), point)
        restored = []
        for vector in basis:
            vector = list(vector)
            for e in range(len(vector) - self.nfixed):
                vector[self.nfixed + e] *= Q ** (e * self.q_shift)
            restored.append(vector)
        return restored

    def numerator(self, vector: Sequence[RatFun]) -> RatFun:
        return sum((d * Y ** e for e, d in enumerate(vector[self.nfixed:])), QXY.zero)

    def first_degree(self, max_numdeg: int, point: Dict[str, Fraction]) -> Optional[int]:
        """Smallest numerator degree whose nullspace at the point has a nonzero operator part"""
        for r in range(0, max_numdeg + 1, settings.NUMDEG_STEP):
            basis = self.numeric_basis(r, point)
            if any(any(v[:self.nfixed]) for v in basis):
                logger.debug(f"sample point has a relation at numerator degree {r}")
                return r
        return None


def _pick(vectors: Sequence[Sequence[RatFun]], nfixed: int, collapse=None) -> Optional[List[RatFun]]:
    """The solution whose normalized operator has the fewest terms, then the smallest text"""
    best = None
    for vector in vectors:
        coeffs = collapse(vector) if collapse else list(vector[:nfixed])
        op = OreOp.from_coeffs(coeffs)
        if op.is_zero:
            continue
        normalized = normalize_op(op) if op.order >= 1 else op
        key = (normalized.term_count(), normalized.to_text())
        if best is None or key < best[0]:
            best = (key, list(vector))
    return best[1] if best else None


def _sample_point(rng: random.Random) -> Dict[str, Fraction]:
    return random_point(rng)


def _deadline() -> Optional[float]:
    budget = settings.SEARCH_BUDGET_SECONDS
    return time.monotonic() + budget if budget else None


def _out_of_time(deadline: Optional[float]) -> bool:
    return deadline is not None and time.monotonic() > deadline


# -------------------------
# q-Sister-Celine
# -------------------------

def celine_q(term: HyperTerm, I: int, J: int, rng: Optional[random.Random] = None) -> Optional[CelineRelation]:
    """Relation sum_{i<=I, j<=J} a_ij(x) F(n+i, k+j) = 0, or None when only the trivial one exists"""
    if I < 0 or J < 0:
        raise AnsatzError("Celine bounds must be non-negative")
    rng = rng or random.Random(settings.SEED)
    pairs = [(i, j) for i in range(I + 1) for j in range(J + 1)]
    ansatz = _Ansatz([t_product(term, i, j) for i, j in pairs])

    def collapse(vector):
        coeffs = [QXY.zero] * (I + 1)
        for (i, _), a in zip(pairs, vector):
            coeffs[i] += a
        return coeffs

    vector = _pick(ansatz.symbolic_basis(0, _sample_point(rng)), len(pairs), collapse)
    if vector is None:
        logger.info(f"celine: no relation for {term.name} with I={I}, J={J}")
        return None

    op = OreOp.from_coeffs(collapse(vector))
    normalized = normalize_op(op) if op.order >= 1 else op
    u = normalized.leading / op.leading
    coeffs = {pair: u * a for pair, a in zip(pairs, vector)}
    logger.info(f"celine: {term.name} relation of order {normalized.order}")
    return CelineRelation(coeffs, normalized)


# -------------------------
# q-Zeilberger
# -------------------------

def _degree_bound(term: HyperTerm, order: int) -> int:
    """Numerator degree in y that the cleared order-`order` system can need"""
    t = term.t
    return (order + 1) * (t.numer.degree(RY) + t.denom.degree(RY))


def _zeilberger_denominator(term: HyperTerm, S: Sequence[RatFun], order: int) -> RatFun:
    L = term.t.denom
    for S_i in S[1:]:
        L = L.lcm(S_i.denom).lcm(shift_y(S_i, -1).denom)
    y_power = order + 1 + term.t.denom.degree(RY)
    return QXY.new(L * RY ** y_power, RING.one)


def _zeilberger_rhs(term: HyperTerm, cert: RatFun) -> Optional[RatFun]:
    """-Cert(n, 0) F(n, 0) for a sum starting at k = 0, zero for natural boundaries"""
    if term.natural_boundaries:
        return QXY.zero
    try:
        at_zero = as_ratfun(substitute(cert, y_val=1))
    except PoleError:
        return None
    if not at_zero:
        return QXY.zero
    if term.boundary is not None:
        return -at_zero * term.boundary
    return None


def qzeilberger(term: HyperTerm, max_order: int, max_numdeg: Optional[int] = None,
                rng: Optional[random.Random] = None) -> Optional[Tuple[InhomRec, RatFun]]:
    """
    Minimal-order operator with sum_i a_i F(n+i, k) = (E_k - 1)(Cert F) and the certificate.

    The rhs of the returned recursion is the boundary term of the sum over k >= 0.
    """
    if max_order < 1:
        raise AnsatzError("max_order must be at least 1")
    rng = rng or random.Random(settings.SEED)
    point = _sample_point(rng)
    deadline = _deadline()

    for order in range(1, max_order + 1):
        if _out_of_time(deadline):
            raise SearchExhaustedError(
                f"qzeilberger: search budget of {settings.SEARCH_BUDGET_SECONDS}s used up before order {order}",
                [{"order": o} for o in range(1, order)],
            )
        S = [s_product(term, i) for i in range(order + 1)]
        D = _zeilberger_denominator(term, S, order)
        ansatz = _Ansatz(S, [(0, 1 / D), (1, -term.t / shift_y(D, 1))])

        limit = max_numdeg if max_numdeg is not None else max(settings.MAX_NUMDEG, _degree_bound(term, order))
        r = ansatz.first_degree(limit, point)
        if r is None:
            logger.debug(f"qzeilberger: no order {order} relation for {term.name} up to degree {limit}")
            continue

        vector = _pick(ansatz.symbolic_basis(r, point), order + 1)
        if vector is None:
            logger.warning(f"qzeilberger: sample point and symbolic solve disagree at order {order}")
            continue

        op = OreOp.from_coeffs(vector[:order + 1])
        cert = ansatz.numerator(vector) / D
        residual = sum((a * S_i for a, S_i in zip(op.coeffs, S)), QXY.zero) - (shift_y(cert, 1) * term.t - cert)
        if residual:
            logger.error(f"qzeilberger: certificate identity fails for {term.name} at order {order}")
            continue

        rhs = _zeilberger_rhs(term, cert)
        if rhs is None:
            logger.warning(f"qzeilberger: boundary term of {term.name} is not rational, trying a higher order")
            continue

        normalized = normalize_rec(InhomRec(op, rhs))
        u = normalized.op.leading / op.leading
        logger.info(f"qzeilberger: {term.name} satisfies an order {normalized.order} recursion")
        return normalized, cert * u

    return None


# -------------------------
# Multi-certificate telescoping
# -------------------------

def build_R(rec: BiOreOp, t: RatFun) -> List[RatFun]:
    """R_i = r_i(y) * prod_{j < p-i} t(x, q^(i+j) y); R_p = 1"""
    P = rec.order
    if rec.coeffs[P] != QXY.one:
        raise NormalizationError("the recursion in k must have leading coefficient 1")
    R = []
    for i in range(P + 1):
        value = rec.coeffs[i]
        for j in range(P - i):
            value *= shift_y(t, i + j)
        R.append(value)
    return R


def chain_certs(c_top: RatFun, R: Sequence[RatFun]) -> CertSet:
    """C_(j-1)(x, y) = C_j(x, y/q) + C_(p-1)(x, y) R_j(x, y/q), starting from C_(p-1) = c_top"""
    P = len(R) - 1
    certs = [QXY.zero] * P
    certs[P - 1] = as_ratfun(c_top)
    for j in range(P - 1, 0, -1):
        certs[j - 1] = shift_y(certs[j], -1) + certs[P - 1] * shift_y(R[j], -1)
    return CertSet(tuple(certs))


def default_denominator(p: int) -> RatFun:
    """
    p > 0: q^(pk) prod_{i=1-p}^{p-1} (1 - q^(k-n-i))
    p < 0: prod_{i=1}^{2|p|} (1 - q^(k-n+|p|-i))
    """
    if p == 0:
        raise UnsupportedKnotError("p = 0 is the unknot")
    D = QXY.one
    if p > 0:
        D = Y ** p
        for i in range(1 - p, p):
            D *= 1 - Q ** (-i) * Y / X
    else:
        for i in range(1, 2 * abs(p) + 1):
            D *= 1 - Q ** (abs(p) - i) * Y / X
    return D


def extra_denominator_factors(p: int) -> List[RatFun]:
    """The factors (1 - q^(k-n-i)) just outside the default range"""
    if p > 0:
        shifts = [p, -p]
    else:
        shifts = [-abs(p), abs(p) + 1]
    return [1 - Q ** (-i) * Y / X for i in shifts]


def residuals(result: TelescopeResult, kernel: HyperTerm, jhat_rec: BiOreOp) -> Dict[str, List[RatFun]]:
    """
    Symbolic residuals of the certificate system:
    main:  sum_i a_i S_i + C_(p-1)(x, qy) R_0 + C_0 = 0
    chain: C_(j-1)(x, qy) - C_j - C_(p-1)(x, qy) R_j = 0 for 1 <= j < p
    """
    if result.pointwise:
        raise DomainError("a pointwise result carries no symbolic certificates; its residuals exist only at its points")
    R = build_R(jhat_rec, kernel.t)
    certs = result.certs
    P = len(R) - 1
    top_next = shift_y(certs[P - 1], 1)

    main = sum((a * s_product(kernel, i) for i, a in enumerate(result.rec.op.coeffs)), QXY.zero)
    main += top_next * R[0] + certs[0]
    chain = [shift_y(certs[j - 1], 1) - certs[j] - top_next * R[j] for j in range(1, P)]
    return {"main": [main], "chain": chain}


def residuals_vanish(result: TelescopeResult, kernel: HyperTerm, jhat_rec: BiOreOp) -> bool:
    found = residuals(result, kernel, jhat_rec)
    return all(not r for group in found.values() for r in group)


class MulticertSystem:
    """
    sum_i a_i S_i(x, y) + sum_{j=0}^{p} C_(p-1)(x, q^(1-j) y) R_j(x, q^(-j) y) = 0

    with C_(p-1) = (sum_e d_e y^e) / D. This is the main residual with C_0
    eliminated through the chain relations.
    """

    def __init__(self, kernel: HyperTerm, jhat_rec: BiOreOp, m: int, D: RatFun):
        if not D:
            raise AnsatzError("certificate denominator vanishes identically")
        self.kernel = kernel
        self.jhat_rec = jhat_rec
        self.m = m
        self.D = as_ratfun(D)
        self.R = build_R(jhat_rec, kernel.t)
        P = jhat_rec.order

        inverse = 1 / self.D
        blocks = [(1 - j, shift_y(inverse, 1 - j) * shift_y(self.R[j], -j)) for j in range(P + 1)]
        self.ansatz = _Ansatz([s_product(kernel, i) for i in range(m + 1)], blocks)

    def operator_at(self, r_d: int, point: Dict[str, Fraction]) -> Optional[List[Fraction]]:
        """Operator coefficients at the point divided by the leading one, or None"""
        basis = self.ansatz.numeric_basis(r_d, point)
        parts = [v[:self.m + 1] for v in basis if any(v[:self.m + 1])]
        if not parts:
            return None
        part = parts[0]
        if not part[-1]:
            return None
        normalized = [c / part[-1] for c in part]
        for other in parts[1:]:
            if other[-1] and [c / other[-1] for c in other] != normalized:
                logger.warning(f"operator part of the order {self.m} nullspace is not one-dimensional at the sample point")
                break
        return normalized

    def point_solution(self, r_d: int, point: Dict[str, Fraction]) -> Optional[Tuple[List[Fraction], CertSet]]:
        """
        The system solved over QQ at (q, x), scaled so that a_m = 1.

        Returns the operator coefficients and the certificates with x fixed
        to the point (y and q stay symbolic so the chain shifts still apply).
        """
        basis = [v for v in self.ansatz.numeric_basis(r_d, point) if v[self.m]]
        if not basis:
            return None
        vector = [c / basis[0][self.m] for c in basis[0]]
        nfixed, q_val, x_val = self.ansatz.nfixed, point["q"], point["x"]

        numerator = QXY.zero
        for e, d in enumerate(vector[nfixed:]):
            if d:
                numerator += as_ratfun(d * q_val ** (e * self.ansatz.q_shift)) * Y ** e
        c_top = as_ratfun(substitute(numerator / self.D, x_val=x_val))
        R = [as_ratfun(substitute(R_j, x_val=x_val)) for R_j in self.R]
        return vector[:self.m + 1], chain_certs(c_top, R)

    def solve(self, r_d: int, point: Optional[Dict[str, Fraction]] = None) -> Optional[TelescopeResult]:
        vector = _pick(self.ansatz.symbolic_basis(r_d, point), self.m + 1)
        if vector is None:
            return None

        op = OreOp.from_coeffs(vector[:self.m + 1])
        if op.order < 1:
            return None
        c_top = self.ansatz.numerator(vector) / self.D
        certs = chain_certs(c_top, self.R)

        normalized = normalize_op(op)
        u = normalized.leading / op.leading
        result = TelescopeResult(
            rec=InhomRec(normalized, QXY.zero),
            certs=certs.scale(u),
            denominator=self.D,
            r_d=r_d,
        )
        if not residuals_vanish(result, self.kernel, self.jhat_rec):
            logger.error(f"multicert: nonzero residual at m={self.m}, r_d={r_d}")
            return None
        return result


def _check_orders(jhat_rec: BiOreOp, p: int):
    if p == 0:
        raise UnsupportedKnotError("p = 0 is the unknot")
    if jhat_rec.order != abs(p):
        raise NormalizationError(f"recursion in k has order {jhat_rec.order}, expected {abs(p)}")


def multicert_telescope(kernel: HyperTerm, jhat_rec: BiOreOp, p: int, m: int, r_d: int,
                        D: Optional[RatFun] = None, point: Optional[Dict[str, Fraction]] = None) -> Optional[TelescopeResult]:
    """Operator of order m and certificates with numerator degree r_d over D, or None"""
    _check_orders(jhat_rec, p)
    D = default_denominator(p) if D is None else D
    point = point or _sample_point(random.Random(settings.SEED))
    return MulticertSystem(kernel, jhat_rec, m, D).solve(r_d, point)


def multicert_at_point(kernel: HyperTerm, jhat_rec: BiOreOp, p: int, m: int, r_d: int,
                       D: Optional[RatFun], point: Dict[str, Fraction]) -> Optional[List[Fraction]]:
    """The same system solved over QQ at (q, x); operator coefficients divided by a_m"""
    _check_orders(jhat_rec, p)
    D = default_denominator(p) if D is None else D
    return MulticertSystem(kernel, jhat_rec, m, D).operator_at(r_d, point)


def boundary_value(result: TelescopeResult, kernel: HyperTerm, jhat_values: Sequence) -> RatFun:
    """G(n, 0) = sum_j C_j(x, 1) c(n, j) Jhat(j)"""
    total = QXY.zero
    for j, cert in enumerate(result.certs):
        if cert:
            total += as_ratfun(substitute(cert, y_val=1)) * kernel.column(j) * as_ratfun(jhat_values[j])
    return total


def boundary_rhs(result: TelescopeResult, kernel: HyperTerm, jhat_values: Sequence,
                 sequence_values: Optional[Sequence] = None) -> Tuple[RatFun, int]:
    """
    The right-hand side b = sign * G(n, 0).

    Summing (E_k - 1) G over k >= 0 leaves -G(n, 0); when sequence values are
    given both signs are tried and the one annihilating the sequence is kept.
    """
    G0 = boundary_value(result, kernel, jhat_values)
    if not G0:
        return QXY.zero, -1
    if sequence_values is None:
        return -G0, -1

    for sign in (-1, 1):
        candidate = normalize_rec(InhomRec(result.rec.op, sign * G0))
        failing = first_mismatch(candidate, sequence_values)
        if failing is None:
            logger.info(f"boundary orientation {'telescoped' if sign < 0 else 'printed'} passes the annihilation check")
            return sign * G0, sign
        logger.debug(f"boundary sign {sign} fails at n={failing}")
    raise BoundaryError("neither boundary orientation annihilates the sequence")


def find_recursion(kernel: HyperTerm, jhat_rec: BiOreOp, p: int, jhat_values: Sequence,
                   sequence_values: Optional[Sequence] = None, max_order: Optional[int] = None,
                   max_numdeg: Optional[int] = None, rng: Optional[random.Random] = None) -> TelescopeResult:
    """
    Escalate m from the expected order (2p-1 for p > 0, 2|p| for p < 0) and the
    numerator degree from 0 until the multi-certificate system has a solution.
    The default denominator is tried first, then extended by one extra factor.
    """
    _check_orders(jhat_rec, p)
    max_order = settings.MAX_ORDER if max_order is None else max_order
    max_numdeg = settings.MAX_NUMDEG if max_numdeg is None else max_numdeg
    rng = rng or random.Random(settings.SEED)
    point = _sample_point(rng)
    target = 2 * p - 1 if p > 0 else 2 * abs(p)
    deadline = _deadline()

    base = default_denominator(p)
    denominators = [("default", base)] + [(f"extra factor {i + 1}", base * f) for i, f in enumerate(extra_denominator_factors(p))]
    attempts = []

    for label, D in denominators:
        if label != "default":
            logger.warning(f"find_recursion: retrying p={p} with the {label}")
        for m in range(target, max_order + 1):
            if _out_of_time(deadline):
                raise SearchExhaustedError(
                    f"search budget of {settings.SEARCH_BUDGET_SECONDS}s used up for p={p} at m={m}", attempts
                )
            system = MulticertSystem(kernel, jhat_rec, m, D)
            r_d = system.ansatz.first_degree(max_numdeg, point)
            attempts.append({"denominator": label, "m": m, "r_d": r_d})
            if r_d is None:
                logger.debug(f"find_recursion: no order {m} solution with the {label} denominator")
                continue

            logger.info(f"find_recursion: p={p} sample point has a solution at m={m}, r_d={r_d}")
            result = system.solve(r_d, point)
            if result is None:
                continue

            b, sign = boundary_rhs(result, kernel, jhat_values, sequence_values)
            final = normalize_rec(InhomRec(result.rec.op, b))
            u = final.op.leading / result.rec.op.leading
            return replace(result, rec=final, certs=result.certs.scale(u), boundary_sign=sign)

    raise SearchExhaustedError(f"no recursion found for p={p} within order {max_order} and numerator degree {max_numdeg}", attempts)
