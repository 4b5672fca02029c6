"""
Ore operators in the shift E (E f(x) = f(qx) E) and E_k (E_k f(y) = f(qy) E_k).

Operators are stored left-normalized: coefficient a_i sits to the left of E^i.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from sympy import QQ

from app.core.errors import AlreadyHomogeneousError, DomainError, NormalizationError
from app.core.exactfield import (
    QXY,
    RING,
    X_INDEX,
    Y_INDEX,
    QPoly,
    RatFun,
    as_laurent,
    as_ratfun,
    at_power,
    depends_on,
    evaluate,
    shift_x,
    shift_y,
    term_count,
)
from app.core.expressions import format_expr, format_operator, parse_operator, parse_ratfun

logger = logging.getLogger(__name__)

Value = Union[QPoly, RatFun]


@dataclass(frozen=True)
class OreOp:
    """sum_i a_i(x) E^i with a_I != 0 (the zero operator has no coefficients)"""

    coeffs: Tuple[RatFun, ...]
    shift: str = "E"

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, shift: str = "E") -> "OreOp":
        coeffs = [as_ratfun(a) for a in coeffs]
        while coeffs and not coeffs[-1]:
            coeffs.pop()
        return cls(tuple(coeffs), shift)

    @classmethod
    def parse(cls, text: str, shift: str = "E") -> "OreOp":
        return cls.from_coeffs(parse_operator(text, shift), shift)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> RatFun:
        return self.coeffs[-1]

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def twist(self, f: RatFun, j: int) -> RatFun:
        """The commutation rule: E^j f = twist(f, j) E^j"""
        return shift_x(f, j) if self.shift == "E" else shift_y(f, j)

    def __add__(self, other: "OreOp") -> "OreOp":
        return ore_add(self, other)

    def __mul__(self, other: "OreOp") -> "OreOp":
        return ore_mul(self, other)

    def __neg__(self) -> "OreOp":
        return type(self)(tuple(-a for a in self.coeffs), self.shift)

    def scale(self, u: RatFun) -> "OreOp":
        """Left multiplication by a rational function"""
        return type(self).from_coeffs([u * a for a in self.coeffs], self.shift)

    def term_count(self) -> int:
        return sum(term_count(a) for a in self.coeffs)

    def to_text(self) -> str:
        return format_operator(self.coeffs, self.shift)

    def to_json(self, rhs: Optional[RatFun] = None) -> Dict:
        return {
            "order": self.order,
            "coeffs": [format_expr(a) for a in self.coeffs],
            "rhs": format_expr(rhs) if rhs is not None else None,
        }


class BiOreOp(OreOp):
    """Operator in E_k with coefficients in x and y; houses the recursion of the cyclotomic function"""

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, shift: str = "Ek") -> "BiOreOp":
        coeffs = [as_ratfun(a) for a in coeffs]
        while coeffs and not coeffs[-1]:
            coeffs.pop()
        return cls(tuple(coeffs), shift)


@dataclass(frozen=True)
class InhomRec:
    """A J = b"""

    op: OreOp
    rhs: RatFun

    def __post_init__(self):
        if self.op.order < 1:
            raise DomainError("an inhomogeneous recursion needs an operator of order >= 1")

    @property
    def order(self) -> int:
        return self.op.order

    @property
    def is_homogeneous(self) -> bool:
        return not self.rhs

    def to_json(self) -> Dict:
        return self.op.to_json(self.rhs)

    @classmethod
    def from_json(cls, payload: Dict) -> "InhomRec":
        op = OreOp.from_coeffs([parse_ratfun(a) for a in payload["coeffs"]])
        rhs = parse_ratfun(payload["rhs"]) if payload.get("rhs") else QXY.zero
        return cls(op, rhs)


def ore_add(A: OreOp, B: OreOp) -> OreOp:
    size = max(len(A.coeffs), len(B.coeffs))
    coeffs = [QXY.zero] * size
    for i, a in enumerate(A.coeffs):
        coeffs[i] += a
    for i, b in enumerate(B.coeffs):
        coeffs[i] += b
    return type(A).from_coeffs(coeffs, A.shift)


def ore_mul(A: OreOp, B: OreOp) -> OreOp:
    """Product in the skew ring: (a_i E^i)(b_j E^j) = a_i * b_j(q^i x) E^(i+j)"""
    if A.shift != B.shift:
        raise DomainError(f"cannot multiply operators in {A.shift} and {B.shift}")
    if A.is_zero or B.is_zero:
        return type(A).from_coeffs([], A.shift)

    coeffs = [QXY.zero] * (A.order + B.order + 1)
    for i, a in enumerate(A.coeffs):
        if not a:
            continue
        for j, b in enumerate(B.coeffs):
            if b:
                coeffs[i + j] += a * A.twist(b, i)
    return type(A).from_coeffs(coeffs, A.shift)


def _coefficient_at(A: OreOp, a: RatFun, n: int) -> RatFun:
    if A.shift == "E":
        return at_power(a, n)
    if depends_on(a, X_INDEX):
        raise DomainError("applying an E_k operator to a sequence needs coefficients free of x")
    return at_power(a, 0, n)


def ore_apply(A: OreOp, values: Sequence[Value], at: int, start: int = 0) -> Value:
    """
    sum_i a_i(q^n) J(n + i) with ``values[m - start] = J(m)``.

    Returns a QPoly when the result is a Laurent polynomial, otherwise a rational
    function of q. Missing values raise IndexError, a coefficient pole raises PoleError.
    """
    last = at - start + A.order
    if at < start or last >= len(values):
        raise IndexError(f"values for n={at}..{at + A.order} are not available")

    total = QXY.zero
    for i, a in enumerate(A.coeffs):
        if a:
            total += _coefficient_at(A, a, at) * as_ratfun(values[at - start + i])
    laurent = as_laurent(total)
    return laurent if laurent is not None else total


def apply_sequence(A: OreOp, values: Sequence[Value], start: int = 0) -> List[Value]:
    """The sequence m -> ore_apply(A, values, m) on every index where it is defined"""
    return [ore_apply(A, values, m, start) for m in range(start, start + len(values) - A.order)]


def homogenize(rec: InhomRec) -> OreOp:
    """
    (E - 1) (1/R) A: an order I+1 operator annihilating every solution of A J = R.

    E^(I+1) gets a_I(qx)/R(qx), E^i gets a_(i-1)(qx)/R(qx) - a_i(x)/R(x) and the
    constant term is -a_0(x)/R(x).
    """
    R = rec.rhs
    if not R:
        raise AlreadyHomogeneousError("recursion is already homogeneous")

    a = list(rec.op.coeffs)
    top = rec.op.order
    R_next = shift_x(R, 1)

    coeffs = [QXY.zero] * (top + 2)
    coeffs[top + 1] = shift_x(a[top], 1) / R_next
    for i in range(1, top + 1):
        coeffs[i] = shift_x(a[i - 1], 1) / R_next - a[i] / R
    coeffs[0] = -a[0] / R
    return OreOp.from_coeffs(coeffs)


# -------------------------
# Normal forms
# -------------------------

def _clear(functions: Sequence[RatFun]) -> List:
    """Common-denominator polynomials with no polynomial or rational content"""
    denominator = RING.one
    for f in functions:
        if f:
            denominator = denominator.lcm(f.denom)
    polys = [f.numer * denominator.exquo(f.denom) if f else RING.zero for f in functions]

    g = RING.zero
    for p in polys:
        if p:
            g = p if not g else g.gcd(p)
    if g:
        polys = [p.exquo(g) if p else p for p in polys]

    content = QQ.zero
    for p in polys:
        for c in p.itercoeffs():
            content = QQ.gcd(content, c)
    if content:
        polys = [p.quo_ground(content) for p in polys]
    return polys


def normalize_rec(rec: InhomRec) -> InhomRec:
    """
    Output convention: clear all denominators, divide by the content over Q(q)
    and the rational content, and make the leading coefficient's leading
    monomial positive (lex x > y > q).
    """
    polys = _clear(list(rec.op.coeffs) + [rec.rhs])
    if not polys[-2]:
        raise NormalizationError("leading coefficient vanished during normalization")
    if polys[-2].LC < 0:
        polys = [-p for p in polys]

    functions = [QXY.new(p, RING.one) for p in polys]
    return InhomRec(OreOp.from_coeffs(functions[:-1], rec.op.shift), functions[-1])


def normalize_op(op: OreOp) -> OreOp:
    return normalize_rec(InhomRec(op, QXY.zero)).op


def unit_between(ours: InhomRec, theirs: InhomRec) -> Optional[RatFun]:
    """u with theirs = u * ours coefficient-wise, when u is a unit of Q(q) times a power of x"""
    if ours.order != theirs.order:
        return None
    u = theirs.op.leading / ours.op.leading

    for poly in (u.numer, u.denom):
        x_degrees = {m[X_INDEX] for m in poly.itermonoms()}
        if len(x_degrees) != 1 or any(m[Y_INDEX] for m in poly.itermonoms()):
            return None

    for a, b in zip(ours.op.coeffs, theirs.op.coeffs):
        if u * a != b:
            return None
    if u * ours.rhs != theirs.rhs:
        return None
    return u


def equal_up_to_unit(ours: InhomRec, theirs: InhomRec) -> bool:
    return unit_between(ours, theirs) is not None


def evaluate_rec(rec: InhomRec, q_val, x_val) -> Tuple[List[Fraction], Fraction]:
    """Coefficients and rhs at a rational point, divided by the leading coefficient's value"""
    values = [evaluate(a, q_val, x_val) for a in rec.op.coeffs]
    rhs = evaluate(rec.rhs, q_val, x_val) if rec.rhs else Fraction(0)
    top = values[-1]
    if top == 0:
        raise NormalizationError(f"leading coefficient vanishes at q={q_val}, x={x_val}")
    return [v / top for v in values], rhs / top


def values_equal(a: Value, b: Value) -> bool:
    return as_ratfun(a) == as_ratfun(b)


def first_mismatch(rec: InhomRec, values: Sequence[Value], start: int = 0,
                   skipped: Optional[List[int]] = None) -> Optional[int]:
    """
    First n where A J(n) != b(q^n), or None when the recursion holds on every available index.

    Indices where a coefficient has a pole are not checked; they are appended
    to ``skipped`` when a list is given.
    """
    for n in range(start, start + len(values) - rec.order):
        try:
            lhs = ore_apply(rec.op, values, n, start)
            rhs = at_power(rec.rhs, n) if rec.rhs else QXY.zero
        except ZeroDivisionError:
            logger.warning(f"not checked at n={n}: coefficient pole")
            if skipped is not None:
                skipped.append(n)
            continue
        if as_ratfun(lhs) != rhs:
            return n
    return None
