"""
Exact arithmetic in Q(x, y, q) with x = q^n and y = q^k.

Rational functions are sympy ``FracElement`` values of the field ``QXY``.
The field cancels every result through a gcd over ZZ and fixes the sign of
the denominator, so two equal rational functions are structurally equal.
Laurent polynomials in q (colored Jones values, cyclotomic coefficients) are
``QPoly`` values wrapping a univariate sympy polynomial and a q-power shift.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Mapping, Optional, Union

from sympy import QQ
from sympy.polys.fields import FracElement, field
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyElement, ring

from app.core.errors import DomainError, PoleError

logger = logging.getLogger(__name__)

# Lex order x > y > q fixes the canonical forms used in fixture comparisons
QXY, X, Y, Q = field("x,y,q", QQ, lex)
RING = QXY.ring
RX, RY, RQ = RING.gens
X_INDEX, Y_INDEX, Q_INDEX = 0, 1, 2
VARIABLES = {"x": X_INDEX, "y": Y_INDEX, "q": Q_INDEX}

QRING, QGEN = ring("q", QQ, lex)

RatFun = FracElement
MPoly = PolyElement
Rat = Fraction
Scalar = Union[int, Fraction]


def to_fraction(value) -> Fraction:
    """Convert a sympy QQ/ZZ element (or int) to ``fractions.Fraction``"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(int(value.numerator), int(value.denominator))


def to_qq(value: Scalar):
    value = Fraction(value)
    return QQ(value.numerator, value.denominator)


def as_ratfun(value) -> RatFun:
    """Coerce ints, Fractions, ring polynomials, QPoly and field elements into ``QXY``"""
    if isinstance(value, FracElement) and value.field == QXY:
        return value
    if isinstance(value, PolyElement) and value.ring == RING:
        return QXY.new(value, RING.one)
    if isinstance(value, QPoly):
        return value.to_ratfun()
    if isinstance(value, Fraction):
        return QXY(to_qq(value))
    if isinstance(value, int):
        return QXY(value)
    raise TypeError(f"Cannot interpret {value!r} as an element of Q(x, y, q)")


def ratfun_normalize(num, den=1) -> RatFun:
    """Canonical representative of num/den; a zero denominator raises ZeroDivisionError"""
    num = as_ratfun(num)
    den = as_ratfun(den)
    if not den:
        raise ZeroDivisionError("rational function with zero denominator")
    return num / den


def qpoch(base, count: int) -> RatFun:
    """
    Unbalanced q-Pochhammer symbol (a; q)_n.

    n > 0 is the product of (1 - a q^j) for j < n, n = 0 gives 1, and n < 0 is
    the reciprocal of the product of (1 - a q^-j) for 1 <= j <= |n|.
    """
    base = as_ratfun(base)
    product = QXY.one

    if count >= 0:
        for j in range(count):
            product *= 1 - base * Q ** j
        return product

    for j in range(1, -count + 1):
        factor = 1 - base * Q ** (-j)
        if not factor:
            raise PoleError(f"(a;q)_{count} has the vanishing factor 1 - a*q^-{j}")
        product *= factor
    return 1 / product


def term_count(f: RatFun) -> int:
    return len(f.numer) + len(f.denom)


def depends_on(f: RatFun, index: int) -> bool:
    return any(m[index] for m in f.numer.itermonoms()) or any(m[index] for m in f.denom.itermonoms())


# -------------------------
# Shifts x -> q^j x, y -> q^j y and evaluation at q-powers
# -------------------------

def _rescale(poly: MPoly, weights: Mapping[int, int]):
    """Multiply every monomial by q^(sum w_i * e_i); returns (poly * q^offset, offset) with offset >= 0"""
    scaled = []
    low = 0
    for monom, coeff in poly.iterterms():
        e = monom[Q_INDEX] + sum(w * monom[i] for i, w in weights.items())
        low = min(low, e)
        scaled.append((monom, e, coeff))

    offset = -low
    terms = {}
    for monom, e, coeff in scaled:
        key = list(monom)
        key[Q_INDEX] = e + offset
        key = tuple(key)
        terms[key] = terms.get(key, QQ.zero) + coeff
    return RING.from_dict({m: c for m, c in terms.items() if c}), offset


def _shift(f: RatFun, weights: Mapping[int, int]) -> RatFun:
    if not f:
        return f
    num, a = _rescale(f.numer, weights)
    den, b = _rescale(f.denom, weights)
    result = QXY.new(num, den)
    if a != b:
        result *= Q ** (b - a)
    return result


def shift_x(f: RatFun, j: int = 1) -> RatFun:
    """f(q^j x, y); the n -> n + j shift"""
    return _shift(as_ratfun(f), {X_INDEX: j}) if j else as_ratfun(f)


def shift_y(f: RatFun, j: int = 1) -> RatFun:
    """f(x, q^j y); the k -> k + j shift"""
    return _shift(as_ratfun(f), {Y_INDEX: j}) if j else as_ratfun(f)


def _drop_to_q(poly: MPoly, weights: Mapping[int, int]):
    """Collapse x and y after rescaling; returns (poly in q alone, q-offset)"""
    moved, offset = _rescale(poly, weights)
    terms = {}
    for monom, coeff in moved.iterterms():
        key = (0, 0, monom[Q_INDEX])
        terms[key] = terms.get(key, QQ.zero) + coeff
    return RING.from_dict({m: c for m, c in terms.items() if c}), offset


def at_power(f: RatFun, n: int, k: Optional[int] = None) -> RatFun:
    """Evaluate at x = q^n (and y = q^k) to a rational function of q alone"""
    f = as_ratfun(f)
    if k is None and depends_on(f, Y_INDEX):
        raise DomainError("at_power needs k for a function of y")
    weights = {X_INDEX: n, Y_INDEX: k or 0}

    num, a = _drop_to_q(f.numer, weights)
    den, b = _drop_to_q(f.denom, weights)
    if not den:
        raise PoleError(f"denominator of {f.as_expr()} vanishes at n={n}, k={k}")
    result = QXY.new(num, den)
    if a != b:
        result *= Q ** (b - a)
    return result


def x_to_y(f: RatFun) -> RatFun:
    """Rename x to y in a function of x and q"""
    f = as_ratfun(f)
    if depends_on(f, Y_INDEX):
        raise DomainError("x_to_y expects a function free of y")

    def swap(poly):
        return RING.from_dict({(0, m[X_INDEX], m[Q_INDEX]): c for m, c in poly.iterterms()})

    return QXY.new(swap(f.numer), swap(f.denom))


# -------------------------
# Substitution
# -------------------------

def _compose(poly: MPoly, values: Mapping[int, RatFun]) -> RatFun:
    powers: Dict[tuple, RatFun] = {}
    result = QXY.zero
    for monom, coeff in poly.iterterms():
        term = QXY(coeff)
        rest = [0, 0, 0]
        for index, e in enumerate(monom):
            if not e:
                continue
            if index in values:
                key = (index, e)
                if key not in powers:
                    powers[key] = values[index] ** e
                term *= powers[key]
            else:
                rest[index] = e
        if any(rest):
            term *= QXY.new(RING.from_dict({tuple(rest): QQ.one}), RING.one)
        result += term
    return result


def substitute(f: RatFun, q_val=None, x_val=None, y_val=None) -> Union[RatFun, Fraction]:
    """
    Exact substitution of rationals or rational functions for q, x and y.

    Returns a Fraction when every variable f depends on received a rational
    value. A vanishing denominator raises PoleError.
    """
    f = as_ratfun(f)
    requested = {Q_INDEX: q_val, X_INDEX: x_val, Y_INDEX: y_val}
    numeric = [(RING.gens[i], to_qq(v)) for i, v in requested.items() if isinstance(v, (int, Fraction))]
    symbolic = {i: as_ratfun(v) for i, v in requested.items() if v is not None and not isinstance(v, (int, Fraction))}

    num, den = f.numer, f.denom
    if numeric:
        num = num.subs(numeric)
        den = den.subs(numeric)
    if not den:
        raise PoleError(f"denominator of {f.as_expr()} vanishes under the substitution")

    if symbolic:
        num_f = _compose(num, symbolic)
        den_f = _compose(den, symbolic)
        if not den_f:
            raise PoleError(f"denominator of {f.as_expr()} vanishes under the substitution")
        result = num_f / den_f
    else:
        result = QXY.new(num, den)

    if result.numer.is_ground and result.denom.is_ground:
        return to_fraction(result.numer.LC) / to_fraction(result.denom.LC) if result else Fraction(0)
    return result


def evaluate(f: RatFun, q_val: Scalar, x_val: Scalar, y_val: Scalar = 0) -> Fraction:
    """Value of f at a rational point; used by the pointwise checks"""
    value = substitute(f, q_val=Fraction(q_val), x_val=Fraction(x_val), y_val=Fraction(y_val))
    if not isinstance(value, Fraction):
        raise DomainError(f"{f.as_expr()} did not evaluate to a rational number")
    return value


# -------------------------
# Laurent polynomials in q
# -------------------------

@dataclass(frozen=True)
class QPoly:
    """Laurent polynomial q^shift * poly(q) with poly(0) != 0 (or poly = 0, shift = 0)"""

    poly: PolyElement
    shift: int = 0

    @classmethod
    def make(cls, poly: PolyElement, shift: int = 0) -> "QPoly":
        if not poly:
            return cls(QRING.zero, 0)
        low = min(m[0] for m in poly.itermonoms())
        if low:
            poly = QRING.from_dict({(m[0] - low,): c for m, c in poly.iterterms()})
        return cls(poly, shift + low)

    @classmethod
    def from_terms(cls, terms: Mapping[int, Scalar]) -> "QPoly":
        if not terms:
            return cls.zero()
        low = min(terms)
        poly = QRING.from_dict({(e - low,): to_qq(c) for e, c in terms.items() if c})
        return cls.make(poly, low)

    @classmethod
    def monomial(cls, exponent: int, coeff: Scalar = 1) -> "QPoly":
        return cls.from_terms({exponent: coeff})

    @classmethod
    def one(cls) -> "QPoly":
        return cls(QRING.one, 0)

    @classmethod
    def zero(cls) -> "QPoly":
        return cls(QRING.zero, 0)

    @classmethod
    def one_minus(cls, exponent: int) -> "QPoly":
        """1 - q^exponent"""
        if exponent == 0:
            return cls.zero()
        return cls.from_terms({0: 1, exponent: -1})

    @property
    def is_zero(self) -> bool:
        return not self.poly

    def terms(self) -> Dict[int, Fraction]:
        return {m[0] + self.shift: to_fraction(c) for m, c in self.poly.iterterms()}

    def _coerce(self, other) -> "QPoly":
        if isinstance(other, QPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return QPoly.from_terms({0: other})
        return NotImplemented

    def _aligned(self, other: "QPoly"):
        low = min(self.shift, other.shift)
        a = self.poly * QGEN ** (self.shift - low)
        b = other.poly * QGEN ** (other.shift - low)
        return a, b, low

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero:
            return self
        if self.is_zero:
            return other
        a, b, low = self._aligned(other)
        return QPoly.make(a + b, low)

    __radd__ = __add__

    def __neg__(self):
        return QPoly(-self.poly, self.shift)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QPoly.make(self.poly * other.poly, self.shift + other.shift)

    __rmul__ = __mul__

    def exquo(self, other: Union["QPoly", PolyElement]) -> "QPoly":
        """Exact division; raises sympy's ExactQuotientFailed when not exact"""
        if isinstance(other, PolyElement):
            other = QPoly.make(other)
        return QPoly.make(self.poly.exquo(other.poly), self.shift - other.shift)

    def evaluate(self, q_val: Scalar) -> Fraction:
        q_val = Fraction(q_val)
        return sum((c * q_val ** e for e, c in self.terms().items()), Fraction(0))

    def to_ratfun(self) -> RatFun:
        num = RING.from_dict({(0, 0, m[0]): c for m, c in self.poly.iterterms()})
        if self.shift >= 0:
            return QXY.new(num * RQ ** self.shift, RING.one)
        return QXY.new(num, RQ ** (-self.shift))

    def __str__(self):
        return format_laurent(self.terms())


def as_laurent(f) -> Optional[QPoly]:
    """The QPoly equal to f when f is a Laurent polynomial in q, otherwise None"""
    if isinstance(f, QPoly):
        return f
    f = as_ratfun(f)
    if depends_on(f, X_INDEX) or depends_on(f, Y_INDEX) or len(f.denom) != 1:
        return None
    (den_monom, den_coeff), = f.denom.iterterms()
    poly = QRING.from_dict({(m[Q_INDEX],): c / den_coeff for m, c in f.numer.iterterms()})
    return QPoly.make(poly, -den_monom[Q_INDEX])


def format_laurent(terms: Mapping[int, Fraction]) -> str:
    """Ascending text form, e.g. ``q + q^3 - q^4``"""
    if not terms:
        return "0"
    pieces = []
    for e in sorted(terms):
        c = Fraction(terms[e])
        sign = "-" if c < 0 else "+"
        c = abs(c)
        if e == 0:
            monom = ""
        elif e == 1:
            monom = "q"
        elif e > 0:
            monom = f"q^{e}"
        else:
            monom = f"q^({e})"

        if not monom:
            body = str(c) if c.denominator == 1 else f"({c})"
        elif c == 1:
            body = monom
        elif c.denominator == 1:
            body = f"{c}*{monom}"
        else:
            body = f"({c})*{monom}"
        pieces.append((sign, body))

    first_sign, first_body = pieces[0]
    text = ("-" if first_sign == "-" else "") + first_body
    for sign, body in pieces[1:]:
        text += f" {sign} {body}"
    return text


@lru_cache(maxsize=None)
def qfactorial(m: int) -> PolyElement:
    """(q;q)_m as a polynomial in q; m >= 0"""
    if m < 0:
        raise DomainError(f"(q;q)_{m} is not a polynomial")
    result = QRING.one
    for j in range(1, m + 1):
        result *= 1 - QGEN ** j
    return result


def laurent_qpoch(exponent: int, count: int) -> QPoly:
    """(q^exponent; q)_count for count >= 0 as a Laurent polynomial"""
    result = QPoly.one()
    for j in range(count):
        result = result * QPoly.one_minus(exponent + j)
    return result


def random_point(rng, names=("q", "x")) -> Dict[str, Fraction]:
    """Random rational evaluation point away from 0 and +-1"""
    point = {}
    for name in names:
        while True:
            value = Fraction(rng.randint(2, 97), rng.randint(2, 97)) * rng.choice((1, -1))
            if abs(value) != 1 and value not in point.values():
                break
        point[name] = value
    return point
