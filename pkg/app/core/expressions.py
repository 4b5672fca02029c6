"""
Text grammar shared by fixtures, the CLI and the HTTP service.

Integers, the symbols q x y n k E Ek L M Q P, + - * ^ ( ) and implicit
multiplication. ``q^(a*n + c*k + b)`` is read as ``q^b * x^a * y^c``.
"""
import logging
from functools import lru_cache
from typing import List, Sequence, Tuple

import sympy
from sympy import QQ, Symbol
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication,
    parse_expr,
    standard_transformations,
)
from sympy.polys.fields import field
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyElement, ring

from app.core.errors import ParseError
from app.core.exactfield import QXY, RING, RatFun, as_ratfun

logger = logging.getLogger(__name__)

_TRANSFORMATIONS = standard_transformations + (implicit_multiplication, convert_xor)
SYMBOLS = {name: Symbol(name) for name in ("q", "x", "y", "n", "k", "E", "Ek", "L", "M", "Q", "P")}

# Field carrying a shift symbol next to x, y, q for operator parsing
_OPFIELDS = {
    "E": field("x,y,q,E", QQ, lex)[0],
    "Ek": field("x,y,q,Ek", QQ, lex)[0],
}


def _to_sympy(text: str) -> sympy.Expr:
    if not text or not text.strip():
        raise ParseError("empty expression")
    try:
        expr = parse_expr(text, local_dict=dict(SYMBOLS), transformations=_TRANSFORMATIONS, evaluate=True)
    except Exception as e:
        raise ParseError(f"Cannot parse expression {text!r}: {str(e)}")
    return _rewrite_q_powers(sympy.sympify(expr))


def _rewrite_q_powers(expr: sympy.Expr) -> sympy.Expr:
    q, n, k = SYMBOLS["q"], SYMBOLS["n"], SYMBOLS["k"]

    def is_symbolic_q_power(e):
        return e.is_Pow and e.base == q and not e.exp.is_Integer

    def rewrite(e):
        exp = sympy.expand(e.exp)
        a = exp.coeff(n)
        c = exp.coeff(k)
        b = sympy.expand(exp - a * n - c * k)
        if not all(v.is_Integer for v in (a, b, c)):
            raise ParseError(f"exponent {e.exp} is not of the form a*n + c*k + b")
        return q ** b * SYMBOLS["x"] ** a * SYMBOLS["y"] ** c

    expr = expr.replace(is_symbolic_q_power, rewrite)
    if expr.has(n) or expr.has(k):
        raise ParseError("n and k may only appear in exponents of q")
    return expr


def parse_ratfun(text: str) -> RatFun:
    """Parse an element of Q(x, y, q)"""
    expr = _to_sympy(text)
    try:
        return QXY.from_expr(expr)
    except (ValueError, TypeError) as e:
        raise ParseError(f"{text!r} is not a rational function of x, y, q: {str(e)}")


def parse_operator(text: str, shift: str = "E") -> List[RatFun]:
    """Parse sum_i a_i * shift^i (coefficients written to the left) into [a_0, ..., a_I]"""
    opfield = _OPFIELDS[shift]
    expr = _to_sympy(text)
    try:
        element = opfield.from_expr(expr)
    except (ValueError, TypeError) as e:
        raise ParseError(f"{text!r} is not an operator in {shift}: {str(e)}")

    if any(m[3] for m in element.denom.itermonoms()):
        raise ParseError(f"{shift} may not appear in a denominator")

    den = RING.from_dict({m[:3]: c for m, c in element.denom.iterterms()})
    buckets = {}
    for monom, coeff in element.numer.iterterms():
        buckets.setdefault(monom[3], {})[monom[:3]] = coeff

    if not buckets:
        return [QXY.zero]
    order = max(buckets)
    return [QXY.new(RING.from_dict(buckets.get(i, {})), den) for i in range(order + 1)]


@lru_cache(maxsize=None)
def shadow_ring(names: Tuple[str, ...]):
    """Commutative polynomial ring over QQ in the given names, e.g. ("L", "M")"""
    return ring(",".join(names), QQ, lex)[0]


def parse_polynomial(text: str, names: Sequence[str]) -> PolyElement:
    """Parse a polynomial in the commutative variables ``names`` (e.g. L, M)"""
    target = shadow_ring(tuple(names))
    expr = sympy.sympify(_to_sympy(text))
    try:
        return target.from_expr(expr)
    except (ValueError, TypeError) as e:
        raise ParseError(f"{text!r} is not a polynomial in {', '.join(names)}: {str(e)}")


# -------------------------
# Formatting
# -------------------------

def format_expr(f) -> str:
    """Grammar-compatible text of a rational function or polynomial"""
    if isinstance(f, PolyElement) and f.ring != RING:
        expr = f.as_expr()
    else:
        expr = as_ratfun(f).as_expr()
    return str(expr).replace("**", "^")


def format_latex(f) -> str:
    if isinstance(f, PolyElement) and f.ring != RING:
        return sympy.latex(f.as_expr())
    return sympy.latex(as_ratfun(f).as_expr())


def operator_expr(coeffs: Sequence[RatFun], shift: str = "E") -> sympy.Expr:
    symbol = SYMBOLS[shift]
    return sympy.Add(*[sympy.Mul(as_ratfun(a).as_expr(), symbol ** i, evaluate=True) for i, a in enumerate(coeffs) if a])


def format_operator(coeffs: Sequence[RatFun], shift: str = "E") -> str:
    """Left-normalized text a_0 + (a_1)*E + (a_2)*E^2 ..."""
    pieces = []
    for i, a in enumerate(coeffs):
        if not a:
            continue
        body = format_expr(a)
        if i == 0:
            pieces.append(f"({body})")
        elif i == 1:
            pieces.append(f"({body})*{shift}")
        else:
            pieces.append(f"({body})*{shift}^{i}")
    return " + ".join(pieces) if pieces else "0"


def format_operator_latex(coeffs: Sequence[RatFun], shift: str = "E") -> str:
    return sympy.latex(operator_expr(coeffs, shift))

