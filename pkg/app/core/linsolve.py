"""
Exact linear algebra over Q(q)(x): fraction-free Bareiss elimination on
polynomial matrices plus exact evaluation-point rank and nullspace over QQ.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from app.core.exactfield import QXY, RING, VARIABLES, MPoly, RatFun, as_ratfun, to_fraction, to_qq

logger = logging.getLogger(__name__)

Point = Mapping[str, Fraction]


def _eval_poly(poly: MPoly, values: Sequence, cache: Dict) -> object:
    total = QQ.zero
    for monom, coeff in poly.iterterms():
        term = coeff
        for index, e in enumerate(monom):
            if e:
                key = (index, e)
                if key not in cache:
                    cache[key] = values[index] ** e
                term *= cache[key]
        total += term
    return total


def _point_values(point: Point) -> List:
    values = [QQ.zero] * len(VARIABLES)
    for name, index in VARIABLES.items():
        values[index] = to_qq(point.get(name, 0))
    return values


@dataclass
class FFMatrix:
    """Matrix of polynomials in RING; rows carry no common denominator"""

    rows: List[List[MPoly]]
    ncols: int

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], ncols: Optional[int] = None) -> "FFMatrix":
        """Clear the denominators of each row and drop its polynomial content"""
        cleared = []
        for row in rows:
            entries = [as_ratfun(e) for e in row]
            denominator = RING.one
            for e in entries:
                if e:
                    denominator = denominator.lcm(e.denom)
            polys = [e.numer * denominator.exquo(e.denom) if e else RING.zero for e in entries]
            cleared.append(_primitive_row(polys))
        if ncols is None:
            ncols = len(cleared[0]) if cleared else 0
        return cls(cleared, ncols)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def select(self, indices: Sequence[int]) -> "FFMatrix":
        return FFMatrix([self.rows[i] for i in indices], self.ncols)

    def evaluate(self, point: Point) -> DomainMatrix:
        values = _point_values(point)
        cache: Dict = {}
        data = [[_eval_poly(e, values, cache) for e in row] for row in self.rows]
        return DomainMatrix(data, (self.nrows, self.ncols), QQ)

    def apply(self, vector: Sequence[RatFun]) -> List[RatFun]:
        result = []
        for row in self.rows:
            total = QXY.zero
            for e, v in zip(row, vector):
                if e and v:
                    total += QXY.new(e, RING.one) * v
            result.append(total)
        return result


def _primitive_row(polys: List[MPoly]) -> List[MPoly]:
    g = RING.zero
    for p in polys:
        if p:
            g = p if not g else g.gcd(p)
            if g == RING.one:
                return polys
    if not g:
        return polys
    return [p.exquo(g) if p else p for p in polys]


# -------------------------
# Evaluation-point linear algebra
# -------------------------

def rank_at(M: FFMatrix, point: Point) -> int:
    if not M.rows:
        return 0
    return M.evaluate(point).rank()


def nullspace_at(M: FFMatrix, point: Point) -> List[List[Fraction]]:
    """Basis of the nullspace of M evaluated at the point; first nonzero entry of each vector is 1"""
    if not M.rows:
        return [[Fraction(int(i == j)) for j in range(M.ncols)] for i in range(M.ncols)]
    basis = M.evaluate(point).nullspace().to_list()
    normalized = []
    for vector in basis:
        vector = [to_fraction(c) for c in vector]
        lead = next(c for c in vector if c)
        normalized.append([c / lead for c in vector])
    return normalized


def independent_rows(M: FFMatrix, point: Point) -> List[int]:
    """Indices of rows that are linearly independent at the point"""
    if not M.rows:
        return []
    _, pivots = M.evaluate(point).transpose().rref()
    return list(pivots)


# -------------------------
# Bareiss elimination
# -------------------------

def _bareiss(rows: List[List[MPoly]], ncols: int):
    """
    One-step fraction-free elimination with full pivoting.

    Returns (echelon rows, column permutation, rank); pivot r sits at
    (r, perm[r]). Each update is divided exactly by the previous pivot.
    """
    A = [list(r) for r in rows if any(r)]
    perm = list(range(ncols))
    previous = RING.one
    rank = 0

    while rank < len(A):
        best = None
        for i in range(rank, len(A)):
            for jpos in range(rank, ncols):
                entry = A[i][perm[jpos]]
                if entry:
                    key = (len(entry), i, perm[jpos])
                    if best is None or key < best[0]:
                        best = (key, i, jpos)
        if best is None:
            break

        _, i, jpos = best
        A[rank], A[i] = A[i], A[rank]
        perm[rank], perm[jpos] = perm[jpos], perm[rank]
        pivot_col = perm[rank]
        pivot = A[rank][pivot_col]

        for i in range(rank + 1, len(A)):
            factor = A[i][pivot_col]
            row = A[i]
            for jpos in range(rank + 1, ncols):
                j = perm[jpos]
                updated = pivot * row[j]
                if factor and A[rank][j]:
                    updated -= factor * A[rank][j]
                row[j] = updated.exquo(previous) if updated else updated
            row[pivot_col] = RING.zero

        logger.debug(f"bareiss step {rank}: pivot with {len(pivot)} terms at column {pivot_col}")
        previous = pivot
        rank += 1

    return A, perm, rank


def _nullspace(M: FFMatrix) -> List[List[RatFun]]:
    U, perm, rank = _bareiss(M.rows, M.ncols)
    basis = []
    for free_pos in range(rank, M.ncols):
        vector = [QXY.zero] * M.ncols
        vector[perm[free_pos]] = QXY.one
        for r in range(rank - 1, -1, -1):
            total = QXY.zero
            for jpos in range(r + 1, M.ncols):
                j = perm[jpos]
                if U[r][j] and vector[j]:
                    total += QXY.new(U[r][j], RING.one) * vector[j]
            vector[perm[r]] = -total / QXY.new(U[r][perm[r]], RING.one)
        basis.append(_normalize_vector(vector))
    basis.sort(key=lambda v: next(i for i, c in enumerate(v) if c))
    return basis


def _normalize_vector(vector: List[RatFun]) -> List[RatFun]:
    lead = next(c for c in vector if c)
    return [c / lead for c in vector]


def is_null(M: FFMatrix, vector: Sequence[RatFun]) -> bool:
    return all(not e for e in M.apply(vector))


def nullspace(M: FFMatrix, point: Optional[Point] = None) -> List[List[RatFun]]:
    """
    Basis of the right nullspace over Q(q)(x); each vector has first nonzero entry 1.

    With a point, only rows independent at that point are eliminated and the
    basis is checked against the full matrix afterwards.
    """
    if point is not None and M.rows:
        keep = independent_rows(M, point)
        if len(keep) < M.nrows:
            logger.debug(f"eliminating {len(keep)} of {M.nrows} rows independent at the sample point")
            basis = _nullspace(M.select(keep))
            if all(is_null(M, v) for v in basis):
                return basis
            logger.warning("sample point was degenerate, eliminating the full matrix")
    return _nullspace(M)


def solve(M, b: Sequence) -> Optional[List[RatFun]]:
    """One exact solution of M v = b, or None when the system is inconsistent"""
    rows = M.rows if isinstance(M, FFMatrix) else M
    augmented = [[as_ratfun(e) for e in row] + [-as_ratfun(rhs)] for row, rhs in zip(rows, b)]
    ncols = (M.ncols if isinstance(M, FFMatrix) else len(rows[0])) + 1
    system = FFMatrix.from_rows(augmented, ncols)

    for vector in nullspace(system):
        last = vector[-1]
        if last:
            return [v / last for v in vector[:-1]]
    return None
