"""
Test exact nullspaces and solves over Q(q)(x)
"""
import os
import sys
from fractions import Fraction

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from app.core.exactfield import Q, X
from app.core.linsolve import FFMatrix, is_null, nullspace, nullspace_at, rank_at, solve


def test_nullspace_of_single_row():
    assert nullspace(FFMatrix.from_rows([[1, 1]])) == [[1, -1]]


def test_nullspace_of_identity_is_empty():
    assert nullspace(FFMatrix.from_rows([[1, 0], [0, 1]])) == []


def test_nullspace_with_polynomial_entries():
    assert nullspace(FFMatrix.from_rows([[X - 1, X ** 2 - 1]])) == [[1, -1 / (X + 1)]]


def test_nullspace_is_null():
    M = FFMatrix.from_rows([[1, X, Q, X * Q], [X, 1, Q ** 2, 0]])
    basis = nullspace(M)
    assert len(basis) == 2
    assert all(is_null(M, v) for v in basis)
    assert nullspace(M, {"q": Fraction(3), "x": Fraction(5, 7)}) == basis


def test_rank_and_nullity_at_point():
    M = FFMatrix.from_rows([[1, X, 0], [X, X ** 2, 0]])
    point = {"q": Fraction(2), "x": Fraction(3)}
    assert rank_at(M, point) == 1
    assert len(nullspace_at(M, point)) == 2


def test_solve_scalar():
    assert solve([[2]], [X]) == [X / 2]


def test_solve_square_system():
    M = [[1, X, Q], [X, 1, 0], [0, Q, X + 1]]
    v = [1, X, Q]
    b = [sum(m * c for m, c in zip(row, v)) for row in M]
    assert solve(M, b) == v


def test_solve_inconsistent():
    assert solve([[1], [1]], [1, 2]) is None


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
    print("linsolve tests passed")
