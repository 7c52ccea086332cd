"""Exact arithmetic in Q(sqrt 13): scalars and dense matrices, with sympy polynomials in (t, a, b)."""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Dict, List, Sequence, Tuple, Union

from sympy import Expr, Matrix, Poly, QQ, Rational, expand, sqrt, symbols, sympify

from .errors import NotSymmetricError, ShapeMismatchError

ROOT = 13

Number = Union[int, Fraction, "Q13Scalar"]


def _sign(value: Fraction) -> int:
    return (value > 0) - (value < 0)


@total_ordering
@dataclass(frozen=True)
class Q13Scalar:
    """p + q*sqrt(13) with rational p, q."""

    p: Fraction = Fraction(0)
    q: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "p", Fraction(self.p))
        object.__setattr__(self, "q", Fraction(self.q))

    @classmethod
    def of(cls, value: Number) -> "Q13Scalar":
        return value if isinstance(value, Q13Scalar) else cls(Fraction(value))

    def sign(self) -> int:
        sp, sq = _sign(self.p), _sign(self.q)
        if sq == 0 or sp == sq:
            return sp or sq
        if sp == 0:
            return sq
        # opposite signs: the larger of p^2 and 13 q^2 wins (never equal)
        return sp if self.p * self.p > ROOT * self.q * self.q else sq

    def norm(self) -> Fraction:
        return self.p * self.p - ROOT * self.q * self.q

    def __add__(self, other):
        if not isinstance(other, SCALAR_TYPES):
            return NotImplemented
        other = Q13Scalar.of(other)
        return Q13Scalar(self.p + other.p, self.q + other.q)

    __radd__ = __add__

    def __neg__(self):
        return Q13Scalar(-self.p, -self.q)

    def __sub__(self, other):
        if not isinstance(other, SCALAR_TYPES):
            return NotImplemented
        return self + (-Q13Scalar.of(other))

    def __rsub__(self, other):
        return Q13Scalar.of(other) - self

    def __mul__(self, other):
        if not isinstance(other, SCALAR_TYPES):
            return NotImplemented
        other = Q13Scalar.of(other)
        return Q13Scalar(self.p * other.p + ROOT * self.q * other.q, self.p * other.q + self.q * other.p)

    __rmul__ = __mul__

    def inverse(self) -> "Q13Scalar":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 13)")
        return Q13Scalar(self.p / n, -self.q / n)

    def __truediv__(self, other):
        if not isinstance(other, SCALAR_TYPES):
            return NotImplemented
        return self * Q13Scalar.of(other).inverse()

    def __rtruediv__(self, other):
        return Q13Scalar.of(other) * self.inverse()

    def __pow__(self, exponent: int):
        result = Q13Scalar(1)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.q == 0 and self.p == other
        if not isinstance(other, Q13Scalar):
            return NotImplemented
        return self.p == other.p and self.q == other.q

    def __hash__(self):
        return hash((self.p, self.q))

    def __lt__(self, other):
        if not isinstance(other, (int, Fraction, Q13Scalar)):
            return NotImplemented
        return (self - other).sign() < 0

    def __bool__(self):
        return bool(self.p) or bool(self.q)

    def __float__(self):
        return float(self.p) + float(self.q) * math.sqrt(ROOT)

    def __str__(self):
        return f"{self.p} + {self.q}*sqrt(13)"


SCALAR_TYPES = (int, Fraction, Q13Scalar)

ZERO = Q13Scalar()
ONE = Q13Scalar(1)
SQRT13 = Q13Scalar(0, 1)

Monomial = Tuple[int, int, int]

T_SYM, A_SYM, B_SYM = symbols("t a b")
GENS = (T_SYM, A_SYM, B_SYM)
SQRT13_EXPR = sqrt(ROOT)
FIELD = QQ.algebraic_field(SQRT13_EXPR)


def _fraction(value: Rational) -> Fraction:
    return Fraction(int(value.p), int(value.q))


def to_expr(value: Number) -> Expr:
    s = Q13Scalar.of(value)
    return Rational(s.p.numerator, s.p.denominator) + Rational(s.q.numerator, s.q.denominator) * SQRT13_EXPR


def from_expr(expr) -> Q13Scalar:
    """Read p + q*sqrt(13) back from an exact sympy number."""
    expr = expand(sympify(expr))
    q = expr.coeff(SQRT13_EXPR)
    p = expand(expr - q * SQRT13_EXPR)
    if not (p.is_Rational and q.is_Rational):
        raise ShapeMismatchError(f"{expr} is not an element of Q(sqrt 13)")
    return Q13Scalar(_fraction(p), _fraction(q))


def q13_poly(expr) -> Poly:
    """Polynomial in (t, a, b) with coefficients in Q(sqrt 13)."""
    return Poly(expr, *GENS, domain=FIELD)


def coefficients(poly: Poly) -> Dict[Monomial, Q13Scalar]:
    """Nonzero coefficients keyed by (t, a, b) exponents."""
    found = {tuple(m): from_expr(c) for m, c in poly.terms()}
    return {m: c for m, c in found.items() if c}


def coefficient(poly: Poly, monomial: Monomial) -> Q13Scalar:
    return coefficients(poly).get(tuple(monomial), ZERO)


def evaluate(poly: Poly, t: Number, a: Number, b: Number) -> Q13Scalar:
    point = {sym: to_expr(value) for sym, value in zip(GENS, (t, a, b))}
    return from_expr(poly.as_expr().subs(point))


class Q13Matrix:
    """Dense square matrix over Q(sqrt 13)."""

    def __init__(self, rows: Sequence[Sequence[Number]]):
        n = len(rows)
        if any(len(row) != n for row in rows):
            raise ShapeMismatchError("matrix must be square")
        self.n = n
        self.entries: List[List[Q13Scalar]] = [[Q13Scalar.of(x) for x in row] for row in rows]

    @classmethod
    def zeros(cls, n: int) -> "Q13Matrix":
        return cls([[ZERO] * n for _ in range(n)])

    def __getitem__(self, index: Tuple[int, int]) -> Q13Scalar:
        i, j = index
        return self.entries[i][j]

    def is_symmetric(self) -> bool:
        return all(self.entries[i][j] == self.entries[j][i] for i in range(self.n) for j in range(i))

    def require_symmetric(self) -> None:
        if not self.is_symmetric():
            raise NotSymmetricError("matrix is not symmetric")

    def replace(self, i: int, j: int, value: Number) -> "Q13Matrix":
        """Copy with entry (i, j) set; the mirrored entry follows."""
        rows = [list(row) for row in self.entries]
        rows[i][j] = Q13Scalar.of(value)
        rows[j][i] = Q13Scalar.of(value)
        return Q13Matrix(rows)

    def to_float(self):
        return [[float(x) for x in row] for row in self.entries]

    def to_sympy(self) -> Matrix:
        return Matrix([[to_expr(x) for x in row] for row in self.entries])

    def quadratic_form(self, vector: Sequence) -> Expr:
        """Expanded v^T M v for a vector of sympy expressions."""
        v = Matrix(list(vector))
        return expand((v.T * self.to_sympy() * v)[0, 0])


def ldl_pivots(m: Q13Matrix) -> Tuple[bool, List[Q13Scalar]]:
    """Symmetric-pivoted LDL^T; returns (is_psd, pivots taken so far)."""
    m.require_symmetric()
    work = [list(row) for row in m.entries]
    remaining = list(range(m.n))
    pivots: List[Q13Scalar] = []
    while remaining:
        k = max(remaining, key=lambda i: work[i][i])
        d = work[k][k]
        if d < 0:
            return False, pivots
        if d == 0:
            # every remaining diagonal is <= 0; PSD only if the rest is identically zero
            if any(work[i][j] for i in remaining for j in remaining):
                return False, pivots
            pivots.extend(ZERO for _ in remaining)
            return True, pivots
        pivots.append(d)
        remaining.remove(k)
        for i in remaining:
            if not work[i][k]:
                continue
            factor = work[i][k] / d
            for j in remaining:
                if work[k][j]:
                    work[i][j] = work[i][j] - factor * work[k][j]
    return True, pivots
