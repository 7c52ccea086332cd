"""Exact rational two-phase simplex over sparse dict rows.

Variables are implicitly nonnegative. Rows are ``<=``, ``=`` or ``>=``.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .errors import InfeasibleError, ShapeMismatchError, UnboundedError

logger = logging.getLogger(__name__)

RELATIONS = ("<=", "=", ">=")
LP_HEADER = "lssd-lp v1"

# consecutive degenerate pivots before switching to Bland's rule for good
DEGENERATE_LIMIT = 50


@dataclass(frozen=True)
class Constraint:
    coeffs: Dict[int, Fraction]
    relation: str
    rhs: Fraction


@dataclass
class ExactLp:
    """maximize objective . x subject to rows, x >= 0"""

    num_vars: int
    objective: Dict[int, Fraction] = field(default_factory=dict)
    rows: List[Constraint] = field(default_factory=list)
    names: List[str] = field(default_factory=list)

    def add_row(self, coeffs: Dict[int, Fraction], relation: str, rhs) -> None:
        if relation not in RELATIONS:
            raise ShapeMismatchError(f"unknown relation {relation!r}")
        if any(not 0 <= j < self.num_vars for j in coeffs):
            raise ShapeMismatchError(f"row references a variable outside [0, {self.num_vars})")
        cleaned = {j: Fraction(c) for j, c in coeffs.items() if c}
        self.rows.append(Constraint(cleaned, relation, Fraction(rhs)))

    def objective_value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((c * x[j] for j, c in self.objective.items()), Fraction(0))

    def is_feasible(self, x: Sequence[Fraction]) -> bool:
        if len(x) != self.num_vars or any(v < 0 for v in x):
            return False
        for row in self.rows:
            lhs = sum((c * x[j] for j, c in row.coeffs.items()), Fraction(0))
            if row.relation == "<=" and lhs > row.rhs:
                return False
            if row.relation == "=" and lhs != row.rhs:
                return False
            if row.relation == ">=" and lhs < row.rhs:
                return False
        return True


class _Tableau:
    """Rows hold the basic variable with coefficient 1; ``obj`` holds reduced costs."""

    def __init__(self, lp: ExactLp):
        self.num_original = lp.num_vars
        self.rows: List[Dict[int, Fraction]] = []
        self.rhs: List[Fraction] = []
        self.basis: List[int] = []
        self.artificial = set()
        next_var = lp.num_vars
        for row in lp.rows:
            coeffs, relation, rhs = dict(row.coeffs), row.relation, row.rhs
            if rhs < 0:
                coeffs = {j: -c for j, c in coeffs.items()}
                rhs = -rhs
                relation = {"<=": ">=", ">=": "<=", "=": "="}[relation]
            if relation == "<=":
                coeffs[next_var] = Fraction(1)
                basic = next_var
                next_var += 1
            else:
                if relation == ">=":
                    coeffs[next_var] = Fraction(-1)
                    next_var += 1
                coeffs[next_var] = Fraction(1)
                basic = next_var
                self.artificial.add(next_var)
                next_var += 1
            self.rows.append(coeffs)
            self.rhs.append(rhs)
            self.basis.append(basic)
        self.obj: Dict[int, Fraction] = {}
        self.const = Fraction(0)
        self.pivots = 0

    def set_objective(self, objective: Dict[int, Fraction]) -> None:
        self.obj = {j: Fraction(c) for j, c in objective.items() if c}
        self.const = Fraction(0)
        for i, b in enumerate(self.basis):
            factor = self.obj.get(b)
            if factor:
                self._subtract_from_objective(i, factor)

    def _subtract_from_objective(self, i: int, factor: Fraction) -> None:
        for j, c in self.rows[i].items():
            value = self.obj.get(j, 0) - factor * c
            if value:
                self.obj[j] = value
            else:
                self.obj.pop(j, None)
        self.const += factor * self.rhs[i]

    def pivot(self, r: int, e: int) -> None:
        row = self.rows[r]
        piv = row[e]
        if piv != 1:
            for j in row:
                row[j] /= piv
            self.rhs[r] /= piv
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            factor = other.get(e)
            if not factor:
                continue
            for j, c in row.items():
                value = other.get(j, 0) - factor * c
                if value:
                    other[j] = value
                else:
                    other.pop(j, None)
            self.rhs[i] -= factor * self.rhs[r]
        factor = self.obj.get(e)
        if factor:
            self._subtract_from_objective(r, factor)
        self.basis[r] = e
        self.pivots += 1

    def _entering(self, blocked, bland: bool):
        candidates = [(j, c) for j, c in self.obj.items() if c > 0 and j not in blocked]
        if not candidates:
            return None
        if bland:
            return min(candidates)[0]
        return max(candidates, key=lambda item: (item[1], -item[0]))[0]

    def _leaving(self, e: int):
        best = None
        for i, row in enumerate(self.rows):
            c = row.get(e)
            if c is None or c <= 0:
                continue
            key = (self.rhs[i] / c, self.basis[i])
            if best is None or key < best[0]:
                best = (key, i)
        return None if best is None else best[1]

    def optimize(self, blocked=frozenset()) -> None:
        bland = False
        degenerate = 0
        while True:
            e = self._entering(blocked, bland)
            if e is None:
                return
            r = self._leaving(e)
            if r is None:
                raise UnboundedError(f"variable {e} can grow without bound")
            if self.rhs[r] == 0:
                degenerate += 1
                if not bland and degenerate > DEGENERATE_LIMIT:
                    logger.warning("Degenerate cycling suspected, switching to Bland's rule")
                    bland = True
            else:
                degenerate = 0
            self.pivot(r, e)
            if self.pivots % 500 == 0:
                logger.debug(f"{self.pivots} pivots, objective {self.const}")

    def drive_out_artificials(self) -> None:
        for r in range(len(self.rows) - 1, -1, -1):
            if self.basis[r] not in self.artificial:
                continue
            entering = next((j for j in sorted(self.rows[r]) if j not in self.artificial), None)
            if entering is None:
                # redundant equality
                del self.rows[r], self.rhs[r], self.basis[r]
            else:
                self.pivot(r, entering)

    def solution(self) -> List[Fraction]:
        x = [Fraction(0)] * self.num_original
        for b, value in zip(self.basis, self.rhs):
            if b < self.num_original:
                x[b] = value
        return x


def simplex_max(lp: ExactLp) -> Tuple[Fraction, List[Fraction]]:
    """Exact optimum and an optimal vertex of ``lp``."""
    tableau = _Tableau(lp)
    logger.info(f"Solving LP with {lp.num_vars} variables and {len(lp.rows)} rows")
    if tableau.artificial:
        tableau.set_objective({j: Fraction(-1) for j in tableau.artificial})
        tableau.optimize()
        if tableau.const != 0:
            raise InfeasibleError(f"phase one ended with infeasibility {-tableau.const}")
        tableau.drive_out_artificials()
    tableau.set_objective(lp.objective)
    tableau.optimize(blocked=tableau.artificial)
    x = tableau.solution()
    value = lp.objective_value(x)
    if value != tableau.const or not lp.is_feasible(x):
        raise InfeasibleError("witness does not satisfy the LP exactly")
    logger.info(f"LP optimum {value} after {tableau.pivots} pivots")
    return value, x


def dump_lp(lp: ExactLp) -> str:
    """Dense text form: one ``<coeffs...> <rel> <rhs>`` line per row."""
    def dense(coeffs):
        return " ".join(str(coeffs.get(j, Fraction(0))) for j in range(lp.num_vars))

    lines = [LP_HEADER, f"variables {lp.num_vars}", "maximize " + dense(lp.objective)]
    if lp.names:
        lines.append("# " + " ".join(lp.names))
    for row in lp.rows:
        lines.append(f"{dense(row.coeffs)} {row.relation} {row.rhs}")
    return "\n".join(lines) + "\n"
