"""Exact check of the sum-of-squares certificate bounding the qubit value of
theorem1_game by t* = (16 + sqrt 13)/45, with numeric cross-checks."""

import logging
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
from sympy import Matrix, Poly, Rational

from .core_model import theorem1_game
from .errors import CertificateInvalidError
from .q13 import A_SYM as A, B_SYM as B, T_SYM as T
from .q13 import ZERO, Q13Matrix, Q13Scalar, coefficients, ldl_pivots, q13_poly, to_expr
from .quantum import THEOREM1_ALICE_PAIRS, THEOREM1_BOB_PAIRS, QubitStrategy, omega, principal_eigenvalue

logger = logging.getLogger(__name__)

F = Fraction
T_STAR = Q13Scalar(F(16, 45), F(1, 45))

MONOMIAL_NAMES = ("1", "a", "b", "ab", "t", "t^2")

PUBLISHED_Q1_EIGENVALUES = (1.255390507, 0.020376547, 0.000059985, 0.000024167, 0.000015112)

GRID_SLACK = 1e-9
DEFAULT_GRID_POINTS = 201


def _q(p_num, q_num, den) -> Q13Scalar:
    return Q13Scalar(F(p_num, den), F(q_num, den))


CONSTANTS = {
    "alpha": _q(973343, 240821, 371790000),
    "beta": _q(33139, -617, 82620000),
    "gamma": _q(20, -1, 45000),
    "delta": -_q(1721, 62, 81000),
    "epsilon": _q(25, -2, 600),
    "zeta": _q(21592, -2903, 185895000),
    "eta": _q(-2, 1, 45000),
    "theta": _q(-91, 617, 82620000),
    "iota": _q(-47, 127, 4590000),
    "kappa": _q(37, 1, 150),
    "lambda": _q(91, 31, 20250),
    "mu": _q(8203, -1325, 743580000),
    "nu": _q(871, 127, 9180000),
}

RANK_ONE_EIGENVALUES = {
    "Q2": _q(91, 31, 20250),
    "Q3": _q(39377, 4481, 371790000),
    "Q4": _q(39377, 4481, 371790000),
}


def f_polynomial() -> Poly:
    """Characteristic polynomial of Omega(a, b) in t."""
    s = (1 + A) * (1 + B)
    return q13_poly(T ** 4 - T ** 3
                    + Rational(1, 100) * (32 + s) * T ** 2
                    - Rational(1, 500) * (16 + 3 * s) * T
                    + Rational(1, 5000) * s * (4 - (1 - A) * (1 - B)))


def monomial_vector() -> Matrix:
    return Matrix([1, A, B, A * B, T, T ** 2])


def sos_matrices() -> Tuple[Tuple[str, ...], Dict[str, Q13Matrix]]:
    c = CONSTANTS
    m3, e2 = F(-3, 1000), F(1, 200)
    q1 = Q13Matrix([
        [c["alpha"], c["beta"], c["beta"], c["gamma"], c["delta"], c["epsilon"]],
        [c["beta"], c["zeta"], c["eta"], c["theta"], m3, e2],
        [c["beta"], c["eta"], c["zeta"], c["theta"], m3, e2],
        [c["gamma"], c["theta"], c["theta"], c["iota"], m3, e2],
        [c["delta"], m3, m3, m3, c["kappa"], F(-1, 2)],
        [c["epsilon"], e2, e2, e2, F(-1, 2), 1],
    ])
    q2 = Q13Matrix.zeros(6).replace(0, 0, c["lambda"])
    q3 = Q13Matrix.zeros(6).replace(0, 0, c["mu"]).replace(2, 2, c["nu"]).replace(0, 2, c["theta"])
    q4 = Q13Matrix.zeros(6).replace(0, 0, c["mu"]).replace(1, 1, c["nu"]).replace(0, 1, c["theta"])
    return MONOMIAL_NAMES, {"Q1": q1, "Q2": q2, "Q3": q3, "Q4": q4}


def sos_expansion(matrices: Dict[str, Q13Matrix]) -> Poly:
    """v^T (Q1 + (t - t*) Q2 + (1 - a^2) Q3 + (1 - b^2) Q4) v"""
    v = monomial_vector()
    multipliers = {
        "Q1": 1,
        "Q2": T - to_expr(T_STAR),
        "Q3": 1 - A ** 2,
        "Q4": 1 - B ** 2,
    }
    return q13_poly(sum(multiplier * matrices[name].quadratic_form(v) for name, multiplier in multipliers.items()))


def sos_identity_mismatch(matrices: Optional[Dict[str, Q13Matrix]] = None):
    """First monomial (t, a, b exponents) where the expansion differs from f, with both coefficients."""
    if matrices is None:
        matrices = sos_matrices()[1]
    expanded = coefficients(sos_expansion(matrices))
    target = coefficients(f_polynomial())
    for monomial in sorted(set(expanded) | set(target), reverse=True):
        lhs, rhs = expanded.get(monomial, ZERO), target.get(monomial, ZERO)
        if lhs != rhs:
            return monomial, lhs, rhs
    return None


def verify_sos_identity(matrices: Optional[Dict[str, Q13Matrix]] = None) -> bool:
    mismatch = sos_identity_mismatch(matrices)
    if mismatch is not None:
        logger.warning(f"SOS identity fails at monomial {mismatch[0]}: {mismatch[1]} != {mismatch[2]}")
    return mismatch is None


def verify_psd(m: Q13Matrix) -> bool:
    return ldl_pivots(m)[0]


@dataclass
class CertificateReport:
    identity_ok: bool
    psd_ok: Dict[str, bool]
    pivots: Dict[str, List[str]]
    lambda_value: str
    lambda_positive: bool
    grid_max_eigenvalue: Optional[float] = None
    grid_ok: Optional[bool] = None
    mismatch: Optional[str] = None
    t_star: str = field(default_factory=lambda: str(T_STAR))

    @property
    def valid(self) -> bool:
        return (self.identity_ok and all(self.psd_ok.values()) and self.lambda_positive
                and self.grid_ok is not False)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["valid"] = self.valid
        return data


def build_report(matrices: Optional[Dict[str, Q13Matrix]] = None,
                 grid_points: Optional[int] = None) -> CertificateReport:
    if matrices is None:
        matrices = sos_matrices()[1]
    mismatch = sos_identity_mismatch(matrices)
    psd_ok, pivots = {}, {}
    for name, m in matrices.items():
        ok, steps = ldl_pivots(m)
        psd_ok[name] = ok
        pivots[name] = [str(p) for p in steps]
    lam = matrices["Q2"][0, 0]
    report = CertificateReport(
        identity_ok=mismatch is None,
        psd_ok=psd_ok,
        pivots=pivots,
        lambda_value=str(lam),
        lambda_positive=lam > 0,
        mismatch=None if mismatch is None else f"{mismatch[0]}: {mismatch[1]} != {mismatch[2]}",
    )
    if grid_points:
        report.grid_max_eigenvalue = grid_max_eigenvalue(grid_points)
        report.grid_ok = report.grid_max_eigenvalue <= float(T_STAR) + GRID_SLACK
    return report


def certify_upper_bound(grid_points: Optional[int] = None) -> CertificateReport:
    """f(t, a, b) >= (t - t*) lambda > 0 for t > t*, a, b in [-1, 1]; raises on any failed step."""
    report = build_report(grid_points=grid_points)
    if not report.identity_ok:
        raise CertificateInvalidError("sos-identity", report.mismatch)
    for name, ok in report.psd_ok.items():
        if not ok:
            raise CertificateInvalidError(f"psd-{name}")
    if not report.lambda_positive:
        raise CertificateInvalidError("lambda-positive", report.lambda_value)
    if report.grid_ok is False:
        raise CertificateInvalidError("grid", f"{report.grid_max_eigenvalue:.12f} exceeds {float(T_STAR):.12f}")
    logger.info(f"Certificate valid: qubit value of theorem1_game is at most {float(T_STAR):.12f}")
    return report


_GAME = theorem1_game()


def omega_ab(a: float, b: float) -> np.ndarray:
    """Omega with A_0 = B_0 = diag(1, 0), A_1 = Pi(alpha/2), B_1 = Pi((pi - beta)/2), a = cos alpha, b = cos beta."""
    alpha, beta = np.arccos(np.clip(a, -1, 1)), np.arccos(np.clip(b, -1, 1))
    angles = (0.0, alpha / 2, 0.0, (np.pi - beta) / 2)
    strat = QubitStrategy(angles, THEOREM1_ALICE_PAIRS, THEOREM1_BOB_PAIRS, 3)
    return omega(_GAME, *strat.families())


def grid_max_eigenvalue(points: int = DEFAULT_GRID_POINTS) -> float:
    grid = np.linspace(-1.0, 1.0, points)
    best = -np.inf
    for a in grid:
        for b in grid:
            best = max(best, principal_eigenvalue(omega_ab(a, b))[0])
    logger.info(f"Grid maximum over {points}x{points} points: {best:.12f}")
    return float(best)


@lru_cache(maxsize=1)
def _f_float_terms() -> Tuple[Tuple[int, int, int, float], ...]:
    return tuple((i, j, k, float(c)) for (i, j, k), c in coefficients(f_polynomial()).items())


def f_coefficients(a: float, b: float) -> np.ndarray:
    """Coefficients of f(., a, b) in t, highest degree first."""
    coeffs = np.zeros(5)
    for i, j, k, c in _f_float_terms():
        coeffs[4 - i] += c * a ** j * b ** k
    return coeffs


def charpoly_mismatch(samples: int = 50, seed: int = 0) -> float:
    """Largest coefficient gap between det(tI - Omega(a, b)) and f(t, a, b)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for a, b in rng.uniform(-1, 1, size=(samples, 2)):
        eigenvalues = np.linalg.eigvalsh(omega_ab(a, b))
        worst = max(worst, float(np.max(np.abs(np.poly(eigenvalues) - f_coefficients(a, b)))))
    return worst


def q1_nonzero_eigenvalues(tol: float = 1e-12) -> List[float]:
    values = np.linalg.eigvalsh(np.array(sos_matrices()[1]["Q1"].to_float()))
    return sorted((float(v) for v in values if abs(v) > tol), reverse=True)
