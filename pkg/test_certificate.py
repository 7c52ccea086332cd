import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from sympy import sqrt

import lssd.certificate as certificate
from lssd.certificate import (
    PUBLISHED_Q1_EIGENVALUES,
    RANK_ONE_EIGENVALUES,
    T_STAR,
    build_report,
    certify_upper_bound,
    charpoly_mismatch,
    f_polynomial,
    grid_max_eigenvalue,
    omega_ab,
    q1_nonzero_eigenvalues,
    sos_expansion,
    sos_matrices,
    verify_psd,
    verify_sos_identity,
)
from lssd.errors import CertificateInvalidError, NotSymmetricError, ShapeMismatchError
from lssd.q13 import (
    A_SYM,
    B_SYM,
    ONE,
    SQRT13,
    T_SYM,
    Q13Matrix,
    Q13Scalar,
    coefficient,
    coefficients,
    evaluate,
    from_expr,
    ldl_pivots,
    q13_poly,
    to_expr,
)

F = Fraction


def random_scalar(rng, size=10 ** 6):
    return Q13Scalar(F(rng.randint(-size, size), rng.randint(1, 10 ** 4)),
                     F(rng.randint(-size, size), rng.randint(1, 10 ** 4)))


def random_gram(rng, n, rank, shift=None):
    """B B^T - shift*I for a random n x rank matrix B over Q(sqrt 13)."""
    b = [[Q13Scalar(F(rng.randint(-9, 9), rng.randint(1, 5)), F(rng.randint(-3, 3), rng.randint(1, 5)))
          for _ in range(rank)] for _ in range(n)]
    if shift is None:
        shift = F(rng.randint(0, 40), 4)
    return Q13Matrix([
        [sum((b[i][k] * b[j][k] for k in range(rank)), Q13Scalar()) - (shift if i == j else 0) for j in range(n)]
        for i in range(n)
    ])


class TestQ13Scalar:
    @pytest.mark.parametrize("p, q, sign", [
        (4, -1, 1),
        (3, -1, -1),
        (-4, 1, -1),
        (-3, 1, 1),
        (0, 0, 0),
        (0, -2, -1),
        (5, 0, 1),
    ])
    def test_sign(self, p, q, sign):
        assert Q13Scalar(p, q).sign() == sign

    @settings(max_examples=500)
    @given(st.fractions(-10 ** 6, 10 ** 6, max_denominator=10 ** 4),
           st.fractions(-10 ** 6, 10 ** 6, max_denominator=10 ** 4))
    def test_sign_agrees_with_float(self, p, q):
        approx = float(p) + float(q) * np.sqrt(13.0)
        assume(abs(approx) > 1e-6)
        assert Q13Scalar(p, q).sign() == (1 if approx > 0 else -1)

    def test_order_agrees_with_float(self):
        rng = random.Random(13)
        checked = 0
        for _ in range(10 ** 4):
            x, y = random_scalar(rng), random_scalar(rng)
            gap = float(x) - float(y)
            if abs(gap) <= 1e-6:
                continue
            checked += 1
            assert (x < y) == (gap < 0)
            assert (x > y) == (gap > 0)
        assert checked > 9900

    def test_near_cancellation(self):
        # 649^2 - 13 * 180^2 = 1, so 649 - 180 sqrt13 is a tiny positive unit
        assert Q13Scalar(649, -180) > 0
        assert Q13Scalar(-649, 180) < 0
        assert Q13Scalar(649, -180) * Q13Scalar(649, 180) == 1

    def test_sqrt13_squared(self):
        assert SQRT13 * SQRT13 == 13

    def test_inverse(self):
        x = Q13Scalar(F(2, 3), F(-5, 7))
        assert x * x.inverse() == ONE
        assert (1 / x) * x == 1

    def test_ordering(self):
        assert Q13Scalar(4, -1) > 0
        assert Q13Scalar(3, -1) < 0
        assert T_STAR > F(2, 5)
        assert T_STAR < F(1, 2)

    def test_str(self):
        assert str(T_STAR) == "16/45 + 1/45*sqrt(13)"

    def test_zero_division(self):
        with pytest.raises(ZeroDivisionError):
            Q13Scalar(0, 0).inverse()


class TestSympyPolynomials:
    def test_square(self):
        square = q13_poly((T_SYM + 1) ** 2)
        assert coefficient(square, (2, 0, 0)) == 1
        assert coefficient(square, (1, 0, 0)) == 2
        assert coefficient(square, (0, 0, 0)) == 1

    def test_evaluate(self):
        poly = q13_poly(A_SYM * B_SYM + sqrt(13) * A_SYM)
        assert evaluate(poly, 0, 2, 3) == Q13Scalar(6, 2)
        assert evaluate(poly, 0, F(1, 2), SQRT13) == Q13Scalar(0, 1)

    def test_cancellation_drops_terms(self):
        assert coefficients(q13_poly(T_SYM - T_SYM)) == {}

    def test_field_coefficients(self):
        poly = q13_poly((T_SYM - sqrt(13)) * (T_SYM + sqrt(13)))
        assert coefficients(poly) == {(2, 0, 0): ONE, (0, 0, 0): Q13Scalar(-13)}

    def test_expression_round_trip(self):
        x = Q13Scalar(F(-7, 3), F(5, 11))
        assert from_expr(to_expr(x)) == x
        assert from_expr(to_expr(x) ** 2) == x * x

    def test_outside_field_rejected(self):
        with pytest.raises(ShapeMismatchError):
            from_expr(sqrt(2))

    def test_quadratic_form(self):
        m = Q13Matrix([[1, SQRT13], [SQRT13, 2]])
        form = q13_poly(m.quadratic_form([A_SYM, B_SYM]))
        assert coefficients(form) == {(0, 2, 0): ONE, (0, 1, 1): Q13Scalar(0, 2), (0, 0, 2): Q13Scalar(2)}


class TestQ13Matrix:
    def test_replace_is_symmetric(self):
        m = Q13Matrix.zeros(3).replace(0, 2, SQRT13)
        assert m[2, 0] == SQRT13
        assert m.is_symmetric()

    def test_asymmetric_rejected(self):
        with pytest.raises(NotSymmetricError):
            ldl_pivots(Q13Matrix([[1, 2], [0, 1]]))

    @pytest.mark.parametrize("rows, psd", [
        ([[1, 2], [2, 1]], False),
        ([[0, 1], [1, 0]], False),
        ([[0, 0], [0, 0]], True),
        ([[1, 1], [1, 1]], True),
        ([[2, 0], [0, -1]], False),
    ])
    def test_psd(self, rows, psd):
        assert verify_psd(Q13Matrix(rows)) is psd

    def test_irrational_entries(self):
        # [[sqrt13, 3], [3, sqrt13]] has eigenvalues sqrt13 +- 3 > 0
        assert verify_psd(Q13Matrix([[SQRT13, 3], [3, SQRT13]]))
        assert not verify_psd(Q13Matrix([[SQRT13, 4], [4, SQRT13]]))

    def test_psd_agrees_with_float_eigenvalues(self):
        rng = random.Random(5)
        verdicts = []
        for _ in range(300):
            n = rng.randint(2, 4)
            m = random_gram(rng, n, n)
            eigenvalues = np.linalg.eigvalsh(np.array(m.to_float()))
            if np.min(np.abs(eigenvalues)) < 1e-6:
                continue
            expected = bool(eigenvalues.min() > 0)
            assert verify_psd(m) is expected
            verdicts.append(expected)
        assert len(verdicts) > 250
        assert any(verdicts) and not all(verdicts)

    def test_rank_deficient_gram_is_psd(self):
        rng = random.Random(8)
        for _ in range(20):
            ok, pivots = ldl_pivots(random_gram(rng, 4, 2, shift=0))
            assert ok
            assert pivots.count(0) >= 2


class TestPolynomial:
    def test_t_squared_coefficients(self):
        f = f_polynomial()
        assert coefficient(f, (2, 0, 0)) == F(33, 100)
        assert coefficient(f, (2, 1, 1)) == F(1, 100)
        assert coefficient(f, (2, 1, 0)) == F(1, 100)
        assert coefficient(f, (2, 0, 1)) == F(1, 100)

    def test_monic_quartic(self):
        f = f_polynomial()
        assert coefficient(f, (4, 0, 0)) == 1
        assert f.degree(T_SYM) == 4
        assert f.degree(A_SYM) == f.degree(B_SYM) == 2

    def test_charpoly_matches(self):
        assert charpoly_mismatch(samples=50, seed=0) < 1e-9

    def test_omega_ab_is_hermitian(self):
        m = omega_ab(0.3, -0.7)
        assert np.allclose(m, m.conj().T)


class TestCertificate:
    def test_identity(self):
        assert verify_sos_identity()

    def test_identity_at_random_rational_points(self):
        rng = random.Random(20)
        expansion, f = sos_expansion(sos_matrices()[1]), f_polynomial()
        for _ in range(20):
            t, a, b = (F(rng.randint(-50, 50), rng.randint(1, 30)) for _ in range(3))
            assert evaluate(expansion, t, a, b) == evaluate(f, t, a, b)

    def test_certified_bound_at_rational_points(self):
        # above t* every a, b in [-1, 1] leaves f strictly positive
        rng = random.Random(21)
        f = f_polynomial()
        for _ in range(20):
            t = T_STAR + F(rng.randint(1, 100), 1000)
            a, b = F(rng.randint(-20, 20), 20), F(rng.randint(-20, 20), 20)
            assert evaluate(f, t, a, b) > 0

    def test_matrices_are_psd(self):
        names, matrices = sos_matrices()
        assert names == ("1", "a", "b", "ab", "t", "t^2")
        for m in matrices.values():
            assert verify_psd(m)

    def test_report(self):
        report = certify_upper_bound()
        assert report.valid
        assert report.lambda_positive
        assert set(report.psd_ok) == {"Q1", "Q2", "Q3", "Q4"}
        data = report.to_dict()
        assert data["valid"] is True
        assert data["t_star"] == "16/45 + 1/45*sqrt(13)"

    def test_tampered_q1_entry_breaks_identity(self):
        _, matrices = sos_matrices()
        matrices = dict(matrices)
        q1 = matrices["Q1"]
        matrices["Q1"] = q1.replace(0, 0, q1[0, 0] + F(1, 1000))
        assert not verify_sos_identity(matrices)
        report = build_report(matrices)
        assert report.mismatch.startswith("(0, 0, 0)")
        assert not report.valid
        assert report.psd_ok["Q2"]

    def test_tampered_lambda_breaks_identity(self):
        _, matrices = sos_matrices()
        matrices = dict(matrices)
        matrices["Q2"] = matrices["Q2"].replace(0, 0, F(1, 100))
        assert not verify_sos_identity(matrices)
        report = build_report(matrices)
        assert not report.identity_ok
        assert report.mismatch is not None
        assert not report.valid

    def test_rank_one_eigenvalues(self):
        _, matrices = sos_matrices()
        assert matrices["Q2"][0, 0] == RANK_ONE_EIGENVALUES["Q2"]
        q3 = matrices["Q3"]
        assert q3[0, 0] + q3[2, 2] == RANK_ONE_EIGENVALUES["Q3"]
        assert q3[0, 0] * q3[2, 2] == q3[0, 2] * q3[0, 2]

    def test_q1_spectrum(self):
        found = q1_nonzero_eigenvalues()
        assert found == pytest.approx(list(PUBLISHED_Q1_EIGENVALUES), rel=1e-6, abs=2e-9)

    def test_coarse_grid(self):
        assert grid_max_eigenvalue(21) <= float(T_STAR) + 1e-9

    def test_grid_enters_report(self):
        report = build_report(grid_points=11)
        assert report.grid_ok is True
        assert report.valid
        assert report.to_dict()["grid_ok"] is True

    def test_grid_above_bound_invalidates(self, monkeypatch):
        monkeypatch.setattr(certificate, "grid_max_eigenvalue", lambda points: float(T_STAR) + 1e-6)
        report = build_report(grid_points=5)
        assert report.identity_ok and all(report.psd_ok.values())
        assert report.grid_ok is False
        assert not report.valid
        with pytest.raises(CertificateInvalidError) as info:
            certify_upper_bound(grid_points=5)
        assert info.value.step == "grid"

    def test_no_grid_leaves_field_empty(self):
        report = build_report()
        assert report.grid_ok is None and report.grid_max_eigenvalue is None
        assert report.valid

    @pytest.mark.slow
    def test_fine_grid(self):
        assert grid_max_eigenvalue(201) <= float(T_STAR) + 1e-9


def test_certificate_error_names_step():
    error = CertificateInvalidError("psd-Q1", "negative pivot")
    assert error.step == "psd-Q1"
    assert "psd-Q1" in str(error)
