"""Exact linear algebra: matrices, polynomials, Smith normal form."""

from fractions import Fraction

import numpy as np
import pytest

from nilflow.ratcore import (
    RatMatrix,
    RatPoly,
    char_poly,
    factor_over_Q,
    rat,
    rat_str,
    smith_normal_form,
)


def test_rat_accepts_strings_and_ints():
    assert rat("3/4") == Fraction(3, 4)
    assert rat(-2) == Fraction(-2)
    assert rat(Fraction(1, 3)) == Fraction(1, 3)


def test_rat_str_round_trip():
    for q in (Fraction(0), Fraction(5), Fraction(-7, 3), Fraction(22, 8)):
        assert rat(rat_str(q)) == q


def test_matrix_mul_identity_and_inverse():
    rng = np.random.default_rng(101)
    for _ in range(40):
        n = int(rng.integers(1, 5))
        a = RatMatrix(rng.integers(-5, 6, size=(n, n)).tolist())
        if a.det() == 0:
            continue
        eye = RatMatrix.identity(n)
        inv = a.inverse()
        assert a * inv == eye
        assert inv * a == eye
        # determinant is multiplicative, exactly
        b = RatMatrix(rng.integers(-5, 6, size=(n, n)).tolist())
        assert (a * b).det() == a.det() * b.det()


def test_matrix_inverse_singular_raises():
    with pytest.raises(Exception):
        RatMatrix([[1, 2], [2, 4]]).inverse()


def test_matvec_exact():
    m = RatMatrix([[1, Fraction(1, 2)], [0, 3]])
    assert m.matvec((Fraction(2), Fraction(4))) == (Fraction(4), Fraction(12))


def test_rank():
    assert RatMatrix([[1, 2], [2, 4]]).rank() == 1
    assert RatMatrix.identity(3).rank() == 3
    assert RatMatrix.zeros(2, 3).rank() == 0


def test_char_poly_companion():
    # companion matrix of x^3 - 2x^2 + 5x - 7
    c = RatMatrix([[0, 0, 7], [1, 0, -5], [0, 1, 2]])
    assert char_poly(c).coeffs == (Fraction(-7), Fraction(5), Fraction(-2),
                                   Fraction(1))


def test_char_poly_matches_float_spectrum():
    rng = np.random.default_rng(77)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        a = rng.integers(-4, 5, size=(n, n))
        p = char_poly(RatMatrix(a.tolist()))
        for lam in np.linalg.eigvals(a.astype(float)):
            assert abs(p(complex(lam))) < 1e-6 * max(1.0, abs(lam)) ** n


def test_poly_divmod_property():
    rng = np.random.default_rng(5)
    for _ in range(50):
        p = RatPoly(rng.integers(-4, 5, size=int(rng.integers(1, 7))).tolist())
        d = RatPoly(rng.integers(-4, 5, size=int(rng.integers(1, 4))).tolist())
        if d.is_zero():
            continue
        q, r = p.divmod(d)
        assert (q * d + r).coeffs == p.coeffs
        assert r.is_zero() or r.degree < d.degree


def test_factor_known_polynomials():
    # x^4 - 1 = (x - 1)(x + 1)(x^2 + 1)
    f = factor_over_Q(RatPoly([-1, 0, 0, 0, 1]))
    assert {(q.coeffs, m) for q, m in f} == {
        ((Fraction(-1), Fraction(1)), 1),
        ((Fraction(1), Fraction(1)), 1),
        ((Fraction(1), Fraction(0), Fraction(1)), 1),
    }
    # x^2 - 3x + 1 is irreducible (golden-mean units)
    f = factor_over_Q(RatPoly([1, -3, 1]))
    assert len(f) == 1 and f[0][1] == 1
    # multiplicity: (x - 2)^3
    cube = RatPoly([-2, 1]) * RatPoly([-2, 1]) * RatPoly([-2, 1])
    f = factor_over_Q(cube)
    assert f == [(RatPoly([-2, 1]), 3)]


def test_factor_product_reconstruction():
    rng = np.random.default_rng(13)
    for _ in range(20):
        p = RatPoly([1])
        for _ in range(int(rng.integers(1, 4))):
            p = p * RatPoly(rng.integers(-3, 4, size=int(
                rng.integers(2, 4))).tolist() + [1])
        prod = RatPoly([p.leading])
        for q, mult in factor_over_Q(p):
            assert q.leading == 1
            for _ in range(mult):
                prod = prod * q
        assert prod.coeffs == p.coeffs


def test_smith_normal_form_properties():
    rng = np.random.default_rng(19)
    for _ in range(40):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 5))
        a = RatMatrix(rng.integers(-6, 7, size=(n, m)).tolist())
        U, D, V = smith_normal_form(a)
        assert U * a * V == D
        assert abs(U.det()) == 1 and abs(V.det()) == 1
        diag = [D[i, i] for i in range(min(n, m))]
        for i in range(n):
            for j in range(m):
                if i != j:
                    assert D[i, j] == 0
        assert all(d >= 0 for d in diag)
        nz = [d for d in diag if d != 0]
        for i in range(len(nz) - 1):
            assert nz[i + 1] % nz[i] == 0
        # zero entries come after all nonzero ones
        assert diag == nz + [Fraction(0)] * (len(diag) - len(nz))


def test_smith_normal_form_rejects_non_integer():
    with pytest.raises(ValueError):
        smith_normal_form(RatMatrix([[Fraction(1, 2)]]))
