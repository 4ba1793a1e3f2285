import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dikinlab.errors import IllConditioned, PreconditionViolated
from dikinlab.linalg import (
    Poly,
    charpoly_companion,
    cholesky,
    elementwise,
    enestrom_kakeya_bounds,
    poly_roots,
    solve_spd,
)


def test_elementwise_product():
    assert elementwise("mul", [1, 2], [3, 4]).tolist() == [3.0, 8.0]


def test_elementwise_sqrt():
    assert elementwise("sqrt", [4, 9]).tolist() == [2.0, 3.0]


def test_elementwise_zero_divisor():
    with pytest.raises(PreconditionViolated):
        elementwise("div", [1, 1], [0, 1])


def test_elementwise_errors():
    with pytest.raises(PreconditionViolated):
        elementwise("mul", [1, 2], [1, 2, 3])
    with pytest.raises(PreconditionViolated):
        elementwise("sqrt", [-1.0, 4.0])
    assert elementwise("pow", [2, 3], 2).tolist() == [4.0, 9.0]
    assert elementwise("div", [1, 3], [2, 4]).tolist() == [0.5, 0.75]


def test_solve_spd_identity():
    assert np.allclose(solve_spd(np.eye(2), [3, 5]), [3, 5], atol=0)


def test_solve_spd_diagonal():
    assert solve_spd([[2, 0], [0, 4]], [2, 8]).tolist() == [1.0, 2.0]


def test_solve_spd_singular():
    with pytest.raises(IllConditioned):
        solve_spd([[1, 1], [1, 1]], [1, 2])


def test_solve_spd_rejects_indefinite_and_asymmetric():
    with pytest.raises(IllConditioned):
        solve_spd([[1, 2], [2, 1]], [1, 1])
    with pytest.raises(IllConditioned):
        solve_spd([[2, 1], [0, 2]], [1, 1])


def test_cholesky_reconstructs():
    M = np.array([[4.0, 2.0, 0.4], [2.0, 5.0, 1.0], [0.4, 1.0, 3.0]])
    L = cholesky(M)
    assert np.allclose(L @ L.T, M, atol=1e-14)
    assert np.allclose(np.triu(L, 1), 0)


@settings(max_examples=200)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_solve_spd_residual_random(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.normal(size=(n, n))
    M = B @ B.T + np.eye(n)
    rhs = rng.normal(size=n) * 10 ** rng.uniform(-3, 3)
    z = solve_spd(M, rhs)
    assert np.linalg.norm(M @ z - rhs) <= 1e-10 * (1 + np.linalg.norm(rhs))


def test_roots_difference_of_squares():
    roots = sorted(poly_roots(Poly((-1.0, 0.0, 1.0))), key=lambda z: z.real)
    assert abs(roots[0] + 1) < 1e-12 and abs(roots[1] - 1) < 1e-12


def test_roots_modulus_half():
    # oracle: quadratic formula
    disc = cmath.sqrt(0.25 - 4 * 0.25)
    expected = sorted([(-0.5 + disc) / 2, (-0.5 - disc) / 2], key=lambda z: z.imag)
    roots = sorted(poly_roots(Poly((0.25, 0.5, 1.0))), key=lambda z: z.imag)
    for r, e in zip(roots, expected):
        assert abs(r - e) < 1e-12
        assert abs(abs(r) - 0.5) < 1e-12


def test_roots_linear():
    assert poly_roots(Poly((-3.0, 1.0))) == [3 + 0j]


def test_roots_residual_and_count():
    p = Poly((6.0, -5.0, -2.0, 1.0))  # (x-1)(x+2)(x-3)
    roots = poly_roots(p)
    assert len(roots) == 3
    assert sorted(round(r.real, 9) for r in roots) == [-2.0, 1.0, 3.0]


def test_poly_rejects_zero_leading():
    with pytest.raises(PreconditionViolated):
        Poly((1.0, 0.0))


def test_ek_bounds_examples():
    assert enestrom_kakeya_bounds(Poly((0.25, 0.5, 1.0))) == (0.5, 0.5)
    assert enestrom_kakeya_bounds(Poly((1.0, 1.0, 1.0))) == (1.0, 1.0)
    assert enestrom_kakeya_bounds(Poly((2.0, 1.0))) == (2.0, 2.0)


def test_ek_bounds_need_positive_coefficients():
    with pytest.raises(PreconditionViolated):
        enestrom_kakeya_bounds(Poly((1.0, -1.0, 1.0)))
    with pytest.raises(PreconditionViolated):
        enestrom_kakeya_bounds(Poly((0.0, 1.0)))


def _check_annulus(coeffs):
    alpha, beta = enestrom_kakeya_bounds(coeffs)
    for r in poly_roots(coeffs):
        assert alpha - 1e-6 <= abs(r) <= beta + 1e-6


def test_ek_annulus_thousand_random_polynomials():
    rng = np.random.default_rng(20240617)
    for _ in range(1000):
        deg = int(rng.integers(1, 9))
        _check_annulus(tuple(np.exp(rng.uniform(-2, 2, deg + 1))))


@settings(max_examples=300)
@given(st.lists(st.floats(0.01, 100.0), min_size=2, max_size=9))
def test_ek_annulus_property(coeffs):
    _check_annulus(tuple(coeffs))


def test_charpoly_matches_determinant():
    d, c = [0.5], [0.3, 0.8]
    p = charpoly_companion(d, c)
    assert p.coeffs == pytest.approx((0.15, 0.8, 1.0), abs=1e-15)


@settings(max_examples=100)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_charpoly_roots_are_eigenvalues(k, seed):
    rng = np.random.default_rng(seed)
    d = rng.uniform(0.1, 2.0, k - 1)
    c = rng.uniform(-1.0, 1.0, k)
    A = np.zeros((k, k))
    A[:, -1] = -c
    for i, v in enumerate(d):
        A[i + 1, i] = v
    p = charpoly_companion(d, c)
    for lam in np.linalg.eigvals(A):
        assert abs(p(complex(lam))) <= 1e-9 * max(1.0, abs(lam)) ** k
    assert math.isclose(p.coeffs[0], c[0] * float(np.prod(d)), rel_tol=1e-12)
