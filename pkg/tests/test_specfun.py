"""Special-function layer: frozen values plus independent quadrature oracles."""

import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import eval_genlaguerre

from phaseopt.specfun import (
    c_fock_0_2k,
    c_state,
    c_state_matrix,
    displacement_element,
    f_sn,
    gamma_moment,
    laguerre,
    laguerre_moment,
)

SQRT_PI = math.sqrt(math.pi)


def eta_function(s, n, x):
    """Independent route to the radial kernel, via scipy's Laguerre evaluator."""
    lo, hi = min(n, s), max(n, s)
    scale = math.sqrt(math.factorial(lo) / math.factorial(hi))
    return (
        (-1.0) ** max(0, s - n)
        * scale
        * x ** (abs(s - n) / 2.0)
        * eval_genlaguerre(lo, abs(s - n), x)
    )


def overlap_quadrature(s, m, n):
    val, err = integrate.quad(
        lambda x: eta_function(s, m, x) * eta_function(s, n, x) * math.exp(-x),
        0.0,
        60.0,
        limit=300,
    )
    return val


# --- laguerre -----------------------------------------------------------------


def test_laguerre_constant():
    assert laguerre(0, 0).coefficients == (1,)


def test_laguerre_expansions():
    p11 = laguerre(1, 1)
    assert [float(c) for c in p11.coefficients] == [2.0, -1.0]
    p22 = laguerre(2, 2)
    assert [float(c) for c in p22.coefficients] == [6.0, -4.0, 0.5]


def test_laguerre_matches_scipy_on_a_grid():
    xs = np.linspace(0.0, 12.0, 7)
    for alpha in range(4):
        for k in range(6):
            ours = laguerre(alpha, k)
            for x in xs:
                assert ours(x) == pytest.approx(eval_genlaguerre(k, alpha, x), abs=1e-9)


def test_polynomial_arithmetic_keeps_all_terms():
    p = laguerre(1, 2)
    q = laguerre(0, 1)
    prod = p * q
    assert prod.degree == p.degree + q.degree
    s = p + (-1 * p)
    assert s.coefficients == ()


# --- gamma_moment -------------------------------------------------------------


def test_gamma_moment_small_integers():
    assert gamma_moment(0) == 1.0
    assert gamma_moment(1) == 1.0
    assert gamma_moment(4) == 24.0


def test_gamma_moment_half_integer():
    assert gamma_moment(0.5) == pytest.approx(SQRT_PI / 2, abs=1e-15)
    assert gamma_moment(1.5) == pytest.approx(3 * SQRT_PI / 4, abs=1e-15)


def test_gamma_moment_log_space_region():
    assert gamma_moment(160) == pytest.approx(math.exp(math.lgamma(161.0)), rel=1e-12)
    assert gamma_moment(160.5) == pytest.approx(math.exp(math.lgamma(161.5)), rel=1e-12)
    assert gamma_moment(300) == math.inf  # beyond float64 range


def test_gamma_moment_rejects_bad_arguments():
    with pytest.raises(ValueError):
        gamma_moment(-1)
    with pytest.raises(ValueError):
        gamma_moment(0.3)


# --- laguerre_moment ----------------------------------------------------------


def test_laguerre_moment_basics():
    assert laguerre_moment(1, 0, 0) == pytest.approx(1.0, abs=1e-14)
    assert laguerre_moment(2, 1, 1) == 0.0
    assert laguerre_moment(2, 2, 0) == pytest.approx(1.0, abs=1e-14)


def test_laguerre_moment_rejects_nonpositive_gamma():
    with pytest.raises(ValueError):
        laguerre_moment(0.0, 1, 1)


def test_laguerre_moment_against_monomial_summation():
    for gamma in range(1, 11):
        for alpha in range(9):
            for n in range(9):
                poly = laguerre(alpha, n)
                terms = [
                    float(c) * gamma_moment(gamma - 1 + l)
                    for l, c in enumerate(poly.coefficients)
                ]
                explicit = sum(terms)
                # the float summation cancels; 1e-10 is relative to its scale
                scale = max(1.0, max(abs(t) for t in terms))
                assert laguerre_moment(gamma, alpha, n) == pytest.approx(
                    explicit, abs=1e-10 * scale
                )


def test_laguerre_moment_noninteger_gamma_against_quadrature():
    for gamma, alpha, n in [(0.5, 0, 2), (2.5, 1, 3), (3.2, 2, 1)]:
        val, _ = integrate.quad(
            lambda x: x ** (gamma - 1) * eval_genlaguerre(n, alpha, x) * math.exp(-x),
            0.0,
            60.0,
            limit=200,
        )
        assert laguerre_moment(gamma, alpha, n) == pytest.approx(val, abs=1e-9)


# --- f_sn ---------------------------------------------------------------------


def test_f_sn_trivial():
    half, poly, sign = f_sn(0, 0)
    assert half == 0.0 and sign == 1
    assert poly(3.7) == pytest.approx(1.0)


def test_f_sn_scaling_folded_into_polynomial():
    half, poly, sign = f_sn(0, 2)
    assert half == 1.0 and sign == 1
    assert poly(0.0) == pytest.approx(1 / math.sqrt(2))
    half, poly, sign = f_sn(1, 0)
    assert half == 0.5 and sign == -1
    assert poly(0.0) == pytest.approx(1.0)


def test_f_sn_reproduces_direct_evaluation():
    xs = np.linspace(0.1, 9.0, 5)
    for s in range(4):
        for n in range(6):
            half, poly, sign = f_sn(s, n)
            for x in xs:
                assert sign * x ** half * poly(x) == pytest.approx(
                    eta_function(s, n, x), abs=1e-10
                )


# --- c_state ------------------------------------------------------------------


def test_c_state_known_values():
    assert c_state(0, 0, 2) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert c_state(1, 0, 2) == 0.0
    assert c_state(0, 5, 5) == pytest.approx(1.0, abs=1e-15)


def test_c_state_against_quadrature():
    for s, m, n in [(0, 0, 1), (0, 1, 3), (1, 0, 4), (2, 2, 6), (3, 1, 5), (4, 4, 9)]:
        assert c_state(s, m, n) == pytest.approx(overlap_quadrature(s, m, n), abs=1e-9)


def test_c_state_symmetry():
    rng = np.random.default_rng(3)
    for _ in range(40):
        s = int(rng.integers(0, 20))
        m = int(rng.integers(0, 61))
        n = int(rng.integers(0, 61))
        assert abs(c_state(s, m, n) - c_state(s, n, m)) < 1e-12


def test_c_state_unit_diagonal_far_out():
    for s in (0, 7, 14, 20):
        for n in (0, 17, 60, 120):
            assert abs(c_state(s, n, n) - 1.0) < 1e-10


def test_c_state_survives_large_indices():
    # sharpness sweeps reach indices near 300; diagonals must stay exact
    assert abs(c_state(0, 299, 299) - 1.0) < 1e-12
    assert abs(c_state(20, 300, 300) - 1.0) < 1e-10
    val = c_state(3, 280, 290)
    assert 0.0 < val < 1.0


def test_c_state_vanishing_pattern():
    for s in range(13):
        for k in range(1, 13):
            val = c_state(s, 0, 2 * k)
            if 0 < k <= s:
                assert val == 0.0
            else:
                assert abs(val) > 1e-6


def test_c_state_matrix_agrees_with_scalar():
    mat = c_state_matrix(2, 9)
    for m in range(9):
        for n in range(9):
            assert mat[m, n] == c_state(2, m, n)


# --- c_fock_0_2k --------------------------------------------------------------


def test_c_fock_known_values():
    assert c_fock_0_2k(0, 1) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert c_fock_0_2k(3, 2) == 0.0


def test_c_fock_cross_checks_integral_route():
    for s in range(13):
        for k in range(1, 13):
            assert abs(c_fock_0_2k(s, k) - c_state(s, 0, 2 * k)) < 1e-10


# --- displacement_element -----------------------------------------------------


def test_displacement_identity_at_zero():
    for m in range(5):
        for n in range(5):
            expected = 1.0 if m == n else 0.0
            assert displacement_element(m, n, 0.0) == expected


def test_displacement_coherent_overlap():
    assert displacement_element(0, 0, 1.0) == pytest.approx(math.exp(-0.5), abs=1e-15)
    z = 0.7 - 0.3j
    r2 = abs(z) ** 2
    for n in range(6):
        expected = math.exp(-r2 / 2) * z ** n / math.sqrt(math.factorial(n))
        assert displacement_element(n, 0, z) == pytest.approx(expected, abs=1e-14)


def test_displacement_symmetry_relation():
    z = 1.1 + 0.4j
    for m in range(6):
        for n in range(6):
            a = displacement_element(m, n, z)
            b = displacement_element(n, m, -z).conjugate()
            assert a == pytest.approx(b, abs=1e-13)


def test_displacement_columns_near_unit_norm():
    d = 64
    for z in (0.5, 1.3 + 0.9j, 2.0j):
        for n in range(0, 17, 4):
            col = np.array([displacement_element(m, n, z) for m in range(d)])
            assert np.linalg.norm(col) >= 1.0 - 1e-6


def test_displacement_unitarity_block():
    d, z = 40, 1.2 - 0.5j
    block = np.array(
        [[displacement_element(m, n, z) for n in range(8)] for m in range(d)]
    )
    gram = block.conj().T @ block
    assert np.abs(gram - np.eye(8)).max() < 1e-8
