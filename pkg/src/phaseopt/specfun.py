"""Associated Laguerre polynomials, Gamma moments and phase-matrix entries.

Everything downstream (state-generated phase matrices, the diagonal-state
recovery, the sharpness sweeps) rests on the exponential-weight overlap
integrals evaluated here.  The inner alternating sums are done in exact
integer arithmetic and only the final irrational prefactors (square roots
of factorial ratios, sqrt(pi)) are applied in floating point, so entries
that are mathematically zero come out as exact 0.0 and diagonal entries
come out as 1 to machine precision even at large indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import eval_genlaguerre

__all__ = [
    "RationalPolynomial",
    "laguerre",
    "gamma_moment",
    "laguerre_moment",
    "f_sn",
    "c_state",
    "c_state_matrix",
    "c_fock_0_2k",
    "displacement_element",
]

# factorials above this are converted to floats through lgamma
_LOG_SPACE_CUTOFF = 150


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return math.factorial(n)


def _ratio_sqrt(num: int, den: int) -> float:
    """sqrt(num/den) for big positive integers, correctly rounded ratio."""
    if num == 0:
        return 0.0
    shift = den.bit_length() - num.bit_length() + 64
    if shift >= 0:
        q = (num << shift) // den
    else:
        q = num // (den << -shift)
    return math.sqrt(math.ldexp(float(q), -shift))


@dataclass(frozen=True)
class RationalPolynomial:
    """Dense polynomial in one variable; coefficients indexed by power.

    Coefficients are exact `Fraction`s when produced by :func:`laguerre`
    and become floats once an irrational scale is folded in.  Arithmetic
    never drops terms; trailing zeros are trimmed so that ``degree`` is
    the index of the last nonzero coefficient.
    """

    coefficients: tuple

    @staticmethod
    def from_coefficients(coeffs) -> "RationalPolynomial":
        coeffs = list(coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        return RationalPolynomial(tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __add__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        n = max(len(self.coefficients), len(other.coefficients))
        out = [0] * n
        for i, c in enumerate(self.coefficients):
            out[i] = out[i] + c
        for i, c in enumerate(other.coefficients):
            out[i] = out[i] + c
        return RationalPolynomial.from_coefficients(out)

    def __mul__(self, other):
        if isinstance(other, RationalPolynomial):
            out = [0] * (len(self.coefficients) + len(other.coefficients) - 1 or 1)
            for i, a in enumerate(self.coefficients):
                for j, b in enumerate(other.coefficients):
                    out[i + j] += a * b
            return RationalPolynomial.from_coefficients(out)
        return RationalPolynomial.from_coefficients(c * other for c in self.coefficients)

    __rmul__ = __mul__

    def __call__(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coefficients):
            acc = acc * x + float(c)
        return acc


def laguerre(alpha: int, k: int) -> RationalPolynomial:
    """Associated Laguerre polynomial with exact rational coefficients.

    The coefficient of ``x**l`` is ``(-1)**l * C(k + alpha, k - l) / l!``.
    """
    if alpha < 0 or k < 0:
        raise ValueError("laguerre requires nonnegative integer orders")
    coeffs = [
        Fraction((-1) ** l * math.comb(k + alpha, k - l), _fact(l)) for l in range(k + 1)
    ]
    return RationalPolynomial.from_coefficients(coeffs)


def _as_twice_integer(p: float) -> int:
    """Return round(2p) after checking 2p is integral (tolerance 1e-9)."""
    p2 = 2.0 * p
    r = round(p2)
    if abs(p2 - r) > 1e-9:
        raise ValueError(f"argument {p} is neither an integer nor a half-integer")
    return int(r)


def gamma_moment(p) -> float:
    """Integral of ``x**p * exp(-x)`` over the positive axis, i.e. Gamma(p+1).

    ``p`` must be a nonnegative integer or half-integer.  Values with
    ``p > 150`` are evaluated in log space.
    """
    p2 = _as_twice_integer(p)
    if p2 < 0:
        raise ValueError(f"gamma moment undefined for negative power {p}")
    if p > _LOG_SPACE_CUTOFF:
        try:
            return math.exp(math.lgamma(p + 1.0))
        except OverflowError:
            return math.inf
    if p2 % 2 == 0:
        return float(_fact(p2 // 2))
    # Gamma(q + 3/2) = (2q+1)!! * sqrt(pi) / 2**(q+1)
    q = (p2 - 1) // 2
    dfac = _fact(2 * q + 1) // (_fact(q) << q)
    return math.sqrt(math.pi) * math.ldexp(float(dfac), -(q + 1))


def laguerre_moment(gamma: float, alpha: int, n: int) -> float:
    """Weighted moment of an associated Laguerre polynomial.

    Evaluates the integral of ``x**(gamma-1) * L^alpha_n(x) * exp(-x)``,
    equal to ``Gamma(gamma) * poch(1 + alpha - gamma, n) / n!`` where the
    Pochhammer product replaces the Gamma-ratio so denominator poles give
    exact zeros instead of overflowing.
    """
    if gamma <= 0:
        raise ValueError(f"moment requires gamma > 0, got {gamma}")
    if alpha < 0 or n < 0:
        raise ValueError("alpha and n must be nonnegative integers")
    x = 1.0 + alpha - gamma
    if abs(x - round(x)) < 1e-9:
        x = float(round(x))
    poch = 1.0
    for i in range(n):
        poch *= x + i
    if poch == 0.0:
        return 0.0
    if gamma + 0.5 > _LOG_SPACE_CUTOFF:
        lg = math.lgamma(gamma) + math.log(abs(poch)) - math.lgamma(n + 1.0)
        return math.copysign(math.exp(lg), poch)
    return math.gamma(gamma) * poch / _fact(n)


def f_sn(s: int, n: int):
    """Factorized radial eigenfunction overlap kernel.

    Returns ``(half_power, poly, sign)`` such that the function equals
    ``sign * x**half_power * poly(x)`` with the square-root factorial
    scale folded into the polynomial coefficients.
    """
    if s < 0 or n < 0:
        raise ValueError("indices must be nonnegative")
    lo, hi = min(n, s), max(n, s)
    sign = -1 if max(0, s - n) % 2 else 1
    scale = _ratio_sqrt(_fact(lo), _fact(hi))
    poly = laguerre(hi - lo, lo) * scale
    return (hi - lo) / 2.0, poly, sign


def _c_entry(s: int, m: int, n: int) -> float:
    """Exact-arithmetic core for the overlap integral of f_sn pairs."""
    ka, ha = min(m, s), max(m, s)
    kb, hb = min(n, s), max(n, s)
    sign_pref = -1 if (max(0, s - m) + max(0, s - n)) % 2 else 1
    # integer-scaled Laguerre coefficient vectors (scaled by ka!, kb!)
    fa, fb = _fact(ka), _fact(kb)
    U = [(-1) ** l * math.comb(ha, ka - l) * (fa // _fact(l)) for l in range(ka + 1)]
    V = [(-1) ** l * math.comb(hb, kb - l) * (fb // _fact(l)) for l in range(kb + 1)]
    jmax = ka + kb
    W = [0] * (jmax + 1)
    for l1, u in enumerate(U):
        for l2, v in enumerate(V):
            W[l1 + l2] += u * v
    sigma = (ha - ka) + (hb - kb)
    if sigma % 2 == 0:
        g0 = sigma // 2 + 1
        rise = 1
        R = W[0]
        for j in range(1, jmax + 1):
            rise *= g0 - 1 + j
            R += W[j] * rise
        if R == 0:
            return 0.0
        num = R * R * _fact(g0 - 1) ** 2
        den = fa * fb * _fact(ha) * _fact(hb)
        val = _ratio_sqrt(num, den)
    else:
        # half-integer moments; scale by 2**jmax to stay integral
        q0 = (sigma + 1) // 2
        rise = 1
        R = W[0] << jmax
        for j in range(1, jmax + 1):
            rise *= 2 * q0 - 1 + 2 * j
            R += W[j] * rise << (jmax - j)
        if R == 0:
            return 0.0
        num = R * R * _fact(2 * q0) ** 2
        den = (
            (1 << (4 * q0 + 2 * jmax)) * _fact(q0) ** 2 * fa * fb * _fact(ha) * _fact(hb)
        )
        val = math.sqrt(math.pi) * _ratio_sqrt(num, den)
    if R < 0:
        sign_pref = -sign_pref
    return sign_pref * val


def c_state(s: int, m: int, n: int) -> float:
    """Phase-matrix entry of the observable generated by the number state s.

    The product of the two polynomial factorizations is integrated term
    by term against the exponential weight; all cancellation happens in
    exact integer arithmetic.  Entries killed by a Gamma pole in the
    closed form are returned as exact ``0.0``.
    """
    if s < 0 or m < 0 or n < 0:
        raise ValueError("indices must be nonnegative")
    return _c_entry(s, m, n)


_MATRIX_CACHE: dict = {}


def c_state_matrix(s: int, dim: int) -> np.ndarray:
    """Dense ``dim x dim`` matrix of ``c_state(s, m, n)`` values (cached)."""
    if dim < 1:
        raise ValueError("dim must be positive")
    cached = _MATRIX_CACHE.get(s)
    if cached is None or cached.shape[0] < dim:
        full = np.empty((dim, dim))
        for m in range(dim):
            for n in range(m, dim):
                full[m, n] = _c_entry(s, m, n)
                full[n, m] = full[m, n]
        _MATRIX_CACHE[s] = full
        cached = full
    out = cached[:dim, :dim].copy()
    return out


def c_fock_0_2k(s: int, k: int) -> float:
    """Closed form for the (0, 2k) entry of the number-state phase matrix.

    Vanishes exactly when ``0 < k <= s`` (denominator Gamma pole there);
    otherwise equals ``(-1)**s * k! * (k-1)! / (s! * (k-s-1)!) / sqrt((2k)!)``.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    if s < 0:
        raise ValueError("s must be nonnegative")
    if k <= s:
        return 0.0
    num = (_fact(k) * _fact(k - 1)) ** 2
    den = _fact(2 * k) * (_fact(s) * _fact(k - s - 1)) ** 2
    val = _ratio_sqrt(num, den)
    return -val if s % 2 else val


def displacement_element(m: int, n: int, z: complex) -> complex:
    """Matrix element ``<m|D(z)|n>`` of the phase-space shift operator.

    Uses the closed Laguerre form for ``m >= n`` and the symmetry
    ``<m|D(z)|n> = conj(<n|D(-z)|m>)`` otherwise.
    """
    if m < 0 or n < 0:
        raise ValueError("indices must be nonnegative")
    z = complex(z)
    if m < n:
        return displacement_element(n, m, -z).conjugate()
    if z == 0:
        return 1.0 + 0.0j if m == n else 0.0j
    r2 = z.real * z.real + z.imag * z.imag
    alpha = m - n
    log_amp = 0.5 * (math.lgamma(n + 1) - math.lgamma(m + 1)) + 0.5 * alpha * math.log(r2) - 0.5 * r2
    phase = complex(math.cos(alpha * math.atan2(z.imag, z.real)),
                    math.sin(alpha * math.atan2(z.imag, z.real)))
    lag = float(eval_genlaguerre(n, alpha, r2))
    return math.exp(log_amp) * phase * lag
