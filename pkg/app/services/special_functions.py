"""
Complex special functions behind the closed-form overlaps.

log-gamma (Lanczos), Kummer's M(a, b, z), terminating Gauss sums
F(-n, a; c; z), associated Laguerre polynomials and a principal-branch
complex arctan.
"""

import cmath
import logging
import math
import os
from typing import Union

import numpy as np
from dotenv import load_dotenv

from app.errors import PoleError
from app.models import HypergeometricParams, SeriesValue

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

Number = Union[int, float, complex]

LOGPI = math.log(math.pi)
LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
LOG2 = math.log(2)

# Lanczos approximation, g = 7, n = 9
LANCZOS_G = 7
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real)


class SpecialFunctionService:
    """Scalar special functions in double precision"""

    def __init__(self):
        self.kummer_max_terms = int(os.getenv("EIGEN_KUMMER_MAX_TERMS", "10000"))
        self.kummer_tolerance = 1e-15

    # ------------------------------------------------------------------
    # Gamma
    # ------------------------------------------------------------------

    def log_gamma(self, z: Number) -> complex:
        """Principal branch of log Γ(z)"""
        z = complex(z)
        if _is_nonpositive_integer(z):
            raise PoleError(f"log_gamma has a pole at z={z.real:g}")

        if z.real < 0.5:
            # Reflection; the 2πi multiple keeps the result on the principal branch
            correction = math.copysign(2 * math.pi, z.imag) * math.floor(0.5 * z.real + 0.25)
            return (
                complex(LOGPI, correction)
                - cmath.log(cmath.sin(math.pi * z))
                - self.log_gamma(1 - z)
            )

        z -= 1
        x = LANCZOS_COEFFICIENTS[0]
        for i in range(1, LANCZOS_G + 2):
            x += LANCZOS_COEFFICIENTS[i] / (z + i)
        t = z + LANCZOS_G + 0.5
        return LOG_SQRT_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)

    def pochhammer(self, a: Number, k: int) -> complex:
        """Rising factorial (a)_k = a (a+1) ... (a+k-1)"""
        if k < 0:
            raise ValueError("pochhammer order must be nonnegative")
        value = complex(1.0)
        a = complex(a)
        for j in range(k):
            value *= a + j
        return value

    # ------------------------------------------------------------------
    # Confluent hypergeometric
    # ------------------------------------------------------------------

    def kummer_series(self, a: Number, b: Number, z: Number, max_terms: int = None) -> SeriesValue:
        """
        M(a, b, z) by its Taylor series.

        For Re z < 0 the series is summed after Kummer's transformation
        M(a, b, z) = e^z M(b - a, b, -z). Non-convergence is reported through
        the returned flag, never raised.
        """
        a, b, z = complex(a), complex(b), complex(z)
        max_terms = max_terms or self.kummer_max_terms

        if _is_nonpositive_integer(b):
            # Allowed only if the series stops before (b)_k hits zero
            if not (_is_nonpositive_integer(a) and a.real > b.real):
                raise PoleError(f"M(a, b, z) undefined for b={b.real:g}")

        if z.real < 0 and not _is_nonpositive_integer(a):
            inner = self._kummer_taylor(b - a, b, -z, max_terms)
            return SeriesValue(
                value=cmath.exp(z) * inner.value,
                converged=inner.converged,
                terms=inner.terms
            )
        return self._kummer_taylor(a, b, z, max_terms)

    def _kummer_taylor(self, a: complex, b: complex, z: complex, max_terms: int) -> SeriesValue:
        total = complex(1.0)
        term = complex(1.0)
        small_run = 0
        for k in range(max_terms):
            term *= (a + k) / (b + k) * z / (k + 1)
            total += term
            if term == 0:
                return SeriesValue(value=total, converged=True, terms=k + 1)
            if abs(term) <= self.kummer_tolerance * abs(total):
                small_run += 1
                if small_run == 2:
                    return SeriesValue(value=total, converged=True, terms=k + 1)
            else:
                small_run = 0

        logger.warning(f"Kummer series did not converge in {max_terms} terms (a={a}, b={b}, z={z})")
        return SeriesValue(value=total, converged=False, terms=max_terms)

    def kummer_m(self, a: Number, b: Number, z: Number) -> complex:
        return self.kummer_series(a, b, z).value

    # ------------------------------------------------------------------
    # Terminating Gauss hypergeometric
    # ------------------------------------------------------------------

    def _check_terminating_pole(self, n: int, c: complex) -> None:
        if n < 0:
            raise ValueError("terminating order must be nonnegative")
        if _is_nonpositive_integer(c) and -c.real <= n - 1:
            raise PoleError(f"(c)_l vanishes inside the terminating range for c={c.real:g}, n={n}")

    def gauss_2f1_terminating(self, n: int, a: Number, c: Number, z: Number) -> complex:
        """Finite sum of F(-n, a; c; z) over l = 0..n"""
        a, c, z = complex(a), complex(c), complex(z)
        self._check_terminating_pole(n, c)
        total = complex(1.0)
        term = complex(1.0)
        for l in range(n):
            term *= (-n + l) * (a + l) / ((c + l) * (l + 1)) * z
            total += term
        return total

    def terminating_gamma_sum(self, n: int, a: Number, c: Number, log_weight: Number = 0) -> complex:
        """
        exp(log_weight) Σ_l (a)_l / (c)_l (-2)^l / (l! (n-l)!), i.e. F(-n, a; c; 2) / n!
        as a sum of gamma ratios.

        log_weight is added to every term before exponentiating, so large
        prefactors such as √((2n)!) never overflow on their own.
        """
        a, c = complex(a), complex(c)
        self._check_terminating_pole(n, c)
        log_weight = complex(log_weight)
        total = 0j
        for l in range(n + 1):
            log_term = log_weight + l * LOG2 - self.log_gamma(l + 1) - self.log_gamma(n - l + 1)
            total += (-1) ** l * cmath.exp(log_term) * self.pochhammer(a, l) / self.pochhammer(c, l)
        return total

    def gauss_2f1_terminating_sequence(self, n_max: int, a: Number, c: Number, z: Number) -> np.ndarray:
        """
        F(-n, a; c; z) for n = 0..n_max from the contiguous relation
        (c+n) F_(n+1) = (2n + c - (a+n) z) F_n + n (z-1) F_(n-1).

        The finite sum cancels badly at z = 2; this recurrence does not.
        """
        a, c, z = complex(a), complex(c), complex(z)
        self._check_terminating_pole(n_max, c)
        values = np.zeros(n_max + 1, dtype=complex)
        values[0] = 1.0
        if n_max == 0:
            return values
        values[1] = 1.0 - a * z / c
        for n in range(1, n_max):
            values[n + 1] = (
                (2 * n + c - (a + n) * z) * values[n] + n * (z - 1) * values[n - 1]
            ) / (c + n)
        return values

    def evaluate(self, params: HypergeometricParams) -> complex:
        if params.terminating_order is not None:
            return self.gauss_2f1_terminating(params.terminating_order, params.a, params.b, params.z)
        return self.kummer_m(params.a, params.b, params.z)

    # ------------------------------------------------------------------
    # Laguerre
    # ------------------------------------------------------------------

    def laguerre_assoc(self, m: int, alpha: Number, x: Number) -> complex:
        """L_m^alpha(x) = sum_k (-1)^k Γ(m+α+1) / (Γ(k+α+1) (m-k)! k!) x^k"""
        if m < 0:
            raise ValueError("Laguerre degree must be nonnegative")
        x = complex(x)
        term = cmath.exp(
            self.log_gamma(m + alpha + 1) - self.log_gamma(alpha + 1) - self.log_gamma(m + 1)
        )
        total = term
        for k in range(m):
            term *= -x * (m - k) / ((k + alpha + 1) * (k + 1))
            total += term
        return total

    # ------------------------------------------------------------------
    # Elementary helpers
    # ------------------------------------------------------------------

    def complex_arctan(self, z: Number) -> complex:
        """tan⁻¹ z = (1/2i) log((1+iz)/(1-iz)), principal log"""
        z = complex(z)
        numerator = 1 + 1j * z
        denominator = 1 - 1j * z
        if numerator == 0 or denominator == 0:
            raise PoleError(f"arctan is singular at z={z}")
        return cmath.log(numerator / denominator) / 2j

    def scaled_arctan(self, lam: Number, scale: Number, w: Number, root: int = 1) -> complex:
        """lam/√scale · tan⁻¹(√scale · w); lam·w when scale = 0. root picks the sign of √scale."""
        if root not in (1, -1):
            raise ValueError("root must be +1 or -1")
        if scale == 0:
            return complex(lam) * complex(w)
        s = root * cmath.sqrt(complex(scale))
        return complex(lam) / s * self.complex_arctan(s * complex(w))

    def principal_power(self, base: Number, exponent: Number) -> complex:
        base = complex(base)
        if base == 0:
            raise PoleError("negative power of zero")
        return cmath.exp(exponent * cmath.log(base))


special_functions = SpecialFunctionService()
