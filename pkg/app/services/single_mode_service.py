"""
Single-mode eigenstates of a² + βa†².

Kernel states exp(-βG†_i)|i>, the arctan conjugate 𝒢†, eigenstates in
their exponential, binomial and Kummer forms, and the closed-form
number, squeezed-vacuum, coherent-state and position overlaps. Number
coefficients and wavefunctions also come in expanded series forms
(gamma ratios, Laguerre polynomials) that cross-check the closed forms.

All states are unnormalized, in the gauge <0|ψ,e> = 1 and <1|ψ,o> = 1.
"""

import cmath
import logging
import math
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from app.errors import ClosedFormDomainError, PoleError
from app.models import (
    ConjugatePair, F1Problem, FockVector, HypergeometricParams, MatrixOperator, OverlapValue, Parity,
    TruncationSpec
)
from app.services.conjugates import conjugate_service
from app.services.fock_space import fock_space
from app.services.special_functions import special_functions

logger = logging.getLogger(__name__)

SQUEEZED_RADIUS = 0.5
LAGUERRE_MAX_TERMS = 600
LAGUERRE_TOLERANCE = 1e-17


def _quartic_weight(n):
    return 1.0 / ((n + 1) * (n + 2))


def _unit(n):
    return 1.0


def _residue(parity: Parity) -> int:
    return 0 if parity == Parity.EVEN else 1


class SingleModeService:
    """Eigenstates and overlaps of a² + βa†²"""

    # ------------------------------------------------------------------
    # Operators and conjugates
    # ------------------------------------------------------------------

    def operator(self, beta: complex, trunc: TruncationSpec) -> MatrixOperator:
        lower = fock_space.ladder("a", "lower", trunc, power=2)
        raising = fock_space.ladder("a", "raise", trunc, power=2)
        return fock_space.combine([(1.0, lower), (complex(beta), raising)], label="a² + βa†²")

    @lru_cache(maxsize=4)
    def kernel_conjugate(self, trunc: TruncationSpec, residue: int) -> ConjugatePair:
        """G†_i of a⁴/((n+1)(n+2)), whose eigenvalue -β states solve the λ = 0 problem for i = 0, 1"""
        F = conjugate_service.single_mode_annihilator(_quartic_weight, 4, trunc, label="a⁴/((n+1)(n+2))")
        return conjugate_service.conjugate_single(F, residue)

    @lru_cache(maxsize=4)
    def base_conjugate(self, trunc: TruncationSpec, parity: Parity) -> ConjugatePair:
        """g†_i, the conjugate of a² on the parity sector"""
        F = conjugate_service.single_mode_annihilator(_unit, 2, trunc, label="a²")
        return conjugate_service.conjugate_single(F, _residue(parity))

    @lru_cache(maxsize=6)
    def arctan_conjugate(self, beta: complex, trunc: TruncationSpec, parity: Parity) -> ConjugatePair:
        """𝒢†_i = tan⁻¹(√(4β) g†_i)/√(4β), conjugate of the full operator"""
        return conjugate_service.arctan_conjugate(
            self.operator(beta, trunc), self.base_conjugate(trunc, parity), beta, scale_factor=4
        )

    @lru_cache(maxsize=4)
    def _base_square(self, trunc: TruncationSpec, parity: Parity) -> MatrixOperator:
        g = self.base_conjugate(trunc, parity).G_dagger
        return fock_space.power_series(g, [0, 0, 1], label=f"({g.label})²")

    def clear_caches(self) -> None:
        """Drop the cached conjugates and their squares"""
        for cached in (self.kernel_conjugate, self.base_conjugate, self.arctan_conjugate, self._base_square):
            cached.cache_clear()

    # ------------------------------------------------------------------
    # States
    # ------------------------------------------------------------------

    def kernel_state(self, beta: complex, trunc: TruncationSpec, residue: int = 0) -> FockVector:
        """
        exp(-βG†_i)|i>. Residues 0 and 1 are annihilated by a² + βa†²;
        residues 2 and 3 only solve the quartic problem.
        """
        if residue not in range(4):
            raise ValueError(f"kernel residue must be 0..3, got {residue}")
        pair = self.kernel_conjugate(trunc, residue)
        beta = complex(beta)
        return fock_space.apply_series(
            pair.G_dagger, fock_space.number_state(trunc, residue), lambda k: -beta / k
        )

    def kernel_states(self, beta: complex, trunc: TruncationSpec) -> Tuple[FockVector, FockVector]:
        return self.kernel_state(beta, trunc, 0), self.kernel_state(beta, trunc, 1)

    def binomial_kernel_state(self, beta: complex, trunc: TruncationSpec, parity: Parity) -> FockVector:
        """(1 + 4β g†²)^(-1/4) |0>, or ^(-3/4) |1> for the odd sector"""
        exponent = -0.25 if parity == Parity.EVEN else -0.75
        x = 4 * complex(beta)
        return fock_space.apply_series(
            self._base_square(trunc, parity),
            fock_space.number_state(trunc, _residue(parity)),
            lambda k: x * (exponent - k + 1) / k
        )

    def component(self, prob: F1Problem, parity: Parity) -> FockVector:
        """exp(λ𝒢†_i) exp(-βG†_i)|i>"""
        kernel = self.kernel_state(prob.beta, prob.trunc, _residue(parity))
        return self._raise_by_eigenvalue(prob, parity, kernel)

    def _raise_by_eigenvalue(self, prob: F1Problem, parity: Parity, kernel: FockVector) -> FockVector:
        if prob.lam == 0:
            return kernel
        G = self.arctan_conjugate(prob.beta, prob.trunc, parity).G_dagger
        lam = prob.lam
        return fock_space.apply_series(G, kernel, lambda k: lam / k)

    def _superpose(self, prob: F1Problem, build) -> FockVector:
        coeffs = np.zeros(prob.trunc.dim, dtype=complex)
        for parity in (Parity.EVEN, Parity.ODD):
            weight = prob.weight(parity)
            if weight != 0:
                coeffs += weight * build(parity).coeffs
        return FockVector(trunc=prob.trunc, coeffs=coeffs)

    def eigenstate(self, prob: F1Problem) -> FockVector:
        """C₀|ψ,e> + C₁|ψ,o>"""
        state = self._superpose(prob, lambda parity: self.component(prob, parity))
        logger.info(f"Built single-mode eigenstate beta={prob.beta}, lambda={prob.lam}, dim={prob.trunc.dim}")
        return state

    def state_via_binomial(self, prob: F1Problem, parity: Optional[Parity] = None) -> FockVector:
        """exp(λ tan⁻¹(√(4β)g†)/√(4β)) (1 + 4βg†²)^(-1/4 | -3/4) |0 | 1>; β = 0 allowed"""
        def build(p: Parity) -> FockVector:
            kernel = self.binomial_kernel_state(prob.beta, prob.trunc, p)
            return self._raise_by_eigenvalue(prob, p, kernel)

        if parity is not None:
            return build(parity)
        return self._superpose(prob, build)

    def state_via_kummer(self, prob: F1Problem, parity: Optional[Parity] = None, root: int = 1) -> FockVector:
        """exp(-(i/2)√β a†²) M(1/4 - iλ/(4√β), 1/2, i√β a†²)|0> (odd: 3/4, 3/2 on |1>)"""
        s = self._root(prob.beta, root)
        trunc = prob.trunc
        raising = fock_space.ladder("a", "raise", trunc, power=2)

        def build(p: Parity) -> FockVector:
            a, b = self._kummer_parameters(prob.lam, s, p)
            z = 1j * s
            resummed = fock_space.apply_series(
                raising,
                fock_space.number_state(trunc, _residue(p)),
                lambda k: z * (a + k - 1) / ((b + k - 1) * k)
            )
            return fock_space.apply_series(raising, resummed, lambda k: -0.5j * s / k)

        if parity is not None:
            return build(parity)
        return self._superpose(prob, build)

    def interior_residual(self, prob: F1Problem, state: FockVector) -> float:
        return fock_space.eigen_residual(self.operator(prob.beta, prob.trunc), state, prob.lam)

    # ------------------------------------------------------------------
    # Closed forms
    # ------------------------------------------------------------------

    @staticmethod
    def _root(beta: complex, root: int) -> complex:
        if root not in (1, -1):
            raise ValueError("root must be +1 or -1")
        if beta == 0:
            raise ClosedFormDomainError("closed form has √β denominators; use the series construction at beta = 0")
        return root * cmath.sqrt(complex(beta))

    @staticmethod
    def _kummer_parameters(lam: complex, s: complex, parity: Parity) -> Tuple[complex, float]:
        if parity == Parity.EVEN:
            return 0.25 - 1j * lam / (4 * s), 0.5
        return 0.75 - 1j * lam / (4 * s), 1.5

    def number_coefficients(self, prob: F1Problem, parity: Parity, n_max: int, root: int = 1) -> np.ndarray:
        """
        <2n|ψ,e> = (-i√β/2)^n √((2n)!)/n! F(-n, 1/4 - iλ/(4√β); 1/2; 2) for n = 0..n_max
        (odd: √((2n+1)!) and F(-n, 3/4 - ...; 3/2; 2) for <2n+1|ψ,o>).
        """
        s = self._root(prob.beta, root)
        a, c = self._kummer_parameters(prob.lam, s, parity)
        offset = _residue(parity)
        hypergeometric = special_functions.gauss_2f1_terminating_sequence(n_max, a, c, 2.0)

        prefactor = np.ones(n_max + 1, dtype=complex)
        step = -0.5j * s
        for n in range(1, n_max + 1):
            level = 2 * n + offset
            prefactor[n] = prefactor[n - 1] * step * math.sqrt(level * (level - 1)) / n
        return prefactor * hypergeometric

    def number_coefficients_gamma_sum(self, prob: F1Problem, parity: Parity, n_max: int, root: int = 1) -> np.ndarray:
        """
        The number coefficients from the expanded double series,
        <2n|ψ,e> = Γ(1/2)/Γ(a) (-i√β/2)^n √((2n)!) Σ_l Γ(a+l) / (Γ(l+1/2) l! (n-l)!) (-2)^l
        with a = 1/4 - iλ/(4√β) (odd: a = 3/4 - ..., Γ(l+3/2), √((2n+1)!)).

        Alternating sum; meant for moderate n.
        """
        s = self._root(prob.beta, root)
        a, c = self._kummer_parameters(prob.lam, s, parity)
        offset = _residue(parity)
        log_step = cmath.log(-0.5j * s)
        return np.array([
            special_functions.terminating_gamma_sum(
                n, a, c, n * log_step + 0.5 * special_functions.log_gamma(2 * n + offset + 1)
            )
            for n in range(n_max + 1)
        ])

    def overlap_number(self, prob: F1Problem, n: int, parity: Optional[Parity] = None, root: int = 1) -> complex:
        """<n|ψ,e> or <n|ψ,o>, picked by the parity of n; zero if parity disagrees"""
        if n < 0:
            raise ValueError("number state index must be nonnegative")
        component = Parity.EVEN if n % 2 == 0 else Parity.ODD
        if parity is not None and parity != component:
            return 0j
        k = n // 2
        return complex(self.number_coefficients(prob, component, k, root)[k])

    def overlap_squeezed(self, prob: F1Problem, mu: complex, parity: Parity, root: int = 1) -> OverlapValue:
        """
        <μ,e|ψ,e> = exp(λ tan⁻¹(√(4β)μ*)/√(4β)) (1 + 4βμ*²)^(-1/4); odd uses ^(-3/4).

        Flagged invalid outside |μ√β| < 1/2, where the series behind it diverges.
        """
        mu = complex(mu)
        w = mu.conjugate()
        beta = complex(prob.beta)
        valid = abs(mu) * math.sqrt(abs(beta)) < SQUEEZED_RADIUS
        exponent = -0.25 if parity == Parity.EVEN else -0.75
        try:
            value = cmath.exp(special_functions.scaled_arctan(prob.lam, 4 * beta, w, root))
            if beta != 0:
                value *= special_functions.principal_power(1 + 4 * beta * w * w, exponent)
        except PoleError as e:
            logger.warning(f"Squeezed overlap singular at mu={mu}: {e}")
            return OverlapValue(value=complex("nan"), valid=False, note="singular point")
        if not valid:
            logger.warning(f"Squeezed overlap at mu={mu} lies outside |mu·sqrt(beta)| < 1/2")
        return OverlapValue(value=value, valid=valid, note=None if valid else "outside |mu·sqrt(beta)| < 1/2")

    def overlap_coherent(self, prob: F1Problem, alpha: complex, parity: Parity, root: int = 1) -> OverlapValue:
        """<α|ψ,e> = exp(-(i/2)√β α*²) M(1/4 - iλ/(4√β), 1/2, i√β α*²) e^(-|α|²/2); odd adds α* and (3/4, 3/2)"""
        s = self._root(prob.beta, root)
        alpha = complex(alpha)
        w = alpha.conjugate()
        a, b = self._kummer_parameters(prob.lam, s, parity)
        series = special_functions.kummer_series(a, b, 1j * s * w * w)
        value = cmath.exp(-0.5j * s * w * w) * series.value * math.exp(-abs(alpha) ** 2 / 2)
        if parity == Parity.ODD:
            value *= w
        return OverlapValue(
            value=value,
            valid=True,
            converged=series.converged,
            note=None if series.converged else "Kummer series hit its term cap"
        )

    def q_function(self, prob: F1Problem, alpha: complex, root: int = 1) -> float:
        """|<α|ψ>|² of the weighted superposition"""
        total = 0j
        for parity in (Parity.EVEN, Parity.ODD):
            weight = prob.weight(parity)
            if weight != 0:
                total += weight * self.overlap_coherent(prob, alpha, parity, root).value
        return abs(total) ** 2

    def wavefunction(self, prob: F1Problem, x: float, parity: Parity, root: int = 1) -> complex:
        """
        Unnormalized <x|ψ,e> = exp(-½ (1+i√β)/(1-i√β) x²) M(1/4 - iλ/(4√β), 1/2, 2i√β x²/(1+β));
        the odd component has an extra x and (3/4, 3/2). Only ratios in x are meaningful.
        """
        beta = complex(prob.beta)
        if beta == -1:
            raise ClosedFormDomainError("wavefunction has a pole at beta = -1")
        s = self._root(beta, root)
        a, b = self._kummer_parameters(prob.lam, s, parity)
        x2 = x * x
        gaussian = cmath.exp(-0.5 * (1 + 1j * s) / (1 - 1j * s) * x2)
        value = gaussian * special_functions.evaluate(HypergeometricParams(a=a, b=b, z=2j * s / (1 + beta) * x2))
        if parity == Parity.ODD:
            value *= x
        return value

    def wavefunction_laguerre(self, prob: F1Problem, x: float, parity: Parity, root: int = 1) -> complex:
        """
        The wavefunction as a Laguerre series, normalized like wavefunction:
        x^o exp(-½ (1+i√β)/(1-i√β) x²) (1-q)^a Σ_l (a)_l/(c)_l q^l L_l^(o-1/2)(x²/(1-i√β)),
        q = -2i√β/(1-i√β), o = 0 (even) or 1 (odd). Needs |q| < 1.
        """
        beta = complex(prob.beta)
        if beta == -1:
            raise ClosedFormDomainError("wavefunction has a pole at beta = -1")
        s = self._root(beta, root)
        a, c = self._kummer_parameters(prob.lam, s, parity)
        q = -2j * s / (1 - 1j * s)
        if abs(q) >= 1:
            raise ClosedFormDomainError(f"Laguerre series needs |2√β/(1-i√β)| < 1, got {abs(q):.3f}")

        y = x * x / (1 - 1j * s)
        alpha = _residue(parity) - 0.5
        weight = 1 + 0j
        total = 0j
        quiet = 0
        for l in range(LAGUERRE_MAX_TERMS):
            term = weight * special_functions.laguerre_assoc(l, alpha, y)
            total += term
            quiet = quiet + 1 if abs(term) <= LAGUERRE_TOLERANCE * abs(total) else 0
            if quiet == 3:
                break
            weight *= (a + l) / (c + l) * q
        else:
            logger.warning(f"Laguerre series at x={x} hit its {LAGUERRE_MAX_TERMS}-term cap")

        gaussian = cmath.exp(-0.5 * (1 + 1j * s) / (1 - 1j * s) * x * x)
        value = gaussian * special_functions.principal_power(1 - q, a) * total
        if parity == Parity.ODD:
            value *= x
        return value

    def wavefunction_ratio(self, prob: F1Problem, xs: np.ndarray, x0: float, parity: Parity, root: int = 1) -> np.ndarray:
        reference = self.wavefunction(prob, x0, parity, root)
        if reference == 0:
            raise ValueError(f"wavefunction vanishes at the reference point x0={x0}")
        return np.array([self.wavefunction(prob, float(x), parity, root) / reference for x in xs])


single_mode_service = SingleModeService()
