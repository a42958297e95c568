"""
Two-mode eigenstates of ab + βa†b†.

States live on diagonal families through |0,p> and |q,0>; each family
state is gauge-fixed to coefficient 1 on its base state. Operators are
Kronecker products of single-mode pieces, so keep the per-mode dimension
modest (≤ 64).
"""

import cmath
import logging
import math
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np

from app.errors import ClosedFormDomainError, PoleError, TruncationError
from app.models import (
    ConjugatePair, F2Problem, FamilyLabel, FamilySide, MatrixOperator, OverlapValue,
    TransformReport, TruncationSpec, TwoModeFockVector
)
from app.services.conjugates import conjugate_service
from app.services.fock_space import fock_space
from app.services.special_functions import special_functions

logger = logging.getLogger(__name__)

MAX_PAIR_DIM = 64
CAVES_SCHUMAKER_RADIUS = 1.0

FamilyLike = Union[FamilyLabel, str]


def _level_weight(n):
    return 1.0 / (n + 1)


def _unit(n):
    return 1.0


def _family(family: FamilyLike) -> FamilyLabel:
    return FamilyLabel.parse(family) if isinstance(family, str) else family


class PairModeService:
    """Eigenstates and overlaps of ab + βa†b†"""

    def _check_dim(self, trunc: TruncationSpec) -> None:
        if trunc.dim > MAX_PAIR_DIM:
            raise TruncationError(f"two-mode dim {trunc.dim} exceeds {MAX_PAIR_DIM} levels per mode")

    def _check_family(self, family: FamilyLabel, trunc: TruncationSpec) -> None:
        if max(family.base) >= trunc.dim:
            raise TruncationError(f"family {family.label} does not fit in dim={trunc.dim}")

    # ------------------------------------------------------------------
    # Operators and conjugates
    # ------------------------------------------------------------------

    def operator(self, beta: complex, trunc: TruncationSpec) -> MatrixOperator:
        self._check_dim(trunc)
        lower = fock_space.ladder("a", "lower", trunc)
        raising = fock_space.ladder("a", "raise", trunc)
        entries = np.kron(lower.entries, lower.entries) + complex(beta) * np.kron(raising.entries, raising.entries)
        return MatrixOperator(trunc=trunc, modes=2, entries=entries, bandwidth=1, label="ab + βa†b†")

    def pair_raising(self, trunc: TruncationSpec) -> MatrixOperator:
        self._check_dim(trunc)
        raising = fock_space.ladder("a", "raise", trunc)
        return fock_space.kron(raising, raising, label="a†b†")

    @lru_cache(maxsize=2)
    def kernel_conjugate(self, trunc: TruncationSpec, family: FamilyLabel) -> ConjugatePair:
        """
        Conjugate of a²b²/((n_a+1)(n_b+1)) on the family's step-2 sector.

        0:p and q:0 families take the residue-0 conjugates, 1:p and q:1 the
        residue-1 ones; only the first two solve the λ = 0 pair problem.
        """
        self._check_dim(trunc)
        F = conjugate_service.product_annihilator(
            _level_weight, 2, _level_weight, 2, trunc, label="a²b²/((n_a+1)(n_b+1))"
        )
        residue = 0 if family.side in (FamilySide.ZERO_P, FamilySide.Q_ZERO) else 1
        return conjugate_service.conjugate_product(F, "a" if family.a_side else "b", residue, family)

    @lru_cache(maxsize=2)
    def base_conjugate(self, trunc: TruncationSpec, family: FamilyLabel) -> ConjugatePair:
        """g†₀ = a†b†/(n_b+1) for 0:p families, g†₁ = a†b†/(n_a+1) for q:0 families"""
        self._check_dim(trunc)
        F = conjugate_service.product_annihilator(_unit, 1, _unit, 1, trunc, label="ab")
        return conjugate_service.conjugate_product(F, "a" if family.a_side else "b", 0, family)

    @lru_cache(maxsize=2)
    def arctan_conjugate(self, beta: complex, trunc: TruncationSpec, family: FamilyLabel) -> ConjugatePair:
        """𝒢† = tan⁻¹(√β g†)/√β"""
        return conjugate_service.arctan_conjugate(
            self.operator(beta, trunc), self.base_conjugate(trunc, family), beta, scale_factor=1
        )

    @lru_cache(maxsize=2)
    def _base_square(self, trunc: TruncationSpec, family: FamilyLabel) -> MatrixOperator:
        g = self.base_conjugate(trunc, family).G_dagger
        return fock_space.power_series(g, [0, 0, 1], label=f"({g.label})²")

    def clear_caches(self) -> None:
        """Drop the cached two-mode conjugates and their squares"""
        for cached in (self.kernel_conjugate, self.base_conjugate, self.arctan_conjugate, self._base_square):
            cached.cache_clear()

    # ------------------------------------------------------------------
    # States
    # ------------------------------------------------------------------

    def kernel_state(self, beta: complex, family: FamilyLike, trunc: TruncationSpec) -> TwoModeFockVector:
        """exp(-βG†)|base>; accepts the discarded 1:p and q:1 families as well"""
        family = _family(family)
        self._check_family(family, trunc)
        pair = self.kernel_conjugate(trunc, family)
        beta = complex(beta)
        return fock_space.apply_series(
            pair.G_dagger, fock_space.pair_number_state(trunc, *family.base), lambda k: -beta / k
        )

    def _shift(self, family: FamilyLabel) -> int:
        if family.side not in (FamilySide.ZERO_P, FamilySide.Q_ZERO):
            raise ValueError(f"family {family.label} is discarded; eigenstates exist on 0:p and q:0 families")
        return family.index

    def _raise_by_eigenvalue(self, prob: F2Problem, family: FamilyLabel, kernel: TwoModeFockVector) -> TwoModeFockVector:
        if prob.lam == 0:
            return kernel
        G = self.arctan_conjugate(prob.beta, prob.trunc, family).G_dagger
        lam = prob.lam
        return fock_space.apply_series(G, kernel, lambda k: lam / k)

    def family_state(self, prob: F2Problem, family: FamilyLike) -> TwoModeFockVector:
        """exp(λ𝒢†) exp(-βG†)|base>"""
        family = _family(family)
        self._shift(family)
        kernel = self.kernel_state(prob.beta, family, prob.trunc)
        return self._raise_by_eigenvalue(prob, family, kernel)

    def _superpose(self, prob: F2Problem, build) -> TwoModeFockVector:
        dim = prob.trunc.dim
        coeffs = np.zeros((dim, dim), dtype=complex)
        for family, weight in prob.families:
            if weight != 0:
                coeffs += weight * build(family).coeffs
        return TwoModeFockVector(trunc=prob.trunc, coeffs=coeffs)

    def eigenstate(self, prob: F2Problem) -> TwoModeFockVector:
        self._check_dim(prob.trunc)
        state = self._superpose(prob, lambda family: self.family_state(prob, family))
        logger.info(
            f"Built pair eigenstate beta={prob.beta}, lambda={prob.lam}, "
            f"families={sorted(prob.family_weights)}, dim={prob.trunc.dim}"
        )
        return state

    def state_via_binomial(self, prob: F2Problem, family: Optional[FamilyLike] = None) -> TwoModeFockVector:
        """exp(λ tan⁻¹(√β g†)/√β) (1 + βg†²)^(-(s+1)/2) |base>, s = p or q"""
        def build(f: FamilyLabel) -> TwoModeFockVector:
            exponent = -(self._shift(f) + 1) / 2
            beta = complex(prob.beta)
            kernel = fock_space.apply_series(
                self._base_square(prob.trunc, f),
                fock_space.pair_number_state(prob.trunc, *f.base),
                lambda k: beta * (exponent - k + 1) / k
            )
            return self._raise_by_eigenvalue(prob, f, kernel)

        if family is not None:
            return build(_family(family))
        return self._superpose(prob, build)

    def state_via_kummer(self, prob: F2Problem, family: Optional[FamilyLike] = None, root: int = 1) -> TwoModeFockVector:
        """exp(-i√β a†b†) M((s+1)/2 - iλ/(2√β), s+1, 2i√β a†b†) |base>"""
        s = self._root(prob.beta, root)
        raising = self.pair_raising(prob.trunc)

        def build(f: FamilyLabel) -> TwoModeFockVector:
            a, b = self._kummer_parameters(prob.lam, s, self._shift(f))
            z = 2j * s
            resummed = fock_space.apply_series(
                raising,
                fock_space.pair_number_state(prob.trunc, *f.base),
                lambda k: z * (a + k - 1) / ((b + k - 1) * k)
            )
            return fock_space.apply_series(raising, resummed, lambda k: -1j * s / k)

        if family is not None:
            return build(_family(family))
        return self._superpose(prob, build)

    def interior_residual(self, prob: F2Problem, state: TwoModeFockVector) -> float:
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
    def _kummer_parameters(lam: complex, s: complex, shift: int) -> Tuple[complex, float]:
        return (shift + 1) / 2 - 1j * lam / (2 * s), shift + 1.0

    def number_coefficients(self, prob: F2Problem, family: FamilyLike, n_max: int, root: int = 1) -> np.ndarray:
        """
        Coefficients along the family diagonal, n = 0..n_max:
        (-i√β)^n √((n+s)!/(n! s!)) F(-n, (s+1)/2 - iλ/(2√β); s+1; 2).
        """
        family = _family(family)
        shift = self._shift(family)
        s = self._root(prob.beta, root)
        a, c = self._kummer_parameters(prob.lam, s, shift)
        hypergeometric = special_functions.gauss_2f1_terminating_sequence(n_max, a, c, 2.0)

        prefactor = np.ones(n_max + 1, dtype=complex)
        for n in range(1, n_max + 1):
            prefactor[n] = prefactor[n - 1] * (-1j * s) * math.sqrt((n + shift) / n)
        return prefactor * hypergeometric

    def number_coefficients_gamma_sum(self, prob: F2Problem, family: FamilyLike, n_max: int, root: int = 1) -> np.ndarray:
        """
        Diagonal coefficients from the double series of the Kummer form,
        (-i√β)^n √((n+s)!/(n! s!)) n! Σ_l (a)_l / (s+1)_l (-2)^l / (l! (n-l)!), a = (s+1)/2 - iλ/(2√β).
        Alternating sum; meant for moderate n.
        """
        family = _family(family)
        shift = self._shift(family)
        s = self._root(prob.beta, root)
        a, c = self._kummer_parameters(prob.lam, s, shift)
        log_step = cmath.log(-1j * s)
        lg = special_functions.log_gamma
        return np.array([
            special_functions.terminating_gamma_sum(
                n, a, c, n * log_step + 0.5 * (lg(n + shift + 1) - lg(n + 1) - lg(shift + 1)) + lg(n + 1)
            )
            for n in range(n_max + 1)
        ])

    def overlap_number(self, prob: F2Problem, n: int, family: FamilyLike, root: int = 1) -> complex:
        """<n, n+p|φ;0,p> or <n+q, n|φ;q,0>"""
        if n < 0:
            raise ValueError("diagonal index must be nonnegative")
        return complex(self.number_coefficients(prob, family, n, root)[n])

    def overlap_fock(self, prob: F2Problem, n_a: int, n_b: int, family: FamilyLike, root: int = 1) -> complex:
        """<n_a, n_b|φ;family>, zero off the family diagonal"""
        family = _family(family)
        base_a, base_b = family.base
        shift = n_a - base_a
        if shift < 0 or n_b - base_b != shift:
            return 0j
        return self.overlap_number(prob, shift, family, root)

    def overlap_caves_schumaker(self, prob: F2Problem, mu: complex, family: FamilyLike, root: int = 1) -> OverlapValue:
        """
        exp(λ tan⁻¹(√β μ*)/√β) (1 + βμ*²)^(-(s+1)/2) against exp(μa†b†)|base>.

        Flagged invalid outside |μ√β| < 1.
        """
        family = _family(family)
        shift = self._shift(family)
        mu = complex(mu)
        w = mu.conjugate()
        beta = complex(prob.beta)
        valid = abs(mu) * math.sqrt(abs(beta)) < CAVES_SCHUMAKER_RADIUS
        try:
            value = cmath.exp(special_functions.scaled_arctan(prob.lam, beta, w, root))
            if beta != 0:
                value *= special_functions.principal_power(1 + beta * w * w, -(shift + 1) / 2)
        except PoleError as e:
            logger.warning(f"Caves-Schumaker overlap singular at mu={mu}: {e}")
            return OverlapValue(value=complex("nan"), valid=False, note="singular point")
        if not valid:
            logger.warning(f"Caves-Schumaker overlap at mu={mu} lies outside |mu·sqrt(beta)| < 1")
        return OverlapValue(value=value, valid=valid, note=None if valid else "outside |mu·sqrt(beta)| < 1")

    def overlap_coherent(
        self, prob: F2Problem, gamma: complex, delta: complex, family: FamilyLike, root: int = 1
    ) -> OverlapValue:
        """
        <γ,δ|φ;0,p> = exp(-i√β γ*δ*) e^(-(|γ|²+|δ|²)/2) M((p+1)/2 - iλ/(2√β), p+1, 2i√β γ*δ*) δ*^p/√(p!),
        with γ*^q/√(q!) in place of the last factor for q:0 families.
        """
        family = _family(family)
        shift = self._shift(family)
        s = self._root(prob.beta, root)
        gamma, delta = complex(gamma), complex(delta)
        product = gamma.conjugate() * delta.conjugate()
        a, b = self._kummer_parameters(prob.lam, s, shift)
        series = special_functions.kummer_series(a, b, 2j * s * product)

        partner = delta.conjugate() if family.side == FamilySide.ZERO_P else gamma.conjugate()
        monomial = partner ** shift / math.sqrt(math.factorial(shift))
        gaussian = math.exp(-(abs(gamma) ** 2 + abs(delta) ** 2) / 2)
        value = cmath.exp(-1j * s * product) * gaussian * series.value * monomial
        return OverlapValue(
            value=value,
            valid=True,
            converged=series.converged,
            note=None if series.converged else "Kummer series hit its term cap"
        )

    def q_function(self, prob: F2Problem, gamma: complex, delta: complex, root: int = 1) -> float:
        total = 0j
        for family, weight in prob.families:
            if weight != 0:
                total += weight * self.overlap_coherent(prob, gamma, delta, family, root).value
        return abs(total) ** 2

    # ------------------------------------------------------------------
    # Canonical transformation
    # ------------------------------------------------------------------

    def via_f1_transform(self, beta: complex, trunc: TruncationSpec, tolerance: float = 1e-12) -> TransformReport:
        """
        Compare ab + βa†b† with ½(c² + d²) + β·½(c†² + d†²) for
        c = (a+b)/√2, d = -i(a-b)/√2, and check the c, d commutators.
        """
        self._check_dim(trunc)
        beta = complex(beta)
        a = fock_space.ladder("a", "lower", trunc, modes=2).entries
        b = fock_space.ladder("b", "lower", trunc).entries
        a_dag, b_dag = a.conj().T, b.conj().T
        root2 = math.sqrt(2)
        c = (a + b) / root2
        d = -1j * (a - b) / root2
        c_dag = (a_dag + b_dag) / root2
        d_dag = 1j * (a_dag - b_dag) / root2

        limit = fock_space.interior_limit(trunc, 2)
        interior = np.flatnonzero(fock_space.level_mask(trunc, 2, limit))

        def columns(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
            return X @ Y[:, interior]

        rhs = 0.5 * (columns(c, c) + columns(d, d)) + beta * 0.5 * (columns(c_dag, c_dag) + columns(d_dag, d_dag))
        deviation = float(np.max(np.abs(self.operator(beta, trunc).entries[:, interior] - rhs)[interior, :]))

        eye = np.eye(interior.size)
        commutators = [
            (columns(c, c_dag) - columns(c_dag, c))[interior, :] - eye,
            (columns(d, d_dag) - columns(d_dag, d))[interior, :] - eye,
            (columns(c, d) - columns(d, c))[interior, :],
            (columns(c, d_dag) - columns(d_dag, c))[interior, :],
        ]
        commutator_deviation = float(max(np.max(np.abs(m)) for m in commutators))

        passed = deviation <= tolerance and commutator_deviation <= tolerance
        logger.info(f"Canonical transformation at beta={beta}: deviation {deviation:.3e}, commutators {commutator_deviation:.3e}")
        return TransformReport(
            beta=beta,
            deviation=deviation,
            commutator_deviation=commutator_deviation,
            tolerance=tolerance,
            passed=passed
        )


pair_mode_service = PairModeService()
