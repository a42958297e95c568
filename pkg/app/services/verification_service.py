"""
Acceptance suite.

Each criterion checks one family of identities or closed forms against an
independent construction and reports the worst deviation it saw. A
criterion that raises is recorded as failed with the error text.
"""

import logging
import math
import os
import time
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np
from dotenv import load_dotenv

from app.models import (
    CriterionResult, F1Problem, F2Problem, FamilyLabel, Parity, RecursionKind, RecursionOracle,
    TruncationSpec, VerificationReport, VerificationSettings
)
from app.services.conjugates import conjugate_service
from app.services.fock_space import fock_space
from app.services.oracle_service import oracle_service
from app.services.pair_mode_service import pair_mode_service
from app.services.single_mode_service import single_mode_service

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

BETAS = (0.04 + 0j, 0.09j, 0.05 + 0.05j)
LAMBDAS = (0j, 0.7 + 0j, 1 + 0.3j)
PARITIES = (Parity.EVEN, Parity.ODD)
FAMILIES = ("0:0", "0:2", "3:0")

FORM_LEVELS = 40
RECURSION_LEVELS = 30
OVERLAP_RECURSION_LENGTH = 320
COHERENT_RECURSION_LENGTH = 160
WAVE_GRID = np.round(np.arange(-30, 31) * 0.1, 10)
WAVE_REFERENCE = 0.5


def _relative(value: complex, reference: complex) -> float:
    if reference == 0:
        return abs(value)
    return abs(value - reference) / abs(reference)


def _f1(beta: complex, lam: complex, trunc: TruncationSpec) -> F1Problem:
    return F1Problem(beta=beta, lam=lam, trunc=trunc)


def _f2(beta: complex, lam: complex, trunc: TruncationSpec, family: str = "0:0") -> F2Problem:
    return F2Problem(beta=beta, lam=lam, family_weights={family: 1}, trunc=trunc)


def _diagonal(state, family: FamilyLabel, count: int) -> np.ndarray:
    base_a, base_b = family.base
    steps = np.arange(count)
    return state.coeffs[steps + base_a, steps + base_b]


def _sector_levels(state, parity: Parity, count: int) -> np.ndarray:
    offset = 0 if parity == Parity.EVEN else 1
    return state.coeffs[np.arange(count) * 2 + offset]


class VerificationService:
    """Runs the acceptance criteria against the services"""

    def __init__(self):
        self.default_settings = VerificationSettings(
            single_dim=int(os.getenv("EIGEN_VERIFY_SINGLE_DIM", "256")),
            single_guard=int(os.getenv("EIGEN_VERIFY_SINGLE_GUARD", "16")),
            pair_dim=int(os.getenv("EIGEN_VERIFY_PAIR_DIM", "48")),
            pair_guard=int(os.getenv("EIGEN_VERIFY_PAIR_GUARD", "8")),
            wave_dim=int(os.getenv("EIGEN_VERIFY_WAVE_DIM", "512")),
            transform_dim=int(os.getenv("EIGEN_VERIFY_TRANSFORM_DIM", "32")),
        )
        self.criteria: Dict[int, Tuple[str, float, Callable[[VerificationSettings], Tuple[float, str]]]] = {
            1: ("conjugacy identities", 1e-10, self.conjugacy_identities),
            2: ("auxiliary commutators", 1e-10, self.auxiliary_commutators),
            3: ("arctan conjugates", 1e-10, self.arctan_conjugates),
            4: ("eigen-residuals", 1e-8, self.eigen_residuals),
            5: ("form agreement", 1e-9, self.form_agreement),
            6: ("recursion oracle", 1e-9, self.recursion_agreement),
            7: ("squeezed and Caves-Schumaker overlaps", 1e-8, self.squeezed_overlaps),
            8: ("coherent overlaps", 1e-8, self.coherent_overlaps),
            9: ("wavefunctions", 1e-6, self.wavefunctions),
            10: ("canonical transformation", 1e-12, self.canonical_transformation),
            11: ("branch robustness", 1e-12, self.branch_robustness),
        }

    # ------------------------------------------------------------------
    # Truncations
    # ------------------------------------------------------------------

    def single_trunc(self, settings: VerificationSettings) -> TruncationSpec:
        return TruncationSpec(dim=settings.single_dim, guard=settings.single_guard)

    def pair_trunc(self, settings: VerificationSettings) -> TruncationSpec:
        return TruncationSpec(dim=settings.pair_dim, guard=settings.pair_guard)

    # ------------------------------------------------------------------
    # Criteria
    # ------------------------------------------------------------------

    def conjugacy_identities(self, settings: VerificationSettings) -> Tuple[float, str]:
        single, pair = self.single_trunc(settings), self.pair_trunc(settings)
        checks = []
        for parity in PARITIES:
            checks.append((f"a², g†_{parity.value}", single_mode_service.base_conjugate(single, parity)))
        for residue in range(4):
            checks.append((f"quartic G†_{residue}", single_mode_service.kernel_conjugate(single, residue)))
        for label in ("0:0", "3:0"):
            family = FamilyLabel.parse(label)
            checks.append((f"ab on {label}", pair_mode_service.base_conjugate(pair, family)))
        for label in ("0:2", "3:0", "1:2", "2:1"):
            family = FamilyLabel.parse(label)
            checks.append((f"pair quartic on {label}", pair_mode_service.kernel_conjugate(pair, family)))

        worst, detail = 0.0, ""
        for name, conjugate in checks:
            residual = conjugate_service.verify_conjugacy(conjugate).max_residual
            if residual >= worst:
                worst, detail = residual, name
        return worst, f"worst: {detail}"

    def auxiliary_commutators(self, settings: VerificationSettings) -> Tuple[float, str]:
        single, pair = self.single_trunc(settings), self.pair_trunc(settings)
        squeeze = fock_space.ladder("a", "raise", single, power=2)
        pair_raising = pair_mode_service.pair_raising(pair)
        residuals = []
        for parity in PARITIES:
            conjugate = single_mode_service.base_conjugate(single, parity)
            residuals.append(conjugate_service.verify_auxiliary_commutator(conjugate, squeeze, 4).max_residual)
        for label in ("0:0", "3:0"):
            conjugate = pair_mode_service.base_conjugate(pair, FamilyLabel.parse(label))
            residuals.append(conjugate_service.verify_auxiliary_commutator(conjugate, pair_raising, 1).max_residual)
        return max(residuals), f"{len(residuals)} identities"

    def arctan_conjugates(self, settings: VerificationSettings) -> Tuple[float, str]:
        single, pair = self.single_trunc(settings), self.pair_trunc(settings)
        residuals = []
        for beta in BETAS:
            for parity in PARITIES:
                conjugate = single_mode_service.arctan_conjugate(beta, single, parity)
                residuals.append(conjugate_service.verify_conjugacy(conjugate).max_residual)
            for label in ("0:0", "3:0"):
                conjugate = pair_mode_service.arctan_conjugate(beta, pair, FamilyLabel.parse(label))
                residuals.append(conjugate_service.verify_conjugacy(conjugate).max_residual)
        return max(residuals), f"{len(residuals)} conjugates"

    def eigen_residuals(self, settings: VerificationSettings) -> Tuple[float, str]:
        single, pair = self.single_trunc(settings), self.pair_trunc(settings)
        worst = 0.0
        count = 0
        for beta in BETAS:
            for lam in LAMBDAS:
                for parity in PARITIES:
                    prob = _f1(beta, lam, single)
                    state = single_mode_service.component(prob, parity)
                    worst = max(worst, single_mode_service.interior_residual(prob, state))
                    count += 1
        # family outermost so each family's conjugates are built once
        for label in FAMILIES:
            for beta in BETAS:
                for lam in LAMBDAS:
                    prob = _f2(beta, lam, pair, label)
                    worst = max(worst, pair_mode_service.interior_residual(prob, pair_mode_service.eigenstate(prob)))
                    count += 1
        return worst, f"{count} states"

    def form_agreement(self, settings: VerificationSettings) -> Tuple[float, str]:
        single, pair = self.single_trunc(settings), self.pair_trunc(settings)
        worst = 0.0
        levels = min(FORM_LEVELS, (single.dim - 2) // 2)
        for beta in BETAS:
            for lam in LAMBDAS:
                prob = _f1(beta, lam, single)
                for parity in PARITIES:
                    closed = single_mode_service.number_coefficients(prob, parity, levels)
                    for state in (
                        single_mode_service.component(prob, parity),
                        single_mode_service.state_via_kummer(prob, parity),
                        single_mode_service.state_via_binomial(prob, parity),
                    ):
                        sampled = _sector_levels(state, parity, levels + 1)
                        worst = max(worst, oracle_service.relative_deviation(sampled, closed))

        for label in FAMILIES:
            family = FamilyLabel.parse(label)
            count = min(FORM_LEVELS, pair.dim - 1 - max(family.base))
            for beta in BETAS:
                for lam in LAMBDAS:
                    prob2 = _f2(beta, lam, pair, label)
                    closed = pair_mode_service.number_coefficients(prob2, family, count)
                    for state in (
                        pair_mode_service.family_state(prob2, family),
                        pair_mode_service.state_via_kummer(prob2, family),
                        pair_mode_service.state_via_binomial(prob2, family),
                    ):
                        worst = max(worst, oracle_service.relative_deviation(_diagonal(state, family, count + 1), closed))
        return worst, f"levels n <= {levels} (single), up to {FORM_LEVELS} (pair)"

    def recursion_agreement(self, settings: VerificationSettings) -> Tuple[float, str]:
        single, pair = self.single_trunc(settings), self.pair_trunc(settings)
        worst = 0.0
        for beta in BETAS:
            for lam in LAMBDAS:
                prob = _f1(beta, lam, single)
                for parity, kind in ((Parity.EVEN, RecursionKind.F1_EVEN), (Parity.ODD, RecursionKind.F1_ODD)):
                    closed = single_mode_service.number_coefficients(prob, parity, RECURSION_LEVELS)
                    oracle = oracle_service.recursion_coefficients(
                        RecursionOracle(kind=kind, beta=beta, lam=lam, length=RECURSION_LEVELS + 1)
                    )
                    worst = max(worst, oracle_service.relative_deviation(closed, oracle))
                    expanded = single_mode_service.number_coefficients_gamma_sum(prob, parity, RECURSION_LEVELS)
                    worst = max(worst, oracle_service.relative_deviation(expanded, oracle))

                even = single_mode_service.number_coefficients(prob, Parity.EVEN, 2)
                worst = max(worst, _relative(even[1], lam / math.sqrt(2)))
                worst = max(worst, _relative(even[2], (lam ** 2 - 2 * beta) / (2 * math.sqrt(6))))

                for label in FAMILIES:
                    family = FamilyLabel.parse(label)
                    prob2 = _f2(beta, lam, pair, label)
                    closed = pair_mode_service.number_coefficients(prob2, family, RECURSION_LEVELS)
                    oracle = oracle_service.recursion_coefficients(RecursionOracle(
                        kind=RecursionKind.F2_FAMILY, beta=beta, lam=lam, length=RECURSION_LEVELS + 1, family=family
                    ))
                    worst = max(worst, oracle_service.relative_deviation(closed, oracle))
                    expanded = pair_mode_service.number_coefficients_gamma_sum(prob2, family, RECURSION_LEVELS)
                    worst = max(worst, oracle_service.relative_deviation(expanded, oracle))

                vacuum = pair_mode_service.number_coefficients(_f2(beta, lam, pair), "0:0", 2)
                worst = max(worst, _relative(vacuum[1], lam))
                worst = max(worst, _relative(vacuum[2], (lam ** 2 - beta) / 2))
        return worst, f"n <= {RECURSION_LEVELS}, recurrence and gamma-sum forms, plus spot values"

    def squeezed_overlaps(self, settings: VerificationSettings) -> Tuple[float, str]:
        single, pair = self.single_trunc(settings), self.pair_trunc(settings)
        worst = 0.0
        length = OVERLAP_RECURSION_LENGTH
        for beta in BETAS:
            radius = math.sqrt(abs(beta))
            for lam in LAMBDAS:
                prob = _f1(beta, lam, single)
                for parity, kind in ((Parity.EVEN, RecursionKind.F1_EVEN), (Parity.ODD, RecursionKind.F1_ODD)):
                    coeffs = oracle_service.recursion_coefficients(
                        RecursionOracle(kind=kind, beta=beta, lam=lam, length=length)
                    )
                    for scale, phase in ((0.2, 0.0), (0.4, 0.3), (0.4, 2.0)):
                        mu = scale / radius * complex(math.cos(phase), math.sin(phase))
                        probe = oracle_service.squeezed_vacuum_coefficients(mu, parity, length)
                        overlap = single_mode_service.overlap_squeezed(prob, mu, parity)
                        worst = max(worst, _relative(overlap.value, np.vdot(probe, coeffs)))

                for label in FAMILIES:
                    family = FamilyLabel.parse(label)
                    prob2 = _f2(beta, lam, pair, label)
                    coeffs = oracle_service.recursion_coefficients(RecursionOracle(
                        kind=RecursionKind.F2_FAMILY, beta=beta, lam=lam, length=length, family=family
                    ))
                    for scale, phase in ((0.3, 0.0), (0.8, 0.7), (0.8, 2.5)):
                        mu = scale / radius * complex(math.cos(phase), math.sin(phase))
                        probe = oracle_service.caves_schumaker_coefficients(mu, family.index, length)
                        overlap = pair_mode_service.overlap_caves_schumaker(prob2, mu, family)
                        worst = max(worst, _relative(overlap.value, np.vdot(probe, coeffs)))

        flags = self._validity_flags_flip(single, pair)
        if flags:
            return float("inf"), f"validity flags wrong at {flags}"
        return worst, "validity flags flip at 1/2 and 1"

    def _validity_flags_flip(self, single: TruncationSpec, pair: TruncationSpec) -> List[str]:
        wrong = []
        prob = _f1(0.25, 0.7, single)
        if single_mode_service.overlap_squeezed(prob, 1.0, Parity.EVEN).valid:
            wrong.append("squeezed mu=1.0")
        if not single_mode_service.overlap_squeezed(prob, 0.999, Parity.EVEN).valid:
            wrong.append("squeezed mu=0.999")
        prob2 = _f2(0.25, 0.7, pair)
        if pair_mode_service.overlap_caves_schumaker(prob2, 2.0, "0:0").valid:
            wrong.append("Caves-Schumaker mu=2.0")
        if not pair_mode_service.overlap_caves_schumaker(prob2, 1.999, "0:0").valid:
            wrong.append("Caves-Schumaker mu=1.999")
        return wrong

    def coherent_overlaps(self, settings: VerificationSettings) -> Tuple[float, str]:
        single, pair = self.single_trunc(settings), self.pair_trunc(settings)
        worst = 0.0
        length = COHERENT_RECURSION_LENGTH
        alphas = (0.8 + 0.3j, 1.5 + 0j, -1.0 + 1.1j)
        pair_points = ((0.5 + 0j, 0.4j), (1.2 + 0j, -0.7 + 0.5j), (0j, 1.5 + 0j), (-0.9 + 0.6j, 0j))
        for beta in BETAS:
            for lam in LAMBDAS:
                prob = _f1(beta, lam, single)
                for parity, kind in ((Parity.EVEN, RecursionKind.F1_EVEN), (Parity.ODD, RecursionKind.F1_ODD)):
                    coeffs = oracle_service.recursion_coefficients(
                        RecursionOracle(kind=kind, beta=beta, lam=lam, length=length)
                    )
                    offset = 0 if parity == Parity.EVEN else 1
                    for alpha in alphas:
                        probe = oracle_service.coherent_coefficients(alpha, 2 * length + 1)
                        reference = np.vdot(probe[np.arange(length) * 2 + offset], coeffs)
                        overlap = single_mode_service.overlap_coherent(prob, alpha, parity)
                        worst = max(worst, _relative(overlap.value, reference))

                for label in FAMILIES:
                    family = FamilyLabel.parse(label)
                    prob2 = _f2(beta, lam, pair, label)
                    coeffs = oracle_service.recursion_coefficients(RecursionOracle(
                        kind=RecursionKind.F2_FAMILY, beta=beta, lam=lam, length=length, family=family
                    ))
                    for gamma, delta in pair_points:
                        probe = oracle_service.pair_coherent_diagonal(gamma, delta, family, length)
                        overlap = pair_mode_service.overlap_coherent(prob2, gamma, delta, family)
                        worst = max(worst, _relative(overlap.value, np.vdot(probe, coeffs)))
        return worst, "0:0 family matches the unmodified closed form; 0:2 and 3:0 carry the base monomial"

    def wavefunctions(self, settings: VerificationSettings) -> Tuple[float, str]:
        trunc = TruncationSpec(dim=settings.wave_dim, guard=max(1, settings.wave_dim // 32))
        beta, lam = 0.04 + 0j, 0.7 + 0j
        prob = _f1(beta, lam, trunc)
        worst = 0.0
        grid = np.append(WAVE_GRID, WAVE_REFERENCE)
        for parity, kind in ((Parity.EVEN, RecursionKind.F1_EVEN), (Parity.ODD, RecursionKind.F1_ODD)):
            oracle = RecursionOracle(kind=kind, beta=beta, lam=lam, length=trunc.dim // 2)
            values = oracle_service.hermite_position_sum(oracle_service.recursion_state(oracle, trunc), grid)
            reference = values[:-1] / values[-1]
            closed = single_mode_service.wavefunction_ratio(prob, WAVE_GRID, WAVE_REFERENCE, parity)
            worst = max(worst, oracle_service.relative_deviation(closed, reference))
            laguerre = np.array([single_mode_service.wavefunction_laguerre(prob, float(x), parity) for x in WAVE_GRID])
            kummer = np.array([single_mode_service.wavefunction(prob, float(x), parity) for x in WAVE_GRID])
            worst = max(worst, oracle_service.relative_deviation(laguerre, kummer))
        return worst, f"x in [-3, 3] step 0.1, x0 = {WAVE_REFERENCE}, dim {trunc.dim}; Kummer against Laguerre series"

    def canonical_transformation(self, settings: VerificationSettings) -> Tuple[float, str]:
        trunc = TruncationSpec(dim=settings.transform_dim, guard=max(1, settings.transform_dim // 16))
        worst = 0.0
        for beta in (0j,) + BETAS:
            report = pair_mode_service.via_f1_transform(beta, trunc)
            worst = max(worst, report.deviation, report.commutator_deviation)
        return worst, f"dim {trunc.dim} per mode"

    def branch_robustness(self, settings: VerificationSettings) -> Tuple[float, str]:
        single, pair = self.single_trunc(settings), self.pair_trunc(settings)
        worst = 0.0

        def compare(first, second):
            nonlocal worst
            worst = max(worst, oracle_service.relative_deviation(np.atleast_1d(first), np.atleast_1d(second)))

        for beta in BETAS:
            for lam in LAMBDAS:
                prob = _f1(beta, lam, single)
                for parity in PARITIES:
                    compare(*(single_mode_service.number_coefficients(prob, parity, RECURSION_LEVELS, root) for root in (1, -1)))
                    compare(*(single_mode_service.overlap_squeezed(prob, 0.7 - 0.4j, parity, root).value for root in (1, -1)))
                    compare(*(single_mode_service.overlap_coherent(prob, 0.8 + 0.3j, parity, root).value for root in (1, -1)))
                    compare(*(single_mode_service.wavefunction_ratio(prob, WAVE_GRID[::10], WAVE_REFERENCE, parity, root)
                              for root in (1, -1)))
                for label in FAMILIES:
                    prob2 = _f2(beta, lam, pair, label)
                    compare(*(pair_mode_service.number_coefficients(prob2, label, RECURSION_LEVELS, root) for root in (1, -1)))
                    compare(*(pair_mode_service.overlap_caves_schumaker(prob2, 1.1 + 0.5j, label, root).value for root in (1, -1)))
                    compare(*(pair_mode_service.overlap_coherent(prob2, 0.5, 0.4j, label, root).value for root in (1, -1)))
        return worst, "root +1 against root -1"

    # ------------------------------------------------------------------
    # Suite
    # ------------------------------------------------------------------

    def evaluate(self, criterion: int, settings: Optional[VerificationSettings] = None) -> CriterionResult:
        settings = settings or self.default_settings
        name, tolerance, check = self.criteria[criterion]
        started = time.perf_counter()
        try:
            value, detail = check(settings)
        except Exception as e:
            logger.error(f"Criterion {criterion} ({name}) raised: {e}")
            return CriterionResult(
                criterion=criterion, name=name, tolerance=tolerance, passed=False,
                detail=f"{type(e).__name__}: {e}"
            )
        passed = bool(np.isfinite(value) and value < tolerance)
        logger.info(
            f"Criterion {criterion} ({name}): {value:.3e} vs {tolerance:.0e} "
            f"{'pass' if passed else 'FAIL'} in {time.perf_counter() - started:.1f}s"
        )
        return CriterionResult(
            criterion=criterion, name=name, value=float(value) if np.isfinite(value) else None,
            tolerance=tolerance, passed=passed, detail=detail
        )

    def release_caches(self) -> None:
        """Free the conjugate matrices the criteria left in the service caches"""
        single_mode_service.clear_caches()
        pair_mode_service.clear_caches()
        logger.debug("Released cached conjugates")

    def run(self, settings: Optional[VerificationSettings] = None, criteria: Optional[Iterable[int]] = None) -> VerificationReport:
        settings = settings or self.default_settings
        started = time.perf_counter()
        try:
            results = [self.evaluate(criterion, settings) for criterion in (criteria or sorted(self.criteria))]
        finally:
            self.release_caches()
        report = VerificationReport(
            criteria=results,
            passed=all(result.passed for result in results),
            settings=settings,
            elapsed_seconds=time.perf_counter() - started
        )
        logger.info(f"Acceptance suite {'passed' if report.passed else 'failed'} in {report.elapsed_seconds:.1f}s")
        return report

    def run_negative_control(self, settings: Optional[VerificationSettings] = None) -> VerificationReport:
        """Checks g†₀ of a² on the odd sector; the suite passes iff that check fails"""
        settings = settings or self.default_settings
        started = time.perf_counter()
        trunc = self.single_trunc(settings)
        tolerance = 1e-10
        conjugate = single_mode_service.base_conjugate(trunc, Parity.EVEN)
        wrong_sector = single_mode_service.base_conjugate(trunc, Parity.ODD).sector
        check = conjugate_service.verify_conjugacy(conjugate, tolerance, sector=wrong_sector)
        self.release_caches()
        result = CriterionResult(
            criterion=0,
            name="wrong-sector conjugacy (negative control)",
            value=check.max_residual,
            tolerance=tolerance,
            passed=not check.passed,
            detail="expected to fail: g†₀ is conjugate to a² on even levels only"
        )
        return VerificationReport(
            criteria=[result],
            passed=result.passed,
            settings=settings,
            elapsed_seconds=time.perf_counter() - started
        )


verification_service = VerificationService()
