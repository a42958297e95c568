"""
Conjugate operators.

For a generalized annihilator F this service builds raising operators G†
with [F, G†] = 1 on a sector of the Fock space, the arctan series that
turns a conjugate of a² (or ab) into a conjugate of the full operator, and
residual checks for both identities.
"""

import logging
from typing import Callable, Optional, Union

import numpy as np

from app.errors import SingularOperatorError, TruncationError
from app.models import (
    ArctanSeries, ConjugacyReport, ConjugatePair, FamilyLabel, GeneralizedAnnihilator,
    MatrixOperator, SectorSpec, TruncationSpec
)
from app.services.fock_space import fock_space

logger = logging.getLogger(__name__)

Number = Union[int, float, complex]


class ConjugateService:
    """Builds and checks conjugates of generalized annihilators"""

    def single_mode_annihilator(
        self, f: Callable[[int], Number], p: int, trunc: TruncationSpec, label: str = ""
    ) -> GeneralizedAnnihilator:
        return GeneralizedAnnihilator(trunc=trunc, f=f, p=p, label=label or f"f(n)a^{p}")

    def product_annihilator(
        self,
        f1: Callable[[int], Number], k: int,
        f2: Callable[[int], Number], l: int,
        trunc: TruncationSpec, label: str = ""
    ) -> GeneralizedAnnihilator:
        return GeneralizedAnnihilator(
            trunc=trunc, f1=f1, k=k, f2=f2, l=l,
            label=label or f"f1(n_a)a^{k} f2(n_b)b^{l}"
        )

    def matrix(self, F: GeneralizedAnnihilator) -> MatrixOperator:
        """Dense matrix of F; f is evaluated at the level reached after lowering"""
        trunc = F.trunc
        if not F.is_product:
            lower = fock_space.ladder("a", "lower", trunc, power=F.p)
            values = fock_space.diag_values(F.f, trunc.dim)
            return MatrixOperator(
                trunc=trunc, modes=1, entries=values[:, None] * lower.entries,
                bandwidth=F.p, label=F.label
            )

        left = fock_space.ladder("a", "lower", trunc, power=F.k)
        right = fock_space.ladder("a", "lower", trunc, power=F.l)
        left_values = fock_space.diag_values(F.f1, trunc.dim)
        right_values = fock_space.diag_values(F.f2, trunc.dim)
        return MatrixOperator(
            trunc=trunc,
            modes=2,
            entries=np.kron(left_values[:, None] * left.entries, right_values[:, None] * right.entries),
            bandwidth=max(F.k, F.l),
            label=F.label
        )

    # ------------------------------------------------------------------
    # Conjugates
    # ------------------------------------------------------------------

    def _inverse_weights(self, f: Callable[[int], Number], power: int, dim: int) -> np.ndarray:
        """conj f(n) / (|f(n)|² (n+1)...(n+power)), the diagonal of (FF†)⁻¹ F-like factors"""
        n = np.arange(dim, dtype=float)
        values = fock_space.diag_values(f, dim)
        falling = np.ones(dim)
        for j in range(1, power + 1):
            falling *= n + j
        norm = np.abs(values) ** 2 * falling
        zeros = np.flatnonzero(norm == 0)
        if zeros.size:
            raise SingularOperatorError(f"FF† vanishes at n={int(zeros[0])}")
        return np.conj(values) / norm

    def conjugate_single(self, F: GeneralizedAnnihilator, i: int) -> ConjugatePair:
        """
        G†_i = (1/p) a†^p · diag(conj f(n) (n+p-i) / (|f(n)|² (n+1)...(n+p))).

        [F, G†_i] = 1 on levels n ≡ i (mod p).
        """
        if F.is_product:
            raise ValueError("conjugate_single needs a single-mode annihilator")
        p = F.p
        if not 0 <= i < p:
            raise ValueError(f"residue {i} out of range for p={p}")
        trunc = F.trunc
        n = np.arange(trunc.dim, dtype=float)
        weights = self._inverse_weights(F.f, p, trunc.dim) * (n + p - i) / p
        raising = fock_space.ladder("a", "raise", trunc, power=p)
        G = MatrixOperator(
            trunc=trunc, modes=1, entries=raising.entries * weights[None, :],
            bandwidth=p, label=f"G†_{i}"
        )
        return ConjugatePair(F=self.matrix(F), G_dagger=G, sector=SectorSpec.residue(p, i))

    def conjugate_product(
        self,
        F: GeneralizedAnnihilator,
        side: str,
        i: int,
        family: Optional[Union[FamilyLabel, str]] = None
    ) -> ConjugatePair:
        """
        Conjugate of f1(n_a)a^k f2(n_b)b^l built on mode a (side "a") or mode b (side "b").

        The a-side conjugate carries the factor (n_a+k-i)/k and satisfies
        [F, G†] = 1 on the diagonal family through |i, 0> (or the family
        given). The b-side one is the mirror image.
        """
        if not F.is_product:
            raise ValueError("conjugate_product needs a product annihilator")
        if side not in ("a", "b"):
            raise ValueError(f"Unknown side '{side}', expected 'a' or 'b'")
        if F.k != F.l:
            raise ValueError("diagonal sectors need equal powers of a and b")
        step = F.k
        if not 0 <= i < step:
            raise ValueError(f"residue {i} out of range for power {step}")

        trunc = F.trunc
        n = np.arange(trunc.dim, dtype=float)
        left = self._inverse_weights(F.f1, F.k, trunc.dim)
        right = self._inverse_weights(F.f2, F.l, trunc.dim)
        if side == "a":
            left = left * (n + F.k - i) / F.k
        else:
            right = right * (n + F.l - i) / F.l

        raise_a = fock_space.ladder("a", "raise", trunc, power=F.k)
        raise_b = fock_space.ladder("a", "raise", trunc, power=F.l)
        G = MatrixOperator(
            trunc=trunc,
            modes=2,
            entries=np.kron(raise_a.entries * left[None, :], raise_b.entries * right[None, :]),
            bandwidth=step,
            label=f"G†_{side}{i}"
        )

        if family is None:
            family = FamilyLabel.parse(f"{i}:0" if side == "a" else f"0:{i}")
        sector = SectorSpec.diagonal(family, step=step)
        return ConjugatePair(F=self.matrix(F), G_dagger=G, sector=sector)

    # ------------------------------------------------------------------
    # Arctan series
    # ------------------------------------------------------------------

    def arctan_series(self, beta: Number, scale_factor: int, order: int) -> ArctanSeries:
        """b_(2m+1) = (-scale_factor·β)^m / (2m+1), up to power order"""
        scale = scale_factor * complex(beta)
        coefficients = [0j] * (order + 1)
        for power in range(1, order + 1, 2):
            m = (power - 1) // 2
            coefficients[power] = (-scale) ** m / power
        return ArctanSeries(beta=beta, scale_factor=scale_factor, coefficients=coefficients)

    def arctan_conjugate(
        self, target: MatrixOperator, base: ConjugatePair, beta: Number, scale_factor: int
    ) -> ConjugatePair:
        """
        𝒢† = (1/√s) tan⁻¹(√s g†) with s = scale_factor·β, as a series in g†.

        The series is cut where (g†)^k vanishes on the truncated space.
        """
        offset = fock_space.sub_band_offset(base.G_dagger)
        if offset is None:
            raise ValueError("arctan conjugate needs a raising base conjugate")
        order = (base.G_dagger.size - 1) // offset
        series = self.arctan_series(beta, scale_factor, order)
        G = fock_space.power_series(base.G_dagger, series.coefficients, label=f"atan({base.G_dagger.label})")
        logger.debug(f"Built arctan conjugate of order {order} for beta={complex(beta)}")
        return ConjugatePair(F=target, G_dagger=G, sector=base.sector)

    # ------------------------------------------------------------------
    # Checks
    # ------------------------------------------------------------------

    def _sector_columns(self, sector: SectorSpec, trunc: TruncationSpec, bandwidth: int) -> np.ndarray:
        limit = fock_space.interior_limit(trunc, bandwidth)
        members = fock_space.sector_members(sector, trunc, limit)
        if members.size == 0:
            raise TruncationError(f"sector {sector.kind.value} has no members below level {limit}")
        return members

    def verify_conjugacy(
        self, pair: ConjugatePair, tolerance: float = 1e-10, sector: Optional[SectorSpec] = None
    ) -> ConjugacyReport:
        """max |P_S ([F, G†] - 1) P_S| over interior sector members"""
        sector = sector or pair.sector
        trunc = pair.F.trunc
        bandwidth = pair.F.bandwidth + pair.G_dagger.bandwidth
        members = self._sector_columns(sector, trunc, bandwidth)

        block = fock_space.commutator_columns(pair.F, pair.G_dagger, members)[members, :]
        block[np.arange(members.size), np.arange(members.size)] -= 1.0
        residual = float(np.max(np.abs(block)))
        logger.debug(f"[{pair.F.label}, {pair.G_dagger.label}] residual {residual:.3e} on {members.size} columns")
        return ConjugacyReport(
            max_residual=residual,
            tolerance=tolerance,
            passed=residual <= tolerance,
            sector=sector,
            columns=int(members.size)
        )

    def verify_auxiliary_commutator(
        self,
        pair: ConjugatePair,
        raising: MatrixOperator,
        factor: Number,
        tolerance: float = 1e-10,
        sector: Optional[SectorSpec] = None
    ) -> ConjugacyReport:
        """max |P_S ([R, g†] - factor·g†²) P_S|, e.g. [a†², g†] = 4g†² or [a†b†, g†] = g†²"""
        sector = sector or pair.sector
        G = pair.G_dagger
        trunc = G.trunc
        members = self._sector_columns(sector, trunc, raising.bandwidth + 2 * G.bandwidth)

        commutator = fock_space.commutator_columns(raising, G, members)
        square = G.entries @ G.entries[:, members]
        block = (commutator - factor * square)[members, :]
        residual = float(np.max(np.abs(block)))
        return ConjugacyReport(
            max_residual=residual,
            tolerance=tolerance,
            passed=residual <= tolerance,
            sector=sector,
            columns=int(members.size)
        )


conjugate_service = ConjugateService()
