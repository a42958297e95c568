"""
Truncated Fock spaces.

Ladder and diagonal operators on one or two modes, sector projections,
interior residuals and operator series. Two-mode operators are always
assembled as Kronecker products of single-mode pieces, with mode a as the
slow index (flat index n_a*dim + n_b).
"""

import logging
from typing import Callable, Optional, Sequence, Union

import numpy as np

from app.errors import SingularOperatorError, TruncationError
from app.models import (
    AnyFockVector, FockVector, MatrixOperator, SectorSpec, TruncationSpec, TwoModeFockVector
)

logger = logging.getLogger(__name__)

Number = Union[int, float, complex]


class FockSpaceService:
    """Operators and states on truncated Fock spaces"""

    # ------------------------------------------------------------------
    # Operators
    # ------------------------------------------------------------------

    def ladder(self, mode: str, kind: str, trunc: TruncationSpec, power: int = 1, modes: int = 1) -> MatrixOperator:
        """
        a^power / a†^power (mode "a") or b^power / b†^power (mode "b").

        kind is "lower" or "raise". Mode "b" always lives on two modes.
        """
        if mode not in ("a", "b"):
            raise ValueError(f"Unknown mode '{mode}', expected 'a' or 'b'")
        if kind not in ("lower", "raise"):
            raise ValueError(f"Unknown ladder kind '{kind}', expected 'lower' or 'raise'")
        if power < 1:
            raise ValueError("ladder power must be at least 1")
        if mode == "b":
            modes = 2

        single = self._ladder_matrix(kind, trunc.dim, power)
        if modes == 2:
            eye = np.eye(trunc.dim, dtype=complex)
            entries = np.kron(single, eye) if mode == "a" else np.kron(eye, single)
        else:
            entries = single

        label = mode + ("†" if kind == "raise" else "") + (f"^{power}" if power > 1 else "")
        return MatrixOperator(trunc=trunc, modes=modes, entries=entries, bandwidth=power, label=label)

    @staticmethod
    def _ladder_matrix(kind: str, dim: int, power: int) -> np.ndarray:
        if power >= dim:
            return np.zeros((dim, dim), dtype=complex)
        n = np.arange(dim - power, dtype=float)
        weights = np.ones(dim - power)
        for j in range(1, power + 1):
            weights *= n + j
        weights = np.sqrt(weights).astype(complex)
        # <n+p| a†^p |n> = sqrt((n+1)...(n+p)), and a^p is its transpose
        return np.diag(weights, k=-power if kind == "raise" else power)

    def diag_values(self, f: Callable[[int], Number], dim: int) -> np.ndarray:
        """f(n) for n = 0..dim-1; non-finite values raise SingularOperatorError"""
        try:
            values = np.array([f(n) for n in range(dim)], dtype=complex)
        except ZeroDivisionError as e:
            raise SingularOperatorError(f"diagonal map is singular: {e}")
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise SingularOperatorError(f"diagonal map is not finite at n={int(bad[0])}")
        return values

    def diag_fn(self, f: Callable[[int], Number], trunc: TruncationSpec, mode: Optional[str] = None) -> MatrixOperator:
        """Diagonal operator f(N) on one mode, or f(N_a) / f(N_b) on two modes"""
        values = self.diag_values(f, trunc.dim)
        if mode is None:
            return MatrixOperator(trunc=trunc, modes=1, entries=np.diag(values), bandwidth=0, label="f(N)")
        ones = np.ones(trunc.dim)
        if mode == "a":
            flat = np.kron(values, ones)
        elif mode == "b":
            flat = np.kron(ones, values)
        else:
            raise ValueError(f"Unknown mode '{mode}', expected 'a' or 'b'")
        return MatrixOperator(trunc=trunc, modes=2, entries=np.diag(flat), bandwidth=0, label=f"f(N_{mode})")

    def kron(self, left: MatrixOperator, right: MatrixOperator, label: str = "") -> MatrixOperator:
        """Two-mode operator left ⊗ right from single-mode factors"""
        if left.modes != 1 or right.modes != 1:
            raise TruncationError("kron expects two single-mode operators")
        self._check_compatible(left, right)
        return MatrixOperator(
            trunc=left.trunc,
            modes=2,
            entries=np.kron(left.entries, right.entries),
            bandwidth=max(left.bandwidth, right.bandwidth),
            label=label or f"{left.label}⊗{right.label}"
        )

    def combine(self, terms: Sequence[tuple], label: str = "") -> MatrixOperator:
        """Linear combination sum_i c_i A_i of operators on the same space"""
        if not terms:
            raise ValueError("combine needs at least one term")
        first = terms[0][1]
        entries = np.zeros_like(first.entries)
        for coefficient, op in terms:
            self._check_compatible(first, op)
            entries = entries + coefficient * op.entries
        return MatrixOperator(
            trunc=first.trunc,
            modes=first.modes,
            entries=entries,
            bandwidth=max(op.bandwidth for _, op in terms),
            label=label
        )

    def commutator(self, A: MatrixOperator, B: MatrixOperator) -> MatrixOperator:
        """[A, B] on the truncated space"""
        self._check_compatible(A, B)
        return MatrixOperator(
            trunc=A.trunc,
            modes=A.modes,
            entries=A.entries @ B.entries - B.entries @ A.entries,
            bandwidth=A.bandwidth + B.bandwidth,
            label=f"[{A.label}, {B.label}]"
        )

    def commutator_columns(self, A: MatrixOperator, B: MatrixOperator, columns: np.ndarray) -> np.ndarray:
        """Selected columns of [A, B] without forming the full product"""
        self._check_compatible(A, B)
        return A.entries @ B.entries[:, columns] - B.entries @ A.entries[:, columns]

    def _check_compatible(self, A: MatrixOperator, B: MatrixOperator) -> None:
        if A.trunc.dim != B.trunc.dim or A.modes != B.modes:
            raise TruncationError(
                f"dimension mismatch: dim {A.trunc.dim}/{A.modes} modes vs dim {B.trunc.dim}/{B.modes} modes"
            )

    # ------------------------------------------------------------------
    # States
    # ------------------------------------------------------------------

    def vector(self, trunc: TruncationSpec, coeffs: np.ndarray, modes: int = 1) -> AnyFockVector:
        if modes == 2:
            return TwoModeFockVector(trunc=trunc, coeffs=coeffs)
        return FockVector(trunc=trunc, coeffs=coeffs)

    def number_state(self, trunc: TruncationSpec, n: int) -> FockVector:
        if not 0 <= n < trunc.dim:
            raise TruncationError(f"|{n}> lies outside dim={trunc.dim}")
        coeffs = np.zeros(trunc.dim, dtype=complex)
        coeffs[n] = 1.0
        return FockVector(trunc=trunc, coeffs=coeffs)

    def pair_number_state(self, trunc: TruncationSpec, n_a: int, n_b: int) -> TwoModeFockVector:
        if not (0 <= n_a < trunc.dim and 0 <= n_b < trunc.dim):
            raise TruncationError(f"|{n_a},{n_b}> lies outside dim={trunc.dim}")
        coeffs = np.zeros((trunc.dim, trunc.dim), dtype=complex)
        coeffs[n_a, n_b] = 1.0
        return TwoModeFockVector(trunc=trunc, coeffs=coeffs)

    def apply(self, op: MatrixOperator, v: AnyFockVector) -> AnyFockVector:
        self._check_vector(op, v)
        return self.vector(v.trunc, op.entries @ v.flat, v.modes)

    def inner(self, u: AnyFockVector, v: AnyFockVector) -> complex:
        """<u|v>, antilinear in u"""
        if u.trunc.dim != v.trunc.dim or u.modes != v.modes:
            raise TruncationError("inner product of states on different spaces")
        return complex(np.vdot(u.flat, v.flat))

    def _check_vector(self, op: MatrixOperator, v: AnyFockVector) -> None:
        if op.trunc.dim != v.trunc.dim or op.modes != v.modes:
            raise TruncationError(
                f"dimension mismatch: operator dim {op.trunc.dim}/{op.modes} modes, state dim {v.trunc.dim}/{v.modes} modes"
            )

    # ------------------------------------------------------------------
    # Sectors and interiors
    # ------------------------------------------------------------------

    def sector_mask(self, sector: SectorSpec, trunc: TruncationSpec) -> np.ndarray:
        """Boolean mask over flat basis indices"""
        dim = trunc.dim
        if sector.family is None:
            n = np.arange(dim)
            return n % sector.modulus == sector.offset
        n_a, n_b = np.divmod(np.arange(dim * dim), dim)
        base_a, base_b = sector.family.base
        shift = n_a - base_a
        return (shift >= 0) & (n_b - base_b == shift) & (shift % sector.modulus == 0)

    def level_mask(self, trunc: TruncationSpec, modes: int, limit: int) -> np.ndarray:
        """Flat indices whose every mode level is below limit"""
        dim = trunc.dim
        if modes == 1:
            return np.arange(dim) < limit
        n_a, n_b = np.divmod(np.arange(dim * dim), dim)
        return (n_a < limit) & (n_b < limit)

    def sector_members(self, sector: SectorSpec, trunc: TruncationSpec, limit: Optional[int] = None) -> np.ndarray:
        mask = self.sector_mask(sector, trunc)
        if limit is not None:
            mask &= self.level_mask(trunc, sector.modes, limit)
        return np.flatnonzero(mask)

    def sector_project(self, v: AnyFockVector, sector: SectorSpec) -> AnyFockVector:
        if sector.modes != v.modes:
            raise TruncationError(f"{sector.kind.value} sector applied to a {v.modes}-mode state")
        flat = np.where(self.sector_mask(sector, v.trunc), v.flat, 0)
        return self.vector(v.trunc, flat, v.modes)

    def interior_limit(self, trunc: TruncationSpec, bandwidth: int) -> int:
        """Levels below dim - guard*bandwidth are free of truncation artefacts"""
        limit = trunc.dim - trunc.guard * max(bandwidth, 1)
        if limit <= 0:
            raise TruncationError(
                f"no interior left: dim={trunc.dim}, guard={trunc.guard}, bandwidth={bandwidth}"
            )
        return limit

    def eigen_residual(self, op: MatrixOperator, v: AnyFockVector, lam: Number) -> float:
        """‖(F - λ)v‖ / ‖v‖, both restricted to the interior"""
        self._check_vector(op, v)
        limit = self.interior_limit(v.trunc, op.bandwidth)
        interior = self.level_mask(v.trunc, v.modes, limit)
        residual = op.entries @ v.flat - lam * v.flat
        norm = np.linalg.norm(v.flat[interior])
        if norm == 0:
            raise ValueError("state vanishes on the interior")
        return float(np.linalg.norm(residual[interior]) / norm)

    # ------------------------------------------------------------------
    # Series
    # ------------------------------------------------------------------

    def apply_series(
        self,
        op: MatrixOperator,
        v: AnyFockVector,
        ratio: Callable[[int], Number],
        max_terms: Optional[int] = None
    ) -> AnyFockVector:
        """
        sum_k t_k with t_0 = v and t_k = ratio(k) * op t_(k-1).

        exp(s·op): ratio s/k. (1 + x·op)^e: ratio x(e-k+1)/k.
        M(α, b, z·op): ratio z(α+k-1)/((b+k-1)k). Stops once a term vanishes,
        which happens after finitely many steps for raising operators.
        """
        self._check_vector(op, v)
        total = np.array(v.flat, dtype=complex)
        term = total.copy()
        max_terms = max_terms if max_terms is not None else op.size + 1
        for k in range(1, max_terms + 1):
            r = ratio(k)
            if r == 0:
                break
            term = r * (op.entries @ term)
            if not np.any(term):
                break
            total += term
        else:
            logger.debug(f"Series in {op.label or 'operator'} stopped at the {max_terms}-term cap")
        return self.vector(v.trunc, total, v.modes)

    def sub_band_offset(self, op: MatrixOperator) -> Optional[int]:
        """s if every nonzero entry sits on the s-th subdiagonal (s > 0), else None"""
        rows, cols = np.nonzero(op.entries)
        if rows.size == 0:
            return None
        offsets = np.unique(rows - cols)
        if offsets.size == 1 and offsets[0] > 0:
            return int(offsets[0])
        return None

    def power_series(self, op: MatrixOperator, coefficients: Sequence[Number], label: str = "") -> MatrixOperator:
        """sum_k c_k op^k; single-subdiagonal operators take a products-of-diagonals path"""
        size = op.size
        result = np.zeros((size, size), dtype=complex)
        if len(coefficients) and coefficients[0] != 0:
            result += coefficients[0] * np.eye(size)

        offset = self.sub_band_offset(op)
        if offset is not None:
            diagonal = np.diagonal(op.entries, offset=-offset)
            run = None
            for k in range(1, len(coefficients)):
                length = size - k * offset
                if length <= 0:
                    break
                if run is None:
                    run = diagonal[:length].copy()
                else:
                    start = (k - 1) * offset
                    run = run[:length] * diagonal[start:start + length]
                if coefficients[k] != 0:
                    idx = np.arange(length)
                    result[idx + k * offset, idx] += coefficients[k] * run
        else:
            power = np.eye(size, dtype=complex)
            for k in range(1, len(coefficients)):
                power = op.entries @ power
                if not np.any(power):
                    break
                if coefficients[k] != 0:
                    result += coefficients[k] * power

        return MatrixOperator(
            trunc=op.trunc,
            modes=op.modes,
            entries=result,
            bandwidth=op.bandwidth,
            label=label
        )


fock_space = FockSpaceService()
