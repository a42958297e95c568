"""
Brute-force reference values.

Three-term recursions, pinned least-squares solves on a sector, Hermite
function sums on a position grid and the coefficient lists of probe states.
Nothing here goes through the single-mode or pair services, so every closed
form can be checked against an independent construction.
"""

import logging
import math
from typing import Union

import numpy as np
import scipy.linalg

from app.errors import DecayError, RankDeficiencyError
from app.models import (
    AnyFockVector, FamilyLabel, FockVector, MatrixOperator, NullspaceSolution, Parity,
    RecursionKind, RecursionOracle, SectorSpec, TruncationSpec, TwoModeFockVector
)
from app.services.fock_space import fock_space

logger = logging.getLogger(__name__)

Number = Union[int, float, complex]

DECAY_TOLERANCE = 1e-14


class OracleService:
    """Independent constructions used as ground truth"""

    # ------------------------------------------------------------------
    # Recursions
    # ------------------------------------------------------------------

    def recursion_coefficients(self, o: RecursionOracle) -> np.ndarray:
        """
        c_0 = 1 and raise(k) c_(k+1) = λ c_k - β lower(k) c_(k-1).

        Indices count sector steps: level 2k (even), 2k+1 (odd), or the
        k-th point of a pair family.
        """
        if o.kind == RecursionKind.F1_EVEN:
            def raise_weight(k): return math.sqrt((2 * k + 1) * (2 * k + 2))
            def lower_weight(k): return math.sqrt((2 * k - 1) * 2 * k)
        elif o.kind == RecursionKind.F1_ODD:
            def raise_weight(k): return math.sqrt((2 * k + 2) * (2 * k + 3))
            def lower_weight(k): return math.sqrt(2 * k * (2 * k + 1))
        else:
            shift = o.family.index
            def raise_weight(k): return math.sqrt((k + 1) * (k + 1 + shift))
            def lower_weight(k): return math.sqrt(k * (k + shift))

        lam, beta = complex(o.lam), complex(o.beta)
        coeffs = np.zeros(o.length, dtype=complex)
        coeffs[0] = 1.0
        for k in range(o.length - 1):
            previous = coeffs[k - 1] if k > 0 else 0j
            coeffs[k + 1] = (lam * coeffs[k] - beta * lower_weight(k) * previous) / raise_weight(k)
        return coeffs

    def recursion_state(self, o: RecursionOracle, trunc: TruncationSpec) -> AnyFockVector:
        """Embed recursion coefficients into a Fock vector, truncating at the edge"""
        coeffs = self.recursion_coefficients(o)
        dim = trunc.dim
        if o.kind != RecursionKind.F2_FAMILY:
            offset = 0 if o.kind == RecursionKind.F1_EVEN else 1
            vector = np.zeros(dim, dtype=complex)
            levels = np.arange(o.length) * 2 + offset
            keep = levels < dim
            vector[levels[keep]] = coeffs[keep]
            return FockVector(trunc=trunc, coeffs=vector)

        table = np.zeros((dim, dim), dtype=complex)
        base_a, base_b = o.family.base
        steps = np.arange(o.length)
        keep = (steps + base_a < dim) & (steps + base_b < dim)
        table[steps[keep] + base_a, steps[keep] + base_b] = coeffs[keep]
        return TwoModeFockVector(trunc=trunc, coeffs=table)

    # ------------------------------------------------------------------
    # Pinned least squares
    # ------------------------------------------------------------------

    def nullspace_eigenstate(self, F: MatrixOperator, lam: Number, sector: SectorSpec) -> NullspaceSolution:
        """
        Minimize ‖(F - λ)v‖ over sector members with the base coefficient pinned to 1.

        Rows are interior sector members; columns are the members those rows reach.
        """
        trunc = F.trunc
        bandwidth = max(F.bandwidth, 1)
        limit = fock_space.interior_limit(trunc, bandwidth)
        rows = fock_space.sector_members(sector, trunc, limit)
        cols = fock_space.sector_members(sector, trunc, limit + bandwidth)
        if rows.size == 0 or cols.size < 2:
            raise RankDeficiencyError("sector has no interior rows to solve on", rank=0, unknowns=max(cols.size - 1, 0))

        system = F.entries[np.ix_(rows, cols)].copy()
        positions = np.searchsorted(cols, rows)
        system[np.arange(rows.size), positions] -= complex(lam)

        pinned, free = system[:, 0], system[:, 1:]
        solution, _, rank, _ = scipy.linalg.lstsq(free, -pinned)
        unknowns = free.shape[1]
        if rank < unknowns:
            raise RankDeficiencyError(
                f"least-squares system has rank {rank} for {unknowns} unknowns", rank=int(rank), unknowns=unknowns
            )

        full = np.concatenate(([1.0 + 0j], solution))
        residual = float(np.linalg.norm(system @ full))
        coeffs = np.zeros(F.size, dtype=complex)
        coeffs[cols] = full
        state = fock_space.vector(trunc, coeffs, F.modes)
        logger.debug(f"Pinned solve on {rows.size} rows x {unknowns} unknowns, residual {residual:.3e}")
        return NullspaceSolution(state=state, residual=residual, rank=int(rank), unknowns=unknowns)

    # ------------------------------------------------------------------
    # Position representation
    # ------------------------------------------------------------------

    def hermite_functions(self, n_max: int, xgrid: np.ndarray) -> np.ndarray:
        """φ_n(x) for n = 0..n_max by the normalized three-term recurrence; shape (n_max+1, len(x))"""
        x = np.asarray(xgrid, dtype=float)
        table = np.zeros((n_max + 1, x.size))
        table[0] = math.pi ** -0.25 * np.exp(-x * x / 2)
        if n_max >= 1:
            table[1] = math.sqrt(2) * x * table[0]
        for n in range(1, n_max):
            table[n + 1] = math.sqrt(2 / (n + 1)) * x * table[n] - math.sqrt(n / (n + 1)) * table[n - 1]
        return table

    def raised_vacuum_position(self, m: int, xgrid: np.ndarray) -> np.ndarray:
        """<x|a†^(2m)|0> = √((2m)!) φ_2m(x) from the Hermite recurrence"""
        if m < 0:
            raise ValueError("power must be nonnegative")
        log_scale = 0.5 * math.lgamma(2 * m + 1)
        return math.exp(log_scale) * self.hermite_functions(2 * m, xgrid)[2 * m]

    def hermite_position_sum(self, coeffs: FockVector, xgrid: np.ndarray, tolerance: float = DECAY_TOLERANCE) -> np.ndarray:
        """Σ_n c_n φ_n(x); coefficients must have decayed before the truncation edge"""
        values = np.asarray(coeffs.coeffs)
        dim = values.size
        scale = np.max(np.abs(values))
        if scale == 0:
            raise ValueError("cannot sum an all-zero coefficient list")
        tail = np.abs(values[dim - 2 * max(1, coeffs.trunc.guard):])
        if np.max(tail) > tolerance * scale:
            raise DecayError(
                f"coefficients have not decayed at the truncation edge: tail/max = {np.max(tail) / scale:.3e}"
            )
        return values @ self.hermite_functions(dim - 1, xgrid)

    # ------------------------------------------------------------------
    # Probe states
    # ------------------------------------------------------------------

    def squeezed_vacuum_coefficients(self, mu: Number, parity: Parity, length: int) -> np.ndarray:
        """exp(μa†²)|0> at levels 2k (or exp(μa†²)|1> at levels 2k+1), k < length"""
        mu = complex(mu)
        coeffs = np.zeros(length, dtype=complex)
        coeffs[0] = 1.0
        offset = 0 if parity == Parity.EVEN else 1
        for k in range(1, length):
            level = 2 * k + offset
            coeffs[k] = coeffs[k - 1] * mu * math.sqrt(level * (level - 1)) / k
        return coeffs

    def caves_schumaker_coefficients(self, mu: Number, shift: int, length: int) -> np.ndarray:
        """exp(μa†b†)|0,s> (or |s,0>) along the family diagonal, base coefficient 1"""
        mu = complex(mu)
        coeffs = np.zeros(length, dtype=complex)
        coeffs[0] = 1.0
        for n in range(1, length):
            coeffs[n] = coeffs[n - 1] * mu * math.sqrt((n + shift) / n)
        return coeffs

    def coherent_coefficients(self, alpha: Number, length: int) -> np.ndarray:
        """e^(-|α|²/2) α^n/√(n!)"""
        alpha = complex(alpha)
        coeffs = np.zeros(length, dtype=complex)
        coeffs[0] = math.exp(-abs(alpha) ** 2 / 2)
        for n in range(1, length):
            coeffs[n] = coeffs[n - 1] * alpha / math.sqrt(n)
        return coeffs

    def pair_coherent_diagonal(self, gamma: Number, delta: Number, family: FamilyLabel, length: int) -> np.ndarray:
        """<n_a, n_b|γ,δ> along the family diagonal |base + (n, n)>"""
        base_a, base_b = family.base
        size = length + max(base_a, base_b)
        left = self.coherent_coefficients(gamma, size)
        right = self.coherent_coefficients(delta, size)
        steps = np.arange(length)
        return left[steps + base_a] * right[steps + base_b]

    # ------------------------------------------------------------------
    # Metrics
    # ------------------------------------------------------------------

    def relative_deviation(self, u: np.ndarray, v: np.ndarray) -> float:
        """‖u - v‖∞ / ‖v‖∞"""
        u, v = np.asarray(u, dtype=complex), np.asarray(v, dtype=complex)
        scale = np.max(np.abs(v))
        if scale == 0:
            return float(np.max(np.abs(u)))
        return float(np.max(np.abs(u - v)) / scale)


oracle_service = OracleService()
