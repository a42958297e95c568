#!/usr/bin/env python3
"""Tests for the truncated Fock space operators and series."""

import math

import numpy as np
import pytest

from app.errors import SingularOperatorError, TruncationError
from app.models import FamilyLabel, SectorSpec, TruncationSpec
from app.services.fock_space import fock_space

TRUNC = TruncationSpec(dim=32, guard=2)


def test_ladder_matrix_elements():
    a = fock_space.ladder("a", "lower", TRUNC).entries
    a_dag = fock_space.ladder("a", "raise", TRUNC).entries
    for n in range(1, TRUNC.dim):
        assert a[n - 1, n] == pytest.approx(math.sqrt(n))
        assert a_dag[n, n - 1] == pytest.approx(math.sqrt(n))
    np.testing.assert_allclose(a_dag, a.conj().T)


def test_ladder_power_matches_repeated_product():
    a = fock_space.ladder("a", "lower", TRUNC).entries
    a3 = fock_space.ladder("a", "lower", TRUNC, power=3)
    np.testing.assert_allclose(a3.entries, a @ a @ a, atol=1e-12)
    assert a3.bandwidth == 3


def test_truncated_commutator_is_identity_on_interior():
    a = fock_space.ladder("a", "lower", TRUNC)
    a_dag = fock_space.ladder("a", "raise", TRUNC)
    commutator = fock_space.commutator(a, a_dag).entries
    np.testing.assert_allclose(np.diag(commutator)[:-1], np.ones(TRUNC.dim - 1))
    assert commutator[-1, -1] == pytest.approx(1 - TRUNC.dim)


def test_two_mode_ladders_act_on_their_own_mode():
    trunc = TruncationSpec(dim=8, guard=1)
    a = fock_space.ladder("a", "lower", trunc, modes=2)
    b = fock_space.ladder("b", "lower", trunc)
    state = fock_space.pair_number_state(trunc, 3, 5)

    lowered_a = fock_space.apply(a, state).coeffs
    lowered_b = fock_space.apply(b, state).coeffs
    assert lowered_a[2, 5] == pytest.approx(math.sqrt(3))
    assert lowered_b[3, 4] == pytest.approx(math.sqrt(5))

    # a and b commute
    np.testing.assert_allclose(fock_space.commutator(a, b).entries, 0, atol=1e-14)


def test_kron_matches_mode_ladders():
    trunc = TruncationSpec(dim=8, guard=1)
    raising = fock_space.ladder("a", "raise", trunc)
    pair = fock_space.kron(raising, raising, label="a†b†")
    expected = fock_space.ladder("a", "raise", trunc, modes=2).entries @ fock_space.ladder("b", "raise", trunc).entries
    np.testing.assert_allclose(pair.entries, expected, atol=1e-14)


def test_mismatched_dimensions_raise():
    small = fock_space.ladder("a", "lower", TruncationSpec(dim=8, guard=1))
    large = fock_space.ladder("a", "lower", TRUNC)
    with pytest.raises(TruncationError, match="dimension mismatch"):
        fock_space.commutator(small, large)


def test_diag_values_reject_singular_maps():
    with pytest.raises(SingularOperatorError):
        fock_space.diag_values(lambda n: 1 / n, 8)


def test_diag_fn_two_modes():
    trunc = TruncationSpec(dim=8, guard=1)
    op = fock_space.diag_fn(lambda n: n + 1, trunc, mode="b")
    state = fock_space.pair_number_state(trunc, 2, 4)
    assert fock_space.apply(op, state).coeffs[2, 4] == pytest.approx(5)


def test_apply_series_exponential_gives_coherent_coefficients():
    s = 0.7 - 0.2j
    raising = fock_space.ladder("a", "raise", TRUNC)
    state = fock_space.apply_series(raising, fock_space.number_state(TRUNC, 0), lambda k: s / k)
    expected = [s ** n / math.sqrt(math.factorial(n)) for n in range(TRUNC.dim)]
    np.testing.assert_allclose(state.coeffs, expected, rtol=1e-12, atol=1e-300)


def test_power_series_band_path_matches_matrix_powers():
    raising = fock_space.ladder("a", "raise", TRUNC)
    coefficients = [0.5, 1.0, 0.0, -0.25j, 0.1]
    fast = fock_space.power_series(raising, coefficients).entries

    power = np.eye(TRUNC.dim, dtype=complex)
    slow = np.zeros_like(power)
    for c in coefficients:
        slow += c * power
        power = raising.entries @ power
    np.testing.assert_allclose(fast, slow, atol=1e-10)


def test_power_series_general_path():
    trunc = TruncationSpec(dim=12, guard=1)
    x = fock_space.combine(
        [(1.0, fock_space.ladder("a", "lower", trunc)), (1.0, fock_space.ladder("a", "raise", trunc))]
    )
    assert fock_space.sub_band_offset(x) is None
    result = fock_space.power_series(x, [1.0, 0.0, 0.5]).entries
    np.testing.assert_allclose(result, np.eye(12) + 0.5 * x.entries @ x.entries, atol=1e-12)


def test_sector_members():
    even = fock_space.sector_members(SectorSpec.residue(2, 0), TRUNC, limit=10)
    np.testing.assert_array_equal(even, [0, 2, 4, 6, 8])

    trunc = TruncationSpec(dim=8, guard=1)
    diagonal = fock_space.sector_members(SectorSpec.diagonal(FamilyLabel.parse("0:2"), step=1), trunc)
    # |n, n+2> for n = 0..5, flat index n*8 + n + 2
    np.testing.assert_array_equal(diagonal, [n * 8 + n + 2 for n in range(6)])


def test_interior_limit():
    assert fock_space.interior_limit(TRUNC, 2) == 28
    with pytest.raises(TruncationError):
        fock_space.interior_limit(TruncationSpec(dim=8, guard=2), 4)


def test_eigen_residual_of_number_state():
    a = fock_space.ladder("a", "lower", TRUNC)
    assert fock_space.eigen_residual(a, fock_space.number_state(TRUNC, 0), 0) == 0
    assert fock_space.eigen_residual(a, fock_space.number_state(TRUNC, 1), 0) == pytest.approx(1.0)


def test_default_guard_and_guard_bound():
    assert TruncationSpec(dim=256).guard == 16
    with pytest.raises(ValueError):
        TruncationSpec(dim=16, guard=5)


def test_sector_project_and_inner():
    v = fock_space.vector(TRUNC, np.arange(TRUNC.dim) + 1j)
    odd = fock_space.sector_project(v, SectorSpec.residue(2, 1))
    np.testing.assert_array_equal(odd.coeffs[0::2], 0)
    np.testing.assert_array_equal(odd.coeffs[1::2], v.coeffs[1::2])
    assert fock_space.inner(v, odd) == pytest.approx(np.vdot(v.coeffs[1::2], v.coeffs[1::2]))
    assert fock_space.inner(odd, fock_space.number_state(TRUNC, 3)) == pytest.approx(3 - 1j)

    with pytest.raises(TruncationError):
        fock_space.sector_project(v, SectorSpec.diagonal(FamilyLabel.parse("0:0")))
    with pytest.raises(TruncationError):
        fock_space.inner(v, fock_space.number_state(TruncationSpec(dim=16, guard=1), 0))
