#!/usr/bin/env python3
"""Single-mode eigenstates of a² + βa†² and their closed forms."""

import math

import numpy as np
import pytest

from app.errors import ClosedFormDomainError
from app.models import F1Problem, Parity, RecursionKind, RecursionOracle, SectorSpec, TruncationSpec
from app.services.fock_space import fock_space
from app.services.oracle_service import oracle_service
from app.services.single_mode_service import single_mode_service

TRUNC = TruncationSpec(dim=128, guard=8)
BETAS = [0.04, 0.09j, 0.05 + 0.05j]
LAMBDAS = [0, 0.7, 1 + 0.3j]


def problem(beta, lam, **weights):
    return F1Problem(beta=beta, lam=lam, trunc=TRUNC, **weights)


def levels(state, parity, count):
    offset = 0 if parity == Parity.EVEN else 1
    return state.coeffs[np.arange(count) * 2 + offset]


def test_trivial_state_is_vacuum():
    state = single_mode_service.eigenstate(problem(0, 0))
    np.testing.assert_array_equal(state.coeffs, fock_space.number_state(TRUNC, 0).coeffs)


def test_zero_beta_gives_squeezed_like_series():
    # a²ψ = λψ at β = 0: c_(2k) = λ^k / √((2k)!)
    lam = 0.7
    state = single_mode_service.component(problem(0, lam), Parity.EVEN)
    for k in range(6):
        assert state.coeffs[2 * k] == pytest.approx(lam ** k / math.sqrt(math.factorial(2 * k)))


@pytest.mark.parametrize("beta", BETAS)
@pytest.mark.parametrize("lam", LAMBDAS)
@pytest.mark.parametrize("parity", [Parity.EVEN, Parity.ODD])
def test_eigen_residual(beta, lam, parity):
    prob = problem(beta, lam)
    assert single_mode_service.interior_residual(prob, single_mode_service.component(prob, parity)) < 1e-8


def test_superposition_is_an_eigenstate():
    prob = problem(0.09j, 1 + 0.3j, c_even=0.6, c_odd=0.8j)
    state = single_mode_service.eigenstate(prob)
    assert single_mode_service.interior_residual(prob, state) < 1e-8
    assert state.coeffs[0] == pytest.approx(0.6)
    assert state.coeffs[1] == pytest.approx(0.8j)


@pytest.mark.parametrize("lam", LAMBDAS)
def test_spot_values(lam):
    beta = 0.05 + 0.05j
    state = single_mode_service.component(problem(beta, lam), Parity.EVEN)
    assert state.coeffs[0] == 1
    assert state.coeffs[2] == pytest.approx(lam / math.sqrt(2), abs=1e-14)
    assert state.coeffs[4] == pytest.approx((lam ** 2 - 2 * beta) / (2 * math.sqrt(6)), abs=1e-14)


def test_discarded_kernels_do_not_solve_the_square_problem():
    beta = 0.04
    prob = problem(beta, 0)
    for residue in (0, 1):
        assert single_mode_service.interior_residual(prob, single_mode_service.kernel_state(beta, TRUNC, residue)) < 1e-10
    for residue in (2, 3):
        assert single_mode_service.interior_residual(prob, single_mode_service.kernel_state(beta, TRUNC, residue)) > 1e-3


@pytest.mark.parametrize("beta", BETAS)
@pytest.mark.parametrize("parity", [Parity.EVEN, Parity.ODD])
def test_three_forms_agree(beta, parity):
    prob = problem(beta, 1 + 0.3j)
    closed = single_mode_service.number_coefficients(prob, parity, 40)
    for state in (
        single_mode_service.component(prob, parity),
        single_mode_service.state_via_binomial(prob, parity),
        single_mode_service.state_via_kummer(prob, parity),
    ):
        assert oracle_service.relative_deviation(levels(state, parity, 41), closed) < 1e-9


def test_binomial_form_allows_zero_beta():
    prob = problem(0, 0.7)
    np.testing.assert_allclose(
        single_mode_service.state_via_binomial(prob, Parity.EVEN).coeffs,
        single_mode_service.component(prob, Parity.EVEN).coeffs,
        atol=1e-15
    )


@pytest.mark.parametrize("parity, kind", [(Parity.EVEN, RecursionKind.F1_EVEN), (Parity.ODD, RecursionKind.F1_ODD)])
def test_number_coefficients_match_recursion(parity, kind):
    beta, lam = 0.09j, 0.7
    closed = single_mode_service.number_coefficients(problem(beta, lam), parity, 30)
    oracle = oracle_service.recursion_coefficients(RecursionOracle(kind=kind, beta=beta, lam=lam, length=31))
    assert oracle_service.relative_deviation(closed, oracle) < 1e-9


def test_overlap_number_picks_the_component():
    prob = problem(0.04, 0.7)
    assert single_mode_service.overlap_number(prob, 2) == pytest.approx(0.7 / math.sqrt(2))
    assert single_mode_service.overlap_number(prob, 3, parity=Parity.EVEN) == 0
    assert single_mode_service.overlap_number(prob, 1) == pytest.approx(1.0)


def test_nullspace_oracle_reproduces_the_component():
    trunc = TruncationSpec(dim=64, guard=4)
    prob = F1Problem(beta=0.04, lam=0.7, trunc=trunc)
    solution = oracle_service.nullspace_eigenstate(
        single_mode_service.operator(prob.beta, trunc), prob.lam, SectorSpec.residue(2, 0)
    )
    state = single_mode_service.component(prob, Parity.EVEN)
    limit = fock_space.interior_limit(trunc, 2)
    np.testing.assert_allclose(solution.state.coeffs[:limit], state.coeffs[:limit], rtol=1e-8, atol=1e-12)


@pytest.mark.parametrize("parity, kind", [(Parity.EVEN, RecursionKind.F1_EVEN), (Parity.ODD, RecursionKind.F1_ODD)])
@pytest.mark.parametrize("mu", [0.6, 1.2 + 0.9j, -1.5j])
def test_squeezed_overlap_matches_inner_product(parity, kind, mu):
    beta, lam = 0.05 + 0.05j, 1 + 0.3j
    coeffs = oracle_service.recursion_coefficients(RecursionOracle(kind=kind, beta=beta, lam=lam, length=320))
    probe = oracle_service.squeezed_vacuum_coefficients(mu, parity, 320)
    overlap = single_mode_service.overlap_squeezed(problem(beta, lam), mu, parity)
    assert overlap.valid
    assert overlap.value == pytest.approx(np.vdot(probe, coeffs), rel=1e-8)


def test_squeezed_validity_flag_flips_at_one_half():
    prob = problem(0.25, 0.7)
    assert not single_mode_service.overlap_squeezed(prob, 1.0, Parity.EVEN).valid
    assert single_mode_service.overlap_squeezed(prob, 0.999, Parity.EVEN).valid


@pytest.mark.parametrize("alpha", [0.8 + 0.3j, 1.5, -1.0 + 1.1j])
def test_coherent_overlap_matches_state(alpha):
    prob = problem(0.09j, 0.7)
    probe = oracle_service.coherent_coefficients(alpha, TRUNC.dim)
    for parity in (Parity.EVEN, Parity.ODD):
        state = single_mode_service.component(prob, parity)
        overlap = single_mode_service.overlap_coherent(prob, alpha, parity)
        assert overlap.converged
        assert overlap.value == pytest.approx(np.vdot(probe, state.coeffs), rel=1e-8)


def test_q_function_at_origin():
    assert single_mode_service.q_function(problem(0.04, 0.7), 0) == pytest.approx(1.0)
    assert single_mode_service.q_function(problem(0.04, 0.7, c_even=0, c_odd=1), 0) == 0


def test_wavefunction_ratio_matches_hermite_sum():
    trunc = TruncationSpec(dim=256, guard=8)
    prob = F1Problem(beta=0.04, lam=0.7, trunc=trunc)
    xs = np.linspace(-2, 2, 9)
    oracle = RecursionOracle(kind=RecursionKind.F1_ODD, beta=0.04, lam=0.7, length=128)
    values = oracle_service.hermite_position_sum(oracle_service.recursion_state(oracle, trunc), np.append(xs, 0.5))
    ratio = single_mode_service.wavefunction_ratio(prob, xs, 0.5, Parity.ODD)
    assert oracle_service.relative_deviation(ratio, values[:-1] / values[-1]) < 1e-6


@pytest.mark.parametrize("beta", BETAS)
@pytest.mark.parametrize("parity", [Parity.EVEN, Parity.ODD])
def test_gamma_sum_coefficients_match_recurrence(beta, parity):
    prob = problem(beta, 1 + 0.3j)
    expanded = single_mode_service.number_coefficients_gamma_sum(prob, parity, 30)
    closed = single_mode_service.number_coefficients(prob, parity, 30)
    assert oracle_service.relative_deviation(expanded, closed) < 1e-9


@pytest.mark.parametrize("beta", [0.04, 0.05 + 0.05j])
@pytest.mark.parametrize("parity", [Parity.EVEN, Parity.ODD])
def test_laguerre_wavefunction_matches_kummer_form(beta, parity):
    prob = problem(beta, 0.7)
    for x in (-2.0, -0.3, 0.0, 0.5, 1.7, 3.0):
        assert single_mode_service.wavefunction_laguerre(prob, x, parity) == pytest.approx(
            single_mode_service.wavefunction(prob, x, parity), rel=1e-9, abs=1e-12
        )


def test_closed_forms_are_branch_invariant():
    prob = problem(0.09j, 1 + 0.3j)
    for parity in (Parity.EVEN, Parity.ODD):
        plus = single_mode_service.number_coefficients(prob, parity, 20, root=1)
        minus = single_mode_service.number_coefficients(prob, parity, 20, root=-1)
        assert oracle_service.relative_deviation(minus, plus) < 1e-12
        assert single_mode_service.overlap_coherent(prob, 0.8, parity, root=-1).value == pytest.approx(
            single_mode_service.overlap_coherent(prob, 0.8, parity, root=1).value, rel=1e-12
        )


def test_closed_form_domain_errors():
    with pytest.raises(ClosedFormDomainError):
        single_mode_service.number_coefficients(problem(0, 0.7), Parity.EVEN, 4)
    with pytest.raises(ClosedFormDomainError):
        single_mode_service.wavefunction(problem(-1, 0.7), 0.3, Parity.EVEN)
    with pytest.raises(ClosedFormDomainError):
        single_mode_service.wavefunction_laguerre(problem(0.5, 0.7), 0.3, Parity.EVEN)


def test_kernel_states_are_annihilated():
    beta = 0.05 + 0.05j
    even, odd = single_mode_service.kernel_states(beta, TRUNC)
    assert even.coeffs[0] == 1 and odd.coeffs[1] == 1
    # level 2 of (a² + βa†²)ψ: √12·c_4 + β√2·c_0 = 0
    assert even.coeffs[2] == 0
    assert even.coeffs[4] == pytest.approx(-beta / math.sqrt(6))
    operator = single_mode_service.operator(beta, TRUNC)
    for state in (even, odd):
        assert fock_space.eigen_residual(operator, state, 0) < 1e-10
