#!/usr/bin/env python3
"""Acceptance suite at reduced truncations."""

import pytest

from app.models import FamilyLabel, Parity, TruncationSpec, VerificationSettings
from app.services.pair_mode_service import pair_mode_service
from app.services.single_mode_service import single_mode_service
from app.services.verification_service import verification_service

REDUCED = VerificationSettings(single_dim=128, single_guard=8, pair_dim=24, pair_guard=3, wave_dim=512, transform_dim=16)


@pytest.mark.parametrize("criterion", range(1, 12))
def test_criterion_passes(criterion):
    result = verification_service.evaluate(criterion, REDUCED)
    assert result.passed, result.detail
    assert result.value < result.tolerance


def test_report_collects_every_criterion():
    report = verification_service.run(REDUCED, criteria=[10, 11])
    assert report.passed
    assert [c.criterion for c in report.criteria] == [10, 11]
    assert report.settings == REDUCED


def test_negative_control_passes_because_its_check_fails():
    report = verification_service.run_negative_control(REDUCED)
    assert report.passed
    [result] = report.criteria
    assert result.criterion == 0
    assert result.value > result.tolerance


def test_errors_are_recorded_as_failures():
    starved = VerificationSettings(single_dim=8, single_guard=1, pair_dim=8, pair_guard=1, wave_dim=8, transform_dim=8)
    result = verification_service.evaluate(9, starved)
    assert not result.passed
    assert result.value is None
    assert "Error" in result.detail


def test_runs_release_cached_conjugates():
    single_mode_service.base_conjugate(TruncationSpec(dim=16, guard=1), Parity.EVEN)
    pair_mode_service.base_conjugate(TruncationSpec(dim=8, guard=1), FamilyLabel.parse("0:0"))
    assert pair_mode_service.base_conjugate.cache_info().currsize > 0

    verification_service.run(REDUCED, criteria=[10])
    for cached in (
        single_mode_service.base_conjugate, single_mode_service.arctan_conjugate,
        pair_mode_service.kernel_conjugate, pair_mode_service.base_conjugate,
        pair_mode_service.arctan_conjugate,
    ):
        assert cached.cache_info().currsize == 0

    verification_service.run_negative_control(REDUCED)
    assert single_mode_service.base_conjugate.cache_info().currsize == 0


def test_pair_caches_stay_small():
    trunc = TruncationSpec(dim=8, guard=1)
    for label in ("0:0", "0:2", "3:0", "0:1"):
        pair_mode_service.base_conjugate(trunc, FamilyLabel.parse(label))
    assert pair_mode_service.base_conjugate.cache_info().currsize <= 2
    verification_service.release_caches()
