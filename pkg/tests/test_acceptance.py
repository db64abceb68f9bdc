"""The ten acceptance criteria, one test each, at the stated tolerances.

Each test prints a PASS/FAIL line; the lines are repeated in the terminal
summary so they survive output capture.
"""

import pytest

from clwn import checks

LINES = []


def report(r):
    line = r.line()
    LINES.append(line)
    print(line)
    assert r.passed, line


def test_1_chordal_oracle():
    report(checks.check_chordal())


def test_2_annulus_telescoping():
    report(checks.check_annulus_telescoping())


def test_3_annulus_equivariance():
    report(checks.check_annulus_equivariance())


def test_4_annulus_roundtrip():
    report(checks.check_annulus_roundtrip())


def test_5_field_equivariance():
    report(checks.check_field_equivariance())


def test_6_delta_system():
    report(checks.check_delta_system())


def test_7_residue_normalization():
    report(checks.check_residue())


def test_8_surface_conjugacy():
    report(checks.check_surface())


def test_9_cyclic_cross_validation():
    report(checks.check_cross_validation())


def test_10_sle_variance():
    report(checks.check_sle())
