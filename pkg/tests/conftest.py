"""Shared solved problems for the test suite.

The torsion solves are the expensive step, so the standard shape family is
solved once per session and reused across modules.  All fixtures use the
default discretization (M = 128, vol = 1) unless a test needs otherwise.
"""
import numpy as np
import pytest

from dropflow import build_star_domain, solve_torsion


@pytest.fixture(scope="session")
def disk_sol():
    return solve_torsion(build_star_domain("circle(1)", 128), 1.0)


@pytest.fixture(scope="session")
def ellipse_sol():
    return solve_torsion(build_star_domain("ellipse(1.2,0.8)", 128), 1.0)


@pytest.fixture(scope="session")
def fourier2_sol():
    return solve_torsion(build_star_domain("fourier(1;2:0.1)", 128), 1.0)


@pytest.fixture(scope="session")
def fourier35_sol():
    return solve_torsion(build_star_domain("fourier(1;3:0.1,5:0.03)", 128), 1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260815)
