"""Shared fixtures: expensive artifacts computed once per session."""

import numpy as np
import pytest

from serrin.geometry import Axis, BoundaryProfile, ModeIndex
from serrin.spectrum import find_lambda_n
from serrin.torsion import solve_torsion


@pytest.fixture(scope="session")
def lambda_roots():
    """Bifurcation radii for n = 2..8 on both axes."""
    return {(axis, n): find_lambda_n(ModeIndex(axis, n))
            for axis in (Axis.XI, Axis.ETA) for n in range(2, 9)}


@pytest.fixture(scope="session")
def radial_fields_64():
    """Straight-tube torsion solves at 64x64 reused across test modules."""
    cache = {}

    def get(axis, lam):
        key = (Axis(axis), round(lam, 12))
        if key not in cache:
            cache[key] = solve_torsion(BoundaryProfile.constant(*key), (64, 64))
        return cache[key]

    return get


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
