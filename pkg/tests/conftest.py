"""Shared fixtures: small reference domains reused across the unit tests.

Everything heavy is session-scoped so the suite builds each space once.
"""

from __future__ import annotations

import numpy as np
import pytest

from visbound import build_grid_space, decompose, generate_domain


def disk_mask(radius_cells: int, margin: int = 2) -> np.ndarray:
    n = 2 * (radius_cells + margin) + 1
    c = radius_cells + margin
    ii, jj = np.mgrid[0:n, 0:n]
    return (ii - c) ** 2 + (jj - c) ** 2 <= radius_cells**2


@pytest.fixture(scope="session")
def small_disk():
    """Disk of radius 12 cells, ambient space (everything interior)."""
    return build_grid_space(disk_mask(12), h=1.0)


@pytest.fixture(scope="session")
def small_disk_dd(small_disk):
    # carve the domain as a concentric sub-disk so there is a real exterior collar
    g = small_disk
    c = 12 + 2
    ii, jj = g.cells[:, 0], g.cells[:, 1]
    dom = (ii - c) ** 2 + (jj - c) ** 2 <= 9**2
    return decompose(g, dom)


def decomposed_domain(name: str, params: dict, h: float = 1.0):
    """Ambient grid over the full bounding box, domain carved by generator mask."""
    mask = generate_domain(name, params, h)
    g = build_grid_space(np.ones(mask.shape, dtype=bool), h=h)
    return decompose(g, mask[g.cells[:, 0], g.cells[:, 1]])


@pytest.fixture(scope="session")
def mid_disk_dd():
    """Disk of radius 30 inside its ambient grid; used by frostman/trace tests."""
    return decomposed_domain("disk", {"radius_cells": 30})


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260815)
