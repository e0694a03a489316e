"""Benchmark domain generators: masks with known geometry."""

from __future__ import annotations

import math

import numpy as np
import pytest

from visbound import VisboundError, build_grid_space, decompose, generate_domain
from visbound.generators import _comb_angles


def carve(mask):
    g = build_grid_space(np.ones(mask.shape, dtype=bool))
    return g, decompose(g, mask[g.cells[:, 0], g.cells[:, 1]])


def test_disk_area_and_depth():
    mask = generate_domain("disk", {"radius_cells": 25})
    assert mask.sum() == pytest.approx(math.pi * 25**2, rel=0.03)
    g, dd = carve(mask)
    assert dd.d_omega[dd.deepest_vertex()] == pytest.approx(25.0, abs=1.5)


def test_annulus_has_hole():
    mask = generate_domain("annulus", {"outer_cells": 20, "inner_cells": 8})
    want = math.pi * (20**2 - 8**2)
    assert mask.sum() == pytest.approx(want, rel=0.05)
    n = mask.shape[0]
    assert not mask[n // 2, n // 2]
    with pytest.raises(VisboundError, match="bad-domain-params"):
        generate_domain("annulus", {"outer_cells": 8, "inner_cells": 8})


def test_slit_disk_cuts_one_radius():
    r = 20
    plain = generate_domain("disk", {"radius_cells": r})
    slit = generate_domain("slit_disk", {"radius_cells": r})
    removed = plain & ~slit
    # the removed set is a one-cell-wide radial segment on the +x axis
    rows, cols = np.nonzero(removed)
    assert removed.sum() >= r - 1
    assert np.ptp(rows) <= 2
    c = removed.shape[0] // 2
    assert cols.min() >= c
    g, dd = carve(slit)
    assert int(dd.interior.sum()) > 0  # still one connected domain


def test_comb_tooth_angles_by_parity():
    a2, b2 = _comb_angles(2)
    assert a2 == pytest.approx(0.5 - math.pi)
    assert b2 == pytest.approx(math.pi - 0.5)
    a3, b3 = _comb_angles(3)
    assert a3 == pytest.approx(1.0 / 3.0)
    assert b3 == pytest.approx(2 * math.pi - 1.0 / 3.0)


def test_comb_alternating_gaps():
    r = 60
    mask = generate_domain("comb", {"radius_cells": r, "n_teeth": 4})
    n = mask.shape[0]
    ci = cj = n // 2
    # tooth 3 (odd) leaves a gap on the +x side: the midline is open there
    rad3 = int(round((1 - 1 / 3) * r))
    assert mask[ci, cj + rad3]
    # tooth 2 and 4 (even) block the +x midline at their radii
    assert not mask[ci, cj + r // 2]
    assert not mask[ci, cj + int(round(0.75 * r))]
    # and leave their own gaps on the -x side
    assert mask[ci, cj - r // 2]
    assert not mask[ci, cj - rad3]
    g, dd = carve(mask)
    assert dd.n_discarded == 0  # teeth do not disconnect the chambers


def test_comb_resolution_guard():
    with pytest.raises(VisboundError, match="teeth-unresolved"):
        generate_domain("comb", {"radius_cells": 60, "n_teeth": 8})
    with pytest.raises(VisboundError, match="bad-domain-params"):
        generate_domain("comb", {"radius_cells": 60, "n_teeth": 1})


def test_punctured_disk_single_hole():
    mask = generate_domain("punctured_disk", {"radius_cells": 12})
    plain = generate_domain("disk", {"radius_cells": 12})
    assert (plain & ~mask).sum() == 1


def test_koch_flake_levels_nest_in_area():
    # area grows toward the 8/5 triangle-area limit and stays bounded by it
    areas = []
    for level in (0, 1, 2):
        mask = generate_domain("koch", {"level": level, "radius_cells": 81})
        areas.append(int(mask.sum()))
    assert areas[0] < areas[1] < areas[2]
    tri = areas[0]
    assert areas[2] <= 1.62 * tri
    with pytest.raises(VisboundError, match="bad-domain-params"):
        generate_domain("koch", {"level": 9})


def test_mask_file_generator(tmp_path):
    p = tmp_path / "dom.txt"
    p.write_text("...\n.#.\n###\n")
    mask = generate_domain("mask_file", {"path": str(p)})
    assert mask.sum() == 4
    with pytest.raises(VisboundError, match="bad-domain-params"):
        generate_domain("mask_file", {})


def test_unknown_generator_rejected():
    with pytest.raises(VisboundError, match="unknown-generator"):
        generate_domain("julia")
