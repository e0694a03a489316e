"""Rasterized benchmark domains on the square grid.

Every generator returns a boolean interior mask over a bounding rectangle;
the ambient space is the full rectangle and the domain is the masked region,
so the boundary is picked up by the decomposition step.  Cell (i, j) holds
the point (j*h, i*h).
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .errors import VisboundError
from .masks import load_mask

_MARGIN = 2  # cells of ambient padding around every shape


def _disk_mask(radius_cells: int) -> tuple[np.ndarray, float, float]:
    n = 2 * (radius_cells + _MARGIN) + 1
    c = float(radius_cells + _MARGIN)
    ii, jj = np.mgrid[0:n, 0:n]
    mask = (ii - c) ** 2 + (jj - c) ** 2 < radius_cells ** 2
    return mask, c, c


def disk(params: dict, h: float) -> np.ndarray:
    r = int(params.get("radius_cells", 60))
    if r < 2:
        raise VisboundError("bad-domain-params", f"radius_cells={r} too small")
    mask, _, _ = _disk_mask(r)
    return mask


def annulus(params: dict, h: float) -> np.ndarray:
    r_out = int(params.get("outer_cells", 60))
    r_in = int(params.get("inner_cells", 25))
    if not 0 < r_in < r_out:
        raise VisboundError("bad-domain-params", f"need 0 < inner < outer, got {r_in}, {r_out}")
    mask, ci, cj = _disk_mask(r_out)
    n = mask.shape[0]
    ii, jj = np.mgrid[0:n, 0:n]
    mask &= (ii - ci) ** 2 + (jj - cj) ** 2 >= r_in ** 2
    return mask


def _rasterize_polyline(mask: np.ndarray, pts: np.ndarray) -> None:
    """Clear cells under a polyline given in cell coordinates (row, col)."""
    for (r0, c0), (r1, c1) in zip(pts[:-1], pts[1:]):
        steps = max(int(4 * max(abs(r1 - r0), abs(c1 - c0))) + 1, 2)
        tt = np.linspace(0.0, 1.0, steps)
        rows = np.rint(r0 + tt * (r1 - r0)).astype(int)
        cols = np.rint(c0 + tt * (c1 - c0)).astype(int)
        keep = (rows >= 0) & (rows < mask.shape[0]) & (cols >= 0) & (cols < mask.shape[1])
        mask[rows[keep], cols[keep]] = False


def slit_disk(params: dict, h: float) -> np.ndarray:
    r = int(params.get("radius_cells", 60))
    mask, ci, cj = _disk_mask(r)
    pts = np.asarray([[ci, cj], [ci, cj + r + 1]])
    _rasterize_polyline(mask, pts)
    return mask


def _comb_angles(n: int) -> tuple[float, float]:
    if n % 2 == 0:
        return 1.0 / n - math.pi, math.pi - 1.0 / n
    return 1.0 / n, 2 * math.pi - 1.0 / n


def comb(params: dict, h: float) -> np.ndarray:
    """Disk with interior circular arcs removed (alternating-side teeth).

    Tooth n (2 <= n <= N) is the arc of radius (1 - 1/n) R between angles
    alpha_n and beta_n, on opposite half-planes for even and odd n; the
    radial gap between consecutive teeth must resolve to at least 3 cells.
    """
    r = int(params.get("radius_cells", 120))
    n_teeth = int(params.get("n_teeth", 8))
    if n_teeth < 2:
        raise VisboundError("bad-domain-params", f"n_teeth={n_teeth} < 2")
    if n_teeth > 2 and r / ((n_teeth - 1) * n_teeth) < 3:
        raise VisboundError(
            "teeth-unresolved",
            f"radial tooth gap {r / ((n_teeth - 1) * n_teeth):.2f} cells < 3",
        )
    mask, ci, cj = _disk_mask(r)
    for n in range(2, n_teeth + 1):
        a, b = _comb_angles(n)
        rad = (1.0 - 1.0 / n) * r
        steps = max(int(8 * rad * (b - a)) + 2, 8)
        th = np.linspace(a, b, steps)
        pts = np.stack([ci + rad * np.sin(th), cj + rad * np.cos(th)], axis=1)
        _rasterize_polyline(mask, pts)
    return mask


def punctured_disk(params: dict, h: float) -> np.ndarray:
    r = int(params.get("radius_cells", 60))
    mask, ci, cj = _disk_mask(r)
    mask[int(ci), int(cj)] = False
    return mask


def _koch_polygon(level: int, radius: float) -> np.ndarray:
    """Koch snowflake vertices in the plane, built edge by edge."""
    base = [
        (radius * math.cos(a), radius * math.sin(a))
        for a in (math.pi / 2, math.pi / 2 + 2 * math.pi / 3, math.pi / 2 + 4 * math.pi / 3)
    ]
    pts = base
    for _ in range(level):
        nxt = []
        for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
            dx, dy = (x1 - x0) / 3, (y1 - y0) / 3
            ax, ay = x0 + dx, y0 + dy
            bx, by = x0 + 2 * dx, y0 + 2 * dy
            # Outward bump: rotate the middle third by -60 degrees.
            mx = ax + dx * 0.5 + dy * math.sqrt(3) / 2
            my = ay + dy * 0.5 - dx * math.sqrt(3) / 2
            nxt.extend([(x0, y0), (ax, ay), (mx, my), (bx, by)])
        pts = nxt
    return np.asarray(pts)


def koch_flake_interior(params: dict, h: float) -> np.ndarray:
    level = int(params.get("level", 3))
    r = int(params.get("radius_cells", 80))
    if not 0 <= level <= 6:
        raise VisboundError("bad-domain-params", f"level={level} outside [0, 6]")
    poly = _koch_polygon(level, float(r))
    pad = r + _MARGIN
    n = 2 * pad + 1
    xs = poly[:, 0] + pad
    ys = poly[:, 1] + pad
    ii, jj = np.mgrid[0:n, 0:n]
    # Crossing-number test, vectorized over cells.
    inside = np.zeros((n, n), dtype=bool)
    x0, y0 = xs, ys
    x1, y1 = np.roll(xs, -1), np.roll(ys, -1)
    px = jj.astype(float)
    py = ii.astype(float)
    for k in range(xs.size):
        cond = (y0[k] <= py) != (y1[k] <= py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x0[k] + (py - y0[k]) * (x1[k] - x0[k]) / (y1[k] - y0[k])
        inside ^= cond & (px < xint)
    return inside


def mask_file(params: dict, h: float) -> np.ndarray:
    path = params.get("path")
    if not path:
        raise VisboundError("bad-domain-params", "mask_file needs a 'path'")
    return load_mask(path)


_GENERATORS = {
    "disk": disk,
    "annulus": annulus,
    "slit_disk": slit_disk,
    "comb": comb,
    "punctured_disk": punctured_disk,
    "koch": koch_flake_interior,
    "mask_file": mask_file,
}


def generate_domain(name: str, params: Optional[dict] = None, h: float = 1.0) -> np.ndarray:
    """Interior mask of a named benchmark domain."""
    if name not in _GENERATORS:
        raise VisboundError(
            "unknown-generator",
            f"{name!r} not one of {sorted(_GENERATORS)}",
        )
    return _GENERATORS[name](params or {}, h)
