"""Sobolev functions on a domain, boundary traces and Besov seminorms.

The trace of a function at a boundary vertex is its solid average over the
smallest resolvable half-ball; the sequence of averages over a decreasing
radius list is attached so the stability of the limit can be inspected (the
maximal successive gap is the resolution diagnostic).  The trace's Besov
energy is an exact double sum over the atoms of the support measure with
ball-mass normalization, and the two verification routines report the
left/right ratios of the energy and L^q estimates exactly as stated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import VisboundError
from .frostman import FrostmanMeasure
from .geometry import DomainDecomp, john_subdomain
from .space import SpaceGraph, geodesic_distance, validate_trace_exponents
from .tolerances import CLOSED_BALL_RTOL


@dataclass
class SobolevFunction:
    """Per-vertex values with an upper gradient and its q-energy."""

    values: np.ndarray
    gradient: np.ndarray
    q: float

    def energy(self, g: SpaceGraph, mask: Optional[np.ndarray] = None) -> float:
        sel = np.ones(g.n, dtype=bool) if mask is None else mask
        return float((g.mass[sel] * self.gradient[sel] ** self.q).sum())

    @classmethod
    def from_values(cls, dd: DomainDecomp, u: np.ndarray, q: float) -> "SobolevFunction":
        return cls(values=np.asarray(u, dtype=float),
                   gradient=minimal_upper_gradient(dd, u), q=q)

    def check_edgewise(self, dd: DomainDecomp) -> float:
        """Worst violation of |du| <= (g(x)+g(y))/2 * d(x,y) on domain edges."""
        g = dd.g
        worst = 0.0
        for x in dd.interior_ids:
            nbrs, lens = g.neighbors(int(x))
            inn = dd.interior[nbrs]
            if not inn.any():
                continue
            du = np.abs(self.values[nbrs[inn]] - self.values[x])
            bound = (self.gradient[nbrs[inn]] + self.gradient[x]) / 2 * lens[inn]
            worst = max(worst, float((du - bound).max()))
        return worst


def minimal_upper_gradient(dd: DomainDecomp, u: np.ndarray) -> np.ndarray:
    """Least edgewise upper gradient: max neighbor slope inside the domain.

    g(x) = max over domain neighbors y of |u(x) - u(y)| / d(x, y); zero off
    the domain and at isolated vertices.
    """
    g = dd.g
    u = np.asarray(u, dtype=float)
    ids = dd.interior_ids
    sub = g.adj[ids][:, ids].tocoo()
    out = np.zeros(g.n)
    if sub.nnz:
        slopes = np.abs(u[ids[sub.row]] - u[ids[sub.col]]) / sub.data
        local = np.zeros(ids.size)
        np.maximum.at(local, sub.row, slopes)
        out[ids] = local
    return out


@dataclass
class BesovParams:
    """Exponents of the nonlocal trace seminorm."""

    p: float
    q: float
    theta: Optional[float] = None
    dilation: float = 2.0

    def __post_init__(self):
        if self.theta is None:
            self.theta = 1.0 - self.p / self.q
        if not (0 < self.theta < 1):
            raise VisboundError("bad-exponents", f"theta={self.theta} outside (0,1)")
        if self.dilation < 1:
            raise VisboundError("bad-exponents", f"dilation={self.dilation} < 1")


@dataclass
class TraceValues:
    atoms: np.ndarray
    values: np.ndarray
    radii: np.ndarray                  # decreasing
    averages: np.ndarray               # (n_atoms, n_radii)
    cauchy_gap: np.ndarray             # max successive average gap per atom


def trace_values(dd: DomainDecomp, u: np.ndarray, support: Sequence[int],
                 radii: Sequence[float]) -> TraceValues:
    """Solid averages of u over shrinking half-balls at boundary vertices.

    The trace value is the average at the smallest radius; the full average
    sequence and the maximal successive gap are attached.  Radii must be
    decreasing and at least 2h.
    """
    g = dd.g
    atoms = np.asarray(support, dtype=np.int64)
    rr = np.asarray(radii, dtype=float)
    if rr.size == 0 or np.any(np.diff(rr) >= 0):
        raise VisboundError("bad-radii", "radii must strictly decrease")
    if rr[-1] < 2 * g.h * (1 - 1e-12):
        raise VisboundError("bad-radii", f"smallest radius {rr[-1]} below 2h")
    u = np.asarray(u, dtype=float)

    vals = np.empty(atoms.size)
    avgs = np.empty((atoms.size, rr.size))
    gaps = np.empty(atoms.size)
    for i, z in enumerate(atoms):
        if not dd.boundary[z]:
            raise VisboundError("center-outside", f"support vertex {int(z)} not on the boundary")
        d = geodesic_distance(g, int(z), limit=float(rr[0]))
        for j, r in enumerate(rr):
            sel = (d < r) & dd.interior
            m = float(g.mass[sel].sum())
            if m <= 0:
                raise VisboundError(
                    "isolated-boundary-point",
                    f"B({int(z)}, {r}) meets no domain vertex",
                )
            avgs[i, j] = float((g.mass[sel] * u[sel]).sum()) / m
        vals[i] = avgs[i, -1]
        gaps[i] = float(np.max(np.abs(np.diff(avgs[i])))) if rr.size > 1 else 0.0
    return TraceValues(atoms=atoms, values=vals, radii=rr, averages=avgs,
                       cauchy_gap=gaps)


def atom_distances(g: SpaceGraph, atoms: np.ndarray) -> np.ndarray:
    """Exact pairwise geodesic distances between atoms (dense, symmetric)."""
    atoms = np.asarray(atoms, dtype=np.int64)
    out = np.empty((atoms.size, atoms.size))
    for i, a in enumerate(atoms):
        d = geodesic_distance(g, int(a))
        out[i] = d[atoms]
    return (out + out.T) / 2  # symmetric up to fp noise already


def besov_seminorm(
    values: np.ndarray,
    params: BesovParams,
    weights: np.ndarray,
    dists: np.ndarray,
) -> float:
    """Exact atomic Besov energy of a trace.

    Sum over ordered atom pairs (y, z), y != z, of

        |f(y) - f(z)|^q
        --------------------------------- * nu(y) nu(z)
        d(y,z)^(theta q) * nu(Bcl(z, S d))

    where Bcl is the closed ball of atoms around the second index.  The
    denominator is positive since z itself is always inside.
    """
    f = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    n = f.size
    if dists.shape != (n, n) or w.size != n:
        raise VisboundError("bad-support", "atom count mismatch")
    theta_q = params.theta * params.q
    total = 0.0
    order = np.argsort(dists, axis=1)
    for z in range(n):
        dz = dists[z][order[z]]
        cum = np.cumsum(w[order[z]])
        for y in range(n):
            if y == z:
                continue
            d = dists[y, z]
            if d <= 0:
                raise VisboundError("bad-support", "coincident atoms")
            k = int(np.searchsorted(dz, params.dilation * d * (1 + CLOSED_BALL_RTOL),
                                    side="right"))
            mass = float(cum[k - 1]) if k > 0 else 0.0
            total += (abs(f[y] - f[z]) ** params.q
                      / (d ** theta_q * mass)) * w[y] * w[z]
    return total


@dataclass
class TraceReport:
    """Left/right sides and ratios of the trace estimates, plus constants."""

    trace: TraceValues
    besov_value: float
    sobolev_energy: float
    ratio_energy: float
    lq_trace: Optional[float] = None
    lq_rhs: Optional[float] = None
    ratio_lq: Optional[float] = None
    parameters: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "besov_value": self.besov_value,
            "sobolev_energy": self.sobolev_energy,
            "ratio_energy": self.ratio_energy,
            "lq_trace": self.lq_trace,
            "lq_rhs": self.lq_rhs,
            "ratio_lq": self.ratio_lq,
            "cauchy_gap_max": float(self.trace.cauchy_gap.max())
            if self.trace.cauchy_gap.size else 0.0,
            "parameters": dict(sorted(self.parameters.items())),
        }


def _window_mask(dd: DomainDecomp, z0: int, c: float) -> np.ndarray:
    r = float(dd.d_omega[z0])
    d = geodesic_distance(dd.g, z0, limit=10 * c * r)
    return (d < 10 * c * r) & dd.interior


def _structural_constants(dd: DomainDecomp, z0: int, c: float,
                          p: float, q: float, q_hat: float) -> dict:
    return {
        "p": p,
        "q": q,
        "q_hat": q_hat,
        "c": c,
        "tau": 2 * c + 1,
        "alpha": 2 - 1 / (2 * c),
        "beta0": (1 - p / q) / 2,
        "epsilon": p - q,
        "bstar_center": int(z0),
        "bstar_radius": float(dd.d_omega[z0]) / 2,
    }


def verify_trace_energy(
    dd: DomainDecomp,
    z0: int,
    c: float,
    u: np.ndarray,
    params: BesovParams,
    measure: FrostmanMeasure,
    q_hat: float = 2.0,
    radii: Optional[Sequence[float]] = None,
    dists: Optional[np.ndarray] = None,
) -> TraceReport:
    """Ratio of the trace Besov energy to the Sobolev energy over D(z0).

    D(z0) is the domain part of B(z0, 10 c d(z0)); the Sobolev side uses the
    minimal upper gradient.  A function with zero energy must have constant
    trace (zero seminorm); the 0/0 ratio is reported as 0.
    """
    dd.require_interior(z0, "trace center")
    validate_trace_exponents(params.p, q_hat, params.q)
    g = dd.g
    r = float(dd.d_omega[z0])
    atoms, w_atoms = measure.atoms()
    if radii is None:
        radii = np.geomspace(r, 2 * g.h, 6)
    tv = trace_values(dd, u, atoms, radii)
    if dists is None:
        dists = atom_distances(g, atoms)
    besov = besov_seminorm(tv.values, params, w_atoms, dists)

    grad = minimal_upper_gradient(dd, u)
    window = _window_mask(dd, z0, c)
    energy = float((g.mass[window] * grad[window] ** params.q).sum())

    if energy == 0.0 and besov > 1e-12:
        raise VisboundError(
            "energy-forms-inverted",
            "zero Sobolev energy with a nonconstant trace",
        )
    ratio = 0.0 if energy == 0.0 else besov / energy
    return TraceReport(
        trace=tv,
        besov_value=besov,
        sobolev_energy=energy,
        ratio_energy=ratio,
        parameters=_structural_constants(dd, z0, c, params.p, params.q, q_hat),
    )


def verify_lq_estimate(
    dd: DomainDecomp,
    z0: int,
    c: float,
    u: np.ndarray,
    params: BesovParams,
    measure: FrostmanMeasure,
    report: Optional[TraceReport] = None,
    radii: Optional[Sequence[float]] = None,
) -> TraceReport:
    """L^q control of the trace by the scaled Sobolev data.

    ratio_lq = ||Tu||^q_{Lq(nu)} / ( d^-p ||u||^q_{Lq(John subdomain)}
                                     + d^(q-p) * sum_D g^q mu )
    with d = d_Omega(z0).  Reported, not asserted beyond finiteness.
    """
    dd.require_interior(z0, "trace center")
    g = dd.g
    r = float(dd.d_omega[z0])
    atoms, w_atoms = measure.atoms()
    if report is not None:
        tv = report.trace
    else:
        if radii is None:
            radii = np.geomspace(r, 2 * g.h, 6)
        tv = trace_values(dd, u, atoms, radii)

    lq_trace = float((w_atoms * np.abs(tv.values) ** params.q).sum())

    _, members = john_subdomain(dd, z0, c)
    mask_john = np.zeros(g.n, dtype=bool)
    mask_john[members] = True
    u = np.asarray(u, dtype=float)
    lq_u = float((g.mass[mask_john] * np.abs(u[mask_john]) ** params.q).sum())

    grad = minimal_upper_gradient(dd, u)
    window = _window_mask(dd, z0, c)
    energy = float((g.mass[window] * grad[window] ** params.q).sum())

    rhs = r ** (-params.p) * lq_u + r ** (params.q - params.p) * energy
    ratio = 0.0 if lq_trace == 0.0 else (np.inf if rhs == 0.0 else lq_trace / rhs)
    if report is None:
        report = TraceReport(
            trace=tv, besov_value=float("nan"), sobolev_energy=energy,
            ratio_energy=float("nan"),
            parameters=_structural_constants(dd, z0, c, params.p, params.q, 2.0),
        )
    report.lq_trace = lq_trace
    report.lq_rhs = rhs
    report.ratio_lq = float(ratio)
    return report


def restricted_maximal(
    dd: DomainDecomp,
    f: np.ndarray,
    window: np.ndarray,
    radii: Optional[Sequence[float]] = None,
    centers: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """Restricted maximal function of the windowed field.

    M(w) = sup over balls B (centered at domain-closure vertices, radii on a
    geometric grid, containing w) of the mu-average of the restriction of f
    to the window over B intersected with the domain.  Exhaustive over the
    given centers; meant for diagnostic runs, cost |centers| searches.
    """
    g = dd.g
    f = np.asarray(f, dtype=float)
    chi_f = np.where(window, f, 0.0)
    closure = dd.interior | dd.boundary
    if centers is None:
        centers = np.flatnonzero(closure)
    if radii is None:
        rmax = float(np.max(dd.d_omega[dd.interior])) * 2
        n = max(int(np.ceil(np.log2(rmax / g.h))) + 1, 1)
        radii = [g.h * 2 ** j for j in range(n)]
    out = np.full(g.n, -np.inf)
    rmax = float(max(radii))
    for x in centers:
        d = geodesic_distance(g, int(x), limit=rmax)
        for rho in sorted(radii):
            members = d < rho
            dom = members & dd.interior
            m = float(g.mass[dom].sum())
            if m <= 0:
                continue
            avg = float((g.mass[dom] * chi_f[dom]).sum()) / m
            cover = members & closure
            np.maximum.at(out, np.flatnonzero(cover), avg)
    out[np.isneginf(out)] = 0.0
    return out
