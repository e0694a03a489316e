"""Discrete q-energy of condensers on induced subgraphs.

The pointwise Lipschitz slope  Lip u(x) = max_y |u(x)-u(y)| / d(x,y)  gives
the max-form energy  sum_x (Lip u)^q mu(x).  Optimization happens on the
edge-sum relaxation

    E(u) = sum over undirected edges (x,y) of (mu(x)+mu(y)) (|u(x)-u(y)|/d)^q,

which dominates the max-form (each vertex's max edge appears in the sum).
Both numbers are reported and max <= sum is asserted.  q=2 is a single SPD
sparse solve; other q run damped IRLS followed by a Newton polish so the
first-order optimality certificate is tight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .errors import VisboundError
from .space import Ball, SpaceGraph, ball_members, geodesic_distance
from .tolerances import ENERGY_EPS, ENERGY_RTOL


@dataclass
class CondenserProblem:
    ambient: Ball
    plate_high: np.ndarray      # u = 1 here
    plate_low: np.ndarray       # u = 0 here
    q: float
    domain: Optional[np.ndarray] = None   # optional bool mask restricting the ambient

    def __post_init__(self):
        self.plate_high = np.unique(np.asarray(self.plate_high, dtype=np.int64))
        self.plate_low = np.unique(np.asarray(self.plate_low, dtype=np.int64))
        if self.q <= 1:
            raise VisboundError("bad-exponent", f"q={self.q} must exceed 1")


@dataclass
class EnergySolution:
    ids: np.ndarray             # ambient vertex ids (ascending)
    u: np.ndarray               # potential aligned with ids, in [0, 1]
    q: float
    energy: float               # edge-sum form (the optimized objective)
    energy_max_form: float      # sum_x (Lip u)^q mu(x) on the induced graph
    residual: float             # sum |dE/du| over free vertices / energy
    n_iterations: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)

    def embed(self, n: int) -> np.ndarray:
        out = np.full(n, np.nan)
        out[self.ids] = self.u
        return out

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "energy": self.energy,
            "energy_max_form": self.energy_max_form,
            "residual": self.residual,
            "n_iterations": self.n_iterations,
            "converged": self.converged,
            "n_vertices": int(self.ids.size),
        }


def discrete_lip(g: SpaceGraph, values: np.ndarray, mask: Optional[np.ndarray] = None) -> np.ndarray:
    """Pointwise slope max_y |u(x)-u(y)|/d over (masked) neighbors."""
    coo = g.adj.tocoo()
    i, j, d = coo.row, coo.col, coo.data
    if mask is not None:
        keep = mask[i] & mask[j]
        i, j, d = i[keep], j[keep], d[keep]
    slope = np.abs(values[i] - values[j]) / d
    out = np.zeros(g.n)
    np.maximum.at(out, i, slope)
    return out


def _edge_list(g: SpaceGraph, ids: np.ndarray):
    """Undirected edges of the induced subgraph, as local index pairs."""
    local = -np.ones(g.n, dtype=np.int64)
    local[ids] = np.arange(ids.size)
    sub = g.adj[ids][:, ids].tocoo()
    keep = sub.row < sub.col
    ei, ej, dist = sub.row[keep], sub.col[keep], sub.data[keep]
    coef = g.mass[ids[ei]] + g.mass[ids[ej]]
    return ei, ej, dist, coef


def _energy_and_grad(u, ei, ej, dist, coef, q):
    diff = u[ei] - u[ej]
    absd = np.abs(diff)
    energy = float(np.sum(coef * (absd / dist) ** q))
    gterm = coef * q * absd ** (q - 1) * np.sign(diff) / dist ** q
    grad = np.zeros_like(u)
    np.add.at(grad, ei, gterm)
    np.add.at(grad, ej, -gterm)
    return energy, grad


def _solve_quadratic(n, ei, ej, w, fixed_mask, fixed_vals):
    """Minimize sum w_e (u_i - u_j)^2 subject to the fixed values."""
    lap = sp.csr_matrix(
        (np.concatenate([w, w, -w, -w]),
         (np.concatenate([ei, ej, ei, ej]), np.concatenate([ei, ej, ej, ei]))),
        shape=(n, n),
    )
    free = ~fixed_mask
    rhs = -lap[free][:, fixed_mask] @ fixed_vals[fixed_mask]
    a_ff = lap[free][:, free].tocsc()
    u = fixed_vals.copy()
    if free.any():
        u[free] = spsolve(a_ff, rhs)
    return u


def minimize_energy(g: SpaceGraph, prob: CondenserProblem,
                    max_iter: int = 400) -> EnergySolution:
    """Minimize the edge-sum q-energy with plates held at 1 and 0."""
    ids = ball_members(g, prob.ambient)
    if prob.domain is not None:
        ids = ids[prob.domain[ids]]
    if ids.size == 0:
        raise VisboundError("bad-plates", "empty ambient")
    id_set = np.zeros(g.n, dtype=bool)
    id_set[ids] = True
    for name, plate in (("high", prob.plate_high), ("low", prob.plate_low)):
        if plate.size == 0:
            raise VisboundError("bad-plates", f"plate {name} is empty")
        if not id_set[plate].all():
            raise VisboundError("bad-plates", f"plate {name} leaves the ambient set")
    if np.intersect1d(prob.plate_high, prob.plate_low).size:
        raise VisboundError("bad-plates", "plates overlap")

    local = -np.ones(g.n, dtype=np.int64)
    local[ids] = np.arange(ids.size)
    n = ids.size
    fixed = np.zeros(n, dtype=bool)
    vals = np.zeros(n)
    fixed[local[prob.plate_high]] = True
    vals[local[prob.plate_high]] = 1.0
    fixed[local[prob.plate_low]] = True

    ei, ej, dist, coef = _edge_list(g, ids)
    if ei.size == 0:
        raise VisboundError("bad-plates", "ambient has no edges")
    q = prob.q

    # q = 2 weights are exact; otherwise they seed the IRLS loop.
    w0 = coef / dist ** 2
    u = _solve_quadratic(n, ei, ej, w0, fixed, vals)
    energy, _ = _energy_and_grad(u, ei, ej, dist, coef, q)
    n_it = 1
    converged = q == 2.0

    if q != 2.0:
        for _ in range(max_iter):
            absd = np.abs(u[ei] - u[ej])
            w = coef * (absd ** 2 + ENERGY_EPS ** 2) ** ((q - 2) / 2) / dist ** q
            u_new = _solve_quadratic(n, ei, ej, w, fixed, vals)
            u_new = 0.5 * u + 0.5 * u_new
            e_new, _ = _energy_and_grad(u_new, ei, ej, dist, coef, q)
            n_it += 1
            done = abs(e_new - energy) <= ENERGY_RTOL * max(e_new, 1e-300)
            u, energy = u_new, e_new
            if done:
                converged = True
                break
        u, energy, extra = _newton_polish(u, vals, fixed, ei, ej, dist, coef, q)
        n_it += extra

    u = np.clip(u, 0.0, 1.0)
    energy, grad = _energy_and_grad(u, ei, ej, dist, coef, q)
    residual = float(np.abs(grad[~fixed]).sum()) / max(energy, 1e-300)

    # Max-form on the induced subgraph.
    slope = np.zeros(n)
    s = np.abs(u[ei] - u[ej]) / dist
    np.maximum.at(slope, ei, s)
    np.maximum.at(slope, ej, s)
    energy_max = float(np.sum(g.mass[ids] * slope ** q))
    if energy_max > energy * (1 + 1e-9):
        raise VisboundError("energy-forms-inverted", f"{energy_max} > {energy}")

    return EnergySolution(
        ids=ids, u=u, q=q, energy=energy, energy_max_form=energy_max,
        residual=residual, n_iterations=n_it, converged=converged,
        diagnostics={"n_edges": int(ei.size), "n_free": int((~fixed).sum())},
    )


def _smoothed_energy_grad(u, ei, ej, dist, coef, q, delta):
    diff = u[ei] - u[ej]
    s2 = diff * diff + delta * delta
    energy = float(np.sum(coef * s2 ** (q / 2) / dist ** q))
    gterm = coef * q * s2 ** ((q - 2) / 2) * diff / dist ** q
    grad = np.zeros_like(u)
    np.add.at(grad, ei, gterm)
    np.add.at(grad, ej, -gterm)
    return energy, grad


def _newton_polish(u, vals, fixed, ei, ej, dist, coef, q, max_iter: int = 40):
    """Newton continuation on the delta-smoothed energy.

    The smoothed edge term (du^2 + delta^2)^(q/2) is C^2 with an exact
    positive edge Hessian h_e = q s^(q/2-2) (delta^2 + (q-1) du^2), so every
    Newton system is an SPD weighted Laplacian.  Driving delta to 1e-24
    leaves the true first-order residual at roundoff for every q > 1.
    """
    n = u.size
    free = ~fixed
    it_total = 0
    if not free.any():
        energy, _ = _energy_and_grad(u, ei, ej, dist, coef, q)
        return u, energy, it_total
    deltas = [1e-4, 1e-7, 1e-10, 1e-13, 1e-16, 1e-20, 1e-24]
    for delta in deltas:
        energy_s, grad_s = _smoothed_energy_grad(u, ei, ej, dist, coef, q, delta)
        for _ in range(max_iter):
            gnorm = float(np.abs(grad_s[free]).sum())
            if gnorm <= 1e-13 * max(energy_s, 1e-300):
                break
            it_total += 1
            diff = u[ei] - u[ej]
            s2 = diff * diff + delta * delta
            hw = coef * q * s2 ** ((q - 4) / 2) * (delta * delta + (q - 1) * diff * diff) / dist ** q
            lap = sp.csr_matrix(
                (np.concatenate([hw, hw, -hw, -hw]),
                 (np.concatenate([ei, ej, ei, ej]), np.concatenate([ei, ej, ej, ei]))),
                shape=(n, n),
            )
            step = np.zeros(n)
            try:
                step[free] = spsolve(lap[free][:, free].tocsc(), -grad_s[free])
            except Exception:
                break
            if not np.isfinite(step).all():
                break
            t = 1.0
            improved = False
            slope = float(grad_s[free] @ step[free])
            for _ in range(50):
                u_try = u + t * step
                e_try, g_try = _smoothed_energy_grad(u_try, ei, ej, dist, coef, q, delta)
                if e_try <= energy_s + 1e-4 * t * slope or e_try < energy_s - 1e-300:
                    u, energy_s, grad_s = u_try, e_try, g_try
                    improved = True
                    break
                t *= 0.5
            if not improved:
                break
    energy, _ = _energy_and_grad(u, ei, ej, dist, coef, q)
    return u, energy, it_total


def verify_loewner(
    g: SpaceGraph,
    prob: CondenserProblem,
    t: float,
    lam: Optional[float] = None,
    solution: Optional[EnergySolution] = None,
    lower_content=None,
) -> dict:
    """Report the empirical constant of the energy lower bound.

    The claim has shape  energy >= lam * mu(B) / (C r^q)  where lam certifies
    both plates' codimension-t content against mu(B)/r^t.  ``lower_content``
    is a callable (target ids -> lower-bound value) used when lam is absent;
    by default the packing LP from the content module, capped at r.
    """
    from .content import ContentQuery, content_lower_frostman

    ball = prob.ambient
    mu_b = float(g.mass[ball_members(g, ball)].sum())
    r = ball.radius
    if lam is None:
        if lower_content is None:
            def lower_content(ids):
                return content_lower_frostman(
                    g, ContentQuery(ids, t, r)
                ).value
        lam = min(
            lower_content(prob.plate_high) * r ** t / mu_b,
            lower_content(prob.plate_low) * r ** t / mu_b,
        )
    sol = solution if solution is not None else minimize_energy(g, prob)
    if sol.energy <= 0:
        raise VisboundError("zero-energy", "plates are not separated")
    c_emp = lam * mu_b / (r ** prob.q * sol.energy)
    return {
        "lambda": float(lam),
        "C": float(c_emp),
        "energy": sol.energy,
        "energy_max_form": sol.energy_max_form,
        "mu_ball": mu_b,
        "r": r,
        "q": prob.q,
        "t": t,
        "ok": bool(math.isfinite(c_emp) and c_emp > 0),
    }


def verify_ball_counting(
    g: SpaceGraph,
    dd,
    w: int,
    r: float,
    eta: float,
    z: int,
    family: Sequence[Ball],
    t: float,
    q: float,
    max_centers: int = 64,
) -> dict:
    """Count well-placed balls against eta^q mu(B(z, r)).

    Reports K0 = eta^q mu(B(z,r)) / sum_i mu(B_i), checks B(z, r/2) stays in
    the domain, evaluates the boundary-content hypothesis at rho=(1-21 eta) r
    (family-relative lower bound), and flags eta >= 1/168 in strict mode.
    """
    from .content import ContentQuery, content_lower_frostman, default_radii

    if len(family) == 0:
        raise VisboundError("no-well-placed-balls", "empty family")
    dd.require_interior(z, "deep point")
    half = ball_members(g, Ball(z, r / 2))
    if not dd.interior[half].all():
        raise VisboundError("ball-escapes-domain", "B(z, r/2) leaves the domain")

    lhs = eta ** q * float(g.mass[ball_members(g, Ball(z, r))].sum())
    rhs = sum(float(g.mass[ball_members(g, b)].sum()) for b in family)
    k0 = lhs / rhs
    rho = (1 - 21 * eta) * r
    report = {
        "K0": k0,
        "lhs": lhs,
        "rhs": rhs,
        "n_balls": len(family),
        "eta": eta,
        "q": q,
        "strict_eta_ok": bool(eta < 1 / 168),
        "rho": rho,
        "ok": bool(math.isfinite(k0) and k0 > 0),
    }
    if rho >= g.h:
        d_w = geodesic_distance(g, w, limit=rho)
        targets = np.flatnonzero(dd.boundary & (d_w < rho))
        if targets.size:
            centers = targets[:: max(1, targets.size // max_centers)]
            est = content_lower_frostman(
                g, ContentQuery(targets, t, rho, centers=centers,
                                radii=default_radii(g.h, rho)),
            )
            mu_bw = float(g.mass[d_w < rho].sum())
            report["c0"] = est.value * rho ** t / mu_bw
            report["boundary_content_lower"] = est.value
            report["mu_window"] = mu_bw
    return report
