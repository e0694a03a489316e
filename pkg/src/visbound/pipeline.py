"""End-to-end orchestration: config, staged runs, and report emission.

A run builds the ambient space, decomposes the domain, samples the boundary
thickness constant, grows the generation tree with its measure, certifies
curves and cones, evaluates the localized content constant, and finishes
with the trace diagnostics.  Every stage is timed and isolated: a failing
stage records its error and the stages depending on it are skipped, while
independent stages still run.  Reports serialize deterministically; wall
clock times live in a separate structure so the main report is bit-stable.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import content as content_mod
from . import energy as energy_mod
from .errors import VisboundError
from .frostman import (
    FrostmanMeasure,
    GenerationTree,
    build_generations,
    chain_bound,
    frostman_weights,
    john_curve_from_generation,
    verify_frostman_bound,
    verify_separation,
    verify_telescoping,
    verify_window_consistency,
)
from .generators import generate_domain
from .geometry import cone_domain, decompose, visible_boundary
from .masks import make_weight
from .space import (
    Ball,
    build_grid_space,
    doubling_constant,
    geodesic_distance,
)
from .trace import (
    BesovParams,
    atom_distances,
    minimal_upper_gradient,
    verify_lq_estimate,
    verify_trace_energy,
)

_TRACE_FUNCTIONS = (
    "constant",
    "coordinate_x",
    "coordinate_y",
    "depth_sqrt",
    "depth",
    "energy_potential",
)


@dataclass
class PipelineConfig:
    """Everything a run needs; validation lists every problem at once."""

    domain: str = "disk"
    domain_params: dict = field(default_factory=dict)
    h: float = 1.0
    weight: str = "uniform"
    weight_params: dict = field(default_factory=dict)
    t: float = 1.0
    q_visibility: float = 1.25
    p: float = 1.5
    q_hat: float = 2.0
    q: float = 3.0
    c: float = 8.0
    eta: float = 0.125
    depth: int = 2
    strict_mode: bool = False
    z0: object = "auto-deepest"       # or (row, col)
    n_c0_samples: int = 6
    n_c0_radii: int = 4
    n_frostman_centers: int = 16
    n_frostman_radii: int = 6
    certify_cones: str = "sample"     # none | sample | all
    n_cone_certificates: int = 4
    trace_functions: tuple = _TRACE_FUNCTIONS
    n_trace_radii: int = 6
    measure_distortion: bool = True
    output_dir: str = "out"
    seed: int = 0

    def validate(self) -> None:
        problems = []
        if self.h <= 0:
            problems.append(f"h={self.h} must be positive")
        if self.t < 0:
            problems.append(f"t={self.t} must be nonnegative")
        if not (self.t < self.q_visibility < self.p):
            problems.append(
                f"visibility exponents need t < q_visibility < p, got "
                f"{self.t}, {self.q_visibility}, {self.p}"
            )
        if not (max(1.0, self.t) < self.p < self.q_hat < self.q):
            problems.append(
                f"trace exponents need max(1,t) < p < q_hat < q, got "
                f"t={self.t}, p={self.p}, q_hat={self.q_hat}, q={self.q}"
            )
        if not (0 < self.eta < 0.5):
            problems.append(f"eta={self.eta} outside (0, 0.5)")
        if self.strict_mode and not (self.eta < 1.0 / 168.0):
            problems.append(f"strict mode requires eta < 1/168, got {self.eta}")
        if self.c < 1:
            problems.append(f"c={self.c} must be at least 1")
        if self.depth < 0:
            problems.append(f"depth={self.depth} must be nonnegative")
        if self.certify_cones not in ("none", "sample", "all"):
            problems.append(f"certify_cones={self.certify_cones!r} unknown")
        unknown = [f for f in self.trace_functions if f not in _TRACE_FUNCTIONS]
        if unknown:
            problems.append(f"unknown trace functions {unknown}")
        if not (isinstance(self.z0, str) and self.z0 == "auto-deepest"):
            z = self.z0
            if not (hasattr(z, "__len__") and len(z) == 2):
                problems.append(f"z0={self.z0!r} must be 'auto-deepest' or (row, col)")
        if problems:
            raise VisboundError("bad-config", "; ".join(problems))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["trace_functions"] = list(self.trace_functions)
        if not isinstance(d["z0"], str):
            d["z0"] = list(d["z0"])
        return d


@dataclass
class RunReport:
    config: dict
    stages: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)
    versions: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)    # segregated on emit

    def to_dict(self) -> dict:
        """Deterministic payload; wall-clock lives outside this dict."""
        stages = {name: self.stages.get(name) for name in _STAGE_ORDER}
        return _sanitize(
            {
                "config": self.config,
                "stages": stages,
                "errors": self.errors,
                "skipped": sorted(self.skipped),
                "versions": self.versions,
            }
        )


_STAGE_ORDER = (
    "build",
    "decompose",
    "boundary_thickness",
    "generations",
    "weights",
    "frostman_checks",
    "curves",
    "localized_content",
    "trace",
)


def _sanitize(obj):
    """JSON-ready deep copy: numpy to python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _versions() -> dict:
    import scipy

    from . import __version__

    return {
        "package": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


class _Run:
    """Mutable state shared by the stage functions of one pipeline run."""

    def __init__(self, config: PipelineConfig):
        self.cfg = config
        self.g = None
        self.dd = None
        self.z0 = None
        self.r = None
        self.tree: Optional[GenerationTree] = None
        self.measure: Optional[FrostmanMeasure] = None
        self.doubling = None
        self.m_chain = None

    # ---- stages -----------------------------------------------------

    def build(self) -> dict:
        cfg = self.cfg
        self.domain_mask = generate_domain(cfg.domain, cfg.domain_params, cfg.h)
        weight = make_weight(cfg.weight, cfg.weight_params, cfg.h)
        self.g = build_grid_space(np.ones(self.domain_mask.shape, dtype=bool),
                                  cfg.h, weight)
        out = {
            "n_vertices": int(self.g.n),
            "total_mass": self.g.total_mass,
            "h": cfg.h,
            "shape": list(self.domain_mask.shape),
        }
        if cfg.measure_distortion and self.g.n <= 65536:
            out["metric_distortion"] = self.g.metric_distortion(seed=cfg.seed)
        self.doubling = doubling_constant(self.g, n_centers=16, seed=cfg.seed)
        out["doubling_constant"] = self.doubling
        return out

    def decompose(self) -> dict:
        cfg = self.cfg
        interior = self.domain_mask[self.g.cells[:, 0], self.g.cells[:, 1]]
        self.dd = decompose(self.g, interior)
        if isinstance(cfg.z0, str):
            self.z0 = self.dd.deepest_vertex()
        else:
            v = self.g.vertex_at(int(cfg.z0[0]), int(cfg.z0[1]))
            if v < 0:
                raise VisboundError("center-outside", f"no cell at {cfg.z0}")
            self.dd.require_interior(v, "configured z0")
            self.z0 = v
        self.r = float(self.dd.d_omega[self.z0])
        return {
            "n_interior": int(self.dd.interior.sum()),
            "n_boundary": int(self.dd.boundary.sum()),
            "n_discarded": self.dd.n_discarded,
            "z0": int(self.z0),
            "z0_cell": [int(x) for x in self.g.cells[self.z0]],
            "r": self.r,
        }

    def boundary_thickness(self) -> dict:
        """Empirical lower constant of the boundary content hypothesis.

        Minimum over sampled (w, rho) of  H_lower(B(w,rho) cap bd) * rho^t
        / mu(B(w,rho)); a sampled quantity, not a proof.
        """
        cfg = self.cfg
        g, dd = self.g, self.dd
        rng = np.random.default_rng(cfg.seed)
        bnd = dd.boundary_ids
        picks = np.sort(rng.choice(bnd, size=min(cfg.n_c0_samples, bnd.size),
                                   replace=False))
        rho_hi = max(min(self.r, 64 * g.h), 8 * g.h)
        radii = np.geomspace(8 * g.h, rho_hi, cfg.n_c0_radii)
        samples = []
        c0 = np.inf
        for w in picks:
            d = geodesic_distance(g, int(w), limit=float(radii[-1]))
            for rho in radii:
                target = bnd[d[bnd] < rho]
                if target.size == 0:
                    continue
                mu_b = float(g.mass[d < rho].sum())
                est = content_mod.content_lower_frostman(
                    g, content_mod.ContentQuery(target, cfg.t, float(rho))
                )
                ratio = est.value * rho ** cfg.t / mu_b
                c0 = min(c0, ratio)
                samples.append({"w": int(w), "rho": float(rho),
                                "lower": est.value, "mu": mu_b, "ratio": ratio})
        return {
            "c0": c0,
            "t": cfg.t,
            "kind": "empirical lower-constant over sampled scales",
            "samples": samples,
        }

    def generations(self) -> dict:
        cfg = self.cfg
        self.tree = build_generations(self.dd, self.z0, cfg.eta, cfg.depth)
        tree = self.tree
        return {
            "depth_requested": cfg.depth,
            "depth": tree.depth,
            "r": tree.r,
            "eta": cfg.eta,
            "root_vertex": int(tree.root.vertex),
            "flags": list(tree.flags),
            "points_per_level": [len(lvl.points) for lvl in tree.levels],
        }

    def weights(self) -> dict:
        self.measure = frostman_weights(self.tree)
        return {
            "level_masses": [float(w.sum()) for w in self.measure.weights],
            "n_atoms": int(self.measure.atoms()[0].size),
        }

    def frostman_checks(self) -> dict:
        cfg = self.cfg
        tele = verify_telescoping(self.measure, self.g)
        sep = verify_separation(self.tree)
        win = verify_window_consistency(self.tree)
        chains = chain_bound(self.tree, doubling=self.doubling)
        self.m_chain = max(chains["M"], 1)
        frostman = verify_frostman_bound(
            self.measure, cfg.p, q_visibility=cfg.q_visibility,
            n_extra_centers=cfg.n_frostman_centers,
            n_radii=cfg.n_frostman_radii, seed=cfg.seed,
        )
        return {
            "telescoping": tele,
            "separation": sep,
            "window_consistency": win,
            "chains": chains,
            "frostman_bound": frostman,
        }

    def curves(self) -> dict:
        cfg = self.cfg
        tree = self.tree
        m = self.m_chain
        c_curve = 4 * m
        results = []
        curves = []
        for k in range(1, tree.depth + 1):
            for i in range(len(tree.levels[k].points)):
                curve, info = john_curve_from_generation(tree, k, i, c=c_curve)
                results.append({"k": k, "i": i, **{kk: info[kk] for kk in
                                                   ("ok", "worst_ratio", "chain_depth_ok")}})
                curves.append((k, i, curve))
        n_fail = sum(1 for r in results if not r["ok"])

        c_vis = 8 * m + 1
        vis = visible_boundary(self.dd, self.z0, c_vis)
        vis_set = np.zeros(self.g.n, dtype=bool)
        vis_set[vis] = True
        d0 = geodesic_distance(self.g, self.z0, limit=3 * self.r + 2 * self.g.h)
        localization_ok = True
        for k in range(1, tree.depth + 1):
            for v in tree.vertices_at(k):
                if not vis_set[v] or not d0[v] < 3 * self.r + 2 * self.g.h:
                    localization_ok = False

        cone_reports = []
        if cfg.certify_cones != "none" and curves:
            if cfg.certify_cones == "all":
                chosen = curves
            else:
                step = max(len(curves) // cfg.n_cone_certificates, 1)
                chosen = curves[::step][: cfg.n_cone_certificates]
            for k, i, curve in chosen:
                _, cert = cone_domain(self.dd, curve, certify_c=c_vis,
                                      certify_slack=2 * self.g.h)
                cone_reports.append({"k": k, "i": i, **cert})
        self._curves = curves
        return {
            "c_curve": c_curve,
            "c_visibility": c_vis,
            "n_curves": len(results),
            "n_failed": n_fail,
            "worst_ratio": max((r["worst_ratio"] for r in results), default=0.0),
            "curve_results": results,
            "visible_count": int(vis.size),
            "localization_ok": localization_ok,
            "cones": cone_reports,
        }

    def localized_content(self) -> dict:
        """Frostman-certified content of the deepest generation in B(z0, 3r)."""
        cfg = self.cfg
        tree, g = self.tree, self.g
        atoms, w_atoms = self.measure.atoms()
        scale = 3 * tree.eta ** tree.depth * tree.r
        radii = []
        rr = scale
        while rr <= tree.r * (1 + 1e-12):
            radii.append(rr)
            rr *= 2
        if not radii:
            radii = [tree.r]
        query = content_mod.ContentQuery(atoms, cfg.p, tree.r,
                                         radii=np.asarray(radii))
        est = content_mod.content_lower_frostman(g, query,
                                                 measure=(atoms, w_atoms))
        d_z0 = geodesic_distance(g, self.z0, limit=tree.r)
        mu_z0 = float(g.mass[d_z0 < tree.r].sum())
        mu_root = tree.root.ball_mass_at_vertex
        c1 = est.value * tree.r ** cfg.p / mu_z0
        return {
            "content_lower": est.value,
            "lambda": est.diagnostics.get("lambda"),
            "radii": radii,
            "p": cfg.p,
            "mu_ball_z0": mu_z0,
            "mu_ball_root": mu_root,
            "c1": c1,
            "c1_root": est.value * tree.r ** cfg.p / mu_root,
            "kind": "empirical lower-constant over sampled scales",
        }

    def _trace_function(self, name: str) -> np.ndarray:
        g, dd = self.g, self.dd
        if name == "constant":
            return np.ones(g.n)
        if name == "coordinate_x":
            return g.coords[:, 0] - g.coords[self.z0, 0]
        if name == "coordinate_y":
            return g.coords[:, 1] - g.coords[self.z0, 1]
        if name == "depth":
            return dd.d_omega.copy()
        if name == "depth_sqrt":
            return np.sqrt(np.maximum(dd.d_omega, 0.0))
        if name == "energy_potential":
            d = geodesic_distance(g, self.z0, limit=4 * self.r)
            ambient = d < 4 * self.r
            prob = energy_mod.CondenserProblem(
                ambient=Ball(self.z0, 4 * self.r),
                plate_high=np.flatnonzero((d < self.r / 3) & dd.interior),
                plate_low=np.flatnonzero(
                    dd.interior & ambient & (dd.d_omega <= 2 * g.h)
                ),
                q=self.cfg.q,
                domain=dd.interior,
            )
            sol = energy_mod.minimize_energy(g, prob)
            u = sol.embed(g.n)
            u[np.isnan(u)] = 0.0
            self._potential_info = sol.to_dict()
            return u
        raise VisboundError("bad-config", f"unknown trace function {name!r}")

    def trace(self) -> dict:
        cfg = self.cfg
        dd = self.dd
        params = BesovParams(p=cfg.p, q=cfg.q)
        atoms, _ = self.measure.atoms()
        dists = atom_distances(self.g, atoms)
        radii = np.geomspace(self.r, 2 * self.g.h, cfg.n_trace_radii)
        out = {}
        for name in cfg.trace_functions:
            try:
                u = self._trace_function(name)
                rep = verify_trace_energy(dd, self.z0, cfg.c, u, params,
                                          self.measure, q_hat=cfg.q_hat,
                                          radii=radii, dists=dists)
                rep = verify_lq_estimate(dd, self.z0, cfg.c, u, params,
                                         self.measure, report=rep)
                entry = rep.to_dict()
                if name == "energy_potential":
                    entry["solver"] = getattr(self, "_potential_info", None)
                out[name] = entry
            except VisboundError as err:
                out[name] = {"error": {"code": err.code, "message": str(err)}}
        out["atom_count"] = int(atoms.size)
        return out

    # ------------------------------------------------------------------


_STAGE_DEPS = {
    "build": (),
    "decompose": ("build",),
    "boundary_thickness": ("decompose",),
    "generations": ("decompose",),
    "weights": ("generations",),
    "frostman_checks": ("weights",),
    "curves": ("frostman_checks",),
    "localized_content": ("weights",),
    "trace": ("weights",),
}


def run_pipeline(config: PipelineConfig) -> RunReport:
    """Run every stage in order with isolation and timing."""
    config.validate()
    report = RunReport(config=config.to_dict(), versions=_versions())
    run = _Run(config)
    broken = set()
    for name in _STAGE_ORDER:
        if any(dep in broken for dep in _STAGE_DEPS[name]):
            report.skipped.append(name)
            broken.add(name)
            continue
        t0 = time.perf_counter()
        try:
            report.stages[name] = getattr(run, name)()
        except VisboundError as err:
            report.errors[name] = {"code": err.code, "message": str(err)}
            broken.add(name)
        finally:
            report.timings[name] = time.perf_counter() - t0
    report._run = run
    return report


def emit(report: RunReport, output_dir: Optional[str] = None,
         formats: tuple = ("json", "csv")) -> list[str]:
    """Write the report bundle; returns the created file paths."""
    out = Path(output_dir if output_dir is not None
               else report.config.get("output_dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    written = []

    if "json" in formats:
        path = out / "report.json"
        path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
        written.append(str(path))
        tpath = out / "timings.json"
        tpath.write_text(json.dumps(_sanitize(report.timings), indent=2,
                                    sort_keys=True) + "\n")
        written.append(str(tpath))

    run = getattr(report, "_run", None)
    if "csv" in formats and run is not None and run.measure is not None:
        path = out / "atoms.csv"
        with path.open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["level", "vertex", "row", "col", "weight"])
            for k in range(run.tree.depth + 1):
                verts, weights = run.measure.level(k)
                for v, w in zip(verts, weights):
                    cell = run.g.cells[int(v)]
                    wr.writerow([k, int(v), int(cell[0]), int(cell[1]),
                                 repr(float(w))])
        written.append(str(path))

    if "json" in formats and run is not None and run.tree is not None:
        bundle = {"points": [], "curves": [], "visible": None}
        for k in range(run.tree.depth + 1):
            verts = run.tree.vertices_at(k)
            bundle["points"].append({
                "level": k,
                "cells": [[int(a) for a in run.g.cells[int(v)]] for v in verts],
            })
        for k, i, curve in getattr(run, "_curves", []):
            bundle["curves"].append({
                "level": k,
                "index": i,
                "cells": [[int(a) for a in run.g.cells[int(v)]]
                          for v in curve.vertices],
            })
        path = out / "plot_data.json"
        path.write_text(json.dumps(_sanitize(bundle), indent=2, sort_keys=True) + "\n")
        written.append(str(path))
    return written
