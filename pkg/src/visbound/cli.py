"""Command line entry points: generate, run, verify, report.

``verify <lemma-id>`` runs a fast self-contained property suite for one of
the named estimates on small built-in instances and exits nonzero on
failure; ``run`` executes the full pipeline from a TOML or JSON config.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import content as content_mod
from . import energy as energy_mod
from .errors import VisboundError
from .frostman import (
    build_generations,
    frostman_weights,
    verify_frostman_bound,
    verify_telescoping,
    well_placed_family,
)
from .generators import generate_domain
from .geometry import decompose
from .pipeline import PipelineConfig, _sanitize, emit, run_pipeline
from .space import Ball, build_grid_space, geodesic_distance
from .trace import BesovParams, verify_lq_estimate, verify_trace_energy

_ENV_OUT = "VISBOUND_OUTPUT_DIR"


def _coerce(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def _parse_pairs(pairs: list[str]) -> dict:
    out: dict = {}
    for pair in pairs:
        if "=" not in pair:
            raise VisboundError("bad-config", f"expected key=value, got {pair!r}")
        key, _, val = pair.partition("=")
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = _coerce(val)
    return out


def _load_config_file(path: str) -> dict:
    p = Path(path)
    data = p.read_bytes()
    if p.suffix.lower() == ".json":
        return json.loads(data)
    return tomllib.loads(data.decode())


def _merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _config_from(args) -> PipelineConfig:
    raw: dict = {}
    if args.config:
        raw = _load_config_file(args.config)
    raw = _merge(raw, _parse_pairs(args.set or []))
    known = set(PipelineConfig.__dataclass_fields__)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise VisboundError("bad-config", f"unknown config keys: {unknown}")
    cfg = PipelineConfig(**raw)
    if args.out:
        cfg.output_dir = args.out
    elif os.environ.get(_ENV_OUT):
        cfg.output_dir = os.environ[_ENV_OUT]
    return cfg


# ---- lemma verification suites --------------------------------------


def _disk_setup(radius_cells: int, eta: float, depth: int):
    mask = generate_domain("disk", {"radius_cells": radius_cells})
    g = build_grid_space(np.ones(mask.shape, dtype=bool))
    dd = decompose(g, mask[g.cells[:, 0], g.cells[:, 1]])
    z0 = dd.deepest_vertex()
    tree = build_generations(dd, z0, eta, depth)
    measure = frostman_weights(tree)
    return g, dd, z0, tree, measure


def _suite_co_dim_change(seed: int = 0) -> dict:
    mask = generate_domain("disk", {"radius_cells": 14})
    g = build_grid_space(np.ones(mask.shape, dtype=bool))
    dd = decompose(g, mask[g.cells[:, 0], g.cells[:, 1]])
    rng = np.random.default_rng(seed)
    margins = []
    for _ in range(5):
        w = int(rng.choice(dd.boundary_ids))
        d = geodesic_distance(g, w, limit=5 * g.h)
        target = dd.boundary_ids[d[dd.boundary_ids] < 5 * g.h][:8]
        rep = content_mod.verify_content_scaling(g, target, t=1.0, tau=1.5,
                                                 rho=4 * g.h)
        margins.append(rep["margin"])
    return {"ok": bool(all(m >= -1e-12 for m in margins)), "margins": margins}


def _suite_scale_change(seed: int = 0) -> dict:
    mask = generate_domain("disk", {"radius_cells": 24})
    g = build_grid_space(np.ones(mask.shape, dtype=bool))
    dd = decompose(g, mask[g.cells[:, 0], g.cells[:, 1]])
    w = int(dd.boundary_ids[0])
    rho = 2 * g.h
    constants = {}
    for factor in (2, 4, 8):
        alpha = factor * rho
        d = geodesic_distance(g, w, limit=alpha)
        target = dd.boundary_ids[d[dd.boundary_ids] < alpha]
        rep = content_mod.verify_scale_change(g, target, t=1.0,
                                              cover=[Ball(w, alpha)], rho=rho)
        constants[factor] = rep["C"]
    vals = list(constants.values())
    ok = all(math.isfinite(v) and v > 0 for v in vals)
    ok = ok and max(vals) / min(vals) <= 2.0
    return {"ok": bool(ok), "C_by_ratio": constants}


def _half_annuli_problem(outer: int, inner: int, q: float):
    mask = generate_domain("annulus", {"outer_cells": outer, "inner_cells": inner})
    g = build_grid_space(np.ones(mask.shape, dtype=bool))
    dd = decompose(g, mask[g.cells[:, 0], g.cells[:, 1]])
    center = (mask.shape[0] - 1) / 2.0
    rows = g.cells[:, 0] - center
    cols = g.cells[:, 1] - center
    theta = np.arctan2(rows, cols)
    upper = dd.interior & (theta > np.pi / 4) & (theta < 3 * np.pi / 4)
    lower = dd.interior & (theta < -np.pi / 4) & (theta > -3 * np.pi / 4)
    anchor = g.vertex_at(int(round(center)), int(round(center + (outer + inner) / 2)))
    radius = 3.0 * outer * g.h
    prob = energy_mod.CondenserProblem(
        ambient=Ball(anchor, radius),
        plate_high=np.flatnonzero(upper),
        plate_low=np.flatnonzero(lower),
        q=q,
        domain=dd.interior,
    )
    return g, prob


def _suite_loewner(seed: int = 0) -> dict:
    reports = {}
    for outer, inner in ((16, 7), (32, 14)):
        g, prob = _half_annuli_problem(outer, inner, q=2.0)
        reports[outer] = energy_mod.verify_loewner(g, prob, t=1.0)
    c_small = reports[16]["C"]
    c_big = reports[32]["C"]
    ratio = max(c_small, c_big) / min(c_small, c_big)
    ok = all(r["ok"] for r in reports.values()) and ratio <= 2.0
    return {"ok": bool(ok), "C_coarse": c_small, "C_fine": c_big,
            "refinement_ratio": ratio}


def _suite_not_counting(seed: int = 0) -> dict:
    mask = generate_domain("disk", {"radius_cells": 24})
    g = build_grid_space(np.ones(mask.shape, dtype=bool))
    dd = decompose(g, mask[g.cells[:, 0], g.cells[:, 1]])
    w = int(dd.boundary_ids[0])
    r = 12 * g.h
    eta = 0.25
    d_w = geodesic_distance(g, w, limit=r)
    inside = dd.interior & (d_w < r)
    depth = np.where(inside, dd.d_omega, -np.inf)
    z = int(np.argmax(depth))
    fam = well_placed_family(dd, w, r, eta, z)
    rep = energy_mod.verify_ball_counting(g, dd, w, r, eta, z, fam.balls,
                                          t=1.0, q=1.25)
    return {"ok": bool(rep["ok"]), "K0": rep["K0"], "n_balls": len(fam),
            "strict_eta_ok": rep["strict_eta_ok"]}


def _suite_telescoping(seed: int = 0) -> dict:
    g, dd, z0, tree, measure = _disk_setup(40, eta=0.25, depth=2)
    rep = verify_telescoping(measure, g)
    return {"ok": bool(rep["ok"]), "max_error": rep["max_error"],
            "depth": tree.depth}


def _suite_frostman_bound(seed: int = 0) -> dict:
    g, dd, z0, tree, measure = _disk_setup(40, eta=0.25, depth=2)
    rep = verify_frostman_bound(measure, p=1.5, q_visibility=1.25, seed=seed)
    return {"ok": bool(rep["ok"]), "c_frost": rep["c_frost"],
            "c_local": rep["c_local"], "epsilon": rep["epsilon"]}


def _suite_trace_energy(seed: int = 0) -> dict:
    g, dd, z0, tree, measure = _disk_setup(30, eta=0.25, depth=1)
    params = BesovParams(p=1.5, q=3.0)
    rep_const = verify_trace_energy(dd, z0, 4.0, np.ones(g.n), params, measure)
    u = g.coords[:, 0] - g.coords[z0, 0]
    rep_x = verify_trace_energy(dd, z0, 4.0, u, params, measure)
    ok = (rep_const.besov_value == 0.0 and rep_const.ratio_energy == 0.0
          and math.isfinite(rep_x.ratio_energy) and rep_x.sobolev_energy > 0)
    return {"ok": bool(ok), "ratio_energy_coordinate": rep_x.ratio_energy,
            "constant_annihilated": rep_const.besov_value == 0.0}


def _suite_lq_estimate(seed: int = 0) -> dict:
    g, dd, z0, tree, measure = _disk_setup(30, eta=0.25, depth=1)
    params = BesovParams(p=1.5, q=3.0)
    u = g.coords[:, 0] - g.coords[z0, 0] + 0.5 * dd.d_omega
    rep1 = verify_lq_estimate(dd, z0, 4.0, u, params, measure)
    rep2 = verify_lq_estimate(dd, z0, 4.0, 2.0 * u, params, measure)
    invariant = abs(rep1.ratio_lq - rep2.ratio_lq) <= 1e-12 * max(rep1.ratio_lq, 1.0)
    ok = math.isfinite(rep1.ratio_lq) and invariant
    return {"ok": bool(ok), "ratio_lq": rep1.ratio_lq,
            "homogeneity_invariant": bool(invariant)}


LEMMA_SUITES = {
    "co-dim-change": _suite_co_dim_change,
    "scale-change": _suite_scale_change,
    "loewner": _suite_loewner,
    "not-counting": _suite_not_counting,
    "telescoping": _suite_telescoping,
    "frostman-bound": _suite_frostman_bound,
    "trace-energy": _suite_trace_energy,
    "lq-estimate": _suite_lq_estimate,
}


# ---- verbs ----------------------------------------------------------


def cmd_generate(args) -> int:
    params = _parse_pairs(args.param or [])
    mask = generate_domain(args.domain, params)
    lines = ["".join("#" if cell else "." for cell in row) for row in mask]
    text = "\n".join(lines) + "\n"
    if args.out and args.out != "-":
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_run(args) -> int:
    cfg = _config_from(args)
    report = run_pipeline(cfg)
    files = emit(report, cfg.output_dir)
    summary = {
        "output": files,
        "stages_ok": sorted(report.stages),
        "stages_failed": {k: v["code"] for k, v in report.errors.items()},
        "stages_skipped": sorted(report.skipped),
    }
    print(json.dumps(_sanitize(summary), indent=2, sort_keys=True))
    return 0 if not report.errors else 3


def cmd_verify(args) -> int:
    suite = LEMMA_SUITES[args.lemma]
    result = suite(seed=args.seed)
    print(json.dumps(_sanitize({"lemma": args.lemma, **result}),
                     indent=2, sort_keys=True))
    return 0 if result.get("ok") else 1


def cmd_report(args) -> int:
    path = Path(args.rundir) / "report.json"
    data = json.loads(path.read_text())
    lines = [f"run: {args.rundir}"]
    cfg = data.get("config", {})
    lines.append(
        f"domain={cfg.get('domain')} h={cfg.get('h')} eta={cfg.get('eta')} "
        f"depth={cfg.get('depth')}"
    )
    stages = data.get("stages", {})
    errors = data.get("errors", {})
    for name, body in stages.items():
        if body is None:
            state = "failed " + errors[name]["code"] if name in errors else "skipped"
            lines.append(f"  {name}: {state}")
            continue
        extra = ""
        if name == "boundary_thickness":
            extra = f" c0={body.get('c0')}"
        elif name == "generations":
            extra = f" depth={body.get('depth')} points={body.get('points_per_level')}"
        elif name == "frostman_checks":
            extra = (f" M={body.get('chains', {}).get('M')}"
                     f" c_frost={body.get('frostman_bound', {}).get('c_frost')}")
        elif name == "curves":
            extra = f" failed={body.get('n_failed')}/{body.get('n_curves')}"
        elif name == "localized_content":
            extra = f" c1={body.get('c1')}"
        lines.append(f"  {name}: ok{extra}")
    print("\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="visbound",
        description="Visible-boundary geometry runs and estimate checks.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("generate", help="print or save a domain mask")
    g.add_argument("--domain", required=True)
    g.add_argument("--param", action="append", metavar="KEY=VALUE")
    g.add_argument("--out", default="-")
    g.set_defaults(fn=cmd_generate)

    r = sub.add_parser("run", help="run the full pipeline")
    r.add_argument("--config", help="TOML or JSON config file")
    r.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config field (repeatable)")
    r.add_argument("--out", help="output directory (overrides config and env)")
    r.set_defaults(fn=cmd_run)

    v = sub.add_parser("verify", help="run one estimate's property suite")
    v.add_argument("lemma", choices=sorted(LEMMA_SUITES))
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(fn=cmd_verify)

    p = sub.add_parser("report", help="summarize a finished run directory")
    p.add_argument("rundir")
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except VisboundError as err:
        print(f"error [{err.code}]: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
