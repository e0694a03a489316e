"""Computational geometry of visible boundaries on grid metric spaces.

Finite weighted grid graphs stand in for metric measure spaces; the package
builds domains, finds their John subdomains and visible boundary, estimates
codimensional contents, minimizes condenser energies, grows boundary
generation trees carrying Frostman-type measures, and checks the trace
estimates, all with reported empirical constants.
"""

from .content import (
    ContentEstimate,
    ContentQuery,
    content_exact_small,
    content_lower_frostman,
    content_upper,
    default_radii,
    verify_content_scaling,
    verify_scale_change,
)
from .energy import (
    CondenserProblem,
    EnergySolution,
    discrete_lip,
    minimize_energy,
    verify_ball_counting,
    verify_loewner,
)
from .errors import VisboundError
from .frostman import (
    BallFamily,
    ChainedFamily,
    FrostmanMeasure,
    GenerationTree,
    build_generations,
    chain_bound,
    chainable_closure,
    frostman_weights,
    john_curve_from_generation,
    verify_frostman_bound,
    verify_separation,
    verify_telescoping,
    verify_window_consistency,
    well_placed_family,
)
from .generators import generate_domain
from .geometry import (
    Curve,
    DomainDecomp,
    JohnCurveCheck,
    JohnLabel,
    cone_domain,
    concatenate_curves,
    decompose,
    john_subdomain,
    verify_john_curve,
    visible_boundary,
)
from .masks import load_mask, make_weight
from .pipeline import PipelineConfig, RunReport, emit, run_pipeline
from .space import (
    Ball,
    PoincareParams,
    SpaceGraph,
    ball_mass,
    ball_members,
    build_grid_space,
    closed_ball_members,
    doubling_constant,
    geodesic_distance,
    shortest_path,
)
from .trace import (
    BesovParams,
    SobolevFunction,
    TraceReport,
    atom_distances,
    besov_seminorm,
    minimal_upper_gradient,
    restricted_maximal,
    trace_values,
    verify_lq_estimate,
    verify_trace_energy,
)

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "BallFamily",
    "BesovParams",
    "ChainedFamily",
    "CondenserProblem",
    "ContentEstimate",
    "ContentQuery",
    "Curve",
    "DomainDecomp",
    "EnergySolution",
    "FrostmanMeasure",
    "GenerationTree",
    "JohnCurveCheck",
    "JohnLabel",
    "PipelineConfig",
    "PoincareParams",
    "RunReport",
    "SobolevFunction",
    "SpaceGraph",
    "TraceReport",
    "VisboundError",
    "atom_distances",
    "ball_mass",
    "ball_members",
    "besov_seminorm",
    "build_generations",
    "build_grid_space",
    "chain_bound",
    "chainable_closure",
    "closed_ball_members",
    "concatenate_curves",
    "cone_domain",
    "content_exact_small",
    "content_lower_frostman",
    "content_upper",
    "decompose",
    "default_radii",
    "discrete_lip",
    "doubling_constant",
    "emit",
    "frostman_weights",
    "generate_domain",
    "geodesic_distance",
    "john_curve_from_generation",
    "john_subdomain",
    "load_mask",
    "make_weight",
    "minimal_upper_gradient",
    "minimize_energy",
    "restricted_maximal",
    "run_pipeline",
    "shortest_path",
    "trace_values",
    "verify_ball_counting",
    "verify_content_scaling",
    "verify_frostman_bound",
    "verify_john_curve",
    "verify_loewner",
    "verify_lq_estimate",
    "verify_scale_change",
    "verify_separation",
    "verify_telescoping",
    "verify_trace_energy",
    "verify_window_consistency",
    "visible_boundary",
    "well_placed_family",
]
