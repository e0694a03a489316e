"""Centralized slack constants.

Wherever a continuum identity meets rasterization, the allowed slack is a
small multiple of the cell size h.  All such constants live here so a single
record documents every approximation knob in the package.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    h: float

    @property
    def boundary_adjacency(self) -> float:
        """Interior vertices next to the complement see a boundary vertex
        within this distance (diagonal adjacency is sqrt(2) h < 2h)."""
        return 2.0 * self.h

    @property
    def contact(self) -> float:
        """A ball's designated boundary contact sits within h of its sphere."""
        return self.h

    @property
    def separation(self) -> float:
        """Generation points of one level are 8 eta^k r apart up to 2h."""
        return 2.0 * self.h

    @property
    def john_ball(self) -> float:
        """Geodesics inside an inscribed ball are 1-John curves up to 2h."""
        return 2.0 * self.h

    @property
    def cone_quality(self) -> float:
        """Cone-domain John certificates are checked with 2h slack."""
        return 2.0 * self.h

    @property
    def midpoint(self) -> float:
        """Approximate geodesic midpoints exist within d/2 + 2h."""
        return 2.0 * self.h

    @property
    def chain_depth(self) -> float:
        """Vertices on chain geodesics keep depth >= radius/2 up to h."""
        return self.h


# Scale-free numeric tolerances.
PATH_TIE_RTOL = 1e-9       # shortest-path reconstruction tie detection
MASS_ATOL = 1e-12          # Frostman mass bookkeeping
ENERGY_RTOL = 1e-10        # IRLS relative-energy stopping rule
ENERGY_EPS = 1e-12         # IRLS reweighting regularization
CLOSED_BALL_RTOL = 1e-9    # closed-ball membership d <= r*(1+tol)
