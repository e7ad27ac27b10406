"""Circular-sector beam geometry: frames, containment, trajectories, departures.

All angles are radians in a shared map frame, measured counter-clockwise from
east. A beam footprint is the closed circular sector of radius ``radius``
spanning ``beamwidth`` around the ``pointing`` direction at the beam origin.
Points near a beam are carried in beam-local polar form: distance from the
origin and signed angular offset from the pointing direction.

The departure machinery classifies where a straight trajectory leaves the
sector (left edge, right edge, or arc) by rotating the sector so the tested
edge lies on the +x axis with the sector above it; a heading then exits
through that edge iff its offset from straight-down falls inside the cone
subtended by the edge segment. Sectors with beamwidth <= pi are convex, so
the three exit cones partition the full circle of headings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

TWO_PI = 2.0 * math.pi

# Boundary/equality tolerance for lengths (m) and angles (rad).
GEOM_TOL = 1e-9


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    b = (a + math.pi) % TWO_PI - math.pi
    return math.pi if b == -math.pi else b


def wrap_angle_array(a: np.ndarray) -> np.ndarray:
    """Vectorized angle normalization to [-pi, pi)."""
    return (a + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True)
class BeamSector:
    """One beam: radiating origin, pointing direction, radius and beamwidth."""

    id: int
    origin_x: float
    origin_y: float
    pointing: float
    radius: float
    beamwidth: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"beam radius must be positive, got {self.radius}")
        if not 0 < self.beamwidth <= math.pi:
            raise ValueError(
                f"beamwidth must be in (0, pi], got {self.beamwidth}")

    @property
    def half_width(self) -> float:
        return 0.5 * self.beamwidth

    def sector_area(self) -> float:
        return 0.5 * self.radius * self.radius * self.beamwidth


@dataclass(frozen=True)
class PolarPoint:
    """A location relative to a beam: r meters out, phi off the pointing axis."""

    r: float
    phi: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"polar radius must be >= 0, got {self.r}")


class DepartureCase(Enum):
    LEFT_EDGE = "left_edge"
    RIGHT_EDGE = "right_edge"
    ARC = "arc"


@dataclass(frozen=True)
class DepartureResult:
    case: DepartureCase
    exit_point: PolarPoint
    distance: float


@dataclass(frozen=True)
class Circle:
    center_x: float
    center_y: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"circle radius must be positive, got {self.radius}")


def to_cartesian(beam: BeamSector, p: PolarPoint) -> tuple[float, float]:
    """Map-frame Cartesian location of a beam-relative polar point."""
    a = beam.pointing + p.phi
    return (beam.origin_x + p.r * math.cos(a), beam.origin_y + p.r * math.sin(a))


def reframe(source: BeamSector, p: PolarPoint, target: BeamSector) -> PolarPoint:
    """Re-express a point relative to another beam.

    The angular offset is taken about the target origin with a two-argument
    arctangent, so all quadrants resolve; a point coincident with the target
    origin maps to (r=0, phi=0).
    """
    x, y = to_cartesian(source, p)
    dx = x - target.origin_x
    dy = y - target.origin_y
    r = math.hypot(dx, dy)
    if r == 0.0:
        return PolarPoint(0.0, 0.0)
    return PolarPoint(r, wrap_angle(math.atan2(dy, dx) - target.pointing))


def contains(beam: BeamSector, p: PolarPoint) -> bool:
    """Closed-set sector membership of a beam-relative point."""
    phi = p.phi if abs(p.phi) <= math.pi else wrap_angle(p.phi)
    return p.r <= beam.radius and abs(phi) <= beam.half_width


def advance(p: PolarPoint, heading: float, dist: float, beam: BeamSector) -> PolarPoint:
    """Beam-relative location after moving ``dist`` meters along ``heading``.

    Straight-line motion: the position vector r∠phi plus the movement vector
    dist∠heading, resolved back into beam-local polar form.
    """
    if dist < 0:
        raise ValueError(f"distance must be >= 0, got {dist}")
    if dist == 0.0:
        return p
    gamma = heading - (beam.pointing + p.phi)
    cg, sg = math.cos(gamma), math.sin(gamma)
    r_new = math.sqrt(p.r * p.r + dist * dist + 2.0 * p.r * dist * cg)
    phi_new = p.phi + math.atan2(dist * sg, p.r + dist * cg)
    return PolarPoint(r_new, wrap_angle(phi_new))


def _edge_frame(beam: BeamSector, p: PolarPoint, left: bool):
    """Transform into the frame where the tested edge lies on +x.

    For the left edge the transform includes a reflection, so in both frames
    the sector sits above the x axis and the point lands at (xe, ye >= 0).
    Returns (xe, ye, dlo, dhi) where [dlo, dhi] is the heading cone (signed
    offset from straight-down) subtended by the edge segment.
    """
    hw = beam.half_width
    a0 = hw - p.phi if left else hw + p.phi
    xe = p.r * math.cos(a0)
    ye = p.r * math.sin(a0)
    dlo = math.atan2(-xe, ye)
    dhi = math.atan2(beam.radius - xe, ye)
    return xe, ye, dlo, dhi


def _edge_heading_offset(beam: BeamSector, heading: float, left: bool) -> float:
    """Heading offset from straight-down in the tested edge frame."""
    hw = beam.half_width
    if left:
        transformed = hw + beam.pointing - heading
    else:
        transformed = hw - beam.pointing + heading
    return wrap_angle(transformed - 1.5 * math.pi)


def departure(beam: BeamSector, p: PolarPoint, heading: float) -> DepartureResult:
    """Exit side, exit point and travel distance for a straight trajectory.

    Tries the left-edge cone, then the right-edge cone; everything else exits
    through the arc. Edge distances come from the perpendicular drop in the
    edge frame, the arc distance from the positive root of the ray-circle
    intersection.
    """
    if not contains(beam, p):
        raise ValueError(f"point {p} lies outside beam {beam.id}")
    hw = beam.half_width
    R = beam.radius

    if p.r == 0.0:
        # Degenerate start at the radiating origin: headings into the sector
        # cross the full radius to the arc, everything else leaves at once.
        off = wrap_angle(heading - beam.pointing)
        if abs(off) <= hw:
            return DepartureResult(DepartureCase.ARC, PolarPoint(R, off), R)
        case = DepartureCase.LEFT_EDGE if off > 0 else DepartureCase.RIGHT_EDGE
        exit_phi = hw if off > 0 else -hw
        return DepartureResult(case, PolarPoint(0.0, exit_phi), 0.0)

    for left in (True, False):
        xe, ye, dlo, dhi = _edge_frame(beam, p, left)
        d = _edge_heading_offset(beam, heading, left)
        if dlo <= d <= dhi:
            tau = ye / math.cos(d) if ye > 0.0 else 0.0
            u = min(max(xe + tau * math.sin(d), 0.0), R)
            case = DepartureCase.LEFT_EDGE if left else DepartureCase.RIGHT_EDGE
            return DepartureResult(case, PolarPoint(u, hw if left else -hw), tau)

    gamma = heading - (beam.pointing + p.phi)
    rc = p.r * math.cos(gamma)
    tau = -rc + math.sqrt(rc * rc + R * R - p.r * p.r)
    return DepartureResult(DepartureCase.ARC, advance(p, heading, tau, beam), tau)


def departure_cone_widths(beam: BeamSector, p: PolarPoint) -> tuple[float, float, float]:
    """Heading-cone widths (left edge, right edge, arc) seen from ``p``.

    For interior points the three widths tile the full 2*pi of headings.
    """
    if not contains(beam, p):
        raise ValueError(f"point {p} lies outside beam {beam.id}")
    if p.r == 0.0:
        w_arc = beam.beamwidth
        w_edge = 0.5 * (TWO_PI - w_arc)
        return (w_edge, w_edge, w_arc)
    _, _, dlo1, dhi1 = _edge_frame(beam, p, left=True)
    _, _, dlo2, dhi2 = _edge_frame(beam, p, left=False)
    w_arc = _arc_offsets(beam, p, -beam.half_width, beam.half_width)
    return (dhi1 - dlo1, dhi2 - dlo2, w_arc)


def _arc_offsets(beam: BeamSector, p: PolarPoint, u_lo: float, u_hi: float) -> float:
    """Width of the heading interval toward the arc span [u_lo, u_hi].

    Directions to points of the bounding circle rotate monotonically as seen
    from an interior point, so the interval is pinned by its two endpoints;
    offsets are taken about the outward radial direction, which never wraps.
    """
    R = beam.radius
    px = p.r * math.cos(p.phi)
    py = p.r * math.sin(p.phi)
    a_lo = math.atan2(R * math.sin(u_lo) - py, R * math.cos(u_lo) - px)
    a_hi = math.atan2(R * math.sin(u_hi) - py, R * math.cos(u_hi) - px)
    off_lo = wrap_angle(a_lo - p.phi)
    off_hi = wrap_angle(a_hi - p.phi)
    return max(0.0, off_hi - off_lo)


def _edge_reach_width(ye: float, dlo: float, dhi: float, dist: float) -> float:
    """Width of the edge cone slice whose exit distance is <= dist."""
    if dist < ye:
        return 0.0
    beta = math.acos(min(ye / dist, 1.0)) if dist > 0.0 else 0.0
    return max(0.0, min(dhi, beta) - max(dlo, -beta))


def _arc_reach_width(beam: BeamSector, p: PolarPoint, dist: float) -> float:
    """Width of the arc cone slice whose exit distance is <= dist."""
    R, hw = beam.radius, beam.half_width
    if p.r == 0.0:
        return beam.beamwidth if dist >= R else 0.0
    c = (R * R + p.r * p.r - dist * dist) / (2.0 * R * p.r)
    if c >= 1.0:
        return 0.0
    if c <= -1.0:
        return _arc_offsets(beam, p, -hw, hw)
    u_star = math.acos(c)
    u_lo = max(p.phi - u_star, -hw)
    u_hi = min(p.phi + u_star, hw)
    if u_hi <= u_lo:
        return 0.0
    return _arc_offsets(beam, p, u_lo, u_hi)


def departure_cdf_point(beam: BeamSector, p: PolarPoint, dist: float) -> float:
    """Probability that a uniformly-headed trajectory departs within ``dist``.

    Sums the per-case heading-interval widths over the three exit sides and
    normalizes by 2*pi. Non-decreasing in ``dist``; 0 at dist=0 and 1 once
    ``dist`` spans the sector diameter.
    """
    if not contains(beam, p):
        raise ValueError(f"point {p} lies outside beam {beam.id}")
    if dist < 0:
        raise ValueError(f"distance must be >= 0, got {dist}")
    if dist == 0.0 and p.r > 0.0:
        return 0.0
    total = _arc_reach_width(beam, p, dist)
    for left in (True, False):
        _, ye, dlo, dhi = _edge_frame(beam, p, left)
        total += _edge_reach_width(ye, dlo, dhi, dist)
    return min(total / TWO_PI, 1.0)


def departure_cdf_directed(beam: BeamSector, p: PolarPoint, dist: float,
                           heading: float) -> int:
    """Directed variant: 1 iff the departure distance along ``heading`` is <= dist."""
    return 1 if departure(beam, p, heading).distance <= dist else 0


def circle_intersections(a: Circle, b: Circle) -> list[tuple[float, float]]:
    """Intersection points of two circles.

    Returns both points for transversal intersection, a duplicated point for
    tangency, and an empty list for disjoint or strictly nested circles.
    Identical circles are rejected (infinitely many intersections).
    """
    dx = b.center_x - a.center_x
    dy = b.center_y - a.center_y
    d = math.hypot(dx, dy)
    if d == 0.0:
        if a.radius == b.radius:
            raise ValueError("identical circles intersect everywhere")
        return []
    along = (a.radius * a.radius - b.radius * b.radius + d * d) / (2.0 * d)
    h_sq = a.radius * a.radius - along * along
    if h_sq < 0.0:
        return []
    h = math.sqrt(h_sq)
    mx = a.center_x + along * dx / d
    my = a.center_y + along * dy / d
    ox = h * dy / d
    oy = h * dx / d
    return [(mx + ox, my - oy), (mx - ox, my + oy)]


# --------------------------------------------------------------------------
# Vectorized kernels. These mirror the scalar departure machinery over numpy
# arrays of beam-local points; the analytic quadratures and the Monte-Carlo
# oracle run through them. Points must satisfy r > 0 (interior sampling and
# midpoint grids never land on the apex).
# --------------------------------------------------------------------------


def departure_distances(beam: BeamSector, r: np.ndarray, phi: np.ndarray,
                        psi: np.ndarray) -> np.ndarray:
    """Departure distance for arrays of in-sector points and map headings."""
    hw, R, theta = beam.half_width, beam.radius, beam.pointing
    r, phi, psi = np.broadcast_arrays(
        np.asarray(r, dtype=float), np.asarray(phi, dtype=float),
        np.asarray(psi, dtype=float))

    tau = np.empty(r.shape, dtype=float)
    unresolved = np.ones(r.shape, dtype=bool)

    for left in (True, False):
        a0 = hw - phi if left else hw + phi
        xe = r * np.cos(a0)
        ye = r * np.sin(a0)
        dlo = np.arctan2(-xe, ye)
        dhi = np.arctan2(R - xe, ye)
        transformed = (hw + theta - psi) if left else (hw - theta + psi)
        d = wrap_angle_array(transformed - 1.5 * math.pi)
        hit = unresolved & (dlo <= d) & (d <= dhi)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_edge = np.where(ye > 0.0, ye / np.cos(d), 0.0)
        tau[hit] = t_edge[hit]
        unresolved &= ~hit

    gamma = psi - (theta + phi)
    rc = r * np.cos(gamma)
    t_arc = -rc + np.sqrt(np.maximum(rc * rc + R * R - r * r, 0.0))
    tau[unresolved] = t_arc[unresolved]
    return tau


class DeparturePointProfile:
    """Per-node frame data for evaluating the heading-uniform departure CDF.

    Precomputes the edge frames and arc-cone geometry for a fixed set of
    in-sector points so the CDF can be swept over many distances cheaply.
    """

    def __init__(self, beam: BeamSector, r: np.ndarray, phi: np.ndarray):
        self.beam = beam
        self.r = np.asarray(r, dtype=float)
        self.phi = np.asarray(phi, dtype=float)
        hw = beam.half_width
        R = beam.radius
        self._edges = []
        for left in (True, False):
            a0 = hw - self.phi if left else hw + self.phi
            xe = self.r * np.cos(a0)
            ye = self.r * np.sin(a0)
            dlo = np.arctan2(-xe, ye)
            dhi = np.arctan2(R - xe, ye)
            self._edges.append((ye, dlo, dhi))
        self._px = self.r * np.cos(self.phi)
        self._py = self.r * np.sin(self.phi)

    def _arc_interval_width(self, dist: float) -> np.ndarray:
        beam = self.beam
        R, hw = beam.radius, beam.half_width
        r, phi = self.r, self.phi
        with np.errstate(divide="ignore", invalid="ignore"):
            c = (R * R + r * r - dist * dist) / (2.0 * R * r)
        u_star = np.arccos(np.clip(c, -1.0, 1.0))
        u_lo = np.maximum(phi - u_star, -hw)
        u_hi = np.minimum(phi + u_star, hw)
        a_lo = np.arctan2(R * np.sin(u_lo) - self._py, R * np.cos(u_lo) - self._px)
        a_hi = np.arctan2(R * np.sin(u_hi) - self._py, R * np.cos(u_hi) - self._px)
        width = wrap_angle_array(a_hi - phi) - wrap_angle_array(a_lo - phi)
        width = np.where(c >= 1.0, 0.0, width)
        return np.maximum(width, 0.0)

    def cdf_values(self, dist: float) -> np.ndarray:
        """Departure CDF at one distance for every precomputed point."""
        if dist <= 0.0:
            return np.zeros(self.r.shape)
        total = self._arc_interval_width(dist)
        for ye, dlo, dhi in self._edges:
            with np.errstate(divide="ignore", invalid="ignore"):
                beta = np.arccos(np.clip(ye / dist, 0.0, 1.0))
            width = np.minimum(dhi, beta) - np.maximum(dlo, -beta)
            total += np.where(dist >= ye, np.maximum(width, 0.0), 0.0)
        return np.minimum(total / TWO_PI, 1.0)
