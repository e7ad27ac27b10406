"""Closed-form service-distance probabilities evaluated numerically.

All curves are cumulative distributions of the distance a vehicle travels
inside a serving sector (optionally counting only interference-free travel),
evaluated by midpoint quadrature over the sector footprint. Placement is
uniform in area; on the highway it is restricted to the strip the lanes
occupy and headings are the two road directions. The Monte-Carlo estimator
exists purely as an independent cross-check of the quadrature path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from beamsim.geometry import (
    BeamSector,
    DeparturePointProfile,
    PolarPoint,
    contains,
    departure,
    departure_distances,
    to_cartesian,
)

EAST = 0.0
WEST = math.pi

# Midpoint-rule resolution per sector; integrands are piecewise smooth with
# jumps, so a fine low-order tensor grid beats high-order rules here.
DEFAULT_QUAD_PHI = 400
DEFAULT_QUAD_R = 400


@dataclass(frozen=True)
class Lane:
    """One travel lane: lateral offset from the south strip edge, heading."""

    offset: float
    heading: float

    def __post_init__(self):
        if self.heading not in (EAST, WEST):
            raise ValueError("lane heading must be east (0) or west (pi)")


@dataclass(frozen=True)
class HighwayGeometry:
    """Straight east-west strip of given width with fixed-heading lanes."""

    length: float
    width: float
    lanes: tuple[Lane, ...]
    y_south: float = 0.0

    def __post_init__(self):
        if self.width <= 0 or self.length <= 0:
            raise ValueError("highway length and width must be positive")
        for lane in self.lanes:
            if not 0 <= lane.offset <= self.width:
                raise ValueError(f"lane offset {lane.offset} outside [0, width]")
        headings = {lane.heading for lane in self.lanes}
        if headings != {EAST, WEST}:
            raise ValueError("need at least one eastbound and one westbound lane")

    @property
    def y_north(self) -> float:
        return self.y_south + self.width

    def lane_y(self, lane_index: int) -> float:
        return self.y_south + self.lanes[lane_index].offset

    def edge_offset(self, beam: BeamSector) -> float:
        """Distance from the beam origin to its near strip edge."""
        if beam.origin_y < self.y_south:
            return self.y_south - beam.origin_y
        if beam.origin_y > self.y_north:
            return beam.origin_y - self.y_north
        raise ValueError(f"beam {beam.id} origin lies inside the highway strip")


@dataclass(frozen=True)
class Layout:
    """Deployed beams with their activity probabilities, aligned by index."""

    beams: tuple[BeamSector, ...]
    activity_prob: tuple[float, ...]

    def __post_init__(self):
        if len(self.beams) != len(self.activity_prob):
            raise ValueError("one activity probability per beam required")
        for p in self.activity_prob:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"activity probability {p} outside [0, 1]")
        for idx, beam in enumerate(self.beams):
            if beam.id != idx:
                raise ValueError("beam ids must equal their layout index")

    def with_uniform_activity(self, p: float) -> "Layout":
        return Layout(self.beams, tuple(p for _ in self.beams))


@dataclass(frozen=True)
class CdfCurve:
    """A cumulative distribution sampled on an increasing distance grid."""

    grid: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.grid) != len(self.values) or not self.grid:
            raise ValueError("grid and values must be non-empty and aligned")
        g = np.asarray(self.grid)
        v = np.asarray(self.values)
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(v < -1e-12) or np.any(v > 1.0 + 1e-12):
            raise ValueError("cdf values must lie in [0, 1]")
        if np.any(np.diff(v) < -1e-9):
            raise ValueError("cdf values must be non-decreasing")

    def as_arrays(self):
        return np.asarray(self.grid), np.asarray(self.values)


def distance_grid(radius: float, points: int = 100) -> np.ndarray:
    """Default evaluation grid: the sector diameter split into `points` steps."""
    return np.linspace(0.0, 2.0 * radius, points)


def _validate_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("distance grid is empty")
    if np.any(grid < 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("distance grid must be non-negative and increasing")
    return grid


def _sector_nodes(beam: BeamSector, n_phi: int, n_r: int):
    """Midpoint tensor grid over the whole sector, weights r*dr*dphi."""
    hw = beam.half_width
    dphi = beam.beamwidth / n_phi
    dr = beam.radius / n_r
    phi = -hw + (np.arange(n_phi) + 0.5) * dphi
    r = (np.arange(n_r) + 0.5) * dr
    rr, pp = np.meshgrid(r, phi, indexing="ij")
    weights = rr * dr * dphi
    return rr.ravel(), pp.ravel(), weights.ravel()


def _strip_radial_bounds(beam: BeamSector, hw_geom: HighwayGeometry,
                         phi: np.ndarray):
    """Per-azimuth radial interval of the sector lying inside the strip."""
    s = np.sin(beam.pointing + phi)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = (hw_geom.y_south - beam.origin_y) / s
        b = (hw_geom.y_north - beam.origin_y) / s
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    lo = np.clip(lo, 0.0, beam.radius)
    hi = np.clip(hi, 0.0, beam.radius)
    degenerate = (s == 0) | ~np.isfinite(lo) | ~np.isfinite(hi)
    lo = np.where(degenerate, 0.0, lo)
    hi = np.where(degenerate, 0.0, hi)
    return lo, np.maximum(hi, lo)


def _strip_nodes(beam: BeamSector, hw_geom: HighwayGeometry,
                 n_phi: int, n_r: int):
    """Midpoint nodes over sector-within-strip, radially mapped per column."""
    hw = beam.half_width
    dphi = beam.beamwidth / n_phi
    phi_cols = -hw + (np.arange(n_phi) + 0.5) * dphi
    lo, hi = _strip_radial_bounds(beam, hw_geom, phi_cols)
    dr = (hi - lo) / n_r
    offsets = (np.arange(n_r) + 0.5)
    rr = lo[None, :] + offsets[:, None] * dr[None, :]
    pp = np.broadcast_to(phi_cols[None, :], rr.shape)
    weights = rr * dr[None, :] * dphi
    keep = weights.ravel() > 0
    if not np.any(keep):
        raise ValueError(
            f"beam {beam.id} coverage does not intersect the highway strip")
    return rr.ravel()[keep], pp.ravel().copy()[keep], weights.ravel()[keep]


def _weighted_cdf(values: np.ndarray, weights: np.ndarray,
                  grid: np.ndarray) -> np.ndarray:
    """CDF of a weighted sample set: P(value <= l) for each grid point."""
    order = np.argsort(values, kind="stable")
    v = values[order]
    cum = np.cumsum(weights[order])
    total = cum[-1]
    idx = np.searchsorted(v, grid, side="right")
    out = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
    return out / total


def service_cdf(beam: BeamSector, grid, n_phi: int = DEFAULT_QUAD_PHI,
                n_r: int = DEFAULT_QUAD_R) -> CdfCurve:
    """CDF of the travel distance from a uniform in-sector start, uniform heading."""
    grid = _validate_grid(grid)
    r, phi, w = _sector_nodes(beam, n_phi, n_r)
    profile = DeparturePointProfile(beam, r, phi)
    total = w.sum()
    values = [float(np.dot(w, profile.cdf_values(l)) / total) for l in grid]
    return CdfCurve(tuple(grid.tolist()), tuple(values))


def highway_service_cdf(beam: BeamSector, hw_geom: HighwayGeometry, grid,
                        n_phi: int = DEFAULT_QUAD_PHI,
                        n_r: int = DEFAULT_QUAD_R) -> CdfCurve:
    """Travel-distance CDF with starts restricted to the highway strip.

    Starts are uniform over sector-within-strip; the heading is east or west
    with equal probability.
    """
    grid = _validate_grid(grid)
    r, phi, w = _strip_nodes(beam, hw_geom, n_phi, n_r)
    taus = [departure_distances(beam, r, phi, np.full_like(r, psi))
            for psi in (EAST, WEST)]
    values = _weighted_cdf(np.concatenate(taus), np.concatenate([w, w]), grid)
    return CdfCurve(tuple(grid.tolist()), tuple(values.tolist()))


def no_interference_prob(point: PolarPoint, interferer: BeamSector,
                         p_active: float) -> float:
    """Chance a location escapes interference from one possibly-active beam."""
    if not 0.0 <= p_active <= 1.0:
        raise ValueError(f"activity probability {p_active} outside [0, 1]")
    return 1.0 - p_active if contains(interferer, point) else 1.0


def _contains_xy(beam: BeamSector, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized closed-sector membership of map-frame points."""
    dx = x - beam.origin_x
    dy = y - beam.origin_y
    inside_r = dx * dx + dy * dy <= beam.radius * beam.radius
    rel = np.arctan2(dy, dx) - beam.pointing
    rel = (rel + math.pi) % (2.0 * math.pi) - math.pi
    return inside_r & (np.abs(rel) <= beam.half_width)


def interfered_area(layout: Layout, k: int, n_phi: int = DEFAULT_QUAD_PHI,
                    n_r: int = DEFAULT_QUAD_R) -> float:
    """Area of beam k's sector overlapped by any other beam, all-active case."""
    beam = layout.beams[k]
    r, phi, w = _sector_nodes(beam, n_phi, n_r)
    ang = beam.pointing + phi
    x = beam.origin_x + r * np.cos(ang)
    y = beam.origin_y + r * np.sin(ang)
    covered = np.zeros(r.shape, dtype=bool)
    for other in layout.beams:
        if other.id == k:
            continue
        covered |= _contains_xy(other, x, y)
    return float(np.dot(w, covered))


def _linear_ge_interval(a, b):
    """Feasible d-interval of a + b*d >= 0 as (lo, hi) arrays."""
    with np.errstate(divide="ignore", invalid="ignore"):
        x = -a / b
    empty = (b == 0) & (a < 0)
    lo = np.where(b > 0, x, np.where(empty, np.inf, -np.inf))
    hi = np.where(b < 0, x, np.where(empty, -np.inf, np.inf))
    return lo, hi


def _sector_ray_interval(beam: BeamSector, x0, y0, ux, uy, tau):
    """The d-interval of x0 + d*u inside the (convex) sector, clipped to [0, tau]."""
    relx = x0 - beam.origin_x
    rely = y0 - beam.origin_y
    qb = 2.0 * (relx * ux + rely * uy)
    qc = relx * relx + rely * rely - beam.radius * beam.radius
    disc = qb * qb - 4.0 * qc
    root = np.sqrt(np.maximum(disc, 0.0))
    lo = (-qb - root) / 2.0
    hi = (-qb + root) / 2.0

    for sign, sense in ((+1.0, -1.0), (-1.0, +1.0)):
        # edge ray at pointing +/- half_width; inside is cross<=0 for the left
        # edge and cross>=0 for the right edge
        ang = beam.pointing + sign * beam.half_width
        ex, ey = math.cos(ang), math.sin(ang)
        c0 = ex * rely - ey * relx
        c1 = ex * uy - ey * ux
        e_lo, e_hi = _linear_ge_interval(sense * c0, sense * c1)
        lo = np.maximum(lo, e_lo)
        hi = np.minimum(hi, e_hi)

    lo = np.clip(lo, 0.0, tau)
    hi = np.clip(hi, 0.0, tau)
    hi = np.maximum(hi, lo)
    empty = disc < 0
    lo = np.where(empty, 0.0, lo)
    hi = np.where(empty, lo, hi)
    return lo, hi


_CHUNK_ROWS = 65536


def _clean_lengths(layout: Layout, k: int, x0: np.ndarray, y0: np.ndarray,
                   ux, uy, tau: np.ndarray) -> np.ndarray:
    """Expected interference-free length along rays inside beam k.

    Integrates the product of per-interferer no-interference probabilities
    along each ray exactly: every factor is constant between sector-boundary
    crossings, so the integral reduces to a weighted sum of segment lengths.
    """
    others = [(b, p) for b, p in zip(layout.beams, layout.activity_prob)
              if b.id != k and p > 0.0]
    if not others:
        return tau.copy()

    out = np.empty_like(tau)
    ux_arr = np.broadcast_to(np.asarray(ux, dtype=float), tau.shape)
    uy_arr = np.broadcast_to(np.asarray(uy, dtype=float), tau.shape)
    for start in range(0, tau.size, _CHUNK_ROWS):
        sl = slice(start, min(start + _CHUNK_ROWS, tau.size))
        out[sl] = _clean_lengths_chunk(others, x0[sl], y0[sl],
                                       ux_arr[sl], uy_arr[sl], tau[sl])
    return out


def _clean_lengths_chunk(others, x0, y0, ux, uy, tau):
    n = tau.size
    k_cnt = len(others)
    pos = np.empty((n, 2 * k_cnt))
    dcnt = np.zeros((n, 2 * k_cnt))
    dlog = np.zeros((n, 2 * k_cnt))
    for j, (beam, p) in enumerate(others):
        a, b = _sector_ray_interval(beam, x0, y0, ux, uy, tau)
        pos[:, 2 * j] = a
        pos[:, 2 * j + 1] = b
        live = b > a
        if p >= 1.0:
            dcnt[:, 2 * j] = np.where(live, 1.0, 0.0)
            dcnt[:, 2 * j + 1] = np.where(live, -1.0, 0.0)
        else:
            step = math.log1p(-p)
            dlog[:, 2 * j] = np.where(live, step, 0.0)
            dlog[:, 2 * j + 1] = np.where(live, -step, 0.0)

    order = np.argsort(pos, axis=1, kind="stable")
    pos = np.take_along_axis(pos, order, axis=1)
    cnt = np.cumsum(np.take_along_axis(dcnt, order, axis=1), axis=1)
    lg = np.cumsum(np.take_along_axis(dlog, order, axis=1), axis=1)

    seg_end = np.concatenate([pos[:, 1:], tau[:, None]], axis=1)
    seg_len = np.maximum(seg_end - pos, 0.0)
    factor = np.where(cnt > 0.5, 0.0, np.exp(lg))
    out = pos[:, 0] + np.sum(factor * seg_len, axis=1)
    # crossing solutions leave fp dust; below a nanometer is zero
    return np.where(out < 1e-9, 0.0, out)


def interference_free_distance(layout: Layout, k: int, p: PolarPoint,
                               heading: float) -> float:
    """Expected interference-free travel from p until departure from beam k."""
    beam = layout.beams[k]
    if not contains(beam, p):
        raise ValueError(f"point {p} lies outside beam {k}")
    tau = departure(beam, p, heading).distance
    x, y = to_cartesian(beam, p)
    out = _clean_lengths(layout, k, np.array([x]), np.array([y]),
                         math.cos(heading), math.sin(heading),
                         np.array([tau]))
    return float(out[0])


def interference_cdf(layout: Layout, hw_geom: HighwayGeometry, k: int, grid,
                     n_phi: int = DEFAULT_QUAD_PHI,
                     n_r: int = DEFAULT_QUAD_R) -> CdfCurve:
    """Interference-aware service-distance CDF for highway starts in beam k."""
    grid = _validate_grid(grid)
    beam = layout.beams[k]
    r, phi, w = _strip_nodes(beam, hw_geom, n_phi, n_r)
    ang = beam.pointing + phi
    x = beam.origin_x + r * np.cos(ang)
    y = beam.origin_y + r * np.sin(ang)
    dists = []
    for psi in (EAST, WEST):
        tau = departure_distances(beam, r, phi, np.full_like(r, psi))
        dists.append(_clean_lengths(layout, k, x, y,
                                    math.cos(psi), math.sin(psi), tau))
    values = _weighted_cdf(np.concatenate(dists), np.concatenate([w, w]), grid)
    return CdfCurve(tuple(grid.tolist()), tuple(values.tolist()))


def monte_carlo_cdf(layout: Layout, hw_geom: HighwayGeometry, k: int, grid,
                    samples: int, seed: int) -> CdfCurve:
    """Empirical counterpart of :func:`interference_cdf` for validation.

    Starts are drawn uniformly over sector-within-strip by rejection from
    the full sector; headings are a fair east/west coin. Deterministic for a
    fixed seed.
    """
    grid = _validate_grid(grid)
    if samples < 1:
        raise ValueError("need at least one sample")
    beam = layout.beams[k]
    lo, hi = _strip_radial_bounds(beam, hw_geom,
                                  np.linspace(-beam.half_width,
                                              beam.half_width, 257))
    if not np.any(hi > lo):
        raise ValueError(
            f"beam {beam.id} coverage does not intersect the highway strip")

    rng = np.random.default_rng(seed)
    kept_r, kept_phi, kept_psi = [], [], []
    kept = 0
    chunk = max(4 * samples, 1 << 14)
    while kept < samples:
        r = beam.radius * np.sqrt(rng.uniform(size=chunk))
        phi = rng.uniform(-beam.half_width, beam.half_width, size=chunk)
        psi = np.where(rng.uniform(size=chunk) < 0.5, EAST, WEST)
        y = beam.origin_y + r * np.sin(beam.pointing + phi)
        ok = (y >= hw_geom.y_south) & (y <= hw_geom.y_north)
        kept_r.append(r[ok])
        kept_phi.append(phi[ok])
        kept_psi.append(psi[ok])
        kept += int(ok.sum())
    r = np.concatenate(kept_r)[:samples]
    phi = np.concatenate(kept_phi)[:samples]
    psi = np.concatenate(kept_psi)[:samples]

    tau = departure_distances(beam, r, phi, psi)
    ang = beam.pointing + phi
    x = beam.origin_x + r * np.cos(ang)
    y = beam.origin_y + r * np.sin(ang)
    d = _clean_lengths(layout, k, x, y, np.cos(psi), np.sin(psi), tau)
    values = _weighted_cdf(d, np.ones_like(d), grid)
    return CdfCurve(tuple(grid.tolist()), tuple(values.tolist()))
