"""The standard six-site highway deployment.

Three base-station sites on each side of a straight highway segment, every
site radiating three road-facing sector beams (the away-facing sectors of a
six-sector site never see the road and are not modeled). South-side sites
carry north-west / north / north-east beams, north-side sites the mirrored
set, for 18 beams total. Beam ids run south sites west-to-east then north
sites west-to-east, three consecutive ids per site.

Default coordinates: three sites per side along a 500 m segment (north row
staggered slightly west of the south row), set back 26 m from the strip
edges, far enough from the segment ends that no footprint touches them.
Three lanes per direction, westbound in the south half. The setback
matters: it sets the lane chord lengths through each footprint and with it
every service-distance figure, and it shapes the interferer neighbourhoods
(each road-facing beam can conflict with at most the three facing beams
across the road plus its two same-site neighbours, five in total).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from beamsim.analytic import EAST, WEST, HighwayGeometry, Lane, Layout
from beamsim.geometry import BeamSector

BEAMS_PER_SITE = 3

# road-facing pointings relative to "toward the road" = +90 deg for south
# sites; ordered west-leaning, straight, east-leaning
_SOUTH_POINTINGS = (5 * math.pi / 6, math.pi / 2, math.pi / 6)


@dataclass(frozen=True)
class ScenarioParams:
    """Geometry knobs for the standard deployment."""

    segment_length: float = 500.0
    highway_width: float = 26.0
    edge_offset: float = 26.0
    site_x: tuple[float, ...] = (100.0, 220.0, 360.0)
    north_site_shift: float = -10.0
    lanes_per_direction: int = 3
    beam_radius: float = 80.0
    beamwidth: float = math.pi / 3

    def __post_init__(self):
        if self.lanes_per_direction < 1:
            raise ValueError("need at least one lane per direction")
        if not self.site_x:
            raise ValueError("need at least one site position")


def build_highway(params: ScenarioParams = ScenarioParams()) -> HighwayGeometry:
    """Lane set: westbound lanes in the south half, eastbound in the north."""
    n = params.lanes_per_direction
    spacing = params.highway_width / (2 * n)
    offsets = [(i + 0.5) * spacing for i in range(2 * n)]
    lanes = tuple(Lane(off, WEST if i < n else EAST)
                  for i, off in enumerate(offsets))
    return HighwayGeometry(length=params.segment_length,
                           width=params.highway_width, lanes=lanes)


def build_layout(params: ScenarioParams = ScenarioParams(),
                 activity: float = 0.0,
                 beam_radius: float | None = None) -> Layout:
    radius = params.beam_radius if beam_radius is None else beam_radius
    y_south = -params.edge_offset
    y_north = params.highway_width + params.edge_offset
    beams = []
    for x in params.site_x:
        for pointing in _SOUTH_POINTINGS:
            beams.append(BeamSector(
                id=len(beams), origin_x=x, origin_y=y_south,
                pointing=pointing, radius=radius,
                beamwidth=params.beamwidth))
    for x in params.site_x:
        for pointing in _SOUTH_POINTINGS:
            beams.append(BeamSector(
                id=len(beams), origin_x=x + params.north_site_shift,
                origin_y=y_north, pointing=-pointing, radius=radius,
                beamwidth=params.beamwidth))
    return Layout(tuple(beams), tuple(activity for _ in beams))


def site_of(beam_id: int) -> int:
    return beam_id // BEAMS_PER_SITE


def same_site(beam_a: int, beam_b: int) -> bool:
    return site_of(beam_a) == site_of(beam_b)


def monitored_beam_id(layout: Layout) -> int:
    """The north-pointing beam nearest the segment center on the south side."""
    south = [b for b in layout.beams if b.origin_y < 0]
    xs = sorted({b.origin_x for b in south})
    mid_x = xs[len(xs) // 2]
    for b in south:
        if b.origin_x == mid_x and abs(b.pointing - math.pi / 2) < 1e-12:
            return b.id
    raise ValueError("no north-pointing south-side beam found")
