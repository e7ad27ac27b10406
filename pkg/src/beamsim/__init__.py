"""Interference-aware mmWave beam allocation on a highway.

Library layers:

* :mod:`beamsim.geometry` -- exact sector geometry and departure distances
* :mod:`beamsim.channel` -- link budget, SNR/SINR and goodput
* :mod:`beamsim.analytic` -- service-distance CDFs by quadrature plus a
  Monte-Carlo validation oracle
* :mod:`beamsim.mobility` -- constant-count highway vehicle process
* :mod:`beamsim.agents` -- context-learning bandit agents and baselines
* :mod:`beamsim.scenario` -- the standard six-site deployment
* :mod:`beamsim.simulator` -- deterministic fixed-step event loop
* :mod:`beamsim.cli` -- experiment orchestration and serialization
"""

from beamsim.geometry import (
    BeamSector,
    Circle,
    DepartureCase,
    DepartureResult,
    PolarPoint,
)

__all__ = [
    "BeamSector",
    "Circle",
    "DepartureCase",
    "DepartureResult",
    "PolarPoint",
]

__version__ = "0.1.0"
