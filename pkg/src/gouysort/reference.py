"""Published reference lens configurations for pi/n phase targets.

Each row lists a three-lens system, the gap lengths found by the
original automated search, the accumulated Gouy-phase difference it
reports and the predicted visibilities for p = 0 and p = n.  Input
beam: waist radius 1 mm focused at the first lens, wavelength 810 nm.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["ReferenceRow", "REFERENCE_ROWS", "REFERENCE_WAVELENGTH", "REFERENCE_WAIST"]

REFERENCE_WAVELENGTH = 810e-9
REFERENCE_WAIST = 1e-3


@dataclass(frozen=True)
class ReferenceRow:
    n: int
    delta_gouy_over_pi: float
    lenses_mm: tuple[float, float, float]
    distances_mm: tuple[float, float]
    vis_p0_percent: float
    vis_pn_percent: float


REFERENCE_ROWS = (
    ReferenceRow(2, -0.501, (500.0, 40.0, 300.0), (555.6, 339.0), 99.96, 99.93),
    ReferenceRow(3, 0.333, (400.0, 30.0, 300.0), (414.3, 316.2), 99.99, 99.98),
    ReferenceRow(4, 0.251, (500.0, 40.0, 300.0), (502.7, 320.9), 99.91, 99.29),
    ReferenceRow(5, 0.199, (300.0, 35.0, 400.0), (313.5, 395.8), 99.98, 98.55),
    ReferenceRow(6, -0.166, (300.0, 75.0, 200.0), (485.3, 316.2), 99.83, 97.89),
    ReferenceRow(7, -0.143, (150.0, 75.0, 300.0), (266.0, 155.4), 99.97, 96.57),
    ReferenceRow(8, 0.124, (300.0, 30.0, 250.0), (294.6, 253.6), 99.80, 98.12),
)
