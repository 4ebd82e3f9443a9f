"""Complex beam parameter algebra and accumulated Gouy phase.

A Gaussian beam is tracked by its complex beam parameter q = z + i*z_R,
where z is the distance from the waist and z_R the Rayleigh range.  Thin
lenses and free-space gaps act on q through the bilinear (Moebius) map of
the ABCD formalism.  The Gouy phase arctan(z/z_R) is accumulated segment
by segment and kept unwrapped, so totals such as 3*pi/2 stay
distinguishable from -pi/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "SingularPropagationError",
    "BeamParameter",
    "FreeSpace",
    "ThinLens",
    "OpticalPath",
    "PropagationResult",
    "rayleigh_range",
    "gouy_phase",
    "propagate_element",
    "accumulate_gouy",
    "wrap_phase",
]

SINGULARITY_TOL = 1e-12


class SingularPropagationError(ValueError):
    """Beam focused to a point exactly at the evaluation plane (C*q + D = 0)."""


def rayleigh_range(w0: float, wavelength: float) -> float:
    """Rayleigh range pi*w0^2/lambda for waist radius w0, both in meters."""
    if w0 <= 0:
        raise ValueError(f"waist must be positive, got {w0}")
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    return math.pi * w0**2 / wavelength


@dataclass(frozen=True)
class BeamParameter:
    """Complex beam parameter q = z + i*zR with its wavelength context.

    z is negative before the waist.  zR and wavelength are in meters and
    must be positive.
    """

    z: float
    zR: float
    wavelength: float

    def __post_init__(self):
        if self.zR <= 0:
            raise ValueError(f"Rayleigh range must be positive, got {self.zR}")
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")

    @classmethod
    def from_waist(cls, w0: float, wavelength: float, z: float = 0.0) -> "BeamParameter":
        return cls(z=z, zR=rayleigh_range(w0, wavelength), wavelength=wavelength)

    @property
    def q(self) -> complex:
        return complex(self.z, self.zR)

    @property
    def w0(self) -> float:
        """Waist radius sqrt(zR*lambda/pi)."""
        return math.sqrt(self.zR * self.wavelength / math.pi)

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def waist_radius_at_plane(self) -> float:
        """Beam radius w(z) = w0*sqrt(1 + (z/zR)^2) at the current plane."""
        return self.w0 * math.sqrt(1.0 + (self.z / self.zR) ** 2)

    @property
    def inverse_radius_of_curvature(self) -> float:
        """Re(1/q); zero at the waist, finite everywhere (unlike R itself)."""
        return self.z / (self.z**2 + self.zR**2)

    def with_q(self, q: complex) -> "BeamParameter":
        return BeamParameter(z=q.real, zR=q.imag, wavelength=self.wavelength)


@dataclass(frozen=True)
class FreeSpace:
    """Free-space gap of non-negative length d (meters): ABCD = (1, d; 0, 1)."""

    d: float

    def __post_init__(self):
        if self.d < 0:
            raise ValueError(f"free-space distance must be non-negative, got {self.d}")

    @property
    def length(self) -> float:
        return self.d

    def abcd(self) -> tuple[float, float, float, float]:
        return (1.0, self.d, 0.0, 1.0)


@dataclass(frozen=True)
class ThinLens:
    """Thin lens of focal length f != 0 (meters): ABCD = (1, 0; -1/f, 1).

    Negative f models concave lenses.
    """

    f: float

    def __post_init__(self):
        if self.f == 0:
            raise ValueError("focal length must be nonzero")

    @property
    def length(self) -> float:
        return 0.0

    def abcd(self) -> tuple[float, float, float, float]:
        return (1.0, 0.0, -1.0 / self.f, 1.0)


Element = FreeSpace | ThinLens


@dataclass(frozen=True)
class OpticalPath:
    """Ordered sequence of thin lenses and free-space gaps forming one arm."""

    elements: tuple[Element, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    @property
    def geometric_length(self) -> float:
        return sum(e.length for e in self.elements)

    @classmethod
    def free_space(cls, d: float) -> "OpticalPath":
        return cls((FreeSpace(d),))

    @classmethod
    def lens_arm(cls, f1: float, d1: float, f2: float, d2: float, f3: float) -> "OpticalPath":
        """Three-lens arm L1 / D1 / L2 / D2 / L3."""
        return cls((ThinLens(f1), FreeSpace(d1), ThinLens(f2), FreeSpace(d2), ThinLens(f3)))


@dataclass(frozen=True)
class PropagationResult:
    qOut: BeamParameter
    gouyAccumulated: float  # radians, unwrapped


def gouy_phase(beam: BeamParameter) -> float:
    """Gouy phase arctan(z/zR) of a single plane, in (-pi/2, pi/2)."""
    return math.atan(beam.z / beam.zR)


def propagate_element(beam: BeamParameter, element: Element) -> BeamParameter:
    """Apply one ABCD element: q' = (A*q + B)/(C*q + D).

    Raises SingularPropagationError when |C*q + D| falls below the
    singularity tolerance (beam focused to a point at the evaluation
    plane).
    """
    a, b, c, d = element.abcd()
    q = beam.q
    denom = c * q + d
    if abs(denom) < SINGULARITY_TOL:
        raise SingularPropagationError(
            f"degenerate propagation through {element!r}: |C*q + D| = {abs(denom):.3e}"
        )
    return beam.with_q((a * q + b) / denom)


def accumulate_gouy(beam: BeamParameter, path: OpticalPath) -> PropagationResult:
    """Propagate through a path, summing unwrapped Gouy-phase increments.

    Each free-space segment contributes arctan(z2/zR) - arctan(z1/zR);
    a thin lens jumps q discretely but adds no Gouy phase.  The total is
    not reduced modulo 2*pi.
    """
    total = 0.0
    for element in path.elements:
        if isinstance(element, FreeSpace):
            before = gouy_phase(beam)
            beam = propagate_element(beam, element)
            total += gouy_phase(beam) - before
        else:
            beam = propagate_element(beam, element)
    return PropagationResult(qOut=beam, gouyAccumulated=total)


def wrap_phase(phi: float) -> float:
    """Reduce a phase to (-pi, pi] for reporting."""
    wrapped = math.fmod(phi + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi
