"""Laguerre-Gaussian fields parameterized by the complex beam parameter.

Field amplitudes follow the q-parameter form with beam radius
w(q) = sqrt(-lambda/(pi*Im(1/q))), curvature phase k*r^2*Re(1/q)/2 and a
Gouy term m*arctan(Re(q)/Im(q)) with mode order m = 2p + |l| + 1.  The
normalization prefactor sqrt(2*p!/(pi*(p+|l|)!)) is always included so
that the transverse power integral of every mode is one.

Overlap integrals between two modes use analytic azimuthal integration
(orthogonality in l contributes a 2*pi Kronecker factor) and adaptive
Gauss-Kronrod quadrature in the radial coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .beam import BeamParameter

__all__ = [
    "QuadratureError",
    "LGMode",
    "Superposition",
    "QuadratureSettings",
    "laguerre_poly",
    "mode_order",
    "lg_field",
    "radial_profile",
    "overlap",
    "intensity_grid",
    "write_intensity_csv",
    "write_intensity_pgm",
]

# switch to log-space factorials above this combined index to avoid overflow
_LOG_FACTORIAL_CUTOFF = 20


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, achieved_error: float):
        super().__init__(message)
        self.achieved_error = achieved_error


@dataclass(frozen=True)
class LGMode:
    """One Laguerre-Gaussian term: radial index p >= 0, OAM index l, weight."""

    p: int
    l: int
    amplitude: complex = 1.0

    def __post_init__(self):
        if self.p < 0:
            raise ValueError(f"radial index must be non-negative, got {self.p}")

    @property
    def order(self) -> int:
        """Mode order m = 2p + |l| + 1; multiplies the Gouy phase."""
        return 2 * self.p + abs(self.l) + 1


@dataclass(frozen=True)
class Superposition:
    """Normalized superposition of LG modes with pairwise distinct (p, l)."""

    terms: tuple[LGMode, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("superposition needs at least one term")
        keys = [(t.p, t.l) for t in terms]
        if len(set(keys)) != len(keys):
            raise ValueError(f"duplicate (p, l) terms in superposition: {keys}")
        norm = math.sqrt(sum(abs(t.amplitude) ** 2 for t in terms))
        if norm == 0:
            raise ValueError("superposition has zero total power")
        terms = tuple(
            LGMode(t.p, t.l, complex(t.amplitude) / norm) for t in terms
        )
        object.__setattr__(self, "terms", terms)

    @classmethod
    def single(cls, p: int, l: int) -> "Superposition":
        return cls((LGMode(p, l),))

    @property
    def max_order(self) -> int:
        return max(t.order for t in self.terms)


@dataclass(frozen=True)
class QuadratureSettings:
    """Adaptive radial quadrature controls.

    rmax_margin enters the mode-aware truncation radius
    r_max = w * sqrt(2*(m + rmax_margin*sqrt(m))).
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    subdivision_limit: int = 300
    rmax_margin: float = 6.0


DEFAULT_QUADRATURE = QuadratureSettings()


def mode_order(p: int, l: int) -> int:
    return 2 * p + abs(l) + 1


def laguerre_poly(p: int, alpha: int, x: float):
    """Generalized Laguerre polynomial L_p^alpha(x) by the three-term recurrence.

    Accepts scalar or ndarray x.  The recurrence
    (k+1) L_{k+1} = (2k + 1 + alpha - x) L_k - (k + alpha) L_{k-1}
    is numerically stable for the non-negative integer orders used here.
    """
    if p < 0:
        raise ValueError(f"polynomial degree must be non-negative, got {p}")
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if p == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - x
    for k in range(1, p):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def _norm_constant(p: int, l: int) -> float:
    """sqrt(2*p!/(pi*(p+|l|)!)), in log space for large indices."""
    a = abs(l)
    if p + a <= _LOG_FACTORIAL_CUTOFF:
        return math.sqrt(2.0 * math.factorial(p) / (math.pi * math.factorial(p + a)))
    log_ratio = math.lgamma(p + 1) - math.lgamma(p + a + 1)
    return math.sqrt(2.0 / math.pi) * math.exp(0.5 * log_ratio)


def radial_profile(mode: LGMode, beam: BeamParameter, r, *, gouy: float | None = None):
    """Complex radial part of the LG field (no azimuthal factor exp(-i*l*phi)).

    gouy overrides the single-plane Gouy phase arctan(z/zR) with an
    externally accumulated value; the mode order multiplies it either way.
    The axial plane-wave term k*z is NOT included here (see lg_field).
    """
    r = np.asarray(r, dtype=float)
    w = beam.waist_radius_at_plane
    a = abs(mode.l)
    x = 2.0 * r**2 / w**2
    envelope = (
        _norm_constant(mode.p, mode.l)
        / w
        * (np.sqrt(2.0) * r / w) ** a
        * laguerre_poly(mode.p, a, x)
        * np.exp(-(r**2) / w**2)
    )
    psi = gouy if gouy is not None else math.atan(beam.z / beam.zR)
    curvature = beam.k * r**2 * beam.inverse_radius_of_curvature / 2.0
    return envelope * np.exp(1j * (mode.order * psi - curvature))


def lg_field(mode: LGMode, beam: BeamParameter, r, phi):
    """Complex LG field amplitude at polar point(s) (r, phi).

    Phase convention: exp(-i*(-m*psi + k*r^2/(2R) + k*z + l*phi)) with
    psi = arctan(Re(q)/Im(q)).  At the waist the curvature term is the
    continuous limit k*r^2*Re(1/q)/2 = 0.  Normalized so the transverse
    power integral is one.
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    axial = beam.k * beam.z
    return radial_profile(mode, beam, r) * np.exp(-1j * (axial + mode.l * phi))


def _truncation_radius(orders, beams, margin: float) -> float:
    m = max(orders)
    w = max(b.waist_radius_at_plane for b in beams)
    return w * math.sqrt(2.0 * (m + margin * math.sqrt(m)))


def _adaptive_complex_quad(func, upper: float, settings: QuadratureSettings) -> complex:
    """Integrate a complex-valued function on [0, upper] with error control."""
    parts = []
    for component in (np.real, np.imag):
        value, err = integrate.quad(
            lambda r: component(func(r)),
            0.0,
            upper,
            epsabs=settings.abs_tol,
            epsrel=settings.rel_tol,
            limit=settings.subdivision_limit,
        )
        budget = max(settings.abs_tol, settings.rel_tol * max(1.0, abs(value)))
        if err > 1e3 * budget:
            raise QuadratureError(
                f"radial quadrature error {err:.3e} exceeds tolerance {budget:.3e}",
                achieved_error=err,
            )
        parts.append(value)
    return complex(parts[0], parts[1])


def _radial_overlap(
    mode_a: LGMode,
    beam_a: BeamParameter,
    gouy_a: float | None,
    mode_b: LGMode,
    beam_b: BeamParameter,
    gouy_b: float | None,
    settings: QuadratureSettings,
) -> complex:
    """2*pi * integral of conj(u_a) u_b r dr for two same-|l| radial profiles."""
    rmax = _truncation_radius(
        (mode_a.order, mode_b.order), (beam_a, beam_b), settings.rmax_margin
    )

    def integrand(r):
        ua = radial_profile(mode_a, beam_a, r, gouy=gouy_a)
        ub = radial_profile(mode_b, beam_b, r, gouy=gouy_b)
        return np.conj(ua) * ub * r

    return 2.0 * math.pi * _adaptive_complex_quad(integrand, rmax, settings)


def overlap(
    a: Superposition,
    beam_a: BeamParameter,
    b: Superposition,
    beam_b: BeamParameter,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
    *,
    gouy_a: float | None = None,
    gouy_b: float | None = None,
) -> complex:
    """Transverse overlap integral <E_a|E_b> = integral of conj(E_a) E_b dA.

    The azimuthal integral is done analytically: only term pairs with
    equal l contribute.  Optional gouy_a/gouy_b replace the single-plane
    Gouy phases with accumulated values (used by the interferometer).
    """
    total = 0.0 + 0.0j
    for ta in a.terms:
        for tb in b.terms:
            if ta.l != tb.l:
                continue
            radial = _radial_overlap(ta, beam_a, gouy_a, tb, beam_b, gouy_b, settings)
            total += np.conj(ta.amplitude) * tb.amplitude * radial
    return total


def intensity_grid(
    modes: Superposition,
    beam: BeamParameter,
    half_extent: float,
    samples: int,
) -> np.ndarray:
    """|E|^2 on a square Cartesian grid spanning [-half_extent, half_extent]."""
    if samples < 2:
        raise ValueError("grid needs at least 2 samples per axis")
    coords = np.linspace(-half_extent, half_extent, samples)
    xx, yy = np.meshgrid(coords, coords)
    r = np.hypot(xx, yy)
    phi = np.arctan2(yy, xx)
    total = np.zeros_like(r, dtype=complex)
    for term in modes.terms:
        total += term.amplitude * lg_field(term, beam, r, phi)
    return np.abs(total) ** 2


def write_intensity_csv(path, grid: np.ndarray, half_extent: float) -> None:
    """Row-major plain-text matrix; header comment records the extent in mm."""
    header = (
        f"intensity grid, physical extent +-{half_extent * 1e3:.6g} mm per axis, "
        f"{grid.shape[0]}x{grid.shape[1]} samples, row-major"
    )
    np.savetxt(path, grid, fmt="%.8e", delimiter=",", header=header)


def write_intensity_pgm(path, grid: np.ndarray, half_extent: float) -> None:
    """8-bit grayscale portable graymap (P2), peak-normalized."""
    peak = grid.max()
    scaled = np.zeros_like(grid) if peak == 0 else grid / peak * 255.0
    pixels = np.rint(scaled).astype(int)
    with open(path, "w") as fh:
        fh.write("P2\n")
        fh.write(f"# physical extent +-{half_extent * 1e3:.6g} mm per axis\n")
        fh.write(f"{grid.shape[1]} {grid.shape[0]}\n255\n")
        for row in pixels:
            fh.write(" ".join(str(v) for v in row) + "\n")
