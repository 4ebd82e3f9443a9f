"""Lens-catalog search for target Gouy-phase differences.

Enumerates ordered lens triples from a discrete catalog and, for each,
solves for gap lengths (d1, d2) that reproduce the input beam parameter
after the lens arm under the equal-arm-length constraint (the reference
arm is free space of length d1 + d2).  Configurations whose accumulated
Gouy-phase difference lands near the target pi/n are ranked by the
predicted visibility of the high-order mode.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .beam import (
    BeamParameter,
    OpticalPath,
    SingularPropagationError,
    accumulate_gouy,
    wrap_phase,
)
from .interferometer import (
    InterferometerConfig,
    calibrate_ref_phase,
    simulate_port_fields,
)
from .modes import DEFAULT_QUADRATURE, LGMode, QuadratureSettings

__all__ = [
    "DEFAULT_CATALOG_MM",
    "LensCatalog",
    "ConfigurationRecord",
    "SearchRequest",
    "solve_distances",
    "solve_all_distances",
    "evaluate_configuration",
    "search",
    "write_results_csv",
]

# stock bi-convex / bi-concave focal lengths, millimeters
DEFAULT_CATALOG_MM = (
    25.4, 30.0, 35.0, 40.0, 50.0, 60.0, 75.0, 100.0, 125.0, 150.0, 175.0,
    200.0, 250.0, 300.0, 400.0, 500.0, 750.0, 1000.0, -50.0, -75.0, -100.0,
)

DISTANCE_MIN = 0.010  # meters
DISTANCE_MAX = 1.500  # meters
COARSE_GRID = 40


@dataclass(frozen=True)
class LensCatalog:
    """Available focal lengths in millimeters; nonzero, no duplicates."""

    focal_lengths_mm: tuple[float, ...] = DEFAULT_CATALOG_MM

    def __post_init__(self):
        values = tuple(float(f) for f in self.focal_lengths_mm)
        if any(f == 0 for f in values):
            raise ValueError("catalog contains a zero focal length")
        if len(set(values)) != len(values):
            raise ValueError("catalog contains duplicate focal lengths")
        object.__setattr__(self, "focal_lengths_mm", values)

    def __len__(self) -> int:
        return len(self.focal_lengths_mm)

    @classmethod
    def from_file(cls, path) -> "LensCatalog":
        """One focal length in mm per line; '#' starts a comment."""
        values = []
        with open(path) as fh:
            for line in fh:
                text = line.split("#", 1)[0].strip()
                if text:
                    values.append(float(text))
        return cls(tuple(values))


@dataclass(frozen=True)
class ConfigurationRecord:
    """One solved lens configuration; lengths in meters, phase in radians."""

    f1: float
    f2: float
    f3: float
    d1: float
    d2: float
    deltaGouy: float = math.nan  # reduced to (-pi, pi]
    qResidual: float = math.nan  # |q_A - q_B| at recombination, meters
    visP0: float = math.nan
    visPn: float = math.nan
    nHigh: int = 0  # radial index of the high-order visibility column

    def __post_init__(self):
        if self.d1 <= 0 or self.d2 <= 0:
            raise ValueError(f"distances must be positive, got {self.d1}, {self.d2}")


@dataclass(frozen=True)
class SearchRequest:
    targetN: int
    qIn: BeamParameter
    catalog: LensCatalog = LensCatalog()
    phaseTolerance: float = 0.01 * math.pi
    maxResidual: float = 1e-4
    maxResults: int = 20
    quadrature: QuadratureSettings = DEFAULT_QUADRATURE

    def __post_init__(self):
        if self.targetN < 2:
            raise ValueError(f"target n must be at least 2, got {self.targetN}")
        if self.maxResults < 1:
            raise ValueError("maxResults must be positive")

    @classmethod
    def default_beam(cls, wavelength: float = 810e-9, w0: float = 1e-3) -> BeamParameter:
        """Focus at the first lens: q = i*zR."""
        return BeamParameter.from_waist(w0, wavelength)


def _q_mismatch(d1: float, d2: float, f1, f2, f3, qIn: BeamParameter) -> complex:
    """q after the lens arm minus q after equal-length free space."""
    # inline bilinear maps; called inside optimization loops
    q = complex(qIn.z, qIn.zR)
    for f, d in ((f1, d1), (f2, d2), (f3, None)):
        denom = 1.0 - q / f
        if abs(denom) < 1e-12:
            raise SingularPropagationError("beam focused exactly onto a lens")
        q = q / denom
        if d is not None:
            q = q + d
    return q - (complex(qIn.z, qIn.zR) + d1 + d2)


def _coarse_starts(f1, f2, f3, qIn: BeamParameter, k: int = 12):
    """Local minima of |mismatch| on a coarse (d1, d2) grid, best first.

    Every strict-or-flat local minimum over the 8-neighborhood seeds one
    Newton polish, so distinct root basins each get a start.
    """
    grid = np.linspace(DISTANCE_MIN, DISTANCE_MAX, COARSE_GRID)
    d1g, d2g = np.meshgrid(grid, grid, indexing="ij")
    q = complex(qIn.z, qIn.zR) * np.ones_like(d1g, dtype=complex)
    for f, d in ((f1, d1g), (f2, d2g), (f3, None)):
        q = q / (1.0 - q / f)
        if d is not None:
            q = q + d
    res = np.abs(q - (complex(qIn.z, qIn.zR) + d1g + d2g))
    res = np.where(np.isfinite(res), res, np.inf)
    padded = np.pad(res, 1, constant_values=np.inf)
    is_min = np.ones_like(res, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            neighbor = padded[1 + di : 1 + di + res.shape[0], 1 + dj : 1 + dj + res.shape[1]]
            is_min &= res <= neighbor
    is_min &= np.isfinite(res)
    ii, jj = np.nonzero(is_min)
    order = np.argsort(res[ii, jj])
    starts = [(grid[ii[idx]], grid[jj[idx]]) for idx in order[:k]]
    # roots can hide in a long curved valley whose sampled cells all
    # slope toward a single minimum; seed the valley itself with the
    # globally best cells as extra polish starts
    spacing = grid[1] - grid[0]
    flat_order = np.argsort(res, axis=None)
    extras = 0
    for flat in flat_order:
        if extras >= 3 * k:
            break
        i, j = np.unravel_index(flat, res.shape)
        if not math.isfinite(res[i, j]):
            break
        point = (grid[i], grid[j])
        # spread the extra starts out: skip cells adjacent to a chosen one
        if any(
            abs(point[0] - a) <= 1.5 * spacing and abs(point[1] - b) <= 1.5 * spacing
            for a, b in starts
        ):
            continue
        starts.append(point)
        extras += 1
    return starts


def _mismatch_with_jacobian(d1: float, d2: float, f1, f2, f3, qIn: BeamParameter):
    """Arm q mismatch and its complex derivatives with respect to both gaps.

    Each lens maps q -> q/(1 - q/f) with derivative (1 - q/f)^-2, so the
    chain rule gives d(mismatch)/d(d1) = c2*c3 - 1 and
    d(mismatch)/d(d2) = c3 - 1 in closed form.
    """
    q = complex(qIn.z, qIn.zR)
    q0 = q
    denom = 1.0 - q / f1
    if abs(denom) < 1e-12:
        raise SingularPropagationError("beam focused exactly onto a lens")
    q = q / denom + d1
    denom = 1.0 - q / f2
    if abs(denom) < 1e-12:
        raise SingularPropagationError("beam focused exactly onto a lens")
    c2 = 1.0 / denom**2
    q = q / denom + d2
    denom = 1.0 - q / f3
    if abs(denom) < 1e-12:
        raise SingularPropagationError("beam focused exactly onto a lens")
    c3 = 1.0 / denom**2
    q = q / denom
    mismatch = q - (q0 + d1 + d2)
    return mismatch, c2 * c3 - 1.0, c3 - 1.0


_NEWTON_STEP_CAP = 0.3  # meters; damps early wild steps
_NEWTON_MAX_ITER = 60


def _newton_root(start, f1, f2, f3, qIn: BeamParameter):
    """Damped Newton iteration on the 2x2 real system; None on failure."""
    d1, d2 = start
    for _ in range(_NEWTON_MAX_ITER):
        try:
            mismatch, dm1, dm2 = _mismatch_with_jacobian(d1, d2, f1, f2, f3, qIn)
        except SingularPropagationError:
            return None
        residual = abs(mismatch)
        if residual < 1e-13:
            if DISTANCE_MIN <= d1 <= DISTANCE_MAX and DISTANCE_MIN <= d2 <= DISTANCE_MAX:
                return (d1, d2, residual)
            return None
        det = dm1.real * dm2.imag - dm2.real * dm1.imag
        if abs(det) < 1e-14:
            return None
        step1 = -(mismatch.real * dm2.imag - dm2.real * mismatch.imag) / det
        step2 = -(dm1.real * mismatch.imag - mismatch.real * dm1.imag) / det
        norm = math.hypot(step1, step2)
        if norm > _NEWTON_STEP_CAP:
            scale = _NEWTON_STEP_CAP / norm
            step1 *= scale
            step2 *= scale
        d1 += step1
        d2 += step2
        # keep iterates in a loose box around the admissible region
        d1 = min(max(d1, 1e-3), 3.0)
        d2 = min(max(d2, 1e-3), 3.0)
    return None


def solve_all_distances(
    f1: float, f2: float, f3: float, qIn: BeamParameter, maxResidual: float = 1e-4
) -> list[tuple[float, float, float]]:
    """All distinct gap-length roots of the arm q-match for one triple.

    Newton iteration with the analytic Jacobian from a coarse grid of
    starts over [10 mm, 1.5 m]; the complex mismatch is treated as two
    real equations.  A triple can have several roots (each with its own
    accumulated phase), returned as (d1, d2, residual) sorted by d1.
    """
    roots: list[tuple[float, float, float]] = []
    for start in _coarse_starts(f1, f2, f3, qIn):
        solved = _newton_root(start, f1, f2, f3, qIn)
        if solved is None or solved[2] > maxResidual:
            continue
        if any(abs(solved[0] - r[0]) < 1e-6 and abs(solved[1] - r[1]) < 1e-6 for r in roots):
            continue
        roots.append(solved)
    roots.sort(key=lambda r: (r[0], r[1]))
    return roots


def solve_distances(
    f1: float, f2: float, f3: float, qIn: BeamParameter, maxResidual: float = 1e-4
):
    """First (smallest-d1) gap-length root for one lens triple, or None.

    See solve_all_distances for the full root set; multi-root triples
    exist and realize different accumulated phases.
    """
    roots = solve_all_distances(f1, f2, f3, qIn, maxResidual)
    return roots[0] if roots else None


def evaluate_configuration(
    rec: ConfigurationRecord,
    qIn: BeamParameter,
    quadrature: QuadratureSettings = DEFAULT_QUADRATURE,
) -> ConfigurationRecord:
    """Fill phase and visibility predictions for a lens configuration.

    deltaGouy is the accumulated-phase difference between arms reduced
    to (-pi, pi] for reporting; visibilities come from the full-field
    simulation with the reference phase calibrated on the fundamental
    mode.  The high-order column uses radial index rec.nHigh.
    """
    armA = OpticalPath.lens_arm(rec.f1, rec.d1, rec.f2, rec.d2, rec.f3)
    armB = OpticalPath.free_space(rec.d1 + rec.d2)
    resA = accumulate_gouy(qIn, armA)
    resB = accumulate_gouy(qIn, armB)
    delta_gouy = wrap_phase(resA.gouyAccumulated - resB.gouyAccumulated)
    q_residual = abs(resA.qOut.q - resB.qOut.q)

    cfg = InterferometerConfig(
        armA=armA, armB=armB, qIn=qIn, refPhase=0.0, quadrature=quadrature
    )
    ref = calibrate_ref_phase(cfg, LGMode(0, 0))
    cfg = replace(cfg, refPhase=ref)
    vis_p0 = simulate_port_fields(cfg, LGMode(0, 0)).visibilityAbs
    vis_pn = simulate_port_fields(cfg, LGMode(rec.nHigh, 0)).visibilityAbs
    return replace(
        rec,
        deltaGouy=delta_gouy,
        qResidual=q_residual,
        visP0=vis_p0,
        visPn=vis_pn,
    )


def _phase_matches(delta_gouy: float, target_n: int, tolerance: float) -> bool:
    """Accept either sign and mod-pi equivalence of the reduced phase."""
    folded = math.fmod(abs(delta_gouy), math.pi)
    return abs(folded - math.pi / target_n) <= tolerance


def _solve_one(triple, qIn, maxResidual):
    f1, f2, f3 = triple
    try:
        return solve_all_distances(f1, f2, f3, qIn, maxResidual)
    except SingularPropagationError:
        return []


def search(req: SearchRequest) -> list[ConfigurationRecord]:
    """Enumerate ordered catalog triples and keep phase-matching configs.

    Results are sorted by predicted high-order visibility (descending),
    with the enumeration index as a deterministic tie-breaker, and
    truncated to maxResults.  An empty list is a valid outcome.
    """
    focals = [f * 1e-3 for f in req.catalog.focal_lengths_mm]
    triples = [
        (f1, f2, f3) for f1 in focals for f2 in focals for f3 in focals
    ]
    n_jobs = _thread_budget()
    if n_jobs > 1:
        from joblib import Parallel, delayed

        solutions = Parallel(n_jobs=n_jobs)(
            delayed(_solve_one)(t, req.qIn, req.maxResidual) for t in triples
        )
    else:
        solutions = [_solve_one(t, req.qIn, req.maxResidual) for t in triples]

    kept = []
    for (f1, f2, f3), roots in zip(triples, solutions):
        for d1, d2, residual in roots:
            armA = OpticalPath.lens_arm(f1, d1, f2, d2, f3)
            armB = OpticalPath.free_space(d1 + d2)
            try:
                resA = accumulate_gouy(req.qIn, armA)
                resB = accumulate_gouy(req.qIn, armB)
            except SingularPropagationError:
                continue
            delta_gouy = wrap_phase(resA.gouyAccumulated - resB.gouyAccumulated)
            if not _phase_matches(delta_gouy, req.targetN, req.phaseTolerance):
                continue
            record = ConfigurationRecord(
                f1=f1, f2=f2, f3=f3, d1=d1, d2=d2, nHigh=req.targetN
            )
            try:
                kept.append(evaluate_configuration(record, req.qIn, req.quadrature))
            except (SingularPropagationError, ArithmeticError):
                continue

    kept.sort(key=lambda r: (-r.visPn, r.f1, r.f2, r.f3, r.d1, r.d2))
    return kept[: req.maxResults]


def _thread_budget() -> int:
    raw = os.environ.get("GOUY_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def write_results_csv(path, records: list[ConfigurationRecord], comments: list[str] = ()) -> None:
    """Search-result CSV, lengths in mm, phase in units of pi, 6 significant digits."""
    with open(path, "w") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write("f1_mm,f2_mm,f3_mm,d1_mm,d2_mm,delta_gouy_over_pi,q_residual_m,vis_p0,vis_pn\n")
        for r in records:
            fh.write(
                f"{r.f1 * 1e3:.6g},{r.f2 * 1e3:.6g},{r.f3 * 1e3:.6g},"
                f"{r.d1 * 1e3:.6g},{r.d2 * 1e3:.6g},"
                f"{r.deltaGouy / math.pi:.6g},{r.qResidual:.6g},"
                f"{r.visP0:.6g},{r.visPn:.6g}\n"
            )
