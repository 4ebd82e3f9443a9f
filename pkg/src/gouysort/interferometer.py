"""Two-arm Gouy-phase sorter simulation.

One arm carries a lens system, the other an equal length of free space.
After recombination at an ideal 50/50 splitter the port intensities are

    I1 = (Pa + Pb)/4 + Re(exp(i*delta) * c)/2
    I2 = (Pa + Pb)/4 - Re(exp(i*delta) * c)/2

with c the cross overlap between the two arm fields (lens arm carrying
the mode-independent reference phase delta) and Pa, Pb the arm powers.
Arm fields use the accumulated (unwrapped) Gouy phase of their path, so
a perfectly q-matched pair interferes with the mode-dependent phase
m * delta_phi_gouy exactly as in the analytic two-port split.

The common dynamic phase k*L cancels because both arms have the same
geometric length; any residual piston phase lives in the reference
phase, which models the piezo mirror of the physical device.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .beam import BeamParameter, OpticalPath, accumulate_gouy
from .modes import (
    DEFAULT_QUADRATURE,
    LGMode,
    QuadratureSettings,
    Superposition,
    overlap,
)

__all__ = [
    "ArmLengthMismatchError",
    "InterferometerConfig",
    "PortResult",
    "MisalignmentSpec",
    "simulate_port_fields",
    "analytic_port_split",
    "calibrate_ref_phase",
    "visibility_sweep",
    "write_sweep_csv",
]

ARM_LENGTH_TOL = 1e-9


class ArmLengthMismatchError(ValueError):
    """Arm geometric lengths differ without an explicit override."""


@dataclass(frozen=True)
class InterferometerConfig:
    """Two arms, input beam and mode-independent reference phase.

    armA is conventionally the lens arm, armB the free-space arm of
    equal geometric length (common-path assumption); construction fails
    on a length mismatch unless allow_length_mismatch is set.
    """

    armA: OpticalPath
    armB: OpticalPath
    qIn: BeamParameter
    refPhase: float = 0.0
    quadrature: QuadratureSettings = DEFAULT_QUADRATURE
    allow_length_mismatch: bool = False

    def __post_init__(self):
        mismatch = abs(self.armA.geometric_length - self.armB.geometric_length)
        if mismatch > ARM_LENGTH_TOL and not self.allow_length_mismatch:
            raise ArmLengthMismatchError(
                f"arm lengths differ by {mismatch:.3e} m; "
                "pass allow_length_mismatch=True to override"
            )

    @classmethod
    def three_lens(
        cls,
        f1: float,
        d1: float,
        f2: float,
        d2: float,
        f3: float,
        qIn: BeamParameter,
        refPhase: float = 0.0,
        quadrature: QuadratureSettings = DEFAULT_QUADRATURE,
    ) -> "InterferometerConfig":
        """Lens arm L1/D1/L2/D2/L3 against free space of length D1+D2."""
        return cls(
            armA=OpticalPath.lens_arm(f1, d1, f2, d2, f3),
            armB=OpticalPath.free_space(d1 + d2),
            qIn=qIn,
            refPhase=refPhase,
            quadrature=quadrature,
        )


@dataclass(frozen=True)
class PortResult:
    I1: float
    I2: float

    @property
    def visibility(self) -> float:
        return (self.I1 - self.I2) / (self.I1 + self.I2)

    @property
    def visibilityAbs(self) -> float:
        return abs(self.visibility)


@dataclass(frozen=True)
class MisalignmentSpec:
    """Experimental imperfections of input beam and lens spacings.

    w0Actual is the real input waist radius; zOffset the z-coordinate of
    the entry plane relative to the actual waist (negative while the
    beam still converges toward it); d1Error/d2Error are added to the
    lens-arm gaps (the free-space arm keeps the nominal common length).
    The reference phase is calibrated on calibrationMode.
    """

    w0Actual: float
    zOffset: float = 0.0
    d1Error: float = 0.0
    d2Error: float = 0.0
    calibrationMode: LGMode = LGMode(2, 0)

    def __post_init__(self):
        if self.w0Actual <= 0:
            raise ValueError(f"actual waist must be positive, got {self.w0Actual}")


def _as_superposition(mode) -> Superposition:
    if isinstance(mode, Superposition):
        return mode
    if isinstance(mode, LGMode):
        return Superposition((mode,))
    raise TypeError(f"expected LGMode or Superposition, got {type(mode)!r}")


def _arm_outputs(cfg: InterferometerConfig):
    resA = accumulate_gouy(cfg.qIn, cfg.armA)
    resB = accumulate_gouy(cfg.qIn, cfg.armB)
    return resA, resB


def _port_intensities(cfg: InterferometerConfig, mode) -> tuple[float, float]:
    modes = _as_superposition(mode)
    resA, resB = _arm_outputs(cfg)
    qa, ga = resA.qOut, resA.gouyAccumulated
    qb, gb = resB.qOut, resB.gouyAccumulated
    quad = cfg.quadrature
    pa = overlap(modes, qa, modes, qa, quad, gouy_a=ga, gouy_b=ga).real
    pb = overlap(modes, qb, modes, qb, quad, gouy_a=gb, gouy_b=gb).real
    cross = overlap(modes, qb, modes, qa, quad, gouy_a=gb, gouy_b=ga)
    interference = 0.5 * (np.exp(1j * cfg.refPhase) * cross).real
    base = 0.25 * (pa + pb)
    return base + interference, base - interference


def simulate_port_fields(cfg: InterferometerConfig, mode) -> PortResult:
    """Full-field port intensities for an LG mode or superposition.

    Propagates every term through both arms, recombines at the second
    50/50 splitter with the reference phase on the lens arm, and
    integrates the two port intensities over the transverse plane.
    """
    i1, i2 = _port_intensities(cfg, mode)
    return PortResult(I1=i1, I2=i2)


def analytic_port_split(deltaGouy: float, refPhase: float, mode: LGMode) -> tuple[float, float]:
    """Ideal matched-q port fractions (cos^2, sin^2) of theta/2.

    theta = m*deltaGouy + refPhase with mode order m = 2p + |l| + 1; the
    fractions sum to one exactly.
    """
    theta = mode.order * deltaGouy + refPhase
    f1 = math.cos(theta / 2.0) ** 2
    return f1, 1.0 - f1


def calibrate_ref_phase(cfg: InterferometerConfig, mode) -> float:
    """Reference phase in [0, 2*pi) maximizing |visibility| for a mode.

    The visibility is Re(exp(i*delta)*c) up to a positive factor, so the
    maximizing phase is -arg(c) in closed form; a flat objective
    (|c| = 0, mode split exactly 50/50) has no optimum and is reported.
    """
    modes = _as_superposition(mode)
    resA, resB = _arm_outputs(cfg)
    cross = overlap(
        modes,
        resB.qOut,
        modes,
        resA.qOut,
        cfg.quadrature,
        gouy_a=resB.gouyAccumulated,
        gouy_b=resA.gouyAccumulated,
    )
    if abs(cross) < 1e-12:
        raise ArithmeticError(
            "flat calibration objective: mode splits 50/50 for every reference phase"
        )
    return float(-np.angle(cross) % (2.0 * math.pi))


def visibility_sweep(
    cfg: InterferometerConfig,
    mis: MisalignmentSpec,
    modes: list[LGMode],
) -> list[tuple[LGMode, float]]:
    """Signed per-mode visibilities under a misaligned configuration.

    Rebuilds the interferometer with the actual input beam and perturbed
    lens-arm gaps, calibrates the reference phase on the calibration
    mode, then evaluates each requested mode.
    """
    from .beam import FreeSpace, ThinLens  # local to avoid polluting module API

    elements = []
    gap_index = 0
    for element in cfg.armA.elements:
        if isinstance(element, FreeSpace):
            error = (mis.d1Error, mis.d2Error)[gap_index] if gap_index < 2 else 0.0
            elements.append(FreeSpace(element.d + error))
            gap_index += 1
        else:
            elements.append(element)
    armA = OpticalPath(tuple(elements))
    qIn = BeamParameter.from_waist(mis.w0Actual, cfg.qIn.wavelength, z=mis.zOffset)
    actual = InterferometerConfig(
        armA=armA,
        armB=cfg.armB,
        qIn=qIn,
        refPhase=0.0,
        quadrature=cfg.quadrature,
        allow_length_mismatch=True,
    )
    delta = calibrate_ref_phase(actual, mis.calibrationMode)
    actual = replace(actual, refPhase=delta)
    results = []
    for mode in modes:
        port = simulate_port_fields(actual, mode)
        results.append((mode, port.visibility))
    return results


def write_sweep_csv(path, rows: list[tuple[LGMode, PortResult]], comments: list[str] = ()) -> None:
    """CSV with columns (p, ell, m, I1, I2, visibility)."""
    with open(path, "w") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write("p,ell,m,I1,I2,visibility\n")
        for mode, port in rows:
            fh.write(
                f"{mode.p},{mode.l},{mode.order},"
                f"{port.I1:.8g},{port.I2:.8g},{port.visibility:.8g}\n"
            )
