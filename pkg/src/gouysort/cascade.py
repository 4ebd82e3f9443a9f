"""Binary trees of sorter stages and mode-to-channel routing.

Stages compose on power fractions: each interferometer's outputs are
spatially separated paths, so the per-stage port fractions multiply
along every root-to-leaf path.  Leaves are numbered depth-first,
port 1 before port 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .interferometer import InterferometerConfig, analytic_port_split, simulate_port_fields
from .modes import LGMode

__all__ = [
    "AnalyticStage",
    "CascadeNode",
    "route",
    "routing_matrix",
    "stage_ref_phase_for",
    "four_channel_tree",
    "write_routing_csv",
]


@dataclass(frozen=True)
class AnalyticStage:
    """Idealized matched-q sorter stage: (deltaGouy, refPhase) pair."""

    deltaGouy: float
    refPhase: float = 0.0


@dataclass(frozen=True)
class CascadeNode:
    """Sorter stage with optional children on its two output ports.

    sorter is either an AnalyticStage or a full InterferometerConfig;
    None makes the node a pass-through leaf.  A missing child turns the
    corresponding port into an output channel.
    """

    sorter: AnalyticStage | InterferometerConfig | None = None
    port1: "CascadeNode | None" = None
    port2: "CascadeNode | None" = None

    @property
    def n_channels(self) -> int:
        if self.sorter is None:
            return 1
        left = self.port1.n_channels if self.port1 else 1
        right = self.port2.n_channels if self.port2 else 1
        return left + right


def _stage_fractions(stage, mode: LGMode) -> tuple[float, float]:
    if isinstance(stage, AnalyticStage):
        return analytic_port_split(stage.deltaGouy, stage.refPhase, mode)
    port = simulate_port_fields(stage, mode)
    total = port.I1 + port.I2
    return port.I1 / total, port.I2 / total


def route(tree: CascadeNode, mode: LGMode) -> list[tuple[int, float]]:
    """Per-channel power fractions of one mode through the tree.

    Channels are numbered depth-first starting at 1; fractions sum to
    one (lossless tree).
    """
    fractions: list[float] = []

    def descend(node: CascadeNode | None, weight: float) -> None:
        if node is None or node.sorter is None:
            fractions.append(weight)
            return
        f1, f2 = _stage_fractions(node.sorter, mode)
        descend(node.port1, weight * f1)
        descend(node.port2, weight * f2)

    descend(tree, 1.0)
    return [(channel + 1, fraction) for channel, fraction in enumerate(fractions)]


def routing_matrix(tree: CascadeNode, modes: list[LGMode]) -> list[list[float]]:
    """Stacked route() rows, one per input mode; each row sums to one."""
    return [[fraction for _, fraction in route(tree, mode)] for mode in modes]


def stage_ref_phase_for(deltaGouy: float, target: LGMode) -> float:
    """Reference phase sending the target mode fully to port 1.

    Solves theta = m*deltaGouy + refPhase = 0 (mod 2*pi) in closed form.
    """
    return (-target.order * deltaGouy) % (2.0 * math.pi)


def four_channel_tree() -> CascadeNode:
    """Three-stage tree sorting the radial modes p = 0..3 (l = 0).

    The root half-pi stage separates even from odd p; each second-level
    quarter-pi stage separates its remaining pair.  Offsets are solved
    in closed form so that p = 0, 2, 1, 3 land on channels 1..4.
    """
    half = -math.pi / 2.0
    quarter = -math.pi / 4.0
    root = AnalyticStage(half, stage_ref_phase_for(half, LGMode(0, 0)))
    even = AnalyticStage(quarter, stage_ref_phase_for(quarter, LGMode(0, 0)))
    odd = AnalyticStage(quarter, stage_ref_phase_for(quarter, LGMode(1, 0)))
    return CascadeNode(
        sorter=root,
        port1=CascadeNode(sorter=even),
        port2=CascadeNode(sorter=odd),
    )


def write_routing_csv(path, modes: list[LGMode], matrix: list[list[float]], comments: list[str] = ()) -> None:
    """CSV with one row per mode and one column per output channel."""
    n_channels = len(matrix[0]) if matrix else 0
    with open(path, "w") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        channel_header = ",".join(f"ch{i + 1}" for i in range(n_channels))
        fh.write(f"p,ell,{channel_header}\n")
        for mode, row in zip(modes, matrix):
            values = ",".join(f"{v:.8g}" for v in row)
            fh.write(f"{mode.p},{mode.l},{values}\n")
