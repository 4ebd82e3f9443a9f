"""Interferometric sorting of Laguerre-Gaussian radial modes by accumulated Gouy phase."""

from .beam import (
    BeamParameter,
    FreeSpace,
    OpticalPath,
    PropagationResult,
    SingularPropagationError,
    ThinLens,
    accumulate_gouy,
    gouy_phase,
    propagate_element,
    rayleigh_range,
    wrap_phase,
)
from .cascade import AnalyticStage, CascadeNode, four_channel_tree, route, routing_matrix
from .interferometer import (
    ArmLengthMismatchError,
    InterferometerConfig,
    MisalignmentSpec,
    PortResult,
    analytic_port_split,
    calibrate_ref_phase,
    simulate_port_fields,
    visibility_sweep,
)
from .modes import (
    LGMode,
    QuadratureError,
    QuadratureSettings,
    Superposition,
    laguerre_poly,
    lg_field,
    overlap,
)
from .search import (
    ConfigurationRecord,
    LensCatalog,
    SearchRequest,
    evaluate_configuration,
    search,
    solve_all_distances,
    solve_distances,
)

__version__ = "0.1.0"
