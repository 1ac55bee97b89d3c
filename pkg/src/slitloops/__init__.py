"""Far-field multi-slit interference with looped slit-to-slit paths and the Sorkin parameter."""

from .config import ConfigError, ScenarioConfig, dump_config, parse_config
from .loops import (
    HopPath,
    coupling_matrix,
    enumerate_hop_paths,
    hop_coupling,
    hop_order_amplitude,
    looped_amplitude,
    total_pattern,
)
from .model import (
    CouplingModel,
    CouplingTable,
    DetectorGrid,
    Illumination,
    Mask,
    ModelBundle,
    ModelError,
    Pattern,
    SlitArray,
    SorkinResult,
    validate_config,
)
from .propagation import (
    ApertureDiscretization,
    converge_huygens,
    direct_amplitude,
    direct_pattern,
    huygens_compose_check,
    rs_far_field,
    rs_kernel,
    sinc_n,
)
from .sorkin import (
    SweepResult,
    SweepSpec,
    kappa_at_center,
    polarization_ratios,
    position_average,
    seven_masks,
    sorkin_analysis,
    sorkin_epsilon,
    sweep,
    visibility,
)

__version__ = "0.1.0"
