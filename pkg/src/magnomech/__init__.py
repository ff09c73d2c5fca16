"""Steady states, quadrature covariances, and photon-phonon entanglement
of a driven spinning cavity magnomechanical system."""

__version__ = "0.1.0"

from .errors import (
    InconsistentRoot,
    MagnomechError,
    MismatchedConfigs,
    NonConvergence,
    NoPhysicalRoot,
    SchemaError,
    SingularSystem,
    UnphysicalInput,
    Unstable,
)
from .model import (
    SpinningCavitySpec,
    SystemParams,
    ThermalOccupations,
    drive_amplitude_from_power,
    load_config,
    sagnac_shift,
    thermal_occupation,
)

__all__ = [
    "__version__",
    "MagnomechError",
    "SchemaError",
    "UnphysicalInput",
    "NoPhysicalRoot",
    "InconsistentRoot",
    "NonConvergence",
    "SingularSystem",
    "Unstable",
    "MismatchedConfigs",
    "SpinningCavitySpec",
    "SystemParams",
    "ThermalOccupations",
    "thermal_occupation",
    "sagnac_shift",
    "drive_amplitude_from_power",
    "load_config",
]
