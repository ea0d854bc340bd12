"""
Pydantic Schemas
"""
from app.schemas.common import CommandResult, complex_pair
from app.schemas.params import (
    ComplexNumber,
    SystemParams,
    SteadyState,
    EffectiveParams,
    DriveDesign,
)
from app.schemas.linear import (
    BASIS_ORDER,
    MODES,
    LinearModel,
    RwaModel,
    StabilityReport,
)
from app.schemas.scattering import (
    T_COLUMNS,
    SVAC_COLUMNS,
    SOUT_COLUMNS,
    CSV_COLUMNS,
    ScatteringResult,
    InputSpectra,
    SweepTable,
    DeviationReport,
)
from app.schemas.run_config import (
    RunMode,
    Command,
    EffectiveBlock,
    PhysicalBlock,
    GridSpec,
    DesignBlock,
    SpectraBlock,
    RunConfig,
)

__all__ = [
    # Common
    "CommandResult",
    "complex_pair",
    # Params
    "ComplexNumber",
    "SystemParams",
    "SteadyState",
    "EffectiveParams",
    "DriveDesign",
    # Linear
    "BASIS_ORDER",
    "MODES",
    "LinearModel",
    "RwaModel",
    "StabilityReport",
    # Scattering
    "T_COLUMNS",
    "SVAC_COLUMNS",
    "SOUT_COLUMNS",
    "CSV_COLUMNS",
    "ScatteringResult",
    "InputSpectra",
    "SweepTable",
    "DeviationReport",
    # Run config
    "RunMode",
    "Command",
    "EffectiveBlock",
    "PhysicalBlock",
    "GridSpec",
    "DesignBlock",
    "SpectraBlock",
    "RunConfig",
]
