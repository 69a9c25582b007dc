"""Model and analysis toolkit for a quantum-circuit refrigerator.

The refrigerator is a normal-metal/insulator/superconductor tunnel junction
coupled to a microwave resonator.  Photon-assisted quasiparticle tunneling,
driven by a dc bias and a microwave noise tone, exchanges photons with the
resonator and so sets its damping and effective temperature.
"""

__version__ = "0.1.0"

from .config import DeviceConfig, default_config, load, loads
from .errors import (
    ConfigInvalid,
    DataOutOfRange,
    DivisionDegenerate,
    FitDiverged,
    GridTooCoarse,
    NoRootInBracket,
    NumericalError,
    PeaksNotResolved,
    QcrlabError,
    QuadratureNotConverged,
    ValidationError,
)
from .junction import (
    DEFAULT_QUAD,
    JunctionParams,
    QuadratureConfig,
    dynes_dos,
    elastic_dc_current,
    fermi_occupation,
    forward_rate,
)
from .photon_assisted import (
    DriveCondition,
    PatWeights,
    iv_curve,
    pat_weights,
    transition_rate,
    tunneling_current,
    vac_from_power,
)
from .resonator import (
    ResonatorParams,
    bose_occupation,
    coherent_population,
    gamma_qcr,
    infer_gamma_from_population,
    matrix_element_sq,
    steady_state_population,
    t_qcr,
    temp_from_occupation,
)
from .spectroscopy import (
    FockDistribution,
    PeakModel,
    SpectrumTrace,
    extract_peak_weights,
    fit_population,
    poisson_distribution,
    synthesize_spectrum,
    thermal_distribution,
)
from .estimation import FitResult, IvDataset, fit_iv_curve, nls_minimize
from .sweep import SweepSpec, run_sweep
