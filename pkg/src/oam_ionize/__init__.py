"""Photoionization of hydrogen by vortex (OAM) laser pulses.

Subpackages cover: exact angular-momentum algebra and selection rules
(`angular`, `cg`, `harmonics`), their brute-force quadrature verification
(`oracle`), the pulsed vortex field (`beam`), 3D grid propagation
(`grid`, `tdse`), observables (`analysis`), and the batch driver
(`runconfig`, `cli`).
"""

from .angular import (
    AngularFactor,
    Polarization,
    SelectionRuleSet,
    derive_selection_rules,
    expand_sin_power_phase,
    hi_angular_coupling,
    hii_angular_coupling,
    product_expansion,
)
from .analysis import (
    ComplianceReport,
    SphericalSpectrum,
    compliance,
    kinetic_oam,
    position_expectation,
    spherical_spectrum,
    split_excited,
    xy_projection,
)
from .beam import (
    FieldSample,
    PulseConfig,
    cep_map,
    lg_mode,
    near_origin_potential,
    vector_potential,
)
from .cg import clebsch_gordan
from .grid import GridSpec, Wavefunction, read_checkpoint, write_checkpoint
from .harmonics import HarmonicExpansion, HarmonicIndex
from .oracle import SphereQuadrature, integrate_triple, verify_rule_set
from .runconfig import AnalysisConfig, RunConfig, load_run_config, serialize_run_config
from .tdse import (
    AbsorberSpec,
    PropagatorConfig,
    Propagator,
    TrajectoryRecord,
    init_ground_state,
    ponderomotive_profile,
    run,
    step,
)

__version__ = "0.1.0"
