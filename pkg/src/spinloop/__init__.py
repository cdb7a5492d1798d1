"""Post-DFT pipeline for the optical spin-polarization loop of C3v spin-1
color centers: vibronic Jahn-Teller solvers, intersystem-crossing rates,
spin-Hamiltonian parameter processing and five-level ODMR kinetics."""

__version__ = "0.1.0"

from .errors import (
    DegenerateModelError,
    FitFailureError,
    InvalidInputError,
    NoConvergenceError,
    PresetParseError,
    PresetValidationError,
    ResolutionError,
    SpinloopError,
    StiffnessError,
    SymmetryBreakingError,
)
from .isc import (
    LowerIscResult,
    SocParameters,
    UpperIscResult,
    lower_isc,
    sweep_lower,
    sweep_upper,
    upper_isc,
)
from .kinetics import (
    KineticsResult,
    RadiativeInputs,
    RateModel,
    build_generator,
    k45_off_resonant,
    odmr_contrast,
    pl_lifetime,
    radiative_rate,
    steady_state,
    transient,
)
from .pipeline import (
    calibrate_lower,
    calibrate_upper,
    lower_rates,
    solve_djt,
    solve_lower,
    upper_rates,
)
from .presets import DefectPreset, load_preset, save_preset, serialize
from .spectral import (
    CcdCrossing,
    CcdModel,
    HuangRhysModel,
    SpectralFunction,
    build_lineshape,
    ccd_crossing,
    evaluate_shifted,
)
from .spinparams import (
    SocDataset,
    SocFit,
    SocRow,
    ZfsParameters,
    ZfsTensor,
    decontaminate,
    extract_de,
    reduce_soc,
    soc_fit,
)
from .symmetry import (
    C3V,
    OscillatorState,
    PointGroupC3v,
    Salc,
    SiteBasis,
    SymmetryAdaptedOrbitals,
    TwoHoleMultiplet,
    VibrationalIrrepSector,
    circular_harmonics,
    classify_oscillator_level,
    divacancy_basis,
    nv_basis,
    oscillator_states,
    project_salcs,
    real_singlet_basis_change,
    two_hole_multiplets,
)
from .vibronic import (
    CoefficientTable,
    HamFactors,
    JtParameters,
    PjtParameters,
    VibronicProblem,
    VibronicSolution,
    build_djt_hamiltonian,
    build_lower_branch_hamiltonian,
    f2_from_apes,
    ham_factors,
    jt_params_from_apes,
    mixing_from_amplitudes,
    solve,
    symmetry_adapted_oscillator_basis,
)
