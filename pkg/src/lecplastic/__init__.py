"""Linear expand-contract plasticity of ellipsoids in separable Hilbert space."""

from .errors import (
    CheckFailed,
    IndexBeyondSupport,
    InternalError,
    LecError,
    NoConvergence,
    ProfileFormatError,
    ProfileValidationError,
)
from .operator import (
    ChainShiftOperator,
    TruncatedOperator,
    VerificationReport,
    build_shift,
    modified_inner,
    operator_norm,
    truncate,
    verify_block_structure,
    verify_counterexample,
)
from .plasticity import PlasticityVerdict, Verdict, WitnessSet, decide, extract_witness
from .profile import (
    INFINITE,
    Atom,
    Direction,
    GeometricSequence,
    SemiAxisProfile,
    enumerate_axis,
    find_tau,
    load_profile,
    validate_profile,
)

__version__ = "0.1.0"
