"""Process and error matrices for characterizing quantum gates."""
__version__ = "0.1.0"

from .exceptions import ChiError, ConvergenceError, NumericalError, RankDeficiencyError, ValidationError
from .pauli import PauliBasis, build_basis, expand_in_pauli, from_pauli, index_to_label, label_to_index, pauli_product
from .process import (
    average_fidelity,
    chi_from_kraus,
    chi_from_unitary,
    chi_to_superoperator,
    identity_chi,
    is_trace_preserving,
    process_fidelity,
    superoperator_to_chi,
    uhlmann_fidelity,
)
from .error_matrix import (
    Convention,
    ErrorMatrix,
    as_convention,
    coherent_split,
    convert_convention,
    extract_unitary_error,
    from_error_matrix,
    kraus_decompose,
    to_error_matrix,
    w_matrix,
)
from .composition import GateWithError, Mode, compose_errors_first_order, compose_exact, compose_gates, compose_sequence
from .correction import (
    CorrectionPlan,
    CzPhaseCorrection,
    Placement,
    apply_correction,
    cz_corrections,
    iterate_correction,
    iterate_cz_correction,
    suggest_correction,
)
from .spam import CalibrationSet, SpamModel, identify_spam, identify_spam_subset, spam_forward, subtract_spam
from .tomography import TomographySetup, reconstruct_chi, run_qpt_experiment, simulate_dataset
