"""Exact simulation and sampled analysis of CHSH correlations between two
postselected qubits of a three-qubit GHZ state."""
from .coincidence import (
    CHProbabilities,
    CoincidenceTable,
    ch_probabilities,
    load_counts,
    per_setting_p_zx,
    reconstruct_p_xx,
    reconstruct_p_zz,
    save_counts,
    six_term_bound,
)
from .inequalities import (
    CHSHParams,
    DichotomicObservable,
    InequalityReport,
    LHVAssignment,
    bound_transform,
    ch_value,
    chsh_value,
    cirelson_norm,
    lhv_max,
)
from .measurement import MeasurementSetting, OutcomeDistribution, OutcomeEvent, joint_distribution, sample
from .postselect import (
    CorrelationEstimate,
    LabelingStrategy,
    LocationFixed,
    OutcomeBased,
    RoleAssignment,
    corr_xx_postselected,
    corr_zxx_product,
    corr_zz,
    label_event,
)
from .statevector import PauliString, StateVector, expectation, make_ghz, make_weighted_ghz

__version__ = "0.1.0"
