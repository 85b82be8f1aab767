# Core package for quantum quadratic operator certification

from .config import Settings, Tolerances, load_settings, get_settings
from .models import PauliElement, StateVec, QqoTensor, TensorSquareElement
from .linalg import DenseHermitian, LinalgError, NonHermitianError, eig_hermitian
from .pauli import (
    pauli_to_dense,
    dense_to_pauli,
    pauli_mul,
    eval_state,
    tau,
    is_positive_element,
)
from .operator import (
    BMatrix,
    Certificate,
    OperatorError,
    NotPositiveElementError,
    apply_delta,
    tensor_square_to_dense,
    dense_to_tensor_square,
    conditional_expectation,
    b_matrix,
    spectral_norm3,
    triple_norm,
    dual_product_state,
    check_dstar1,
    check_dstar3,
    haar_check,
    positivity_oracle,
    search_positivity_violation,
    check_flip_symmetry,
    check_coassociativity,
)
from .ks_cert import (
    KsQuantities,
    KsWitness,
    KsReport,
    KsCertError,
    ConventionFault,
    ks_quantities,
    ks11_margin,
    ks2_margin,
    ksf_margins,
    ks_oracle,
    ks_scan,
    ef_difference,
    dd1_expansion,
    dd2_expansion,
)
from .dynamics import (
    StabilityCertificates,
    Trajectory,
    apply_v,
    apply_v_tilde,
    certificates,
    dynamics_class,
    iterate,
    tilde_orbit_probe,
    majorant_bound,
    find_fixed_points,
)
from .families import (
    DiagonalQO,
    AbcParams,
    FamilyError,
    HypothesisNotMetError,
    diagonal_to_tensor,
    abc_to_tensor,
    check_bb3,
    check_bb4,
    check_bb5,
    check_e12,
    not_ks_predicate,
    abc_classify,
    abc_regime,
    diagonal_orbit_bound,
)
from .operator_file import (
    OperatorFileError,
    OperatorParseError,
    ParsedOperator,
    OperatorFileParser,
    read_operator_file,
    format_tensor,
    format_abc,
    format_diagonal,
    write_operator_file,
)
from .report import build_report, dumps_report, write_report

__all__ = [
    'Settings', 'Tolerances', 'load_settings', 'get_settings',
    'PauliElement', 'StateVec', 'QqoTensor', 'TensorSquareElement',
    'DenseHermitian', 'LinalgError', 'NonHermitianError', 'eig_hermitian',
    'pauli_to_dense', 'dense_to_pauli', 'pauli_mul', 'eval_state', 'tau', 'is_positive_element',
    'BMatrix', 'Certificate', 'OperatorError', 'NotPositiveElementError',
    'apply_delta', 'tensor_square_to_dense', 'dense_to_tensor_square', 'conditional_expectation',
    'b_matrix', 'spectral_norm3', 'triple_norm', 'dual_product_state',
    'check_dstar1', 'check_dstar3', 'haar_check', 'positivity_oracle',
    'search_positivity_violation', 'check_flip_symmetry', 'check_coassociativity',
    'KsQuantities', 'KsWitness', 'KsReport', 'KsCertError', 'ConventionFault',
    'ks_quantities', 'ks11_margin', 'ks2_margin', 'ksf_margins', 'ks_oracle', 'ks_scan',
    'ef_difference', 'dd1_expansion', 'dd2_expansion',
    'StabilityCertificates', 'Trajectory', 'apply_v', 'apply_v_tilde', 'certificates',
    'dynamics_class', 'iterate', 'tilde_orbit_probe', 'majorant_bound', 'find_fixed_points',
    'DiagonalQO', 'AbcParams', 'FamilyError', 'HypothesisNotMetError',
    'diagonal_to_tensor', 'abc_to_tensor', 'check_bb3', 'check_bb4', 'check_bb5', 'check_e12',
    'not_ks_predicate', 'abc_classify', 'abc_regime', 'diagonal_orbit_bound',
    'OperatorFileError', 'OperatorParseError', 'ParsedOperator', 'OperatorFileParser',
    'read_operator_file', 'format_tensor', 'format_abc', 'format_diagonal', 'write_operator_file',
    'build_report', 'dumps_report', 'write_report',
]
