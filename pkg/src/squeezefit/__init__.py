"""squeezefit: low-rank metric learning with a provable separation margin.

Learns a matrix 0 <= M <= I of minimal trace whose induced metric keeps
differently labeled points at least ``delta`` apart, checks optimality through
dual certificates, and ships the planted-model experiments and classical
baselines used to evaluate it.
"""

from .analysis import (
    ConeSpec,
    RecoveryReport,
    SqueezeOnceReport,
    StatDimEstimate,
    contact_vectors,
    estimate_stat_dim,
    is_delta_fixed,
    lambda_min_nonzero,
    recovery_report,
    snr,
    squeeze_once_check,
)
from .baselines import Classifier, knn_fit, knn_predict, lda, pca
from .constraints import (
    ConstraintSet,
    DifferencePair,
    build_constraints_full,
    build_constraints_nn,
    cross_class_shortest,
)
from .duality import (
    CertificateReport,
    DualCertificate,
    certificate_from_contacts,
    certify,
    count_tight_vs_bound,
    dual_objective,
    find_certificate,
    fixed_space,
    tight_constraints,
)
from .data import (
    LabeledDataset,
    downsample_columns,
    downsample_images,
    load_csv,
    load_idx,
    save_csv,
    split_train_test,
)
from .errors import (
    CertificateSearchFailed,
    DegenerateContacts,
    DegenerateData,
    DegenerateLda,
    FormatError,
    Inconclusive,
    Infeasible,
    InvalidInput,
    NoConstraints,
    NotPsd,
    SqueezeFitError,
    StratifyError,
)
from .estimator import SqueezeFit
from .records import (
    ResultRecord,
    aggregate_metrics,
    load_matrix_json,
    save_matrix_json,
    to_native,
)
from .solver import (
    SqueezeConfig,
    SqueezeResult,
    hinge_objective,
    hinge_subgradient,
    solve,
    solve_hard,
    solve_hinge,
    solve_zero_plus,
)
from .spectral import (
    EigenDecomposition,
    eig_sym,
    project_psd,
    project_spectahedron,
    projection_distance,
    psd_sqrt,
    rank_round,
)
from .synth import PlantedModel, generate_demo3d, generate_planted, generate_simplex_base

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "CertificateReport",
    "CertificateSearchFailed",
    "Classifier",
    "ConeSpec",
    "ConstraintSet",
    "DualCertificate",
    "DegenerateContacts",
    "DegenerateData",
    "DegenerateLda",
    "DifferencePair",
    "EigenDecomposition",
    "FormatError",
    "Inconclusive",
    "Infeasible",
    "InvalidInput",
    "LabeledDataset",
    "NoConstraints",
    "NotPsd",
    "PlantedModel",
    "RecoveryReport",
    "ResultRecord",
    "SqueezeConfig",
    "SqueezeFit",
    "SqueezeFitError",
    "SqueezeOnceReport",
    "SqueezeResult",
    "StatDimEstimate",
    "StratifyError",
    "aggregate_metrics",
    "build_constraints_full",
    "build_constraints_nn",
    "certificate_from_contacts",
    "certify",
    "contact_vectors",
    "count_tight_vs_bound",
    "cross_class_shortest",
    "dual_objective",
    "downsample_columns",
    "downsample_images",
    "eig_sym",
    "estimate_stat_dim",
    "find_certificate",
    "fixed_space",
    "generate_demo3d",
    "generate_planted",
    "generate_simplex_base",
    "hinge_objective",
    "hinge_subgradient",
    "is_delta_fixed",
    "knn_fit",
    "knn_predict",
    "lambda_min_nonzero",
    "lda",
    "load_csv",
    "load_idx",
    "load_matrix_json",
    "pca",
    "project_psd",
    "project_spectahedron",
    "projection_distance",
    "psd_sqrt",
    "rank_round",
    "recovery_report",
    "save_csv",
    "save_matrix_json",
    "snr",
    "solve",
    "solve_hard",
    "solve_hinge",
    "solve_zero_plus",
    "split_train_test",
    "squeeze_once_check",
    "tight_constraints",
    "to_native",
]
