"""Trotter step-error analysis for second-quantized molecular Hamiltonians.

The pipeline: parse integrals (:mod:`trotterr.hamiltonian`), split the
Hamiltonian into ordered Hermitian fragments, build the leading step-error
operator (:mod:`trotterr.trotter`) in a sparse normal-ordered algebra
(:mod:`trotterr.fermion`), then measure it on exact, truncated-CI, and
Haar-random states (:mod:`trotterr.fock`, :mod:`trotterr.ci`,
:mod:`trotterr.haar`, :mod:`trotterr.analysis`) and price the state
preparation (:mod:`trotterr.stateprep`).  :mod:`trotterr.oracle` holds the
dense brute-force cross-checks and :mod:`trotterr.cli` the command-line
front end.
"""

from ._version import __version__
from .analysis import (
    ErrorAnalysisReport,
    PowerLawFit,
    analyze,
    ansatz_error,
    fit_power_law,
    near_zero_fraction,
    orbital_marginals,
)
from .ci import CITruncation, ci_ground_state, hartree_fock_state
from .errors import (
    FcidumpError,
    NumericalError,
    ResourceLimitError,
    TrotterrError,
    ValidationError,
)
from .fermion import (
    LadderOp,
    LadderTerm,
    NormalOrderedOperator,
    ann,
    commutator,
    cre,
    multiply,
    normal_order,
    number_operator,
    operator_sum,
    trace,
)
from .fock import (
    CIVector,
    SectorBasis,
    apply,
    expectation,
    full_spectrum,
    ground_state,
    spectral_norm,
    to_dense,
)
from .haar import (
    EigenstateReport,
    HaarReport,
    eigenstate_error_distribution,
    haar_error_distribution,
    haar_quadratic_form_stats,
    sample_haar_vector,
)
from .hamiltonian import (
    MolecularSystem,
    TrotterSequence,
    build_trotter_sequence,
    load_fcidump,
    parse_fcidump,
    spin_expand,
)
from .oracle import measured_trotter_shift, trotter_propagator
from .stateprep import (
    StatePrepCost,
    cisd_support_dimension,
    prep_cost_report,
    qubit_count,
    select_k,
    t_count_cisd,
)
from .synthetic import random_system
from .trotter import ErrorOperator, build_error_operator, estimate_trotter_number

__all__ = [
    "__version__",
    "ErrorAnalysisReport",
    "PowerLawFit",
    "analyze",
    "ansatz_error",
    "fit_power_law",
    "near_zero_fraction",
    "orbital_marginals",
    "CITruncation",
    "ci_ground_state",
    "hartree_fock_state",
    "FcidumpError",
    "NumericalError",
    "ResourceLimitError",
    "TrotterrError",
    "ValidationError",
    "LadderOp",
    "LadderTerm",
    "NormalOrderedOperator",
    "ann",
    "commutator",
    "cre",
    "multiply",
    "normal_order",
    "number_operator",
    "operator_sum",
    "trace",
    "CIVector",
    "SectorBasis",
    "apply",
    "expectation",
    "full_spectrum",
    "ground_state",
    "spectral_norm",
    "to_dense",
    "EigenstateReport",
    "HaarReport",
    "eigenstate_error_distribution",
    "haar_error_distribution",
    "haar_quadratic_form_stats",
    "sample_haar_vector",
    "MolecularSystem",
    "TrotterSequence",
    "build_trotter_sequence",
    "load_fcidump",
    "parse_fcidump",
    "spin_expand",
    "measured_trotter_shift",
    "trotter_propagator",
    "StatePrepCost",
    "cisd_support_dimension",
    "prep_cost_report",
    "qubit_count",
    "select_k",
    "t_count_cisd",
    "random_system",
    "ErrorOperator",
    "build_error_operator",
    "estimate_trotter_number",
]
