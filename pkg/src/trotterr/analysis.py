"""Top-level error-operator analyses with reproducible, serializable output.

The centerpiece is :func:`analyze`, which chains fragment construction, the
step-error operator, exact and truncated-CI ground states, and the Trotter
number estimate into one report.  Everything in the report is a pure
function of (integrals, ordering, step size, options), so serializing it
twice yields byte-identical JSON; no timestamps, no machine identifiers.

Supporting analyses mirror the report's ingredients at smaller granularity:
``ansatz_error`` for a single truncation level, ``orbital_marginals`` for
the per-orbital-pair magnitude distribution of the error terms, and
``fit_power_law`` for log-log scaling estimates.
"""

from __future__ import annotations

import json
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ._version import __version__
from .ci import CITruncation, ci_ground_state, hartree_fock_state
from .errors import NumericalError, ValidationError
from .fock import (
    DENSE_LIMIT,
    CIVector,
    SectorBasis,
    expectation,
    ground_state,
    spectral_norm,
)
from .hamiltonian import MolecularSystem, build_trotter_sequence
from .trotter import ErrorOperator, build_error_operator, estimate_trotter_number

SCHEMA_VERSION = 1

SPACES = ("sector", "full")

# eigenvalues within this fraction of the largest magnitude count as "near
# zero" for the spectral concentration statistic
NEAR_ZERO_WINDOW = 0.1


# ---------------------------------------------------------------------------
# Power-law fitting.
# ---------------------------------------------------------------------------


class PowerLawFit(NamedTuple):
    exponent: float
    prefactor: float
    r_squared: float


def fit_power_law(points: Sequence[tuple[float, float]]) -> PowerLawFit:
    """Least-squares line through (log x, log y).

    Returns the slope as the exponent, exp(intercept) as the prefactor, and
    the coefficient of determination computed in log space, which is where
    the fit lives.
    """
    if len(points) < 3:
        raise ValidationError(f"need at least 3 points, got {len(points)}")
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    if np.any(xs <= 0) or np.any(ys <= 0) or not (
        np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))
    ):
        raise ValidationError("power-law fit needs finite positive data")
    lx, ly = np.log(xs), np.log(ys)
    if np.ptp(lx) == 0.0:
        raise NumericalError("all x values coincide; the fit is singular")
    slope, intercept = np.polyfit(lx, ly, 1)
    residuals = ly - (slope * lx + intercept)
    ss_res = float(residuals @ residuals)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return PowerLawFit(float(slope), float(np.exp(intercept)), r_squared)


# ---------------------------------------------------------------------------
# Orbital-pair magnitude marginals.
# ---------------------------------------------------------------------------


def orbital_marginals(
    error: ErrorOperator, n_orbitals: int | None = None
) -> np.ndarray:
    """Per-orbital-pair magnitude distribution of the error terms.

    ``M[i, j]`` sums |coefficient| over every term whose ladder-index
    multiset contains both i and j; the diagonal ``M[i, i]`` requires
    orbital i at least twice (for example a number operator).  A term
    spanning more than two distinct orbitals contributes its full magnitude
    to every unordered pair it touches, so this is a marginal distribution;
    row/column sums intentionally overcount the total norm.
    """
    op = error.op
    if n_orbitals is None:
        n_orbitals = error.n_spin_orbitals
    if op.max_orbital() >= n_orbitals:
        raise ValidationError(
            f"operator touches orbital {op.max_orbital()}, matrix has {n_orbitals}"
        )
    mat = np.zeros((n_orbitals, n_orbitals))
    for (creations, annihilations), coeff in op.terms.items():
        counts: dict[int, int] = {}
        for p in creations + annihilations:
            counts[p] = counts.get(p, 0) + 1
        orbitals = sorted(counts)
        weight = abs(coeff)
        for a_idx, i in enumerate(orbitals):
            if counts[i] >= 2:
                mat[i, i] += weight
            for j in orbitals[a_idx + 1 :]:
                mat[i, j] += weight
                mat[j, i] += weight
    return mat


def near_zero_fraction(
    eigenvalues: np.ndarray, *, window: float = NEAR_ZERO_WINDOW
) -> float:
    """Fraction of eigenvalues within ``window`` of the spectral radius
    around zero; a uniform spectrum scores ~``window``, a sharply peaked
    one much higher."""
    values = np.asarray(eigenvalues, dtype=float)
    if values.size == 0:
        raise ValidationError("empty spectrum")
    if not 0 < window <= 1:
        raise ValidationError(f"window must be in (0, 1], got {window}")
    radius = float(np.max(np.abs(values)))
    if radius == 0.0:
        return 1.0
    return float(np.mean(np.abs(values) <= window * radius))


# ---------------------------------------------------------------------------
# CI-ansatz error estimates.
# ---------------------------------------------------------------------------


def embed_in_sector(vector: CIVector, sector: SectorBasis) -> CIVector:
    """Zero-pad a subset-basis vector onto the enclosing sector basis."""
    amplitudes = np.zeros(sector.dim)
    for idx, state in enumerate(vector.basis.states):
        amplitudes[sector.index_of(int(state))] = vector.amplitudes[idx]
    return CIVector(sector, amplitudes)


def ansatz_error(
    system: MolecularSystem,
    trunc: CITruncation,
    error: ErrorOperator,
    *,
    dense_limit: int = DENSE_LIMIT,
) -> float:
    """Expectation of the error operator on the truncated-CI ground state.

    The CI vector is solved in its excitation subspace, then zero-padded
    into the full particle-number sector so the error operator acts without
    any projection.
    """
    _, ci_vec = ci_ground_state(system, trunc, dense_limit=dense_limit)
    sector = SectorBasis.sector(system.n_spin_orbitals, system.n_electrons)
    return expectation(error.op, embed_in_sector(ci_vec, sector))


# ---------------------------------------------------------------------------
# The full analysis report.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CILevelResult:
    level: int
    subspace_dim: int
    energy: float
    ansatz_error: float
    residual_fraction: float | None


@dataclass(frozen=True)
class ErrorAnalysisReport:
    schema_version: int
    tool_version: str
    molecule: str
    orbital_kind: str
    source_sha256: str
    n_spin_orbitals: int
    n_electrons: int
    z_max: int
    space: str
    ordering_label: str
    n_fragments: int
    delta_t: float
    ground_state_energy: float
    ground_state_error: float
    spectral_norm: float
    ratio: float
    error_term_count: int
    error_l1: float
    ci_results: tuple[CILevelResult, ...]
    evolution_time: float
    target_delta: float
    recommended_trotter_number: int
    seeds: tuple[int, ...]

    def to_json(self) -> str:
        """Canonical serialization: sorted keys, two-space indent, trailing
        newline.  Byte-identical across repeated runs by construction."""
        return (
            json.dumps(asdict(self), sort_keys=True, indent=2, allow_nan=False)
            + "\n"
        )


@contextmanager
def _stage(name: str):
    """Prefix any package error with the pipeline stage that raised it."""
    try:
        yield
    except (ValidationError, NumericalError) as exc:
        raise type(exc)(f"{name}: {exc}") from exc


def _default_ci_levels(system: MolecularSystem) -> tuple[int, ...]:
    cap = min(
        system.n_electrons, system.n_spin_orbitals - system.n_electrons
    )
    return tuple(k for k in (0, 1, 2) if k <= cap)


def analyze(
    system: MolecularSystem,
    *,
    delta_t: float = 1.0,
    ordering: str = "lexicographic",
    granularity: str = "integral",
    space: str = "sector",
    ci_levels: Sequence[int] | None = None,
    evolution_time: float = 1.0,
    target_delta: float = 1e-3,
    dense_limit: int = DENSE_LIMIT,
    seeds: Sequence[int] = (),
    source_sha256: str = "",
) -> ErrorAnalysisReport:
    """Ground-state error, operator norm, CI-ansatz corrections, and the
    resulting Trotter number for one molecular system.

    ``space`` selects where the expectation and norm are taken: the
    physical particle-number sector (default) or the full occupation space
    for comparison.  ``ci_levels`` defaults to reference/singles/doubles
    clamped to what the system supports; explicitly requested levels are
    not clamped and propagate their own errors.
    """
    if space not in SPACES:
        raise ValidationError(f"unknown space {space!r}; use one of {SPACES}")
    with _stage("fragment sequence"):
        sequence = build_trotter_sequence(system, ordering, granularity=granularity)
    with _stage("error operator"):
        error = build_error_operator(sequence, delta_t)
    if space == "sector":
        basis = SectorBasis.sector(system.n_spin_orbitals, system.n_electrons)
    else:
        basis = SectorBasis.full(system.n_spin_orbitals)
    with _stage("ground state"):
        energy, psi0 = ground_state(
            system.hamiltonian(), basis, dense_limit=dense_limit
        )
    with _stage("ground-state error"):
        signed_error = expectation(error.op, psi0)
    gs_error = abs(signed_error)
    with _stage("spectral norm"):
        norm = spectral_norm(error.op, basis, dense_limit=dense_limit)
    ratio = gs_error / norm if norm > 0.0 else 0.0
    if ratio > 1.0 + 1e-12:
        raise NumericalError(f"Rayleigh bound violated: ratio {ratio}")

    levels = _default_ci_levels(system) if ci_levels is None else tuple(ci_levels)
    reference = hartree_fock_state(system)
    ci_results = []
    for level in levels:
        trunc = CITruncation(level=level, reference=reference)
        with _stage(f"CI level {level}"):
            ci_energy, ci_vec = ci_ground_state(
                system, trunc, dense_limit=dense_limit
            )
            sector = SectorBasis.sector(
                system.n_spin_orbitals, system.n_electrons
            )
            level_error = expectation(error.op, embed_in_sector(ci_vec, sector))
        # signed difference: an ansatz with the wrong sign must not look good
        residual = (
            abs(signed_error - level_error) / gs_error if gs_error > 0.0 else None
        )
        ci_results.append(
            CILevelResult(
                level=level,
                subspace_dim=ci_vec.basis.dim,
                energy=ci_energy,
                ansatz_error=level_error,
                residual_fraction=residual,
            )
        )

    with _stage("Trotter number"):
        mu = estimate_trotter_number(gs_error, evolution_time, target_delta)

    return ErrorAnalysisReport(
        schema_version=SCHEMA_VERSION,
        tool_version=__version__,
        molecule=system.basis_label,
        orbital_kind=system.orbital_kind,
        source_sha256=source_sha256,
        n_spin_orbitals=system.n_spin_orbitals,
        n_electrons=system.n_electrons,
        z_max=system.z_max,
        space=space,
        ordering_label=error.ordering_label,
        n_fragments=error.n_fragments,
        delta_t=delta_t,
        ground_state_energy=energy,
        ground_state_error=gs_error,
        spectral_norm=norm,
        ratio=ratio,
        error_term_count=len(error.op.terms),
        error_l1=error.coefficient_l1(),
        ci_results=tuple(ci_results),
        evolution_time=evolution_time,
        target_delta=target_delta,
        recommended_trotter_number=mu,
        seeds=tuple(int(s) for s in seeds),
    )


# ---------------------------------------------------------------------------
# CSV renderings for external plotting.
# ---------------------------------------------------------------------------


def marginals_csv(matrix: np.ndarray) -> str:
    """Square magnitude-marginal matrix as CSV: one row per line, with a
    header naming the convention."""
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {mat.shape}")
    lines = ["# orbital-pair magnitude marginals M[i][j], hartree, row per orbital i"]
    lines.extend(",".join(repr(v) for v in row) for row in mat.tolist())
    return "\n".join(lines) + "\n"


def spectrum_csv(eigenvalues: np.ndarray) -> str:
    """Eigenvalues ascending, one per line."""
    values = sorted(float(v) for v in np.asarray(eigenvalues, dtype=float))
    lines = ["# eigenvalue, hartree, ascending"]
    lines.extend(repr(v) for v in values)
    return "\n".join(lines) + "\n"
