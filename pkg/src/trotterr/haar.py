"""Haar-random-vector statistics for error operators.

For a Haar-random unit vector v in dimension d, the squared overlaps
(|<v|1>|^2, ..., |<v|d>|^2) against any fixed orthonormal basis follow a
flat Dirichlet distribution: Dirichlet(1, ..., 1) for the complex-unitary
ensemble, Dirichlet(1/2, ..., 1/2) for the real-orthogonal one.  Every
moment used below follows from that fact:

    E |a_k|^2                      = 1/d            (both ensembles)
    Var |a_k|^2                    = (d-1)/(d^2(d+1))    complex
                                   = 2(d-1)/(d^2(d+2))   real
    Cov(|a_j|^2, |a_k|^2), j != k  = -1/(d^2(d+1))       complex
                                   = -2/(d^2(d+2))       real

A Hermitian operator with eigenvalues lambda_k has <v|V|v> =
sum_k lambda_k |a_k|^2 over its own eigenbasis, so the variance of the
expectation value picks up the cross covariances:

    Var <v|V|v> = (d sum(lambda^2) - (sum lambda)^2) / (d^2 (d+1))

for the complex ensemble (replace d+1 by d+2 and double for the real
one).  Treating the components as uncorrelated would give
sum(lambda^2) * Var|a_k|^2 instead, which for a traceless spectrum
undercounts by exactly d/(d-1); the distinction is measurable at small
dimension (d=2, spectrum {+1, -1}: the true variance is 1/3, since
<v|V|v> is then uniform on [-1, 1]).

Sampling exploits unitary invariance: the overlap weights against the
operator's eigenbasis are distributed identically to those against the
computational basis, so the sampler draws normalized squared Gaussians
directly and never materializes vectors or matrices per sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .fermion import NormalOrderedOperator
from .fock import DENSE_LIMIT, SectorBasis, full_spectrum, to_dense
from .trotter import ErrorOperator

ENSEMBLES = ("complex", "real")

# samples per independently seeded block; determinism contract is
# (seed, block_size), so changing the default would change output streams
SAMPLE_BLOCK = 8192


def _check_ensemble(ensemble: str) -> None:
    if ensemble not in ENSEMBLES:
        raise ValidationError(f"unknown ensemble {ensemble!r}; choose from {ENSEMBLES}")


def squared_overlap_moments(
    dim: int, ensemble: str = "complex"
) -> tuple[float, float, float]:
    """(mean, variance, cross covariance) of a single squared overlap."""
    _check_ensemble(ensemble)
    if dim < 1:
        raise ValidationError(f"dim must be >= 1, got {dim}")
    d = float(dim)
    if ensemble == "complex":
        denom = d * d * (d + 1.0)
        return 1.0 / d, (d - 1.0) / denom, -1.0 / denom
    denom = d * d * (d + 2.0)
    return 1.0 / d, 2.0 * (d - 1.0) / denom, -2.0 / denom


def haar_projection_variance(n_orbitals: int) -> float:
    """Variance of |<v|k>|^2 for a complex Haar vector on 2^N dimensions.

    Equal to 2/(2^N(2^N+1)) - 1/4^N, evaluated in the cancellation-free
    form (d-1)/(d^2(d+1)).
    """
    if n_orbitals < 1:
        raise ValidationError(f"n_orbitals must be >= 1, got {n_orbitals}")
    return squared_overlap_moments(1 << n_orbitals)[1]


def haar_quadratic_form_stats(
    eigenvalues, *, ensemble: str = "complex"
) -> tuple[float, float]:
    """Closed-form (mean, variance) of sum_k lambda_k |a_k|^2."""
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise ValidationError("eigenvalues must be a nonempty 1-d sequence")
    _, var_c, cov = squared_overlap_moments(lam.size, ensemble)
    s1 = float(lam.sum())
    s2 = float(lam @ lam)
    return s1 / lam.size, var_c * s2 + cov * (s1 * s1 - s2)


def sample_haar_vector(
    dim: int, rng: np.random.Generator, *, ensemble: str = "complex"
) -> np.ndarray:
    """One Haar-random unit vector of length ``dim``.

    Normalized i.i.d. standard Gaussians; the complex ensemble pairs two
    real Gaussians per component.  The resulting distribution is invariant
    under every fixed rotation from the matching group.
    """
    _check_ensemble(ensemble)
    if dim < 1:
        raise ValidationError(f"dim must be >= 1, got {dim}")
    while True:
        v = rng.standard_normal(dim)
        if ensemble == "complex":
            v = v + 1j * rng.standard_normal(dim)
        norm = np.linalg.norm(v)
        if norm > 1e-6:  # a zero draw has measure zero; guard anyway
            return v / norm


def _sample_quadratic_form(
    lam: np.ndarray, n_samples: int, seed: int, ensemble: str, block_size: int
) -> np.ndarray:
    """sum_k lambda_k |a_k|^2 for ``n_samples`` independent Haar vectors.

    Blocks of ``block_size`` samples each get their own child seed, so the
    stream is reproducible for a fixed (seed, block_size) no matter how
    blocks are scheduled.
    """
    out = np.empty(n_samples)
    n_blocks = -(-n_samples // block_size)
    start = 0
    for child in np.random.SeedSequence(seed).spawn(n_blocks):
        rng = np.random.default_rng(child)
        count = min(block_size, n_samples - start)
        g = rng.standard_normal((count, lam.size))
        w = g * g
        if ensemble == "complex":
            g = rng.standard_normal((count, lam.size))
            w += g * g
        out[start : start + count] = (w @ lam) / w.sum(axis=1)
        start += count
    return out


@dataclass(frozen=True, eq=False)
class HaarReport:
    """Monte Carlo summary of <v|V|v> over Haar-random vectors.

    ``closed_form_variance`` includes the overlap cross covariances (see
    the module docstring); ``component_variance`` is the single-overlap
    variance for the same ensemble, recorded for reference.
    ``concentration_bound`` is sqrt(sum lambda^2)/d, the scale on which
    the distribution concentrates; ``within_bound_fraction`` counts
    samples with |value| <= 3x that scale.
    """

    n_samples: int
    seed: int
    ensemble: str
    dim: int
    empirical_mean: float
    empirical_variance: float
    closed_form_mean: float
    closed_form_variance: float
    component_variance: float
    concentration_bound: float
    within_bound_fraction: float
    samples: np.ndarray = field(repr=False)

    def mean_standard_error(self) -> float:
        return math.sqrt(self.empirical_variance / self.n_samples)

    def mean_is_unbiased(self, n_sigma: float = 3.0) -> bool:
        """|empirical mean - closed-form mean| within ``n_sigma`` standard
        errors; the zero-variance case demands exact agreement."""
        gap = abs(self.empirical_mean - self.closed_form_mean)
        return gap <= n_sigma * self.mean_standard_error()


def haar_error_distribution(
    error: ErrorOperator,
    basis: SectorBasis,
    n_samples: int,
    seed: int,
    *,
    ensemble: str = "complex",
    block_size: int = SAMPLE_BLOCK,
    dense_limit: int = DENSE_LIMIT,
) -> HaarReport:
    """Sample <v|V|v> over Haar-random unit vectors on ``basis``.

    One dense diagonalization up front, then O(dim) per sample; the
    stream is bit-reproducible given (seed, block_size, ensemble).
    """
    _check_ensemble(ensemble)
    if n_samples < 2:
        raise ValidationError(f"need n_samples >= 2, got {n_samples}")
    if not 0 <= seed < 1 << 64:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if block_size < 1:
        raise ValidationError(f"block_size must be >= 1, got {block_size}")
    lam = full_spectrum(error.op, basis, dense_limit=dense_limit)
    samples = _sample_quadratic_form(lam, n_samples, seed, ensemble, block_size)
    mean, var = haar_quadratic_form_stats(lam, ensemble=ensemble)
    bound = math.sqrt(float(lam @ lam)) / basis.dim
    return HaarReport(
        n_samples=n_samples,
        seed=seed,
        ensemble=ensemble,
        dim=basis.dim,
        empirical_mean=float(samples.mean()),
        empirical_variance=float(samples.var(ddof=1)),
        closed_form_mean=mean,
        closed_form_variance=var,
        component_variance=squared_overlap_moments(basis.dim, ensemble)[1],
        concentration_bound=bound,
        within_bound_fraction=float(np.mean(np.abs(samples) <= 3.0 * bound)),
        samples=samples,
    )


@dataclass(frozen=True, eq=False)
class EigenstateReport:
    """<psi_i|V|psi_i> across a complete eigenbasis of some Hamiltonian.

    ``degenerate_clusters`` lists (first index, multiplicity) for every
    group of eigenvalues the dense solver could not separate; inside such
    a group the individual expectation values depend on the arbitrary
    basis the solver returned.
    """

    energies: np.ndarray
    errors: np.ndarray
    std_dev: float
    degenerate_clusters: tuple[tuple[int, int], ...]

    @property
    def has_degeneracies(self) -> bool:
        return bool(self.degenerate_clusters)


def eigenstate_error_distribution(
    error: ErrorOperator,
    hamiltonian: NormalOrderedOperator,
    basis: SectorBasis,
    *,
    dense_limit: int = DENSE_LIMIT,
    degeneracy_tol: float = 1e-8,
) -> EigenstateReport:
    """Error expectation on every eigenvector of ``hamiltonian``.

    Eigenvalues closer than ``degeneracy_tol`` relative to the spectral
    radius are flagged as one degenerate cluster (chained gaps merge).
    """
    hmat = to_dense(hamiltonian, basis, dense_limit=dense_limit)
    defect = float(np.max(np.abs(hmat - hmat.T)))
    if defect > 1e-8 * max(1.0, float(np.max(np.abs(hmat)))):
        raise ValidationError(f"hamiltonian is not symmetric here (defect {defect:.3e})")
    vals, vecs = np.linalg.eigh(hmat)
    vmat = to_dense(error.op, basis, dense_limit=dense_limit)
    errors = np.einsum("ji,jk,ki->i", vecs, vmat, vecs, optimize=True)
    scale = max(1.0, float(np.max(np.abs(vals))))
    clusters = []
    start = 0
    for i in range(1, basis.dim + 1):
        if i == basis.dim or vals[i] - vals[i - 1] > degeneracy_tol * scale:
            if i - start > 1:
                clusters.append((start, i - start))
            start = i
    return EigenstateReport(
        energies=vals,
        errors=errors,
        std_dev=float(np.std(errors)),
        degenerate_clusters=tuple(clusters),
    )
