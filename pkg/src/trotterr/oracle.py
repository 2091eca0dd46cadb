"""Dense brute-force verification of the product formula.

This is the only module that touches complex arithmetic: it exponentiates
the fragment matrices explicitly, measures eigenphase shifts of the
resulting unitary, and extrapolates them to the leading-order prediction.
Everything here is meant for small bases (the dense limit), where it serves
as the ground truth that the perturbative machinery is checked against.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import NumericalError, ResourceLimitError, ValidationError
from .fock import DENSE_LIMIT, SectorBasis, to_dense
from .hamiltonian import TrotterSequence

UNITARITY_TOL = 1e-10


def trotter_propagator(
    seq: TrotterSequence,
    delta_t: float,
    basis: SectorBasis,
    *,
    dense_limit: int = DENSE_LIMIT,
) -> np.ndarray:
    """One second-order step: half-step exponentials of every fragment in
    reverse order, then the same exponentials in forward order."""
    if not delta_t > 0:
        raise ValidationError(f"delta_t must be positive, got {delta_t}")
    if basis.dim > dense_limit:
        raise ResourceLimitError(
            f"propagator of dim {basis.dim} exceeds limit {dense_limit}"
        )
    halves = [
        scipy.linalg.expm(-0.5j * delta_t * to_dense(f, basis, dense_limit=dense_limit))
        for f in seq.fragments
    ]
    u = np.eye(basis.dim, dtype=complex)
    for h in reversed(halves):
        u = u @ h
    for h in halves:
        u = u @ h
    defect = np.linalg.norm(u.conj().T @ u - np.eye(basis.dim), ord=2)
    if defect > UNITARITY_TOL:
        raise NumericalError(f"propagator not unitary (defect {defect:.3e})")
    return u


def _unitary_eigensystem(u: np.ndarray):
    """Eigenphases and orthonormal eigenvectors of a unitary matrix.

    A complex Schur decomposition of a normal matrix is already an
    eigendecomposition with orthonormal vectors, which is far better
    conditioned than a generic eigensolver.
    """
    t, z = scipy.linalg.schur(u, output="complex")
    off = np.linalg.norm(t - np.diag(np.diag(t)))
    if off > 1e-8:
        raise NumericalError(f"Schur form not diagonal (off-norm {off:.3e})")
    return np.angle(np.diag(t)), z


def measured_trotter_shift(
    seq: TrotterSequence,
    delta_t: float,
    basis: SectorBasis,
    state_index: int,
    *,
    dense_limit: int = DENSE_LIMIT,
) -> float:
    """Empirical eigenvalue shift of one Hamiltonian level under Trotterization.

    Diagonalizes both H and the step unitary, matches the target level to a
    unitary eigenvector by maximum overlap, and returns
    (eigenphase / (-delta_t)) - E_i.  This is the quantity the error
    operator expectation predicts to leading order.
    """
    h = to_dense(seq.total(), basis, dense_limit=dense_limit)
    energies, vectors = np.linalg.eigh(h)
    if not 0 <= state_index < basis.dim:
        raise ValidationError(f"state_index {state_index} outside basis")
    e_true = float(energies[state_index])
    if abs(e_true * delta_t) >= np.pi:
        raise ValidationError(
            f"|E delta_t| = {abs(e_true * delta_t):.3f} >= pi: eigenphase wraps; "
            "reduce delta_t"
        )
    u = trotter_propagator(seq, delta_t, basis, dense_limit=dense_limit)
    phases, z = _unitary_eigensystem(u)
    target = vectors[:, state_index].astype(complex)
    overlaps = np.abs(z.conj().T @ target) ** 2
    best = int(np.argmax(overlaps))
    if overlaps[best] < 0.5:
        raise NumericalError(
            f"ambiguous eigenvector match (best overlap {overlaps[best]:.3f}); "
            "level may be degenerate"
        )
    measured = -float(phases[best]) / delta_t
    return measured - e_true


def matched_spectrum_deviation(
    seq: TrotterSequence,
    delta_t: float,
    basis: SectorBasis,
    *,
    dense_limit: int = DENSE_LIMIT,
) -> float:
    """Max |eigenphase energy - H eigenvalue| over all overlap-matched levels."""
    h = to_dense(seq.total(), basis, dense_limit=dense_limit)
    energies, vectors = np.linalg.eigh(h)
    u = trotter_propagator(seq, delta_t, basis, dense_limit=dense_limit)
    phases, z = _unitary_eigensystem(u)
    overlap = np.abs(z.conj().T @ vectors.astype(complex)) ** 2
    worst = 0.0
    for i in range(basis.dim):
        j = int(np.argmax(overlap[:, i]))
        worst = max(worst, abs(-float(phases[j]) / delta_t - float(energies[i])))
    return worst


def richardson_shift_coefficient(
    seq: TrotterSequence,
    basis: SectorBasis,
    state_index: int,
    *,
    deltas: tuple[float, ...] = (0.1, 0.05, 0.025),
    dense_limit: int = DENSE_LIMIT,
) -> float:
    """Extrapolated delta_t**2 coefficient of the measured shift.

    Divides each measured shift by delta_t**2 and removes the remaining
    even-order corrections with a Richardson table over successively halved
    steps, so the result approximates the prediction at delta_t = 1.
    """
    if len(deltas) < 2:
        raise ValidationError("need at least two step sizes")
    for a, b in zip(deltas, deltas[1:]):
        if not np.isclose(b, a / 2):
            raise ValidationError("step sizes must halve at each stage")
    rows = [
        measured_trotter_shift(seq, dt, basis, state_index, dense_limit=dense_limit)
        / (dt * dt)
        for dt in deltas
    ]
    order = 2
    while len(rows) > 1:
        factor = 4.0 ** (order // 2)
        rows = [
            (factor * lower - upper) / (factor - 1.0)
            for upper, lower in zip(rows, rows[1:])
        ]
        order += 2
    return float(rows[0])
