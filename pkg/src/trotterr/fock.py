"""Occupation-number representation on full Fock space and number sectors.

Basis states are integer bitmasks: bit p set means spin orbital p occupied,
and the reference ket orders creation operators by ascending orbital, so
acting with a ladder operator on orbital p contributes the fermionic sign
(-1)^(number of occupied orbitals below p).  Application of a canonical
normal-ordered term proceeds annihilations first, each group applied from
its smallest orbital upward, updating the parity state as it goes.

Operators never materialize matrices unless asked: ``apply`` is the
workhorse, ``to_dense`` exists for small problems and for the dense
eigensolver paths.
"""

from __future__ import annotations

import logging
import math
from itertools import combinations

import numpy as np
import scipy.sparse.linalg

from .errors import NumericalError, ResourceLimitError, ValidationError
from .fermion import NormalOrderedOperator

log = logging.getLogger(__name__)

DENSE_LIMIT = 16384

HERMITIAN_REL_TOL = 1e-8


class SectorBasis:
    """An ordered list of occupation bitmasks spanning a working subspace.

    ``n_electrons`` is None for the full Fock space.  ``states`` may be a
    strict subset of the sector (used by truncated CI), always sorted
    ascending so membership is a binary search.
    """

    __slots__ = ("n_orbitals", "n_electrons", "states")

    def __init__(self, n_orbitals: int, n_electrons: int | None, states: np.ndarray):
        self.n_orbitals = int(n_orbitals)
        self.n_electrons = None if n_electrons is None else int(n_electrons)
        self.states = np.asarray(states, dtype=np.int64)
        if self.states.ndim != 1:
            raise ValidationError("states must be one-dimensional")
        if len(self.states) == 0:
            raise ValidationError("empty basis")
        if np.any(self.states[1:] <= self.states[:-1]):
            raise ValidationError("states must be sorted strictly ascending")
        if self.states[0] < 0 or self.states[-1] >= (1 << self.n_orbitals):
            raise ValidationError("state outside the orbital range")
        if self.n_electrons is not None:
            if not 0 <= self.n_electrons <= self.n_orbitals:
                raise ValidationError(
                    f"n_electrons {self.n_electrons} outside [0, {self.n_orbitals}]"
                )
            if np.any(np.bitwise_count(self.states) != self.n_electrons):
                raise ValidationError("state occupation does not match the sector")

    @classmethod
    def full(cls, n_orbitals: int) -> "SectorBasis":
        return cls(n_orbitals, None, np.arange(1 << n_orbitals, dtype=np.int64))

    @classmethod
    def sector(cls, n_orbitals: int, n_electrons: int) -> "SectorBasis":
        states = [
            sum(1 << p for p in occ)
            for occ in combinations(range(n_orbitals), n_electrons)
        ]
        return cls(n_orbitals, n_electrons, np.sort(np.array(states, dtype=np.int64)))

    @classmethod
    def subset(cls, n_orbitals: int, n_electrons: int, states) -> "SectorBasis":
        return cls(n_orbitals, n_electrons, np.sort(np.asarray(states, dtype=np.int64)))

    @property
    def dim(self) -> int:
        return len(self.states)

    def index_of(self, state: int) -> int:
        idx = int(np.searchsorted(self.states, state))
        if idx >= self.dim or self.states[idx] != state:
            raise ValidationError(f"state {state:b} not in basis")
        return idx

    def __repr__(self) -> str:
        sector = "full" if self.n_electrons is None else f"n={self.n_electrons}"
        return f"SectorBasis(N={self.n_orbitals}, {sector}, dim={self.dim})"


class CIVector:
    """Real amplitudes over a :class:`SectorBasis`."""

    __slots__ = ("basis", "amplitudes")

    def __init__(self, basis: SectorBasis, amplitudes: np.ndarray):
        amplitudes = np.asarray(amplitudes, dtype=float)
        if amplitudes.shape != (basis.dim,):
            raise ValidationError(
                f"amplitude shape {amplitudes.shape} != ({basis.dim},)"
            )
        self.basis = basis
        self.amplitudes = amplitudes

    @classmethod
    def unit(cls, basis: SectorBasis, state: int) -> "CIVector":
        amp = np.zeros(basis.dim)
        amp[basis.index_of(state)] = 1.0
        return cls(basis, amp)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "CIVector":
        n = self.norm()
        if n == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        return CIVector(self.basis, self.amplitudes / n)

    def dot(self, other: "CIVector") -> float:
        return float(self.amplitudes @ other.amplitudes)


def _check_operator(op: NormalOrderedOperator, basis: SectorBasis) -> None:
    if op.max_orbital() >= basis.n_orbitals:
        raise ValidationError(
            f"operator touches orbital {op.max_orbital()}, basis has "
            f"{basis.n_orbitals}"
        )
    if basis.n_electrons is not None and not op.conserves_particle_number():
        raise ValidationError(
            "operator does not conserve particle number; use a full Fock basis"
        )


def _term_action(key, states: np.ndarray):
    """Vectorized action of one canonical key on an array of bitmasks.

    Returns (source positions, image bitmasks, signs); sources whose image
    vanishes are dropped.
    """
    creations, annihilations = key
    amask = 0
    for p in annihilations:
        amask |= 1 << p
    cmask = 0
    for p in creations:
        cmask |= 1 << p
    occupied = (states & amask) == amask
    stripped = states[occupied] & ~np.int64(amask)
    creatable = (stripped & cmask) == 0
    src = np.flatnonzero(occupied)[creatable]
    cur = stripped[creatable]
    sign = np.ones(len(cur), dtype=np.int64)
    # annihilations act smallest orbital first (rightmost in the string)
    for p in reversed(annihilations):
        bit = np.int64(1 << p)
        below = np.int64((1 << p) - 1)
        parity = np.bitwise_count(cur & below) & 1
        sign = np.where(parity, -sign, sign)
        cur = cur & ~bit
    for p in reversed(creations):
        bit = np.int64(1 << p)
        below = np.int64((1 << p) - 1)
        parity = np.bitwise_count(cur & below) & 1
        sign = np.where(parity, -sign, sign)
        cur = cur | bit
    return src, cur, sign


def apply(op: NormalOrderedOperator, vector: CIVector) -> CIVector:
    """Matrix-free ``op @ vector``; components leaving a subset basis are
    projected away (that is exactly the subspace-restricted operator)."""
    basis = vector.basis
    _check_operator(op, basis)
    out = np.zeros(basis.dim)
    v = vector.amplitudes
    states = basis.states
    for key, coeff in op.terms.items():
        src, images, sign = _term_action(key, states)
        if not len(src):
            continue
        pos = np.searchsorted(states, images)
        pos[pos >= basis.dim] = basis.dim - 1
        found = states[pos] == images
        out[pos[found]] += coeff * sign[found] * v[src[found]]
    return CIVector(basis, out)


def to_dense(
    op: NormalOrderedOperator,
    basis: SectorBasis,
    *,
    dense_limit: int = DENSE_LIMIT,
) -> np.ndarray:
    """Dense matrix of ``op`` restricted to ``basis`` (column = source)."""
    _check_operator(op, basis)
    if basis.dim > dense_limit:
        raise ResourceLimitError(
            f"dense matrix of dim {basis.dim} exceeds limit {dense_limit}"
        )
    states = basis.states
    mat = np.zeros((basis.dim, basis.dim))
    for key, coeff in op.terms.items():
        src, images, sign = _term_action(key, states)
        if not len(src):
            continue
        pos = np.searchsorted(states, images)
        pos[pos >= basis.dim] = basis.dim - 1
        found = states[pos] == images
        mat[pos[found], src[found]] += coeff * sign[found]
    return mat


def expectation(op: NormalOrderedOperator, vector: CIVector) -> float:
    """<v|op|v> / <v|v>; warns when the input was not normalized."""
    nrm2 = float(vector.amplitudes @ vector.amplitudes)
    if nrm2 == 0.0:
        raise ValidationError("expectation of the zero vector")
    if abs(nrm2 - 1.0) > 1e-8:
        log.warning("expectation input norm %.6f != 1; normalizing", math.sqrt(nrm2))
    return vector.dot(apply(op, vector)) / nrm2


def _require_hermitian(op: NormalOrderedOperator) -> None:
    defect = op.hermitian_defect()
    if defect > HERMITIAN_REL_TOL * max(1.0, op.coefficient_l1()):
        raise ValidationError(f"operator is not Hermitian (defect {defect:.3e})")


def _linear_operator(op: NormalOrderedOperator, basis: SectorBasis):
    def matvec(x):
        return apply(op, CIVector(basis, x)).amplitudes

    return scipy.sparse.linalg.LinearOperator(
        (basis.dim, basis.dim), matvec=matvec, dtype=float
    )


def ground_state(
    op: NormalOrderedOperator,
    basis: SectorBasis,
    *,
    dense_limit: int = DENSE_LIMIT,
    residual_tol: float = 1e-8,
) -> tuple[float, CIVector]:
    """Minimal eigenpair of a Hermitian operator on ``basis``.

    Dense diagonalization up to ``dense_limit`` states, Lanczos beyond; the
    residual norm ||H v - E v|| is verified against ``residual_tol`` either
    way.
    """
    _check_operator(op, basis)
    _require_hermitian(op)
    if basis.dim <= dense_limit:
        mat = to_dense(op, basis, dense_limit=dense_limit)
        vals, vecs = np.linalg.eigh(mat)
        energy, vec = float(vals[0]), vecs[:, 0]
    else:
        try:
            vals, vecs = scipy.sparse.linalg.eigsh(
                _linear_operator(op, basis), k=1, which="SA", tol=residual_tol / 10
            )
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            raise NumericalError(f"Lanczos did not converge: {exc}") from exc
        energy, vec = float(vals[0]), vecs[:, 0]
    state = CIVector(basis, vec)
    residual = apply(op, state).amplitudes - energy * state.amplitudes
    rnorm = float(np.linalg.norm(residual))
    if rnorm > residual_tol * max(1.0, abs(energy)):
        raise NumericalError(f"eigenpair residual {rnorm:.3e} too large")
    return energy, state


def spectral_norm(
    op: NormalOrderedOperator,
    basis: SectorBasis,
    *,
    dense_limit: int = DENSE_LIMIT,
    rel_tol: float = 1e-8,
) -> float:
    """Largest |eigenvalue| of a Hermitian operator on ``basis``."""
    _check_operator(op, basis)
    _require_hermitian(op)
    if basis.dim <= dense_limit:
        vals = np.linalg.eigvalsh(to_dense(op, basis, dense_limit=dense_limit))
        return float(np.max(np.abs(vals))) if len(vals) else 0.0
    linop = _linear_operator(op, basis)
    try:
        hi = scipy.sparse.linalg.eigsh(
            linop, k=1, which="LA", tol=rel_tol, return_eigenvectors=False
        )
        lo = scipy.sparse.linalg.eigsh(
            linop, k=1, which="SA", tol=rel_tol, return_eigenvectors=False
        )
    except scipy.sparse.linalg.ArpackNoConvergence as exc:
        raise NumericalError(f"Lanczos did not converge: {exc}") from exc
    return float(max(abs(hi[0]), abs(lo[0])))


def full_spectrum(
    op: NormalOrderedOperator,
    basis: SectorBasis,
    *,
    dense_limit: int = DENSE_LIMIT,
) -> np.ndarray:
    """All eigenvalues ascending (dense path only)."""
    _check_operator(op, basis)
    _require_hermitian(op)
    return np.linalg.eigvalsh(to_dense(op, basis, dense_limit=dense_limit))
