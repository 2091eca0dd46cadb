"""Hartree-Fock reference and truncated configuration interaction.

Truncation level k keeps all configurations within k particle-hole
excitations of the reference determinant: k=0 is the bare reference, k=1
adds singles (CIS), k=2 doubles (CISD), and k = N - n recovers full CI.
The variational problem is the Hamiltonian projected onto that subspace,
which the Fock-space machinery solves directly on a subset basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

from .errors import ValidationError
from .fock import DENSE_LIMIT, CIVector, SectorBasis, ground_state
from .hamiltonian import MolecularSystem


@dataclass(frozen=True)
class CITruncation:
    """Excitation cutoff relative to a reference determinant bitmask."""

    level: int
    reference: int

    def __post_init__(self):
        if self.level < 0:
            raise ValidationError(f"truncation level must be >= 0, got {self.level}")
        if self.reference < 0:
            raise ValidationError("reference bitmask must be non-negative")


def hartree_fock_state(system: MolecularSystem) -> int:
    """Reference determinant: the n lowest spin orbitals occupied.

    Orbitals are assumed energy-ordered in the integral file; that is the
    fixture's responsibility and is documented there.
    """
    if system.n_electrons > system.n_spin_orbitals:
        raise ValidationError("more electrons than spin orbitals")
    return (1 << system.n_electrons) - 1


def excitation_count(n_orbitals: int, n_electrons: int, level: int) -> int:
    """Number of configurations within ``level`` excitations of a reference."""
    virtual = n_orbitals - n_electrons
    return sum(comb(n_electrons, j) * comb(virtual, j) for j in range(level + 1))


def excitation_basis(trunc: CITruncation, n_orbitals: int) -> SectorBasis:
    """All configurations within ``trunc.level`` excitations of the reference."""
    ref = trunc.reference
    if ref >= (1 << n_orbitals):
        raise ValidationError("reference uses orbitals outside the basis")
    occupied = [p for p in range(n_orbitals) if ref >> p & 1]
    virtual = [p for p in range(n_orbitals) if not ref >> p & 1]
    if trunc.level > len(virtual):
        raise ValidationError(
            f"level {trunc.level} exceeds N - n = {len(virtual)}"
        )
    states = set()
    for j in range(min(trunc.level, len(occupied)) + 1):
        for holes in combinations(occupied, j):
            removed = ref
            for p in holes:
                removed ^= 1 << p
            for parts in combinations(virtual, j):
                state = removed
                for p in parts:
                    state |= 1 << p
                states.add(state)
    return SectorBasis.subset(n_orbitals, len(occupied), sorted(states))


def ci_ground_state(
    system: MolecularSystem,
    trunc: CITruncation,
    *,
    dense_limit: int = DENSE_LIMIT,
) -> tuple[float, CIVector]:
    """Minimal eigenpair of H restricted to the truncated excitation space.

    Restriction happens naturally: applying H on a subset basis projects
    away every component that leaves the space.
    """
    basis = excitation_basis(trunc, system.n_spin_orbitals)
    return ground_state(system.hamiltonian(), basis, dense_limit=dense_limit)
