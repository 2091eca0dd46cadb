"""Random molecular-style systems for tests and scaling studies.

Integrals are drawn in the spatial-orbital chemist convention and expanded
to spin orbitals through the same path real integral files take, so every
generated system satisfies the full symmetry contract by construction.
"""

from __future__ import annotations

import numpy as np

from .hamiltonian import MolecularSystem, spin_expand


def random_system(
    rng: np.random.Generator,
    n_spatial: int,
    *,
    n_electrons: int | None = None,
    one_body_scale: float = 1.0,
    two_body_scale: float = 0.5,
    density: float = 1.0,
    drop_threshold: float = 1e-10,
) -> MolecularSystem:
    """Draw a particle-conserving Hermitian system on 2*n_spatial spin orbitals.

    ``density`` < 1 zeroes a random fraction of the distinct two-body
    classes, which keeps big instances affordable.
    """
    if n_spatial < 1:
        raise ValueError("need at least one spatial orbital")
    n_spin = 2 * n_spatial
    if n_electrons is None:
        n_electrons = max(2, n_spatial - n_spatial % 2)
    h1 = rng.normal(scale=one_body_scale, size=(n_spatial, n_spatial))
    h1 = (h1 + h1.T) / 2.0

    chem: dict[tuple[int, int, int, int], float] = {}
    for i in range(n_spatial):
        for j in range(i + 1):
            for k in range(n_spatial):
                for l in range(k + 1):
                    if (i, j) < (k, l):
                        continue
                    if density < 1.0 and rng.random() > density:
                        continue
                    v = rng.normal(scale=two_body_scale)
                    if abs(v) <= drop_threshold:
                        continue
                    for perm in {
                        (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                        (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
                    }:
                        chem[perm] = v

    spin_h1, spin_h2 = spin_expand(n_spatial, h1, chem, drop_threshold=drop_threshold)
    system = MolecularSystem(
        n_spin_orbitals=n_spin,
        n_electrons=n_electrons,
        h1=spin_h1,
        h2=spin_h2,
        core_energy=0.0,
        basis_label=f"synthetic-{n_spatial}",
        orbital_kind="synthetic",
    )
    system.validate()
    return system
