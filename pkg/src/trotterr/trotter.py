"""Leading error operator of the second-order Trotter-Suzuki formula.

For a fragment sequence H = sum_alpha H_alpha advanced by the symmetric
product formula (all fragments at half step in descending index order, then
ascending), the effective Hamiltonian picks up a leading perturbation

    V = (dt^2 / 12) * sum_beta sum_{gamma < beta} sum_{alpha <= beta}
            (1 - delta_{alpha beta} / 2) [H_alpha, [H_beta, H_gamma]]

which is quadratic in the step size: the remaining corrections enter at
fourth order.  Eigenstate energy shifts are then <psi|V|psi> + O(dt^4).
The prefactor sign is fixed by expanding the product formula itself; see
the fourth-order residual checks in the oracle tests.

Both inner sums are linear in their fragment argument, so the triple sum
collapses against running sums.  With S_beta = H_0 + ... + H_beta,

    sum_{gamma < beta} [H_beta, H_gamma]  =  [H_beta, S_{beta-1}] =: C_beta

and swapping the remaining alpha/beta double sum groups every term by its
small factor:

    V = (dt^2/12) sum_alpha [H_alpha, D_alpha - C_alpha/2],
    D_alpha = sum_{beta >= alpha} C_beta  (suffix sums).

Every commutator then has one small operand (a fragment), which is the
cheap shape for the term-map product.  Since fragments are Hermitian and
the C/D accumulations anti-Hermitian, each commutator needs only a single
product followed by an adjoint reflection.  Results differ from the fully
expanded triple loop only by floating-point reassociation and rounding of
that reflection, both far below every validation tolerance used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError
from .fermion import (
    DEFAULT_DROP_TOLERANCE,
    NormalOrderedOperator,
    commutator,
    multiply,
    number_operator,
    operator_sum,
    trace,
)
from .hamiltonian import TrotterSequence


@dataclass
class ErrorOperator:
    """The leading Trotter error operator for one fragment sequence.

    ``op`` carries the full -(dt^2)/12 prefactor at step size ``delta_t``;
    rebuilding with a doubled step scales every coefficient by exactly 4.
    """

    op: NormalOrderedOperator
    delta_t: float
    ordering_label: str
    n_fragments: int
    n_spin_orbitals: int

    def coefficient_l1(self) -> float:
        return self.op.coefficient_l1()

    def hermitian_defect(self) -> float:
        return self.op.hermitian_defect()

    def trace_residual(self) -> float:
        """|trace over full Fock space|, exactly 0 for a commutator sum up
        to accumulated rounding."""
        return abs(trace(self.op, self.n_spin_orbitals))

    def number_commutator_residual(self) -> float:
        """Largest coefficient of [V, N_total]; fragments conserve particle
        number, so this is pure rounding noise."""
        # small operand first is the cheap product shape; same magnitude
        comm = commutator(number_operator(self.n_spin_orbitals), self.op)
        return comm.max_abs_coefficient()

    def validate(self, rel_tol: float = 1e-8) -> None:
        scale = self.coefficient_l1()
        if not scale:
            return
        budget = rel_tol * scale
        defect = self.hermitian_defect()
        if defect > budget:
            raise ValidationError(f"error operator not Hermitian: defect {defect:.3e}")
        residual = self.trace_residual()
        if residual > budget:
            raise ValidationError(f"error operator trace {residual:.3e} not ~0")
        number = self.number_commutator_residual()
        if number > budget:
            raise ValidationError(
                f"error operator breaks particle number: residual {number:.3e}"
            )


def _drop_exact_zeros(op: NormalOrderedOperator) -> NormalOrderedOperator:
    # commuting fragments cancel keywise to exact 0.0; keeping those keys
    # would drag dead weight through every later product
    return op.pruned(math.ulp(0.0))


def build_error_operator(
    sequence: TrotterSequence,
    delta_t: float,
    *,
    drop_tolerance: float = DEFAULT_DROP_TOLERANCE,
    validate: bool = True,
) -> ErrorOperator:
    """Assemble the leading error operator for ``sequence`` at ``delta_t``.

    A single-fragment sequence (or any mutually commuting one) yields the
    zero operator.  Pruning below ``drop_tolerance`` happens once, after the
    full accumulation.
    """
    if not math.isfinite(delta_t) or delta_t <= 0:
        raise ValidationError(f"delta_t must be positive and finite, got {delta_t}")
    fragments = sequence.fragments
    # C_beta = [H_beta, S_{beta-1}]: Hermitian pair, one product suffices
    cross: list[NormalOrderedOperator] = []
    prefix = NormalOrderedOperator.zero()
    for frag in fragments:
        m = multiply(frag, prefix, drop_tolerance=0.0)
        cross.append(_drop_exact_zeros(m - m.adjoint()))
        prefix = prefix + frag
    pieces: list[NormalOrderedOperator] = []
    suffix = NormalOrderedOperator.zero()  # D_alpha, accumulated backwards
    for frag, c in zip(reversed(fragments), reversed(cross)):
        suffix = _drop_exact_zeros(suffix + c)
        weight = suffix + c.scaled(-0.5)  # D_alpha - C_alpha/2, anti-Hermitian
        if weight:
            m = multiply(frag, weight, drop_tolerance=0.0)
            pieces.append(m + m.adjoint())
    scale = (delta_t * delta_t) / 12.0
    op = operator_sum(pieces, drop_tolerance=0.0).scaled(scale).pruned(drop_tolerance)
    error_op = ErrorOperator(
        op=op,
        delta_t=delta_t,
        ordering_label=sequence.ordering_label,
        n_fragments=len(fragments),
        n_spin_orbitals=sequence.n_spin_orbitals,
    )
    if validate:
        error_op.validate()
    return error_op


def estimate_trotter_number(
    error_expectation: float, time: float, delta: float
) -> int:
    """Trotter number needed to keep the accumulated eigenstate shift at or
    below ``delta`` over evolution time ``time``.

    The per-step shift scales as (t/mu)^2 <V at dt=1>, and mu steps
    accumulate it linearly, so mu = ceil(t * sqrt(<V>/delta)), at least 1.
    """
    if delta <= 0 or time <= 0:
        raise ValidationError(f"need time > 0 and delta > 0, got {time}, {delta}")
    if error_expectation < 0:
        raise ValidationError(f"error_expectation must be >= 0, got {error_expectation}")
    mu = math.ceil(time * math.sqrt(error_expectation / delta))
    return max(mu, 1)
