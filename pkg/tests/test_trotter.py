"""Leading-order product-formula error operator."""

import numpy as np
import pytest

from bruteforce import dense_operator
from trotterr.errors import ValidationError
from trotterr.fermion import NormalOrderedOperator, commutator
from trotterr.hamiltonian import TrotterSequence, build_trotter_sequence, parse_fcidump
from trotterr.synthetic import random_system
from trotterr.trotter import build_error_operator, estimate_trotter_number


def _sequence_of(ops):
    n = 1 + max((op.max_orbital() for op in ops if op), default=0)
    return TrotterSequence(
        fragments=list(ops),
        ordering="lexicographic",
        granularity="term",
        n_spin_orbitals=n,
        labels=[str(i) for i in range(len(ops))],
    )


def test_single_fragment_is_exact():
    op = NormalOrderedOperator({((1,), (1,)): 0.7})
    err = build_error_operator(_sequence_of([op]), 0.1)
    assert not err.op.terms
    assert err.n_fragments == 1


def test_commuting_fragments_give_zero():
    ops = [
        NormalOrderedOperator({((0,), (0,)): 0.5}),
        NormalOrderedOperator({((1,), (1,)): -0.3}),
        NormalOrderedOperator({((1, 0), (1, 0)): 1.2}),
    ]
    err = build_error_operator(_sequence_of(ops), 0.2)
    assert not err.op.terms


def test_delta_t_scaling_is_exactly_four():
    rng = np.random.default_rng(3)
    syst = random_system(rng, 3)
    seq = build_trotter_sequence(syst)
    v1 = build_error_operator(seq, 0.05)
    v2 = build_error_operator(seq, 0.10)
    keys = set(v1.op.terms) | set(v2.op.terms)
    assert keys
    for key in keys:
        assert v2.op.terms[key] == 4.0 * v1.op.terms[key]


def test_invalid_delta_t():
    op = NormalOrderedOperator({((1,), (1,)): 0.7})
    seq = _sequence_of([op])
    with pytest.raises(ValidationError):
        build_error_operator(seq, 0.0)
    with pytest.raises(ValidationError):
        build_error_operator(seq, -1.0)


def test_matches_literal_triple_sum_on_matrices():
    """The grouped accumulation equals the raw triple-index formula."""
    rng = np.random.default_rng(5)
    syst = random_system(rng, 3, n_electrons=2)
    seq = build_trotter_sequence(syst, granularity="term")
    dt = 0.05
    err = build_error_operator(seq, dt)
    n = syst.n_spin_orbitals
    mats = [dense_operator(n, f) for f in seq.fragments]
    acc = np.zeros_like(mats[0])
    for beta in range(len(mats)):
        for gamma in range(beta):
            inner = mats[beta] @ mats[gamma] - mats[gamma] @ mats[beta]
            for alpha in range(beta + 1):
                weight = 0.5 if alpha == beta else 1.0
                acc += weight * (mats[alpha] @ inner - inner @ mats[alpha])
    acc *= dt * dt / 12.0
    got = dense_operator(n, err.op)
    assert np.max(np.abs(got - acc)) <= 1e-12 * max(1.0, np.max(np.abs(acc)))


def test_invariants_on_random_systems():
    for seed in range(4):
        rng = np.random.default_rng(seed)
        syst = random_system(rng, 3)
        seq = build_trotter_sequence(syst)
        err = build_error_operator(seq, 0.1)
        scale = max(1.0, err.coefficient_l1())
        assert err.hermitian_defect() <= 1e-10 * scale
        assert err.trace_residual() <= 1e-10 * scale
        assert err.number_commutator_residual() <= 1e-10 * scale


def test_permutation_changes_v_but_not_invariants():
    rng = np.random.default_rng(9)
    syst = random_system(rng, 3)
    seq = build_trotter_sequence(syst)
    base = build_error_operator(seq, 0.1)
    perm = list(rng.permutation(len(seq.fragments)))
    shuffled = TrotterSequence(
        fragments=[seq.fragments[i] for i in perm],
        ordering="lexicographic",
        granularity=seq.granularity,
        n_spin_orbitals=seq.n_spin_orbitals,
        labels=[seq.labels[i] for i in perm],
    )
    other = build_error_operator(shuffled, 0.1)
    diff = (base.op + other.op.scaled(-1.0)).max_abs_coefficient()
    assert diff > 1e-6  # ordering sensitivity is real
    scale = max(1.0, other.coefficient_l1())
    assert other.hermitian_defect() <= 1e-10 * scale
    assert other.trace_residual() <= 1e-10 * scale
    assert other.number_commutator_residual() <= 1e-10 * scale


def test_diagonal_prefix_order_is_irrelevant(fixture_dir):
    """Fragments in the leading mutually commuting block can be permuted
    without changing the error operator at all."""
    syst = parse_fcidump((fixture_dir / "h2_sto6g_local.fcidump").read_text())
    seq = build_trotter_sequence(syst)
    diag = [f for f in seq.fragments if all(c == a for c, a in f.terms)]
    off = [f for f in seq.fragments if not all(c == a for c, a in f.terms)]
    base = build_error_operator(seq, 1.0)
    rng = np.random.default_rng(0)
    for _ in range(3):
        perm = [diag[i] for i in rng.permutation(len(diag))]
        other = build_error_operator(_sequence_of(perm + off), 1.0)
        diff = (base.op + other.op.scaled(-1.0)).max_abs_coefficient()
        assert diff <= 1e-12


class TestTrotterNumber:
    def test_zero_error_floor(self):
        assert estimate_trotter_number(0.0, 10.0, 1e-3) == 1

    def test_frozen_examples(self):
        assert estimate_trotter_number(1.0, 1.0, 1e-4) == 100
        assert estimate_trotter_number(4.0, 2.0, 1e-2) == 40

    def test_domain_errors(self):
        with pytest.raises(ValidationError):
            estimate_trotter_number(-1.0, 1.0, 1e-3)
        with pytest.raises(ValidationError):
            estimate_trotter_number(1.0, 0.0, 1e-3)
        with pytest.raises(ValidationError):
            estimate_trotter_number(1.0, 1.0, 0.0)

    def test_at_least_one(self):
        assert estimate_trotter_number(1e-30, 1e-6, 1.0) == 1
