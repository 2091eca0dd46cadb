"""Molecular Hamiltonians: FCIDUMP ingestion and Trotter fragment sequences.

The electronic Hamiltonian handled throughout is

    H = sum_pq h_pq a_p^+ a_q + 1/2 sum_pqrs h_pqrs a_p^+ a_q^+ a_r a_s

over spin orbitals, with real integrals.  ``h_pqrs`` follows the physicist
index convention in which electron 1 pairs (p, s) and electron 2 pairs
(q, r), so the symmetries are ``h_pqrs = h_qpsr`` (electron relabeling) and
``h_pqrs = h_srqp`` (real orbitals).

FCIDUMP input stores *spatial*-orbital integrals, one-based, with the
two-electron values in chemist notation (ij|kl).  Spatial orbital ``i``
(zero-based) expands to spin orbitals ``2i`` (alpha) and ``2i + 1`` (beta);
two-electron integrals are spin diagonal:

    h_pqrs = (P S | Q R)   when spin(p) == spin(s) and spin(q) == spin(r),

with capital letters the spatial parts, and zero otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FcidumpError, ValidationError
from .fermion import (
    LadderTerm,
    NormalOrderedOperator,
    ann,
    cre,
    normal_order,
    operator_sum,
)

SCHEMA_VERSION = 1

# Integral magnitudes below this are treated as absent (hartree).
TERM_DROP_THRESHOLD = 1e-10


@dataclass
class MolecularSystem:
    """Spin-orbital integrals plus bookkeeping for one molecule/basis pair."""

    n_spin_orbitals: int
    n_electrons: int
    h1: np.ndarray
    h2: dict[tuple[int, int, int, int], float]
    core_energy: float = 0.0
    ms2: int = 0
    basis_label: str = ""
    orbital_kind: str = "unspecified"
    z_max: int = 0

    def validate(self) -> None:
        n = self.n_spin_orbitals
        if n <= 0 or n % 2:
            raise ValidationError(f"n_spin_orbitals must be positive even, got {n}")
        if not 0 <= self.n_electrons <= n:
            raise ValidationError(
                f"n_electrons {self.n_electrons} outside [0, {n}]"
            )
        if abs(self.ms2) > self.n_electrons or (self.ms2 - self.n_electrons) % 2:
            raise ValidationError(
                f"MS2={self.ms2} inconsistent with NELEC={self.n_electrons}"
            )
        if self.h1.shape != (n, n):
            raise ValidationError(f"h1 shape {self.h1.shape} != ({n}, {n})")
        if not np.allclose(self.h1, self.h1.T, atol=1e-12):
            raise ValidationError("h1 is not symmetric")
        for (p, q, r, s), v in self.h2.items():
            if not all(0 <= x < n for x in (p, q, r, s)):
                raise ValidationError(f"h2 index {(p, q, r, s)} out of range")
            for other in ((q, p, s, r), (s, r, q, p)):
                if abs(self.h2.get(other, 0.0) - v) > 1e-10:
                    raise ValidationError(
                        f"h2 symmetry violated between {(p, q, r, s)} and {other}"
                    )
            if (p % 2 != s % 2) or (q % 2 != r % 2):
                raise ValidationError(
                    f"h2 entry {(p, q, r, s)} violates spin conservation"
                )

    def hamiltonian(self, *, include_core: bool = False) -> NormalOrderedOperator:
        """The second-quantized operator; the scalar core energy is excluded
        unless requested, since it only shifts every eigenvalue."""
        pieces = []
        n = self.n_spin_orbitals
        for p in range(n):
            for q in range(n):
                v = float(self.h1[p, q])
                if abs(v) > TERM_DROP_THRESHOLD:
                    pieces.append(normal_order(LadderTerm(v, (cre(p), ann(q)))))
        for (p, q, r, s), v in self.h2.items():
            pieces.append(
                normal_order(LadderTerm(0.5 * v, (cre(p), cre(q), ann(r), ann(s))))
            )
        if include_core and self.core_energy:
            pieces.append(NormalOrderedOperator.identity(self.core_energy))
        return operator_sum(pieces)


# ---------------------------------------------------------------------------
# FCIDUMP parsing.
# ---------------------------------------------------------------------------


def _parse_namelist(lines: list[str]) -> tuple[dict[str, str], int]:
    """Return header key/value pairs and the index of the first record line."""
    if not lines or "&" not in lines[0]:
        raise FcidumpError("missing &FCI namelist header", line=1)
    header_parts: list[str] = []
    end = None
    for idx, line in enumerate(lines):
        stripped = line.strip()
        header_parts.append(stripped)
        if "&END" in stripped.upper() or stripped.endswith("/"):
            end = idx
            break
    if end is None:
        raise FcidumpError("namelist header never terminated (&END or /)", line=len(lines))
    text = " ".join(header_parts)
    for token in ("&FCI", "&END", "&fci", "&end"):
        text = text.replace(token, " ")
    text = text.rstrip("/ ")
    fields: dict[str, str] = {}
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            # continuation of a comma-separated array value (e.g. ORBSYM)
            continue
        key, _, value = chunk.partition("=")
        fields[key.strip().upper()] = value.strip()
    return fields, end + 1


def parse_fcidump(
    text: str,
    *,
    basis_label: str = "",
    orbital_kind: str = "unspecified",
    z_max: int = 0,
    drop_threshold: float = TERM_DROP_THRESHOLD,
) -> MolecularSystem:
    """Parse FCIDUMP text into a spin-orbital :class:`MolecularSystem`.

    Recognized records, each ``value i j k l`` with one-based spatial
    indices: two-electron ``(ij|kl)`` when all indices are positive,
    one-electron when ``k == l == 0``, the core energy when all four are
    zero.  Orbital-energy records (``i > 0``, ``j == k == l == 0``) are
    skipped.  Anything else raises with its line number.
    """
    lines = text.splitlines()
    fields, first_record = _parse_namelist(lines)
    try:
        norb = int(fields["NORB"])
        nelec = int(fields["NELEC"])
    except KeyError as exc:
        raise FcidumpError(f"namelist missing required key {exc}", line=1) from None
    except ValueError as exc:
        raise FcidumpError(f"bad namelist integer: {exc}", line=1) from None
    ms2 = int(fields.get("MS2", "0").rstrip(","))
    if norb <= 0:
        raise FcidumpError(f"NORB must be positive, got {norb}", line=1)

    h1_spatial = np.zeros((norb, norb))
    chem: dict[tuple[int, int, int, int], float] = {}
    core_energy = 0.0

    for offset, raw in enumerate(lines[first_record:], start=first_record + 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise FcidumpError(
                f"expected 'value i j k l', got {len(parts)} fields", line=offset
            )
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(p) for p in parts[1:])
        except ValueError:
            raise FcidumpError(f"unparseable record {line!r}", line=offset) from None
        if min(i, j, k, l) < 0 or max(i, j, k, l) > norb:
            raise FcidumpError(
                f"orbital index out of range 1..{norb} in {line!r}", line=offset
            )
        if i == j == k == l == 0:
            core_energy = value
        elif k == 0 and l == 0 and i > 0 and j > 0:
            h1_spatial[i - 1, j - 1] = value
            h1_spatial[j - 1, i - 1] = value
        elif j == 0 and k == 0 and l == 0 and i > 0:
            continue  # orbital energy record; not used
        elif min(i, j, k, l) > 0:
            for key in _chemist_orbit(i - 1, j - 1, k - 1, l - 1):
                chem[key] = value
        else:
            raise FcidumpError(f"unclassifiable index pattern in {line!r}", line=offset)

    n_spin = 2 * norb
    if not 0 <= nelec <= n_spin:
        raise FcidumpError(f"NELEC={nelec} impossible for NORB={norb}", line=1)
    if abs(ms2) > nelec or (ms2 - nelec) % 2:
        raise FcidumpError(f"MS2={ms2} inconsistent with NELEC={nelec}", line=1)

    h1, h2 = spin_expand(norb, h1_spatial, chem, drop_threshold=drop_threshold)
    system = MolecularSystem(
        n_spin_orbitals=n_spin,
        n_electrons=nelec,
        h1=h1,
        h2=h2,
        core_energy=core_energy,
        ms2=ms2,
        basis_label=basis_label,
        orbital_kind=orbital_kind,
        z_max=z_max,
    )
    system.validate()
    return system


def load_fcidump(path, **kwargs) -> MolecularSystem:
    """:func:`parse_fcidump` over the contents of ``path``.

    The file stem doubles as the default ``basis_label`` so downstream
    reports can name their input without extra plumbing.
    """
    p = Path(path)
    kwargs.setdefault("basis_label", p.stem)
    return parse_fcidump(p.read_text(), **kwargs)


def _chemist_orbit(i: int, j: int, k: int, l: int) -> set[tuple[int, int, int, int]]:
    """The eightfold symmetry orbit of a real chemist integral (ij|kl)."""
    return {
        (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
        (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
    }


def spin_expand(
    norb: int,
    h1_spatial: np.ndarray,
    chem: dict[tuple[int, int, int, int], float],
    *,
    drop_threshold: float = TERM_DROP_THRESHOLD,
) -> tuple[np.ndarray, dict[tuple[int, int, int, int], float]]:
    """Expand spatial integrals to spin orbitals (physicist convention)."""
    n = 2 * norb
    h1 = np.zeros((n, n))
    for i in range(norb):
        for j in range(norb):
            v = h1_spatial[i, j]
            if abs(v) > drop_threshold:
                h1[2 * i, 2 * j] = v
                h1[2 * i + 1, 2 * j + 1] = v
    h2: dict[tuple[int, int, int, int], float] = {}
    for p in range(n):
        for q in range(n):
            for r in range(n):
                if q % 2 != r % 2:
                    continue
                for s in range(n):
                    if p % 2 != s % 2:
                        continue
                    v = chem.get((p // 2, s // 2, q // 2, r // 2), 0.0)
                    if abs(v) > drop_threshold:
                        h2[(p, q, r, s)] = v
    return h1, h2


# ---------------------------------------------------------------------------
# Trotter fragment sequences.
# ---------------------------------------------------------------------------

ORDERINGS = ("lexicographic", "magnitude-descending", "flat-lexicographic")
GRANULARITIES = ("integral", "term")


def _is_diagonal(frag: NormalOrderedOperator) -> bool:
    return all(creations == annihilations for creations, annihilations in frag.terms)


@dataclass
class TrotterSequence:
    """An ordered list of Hermitian Hamiltonian fragments H_alpha.

    The product formula advances one step by applying all fragments at half
    step in reverse order, then all fragments at half step in forward order.
    """

    fragments: list[NormalOrderedOperator]
    ordering: str
    granularity: str
    n_spin_orbitals: int
    labels: list[str] = field(default_factory=list)

    @property
    def ordering_label(self) -> str:
        if self.ordering == "flat-lexicographic":
            return f"{self.ordering}/{self.granularity}"
        return f"diagonal-first-{self.ordering}/{self.granularity}"

    def __len__(self) -> int:
        return len(self.fragments)

    def total(self) -> NormalOrderedOperator:
        return operator_sum(self.fragments)


def build_trotter_sequence(
    system: MolecularSystem,
    ordering: str = "lexicographic",
    *,
    granularity: str = "integral",
    drop_threshold: float = TERM_DROP_THRESHOLD,
) -> TrotterSequence:
    """Split the Hamiltonian into an ordered list of Hermitian fragments.

    granularity "integral" (default) groups every spin expansion of one
    distinct spatial integral (one-body pair or chemist symmetry class)
    into a single fragment; "term" makes one fragment per canonical
    normal-ordered term paired with its Hermitian conjugate.

    The default sequence structure hoists all diagonal fragments (those
    built purely from number operators) into a leading block.  They commute
    with one another, so their internal order provably cannot change the
    product formula or its error operator, and placing them first matches
    the circuit convention of applying the cheap phase rotations together.
    The ``ordering`` strategy then arranges the off-diagonal tail:

      lexicographic         by fragment index tuple, one-body before
                            two-body (default)
      magnitude-descending  by descending coefficient one-norm, index
                            tuple as tie-break
      flat-lexicographic    no diagonal hoisting at all: every fragment
                            in index-tuple order, one-body block first

    Each fragment is Hermitian and the fragments sum to the Hamiltonian.
    """
    if ordering not in ORDERINGS:
        raise ValidationError(f"unknown ordering {ordering!r}; use one of {ORDERINGS}")
    if granularity not in GRANULARITIES:
        raise ValidationError(
            f"unknown granularity {granularity!r}; use one of {GRANULARITIES}"
        )
    if granularity == "integral":
        keyed = _fragments_by_integral(system, drop_threshold)
    else:
        keyed = _fragments_by_term(system, drop_threshold)
    keyed = [(key, label, frag) for key, label, frag in keyed if frag]
    if ordering == "flat-lexicographic":
        keyed.sort(key=lambda t: t[0])
    else:
        diagonal = sorted(
            (t for t in keyed if _is_diagonal(t[2])), key=lambda t: t[0]
        )
        off = [t for t in keyed if not _is_diagonal(t[2])]
        if ordering == "magnitude-descending":
            off.sort(key=lambda t: (-t[2].coefficient_l1(), t[0]))
        else:
            off.sort(key=lambda t: t[0])
        keyed = diagonal + off
    sequence = TrotterSequence(
        fragments=[frag for _, _, frag in keyed],
        ordering=ordering,
        granularity=granularity,
        n_spin_orbitals=system.n_spin_orbitals,
        labels=[label for _, label, _ in keyed],
    )
    for frag in sequence.fragments:
        defect = frag.hermitian_defect()
        if defect > 1e-8 * max(1.0, frag.coefficient_l1()):
            raise ValidationError(f"fragment not Hermitian (defect {defect:.3e})")
    return sequence


def _fragments_by_integral(system, drop_threshold):
    n = system.n_spin_orbitals
    norb = n // 2
    out = []
    # one-body spatial pairs i <= j
    for i in range(norb):
        for j in range(i, norb):
            frag = NormalOrderedOperator.zero()
            for (p, q) in ((2 * i, 2 * j), (2 * i + 1, 2 * j + 1)):
                vv = float(system.h1[p, q])
                if abs(vv) <= drop_threshold:
                    continue
                frag = frag + normal_order(LadderTerm(vv, (cre(p), ann(q))))
                if p != q:
                    frag = frag + normal_order(LadderTerm(vv, (cre(q), ann(p))))
            out.append(((0, i, j, 0, 0), f"h[{i},{j}]", frag))
    # two-body chemist classes
    buckets: dict[tuple, NormalOrderedOperator] = {}
    for (p, q, r, s), v in system.h2.items():
        rep = min(_chemist_orbit(p // 2, s // 2, q // 2, r // 2))
        term = normal_order(LadderTerm(0.5 * v, (cre(p), cre(q), ann(r), ann(s))))
        buckets[rep] = buckets.get(rep, NormalOrderedOperator.zero()) + term
    for rep, frag in buckets.items():
        i, j, k, l = rep
        out.append(((1,) + rep, f"({i + 1}{j + 1}|{k + 1}{l + 1})", frag))
    return out


def _fragments_by_term(system, drop_threshold):
    n = system.n_spin_orbitals
    out = []
    for p in range(n):
        for q in range(p, n):
            v = float(system.h1[p, q])
            if abs(v) <= drop_threshold:
                continue
            frag = normal_order(LadderTerm(v, (cre(p), ann(q))))
            if p != q:
                frag = frag + normal_order(LadderTerm(v, (cre(q), ann(p))))
            out.append(((0, p, q, 0, 0), f"h[{p},{q}]", frag))
    # accumulate canonical two-body keys, then pair each with its adjoint
    acc = operator_sum(
        normal_order(LadderTerm(0.5 * v, (cre(p), cre(q), ann(r), ann(s))))
        for (p, q, r, s), v in system.h2.items()
    )
    seen = set()
    for key, coeff in acc.terms.items():
        if key in seen:
            continue
        creations, annihilations = key
        adj_key = (annihilations, creations)
        group = {key}
        if adj_key != key and adj_key in acc.terms:
            group.add(adj_key)
        seen |= group
        frag = NormalOrderedOperator(
            {k: acc.terms[k] for k in group}, _trusted=True
        )
        rep = min(k[0] + k[1] for k in group)
        out.append(((1,) + rep, f"g{rep}", frag))
    return out


# ---------------------------------------------------------------------------
# JSON persistence.
# ---------------------------------------------------------------------------


def system_to_json(system: MolecularSystem) -> str:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "molecular_system",
        "n_spin_orbitals": system.n_spin_orbitals,
        "n_electrons": system.n_electrons,
        "ms2": system.ms2,
        "core_energy": system.core_energy,
        "basis_label": system.basis_label,
        "orbital_kind": system.orbital_kind,
        "z_max": system.z_max,
        "h1": system.h1.tolist(),
        "h2": sorted([list(k) + [v] for k, v in system.h2.items()]),
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def system_from_json(text: str) -> MolecularSystem:
    payload = json.loads(text)
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {version!r}")
    system = MolecularSystem(
        n_spin_orbitals=payload["n_spin_orbitals"],
        n_electrons=payload["n_electrons"],
        h1=np.array(payload["h1"], dtype=float),
        h2={tuple(int(x) for x in row[:4]): float(row[4]) for row in payload["h2"]},
        core_energy=payload["core_energy"],
        ms2=payload.get("ms2", 0),
        basis_label=payload.get("basis_label", ""),
        orbital_kind=payload.get("orbital_kind", "unspecified"),
        z_max=payload.get("z_max", 0),
    )
    system.validate()
    return system


def sequence_to_json(seq: TrotterSequence) -> str:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "trotter_sequence",
        "ordering": seq.ordering,
        "granularity": seq.granularity,
        "n_spin_orbitals": seq.n_spin_orbitals,
        "labels": seq.labels,
        "fragments": [
            sorted([list(c), list(a), v] for (c, a), v in frag.terms.items())
            for frag in seq.fragments
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def sequence_from_json(text: str) -> TrotterSequence:
    payload = json.loads(text)
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {version!r}")
    fragments = [
        NormalOrderedOperator(
            {(tuple(c), tuple(a)): float(v) for c, a, v in rows}
        )
        for rows in payload["fragments"]
    ]
    return TrotterSequence(
        fragments=fragments,
        ordering=payload["ordering"],
        granularity=payload["granularity"],
        n_spin_orbitals=payload["n_spin_orbitals"],
        labels=payload.get("labels", []),
    )
