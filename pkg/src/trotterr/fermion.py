"""Sparse normal-ordered algebra for fermionic ladder operators.

Operators are finite real linear combinations of products of creation and
annihilation operators obeying

    {a_p, a_q^+} = delta_pq,   {a_p, a_q} = {a_p^+, a_q^+} = 0.

Every operator is stored in canonical normal-ordered form: each term is a
string of creation operators followed by annihilation operators, with the
orbital indices inside each group strictly descending.  A term with a
repeated index inside a group is identically zero and is never stored.  The
canonical key for ``a_3^+ a_1^+ a_2 a_1`` is ``((3, 1), (2, 1))``.

Products and commutators are reduced by iterated anticommutation:
``a_p a_q^+ = delta_pq - a_q^+ a_p`` swaps a defect (an annihilator directly
left of a creator), and sorting within a group flips the coefficient sign
once per transposition.  The classic small case

    a_2 a_1 a_1^+ a_3^+  =  a_1^+ a_3^+ a_2 a_1  -  a_3^+ a_2

reduces to the keys ``((3, 1), (2, 1))`` (coefficient -1) and
``((3,), (2,))`` (coefficient -1).

Coefficients with magnitude below a drop tolerance (default ``1e-12``) are
removed after every accumulation pass.  All operations return new objects;
instances are treated as immutable.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import ValidationError

DEFAULT_DROP_TOLERANCE = 1e-12

# A canonical term key: (creation orbitals desc, annihilation orbitals desc).
Key = tuple[tuple[int, ...], tuple[int, ...]]

IDENTITY_KEY: Key = ((), ())


class LadderOp(NamedTuple):
    """A single ladder operator acting on one spin orbital."""

    orbital: int
    creation: bool

    def __repr__(self) -> str:
        return f"a{self.orbital}^+" if self.creation else f"a{self.orbital}"


def cre(orbital: int) -> LadderOp:
    """Creation operator on ``orbital``."""
    return LadderOp(orbital, True)


def ann(orbital: int) -> LadderOp:
    """Annihilation operator on ``orbital``."""
    return LadderOp(orbital, False)


class LadderTerm(NamedTuple):
    """A scalar coefficient times an ordered product of ladder operators.

    ``ops`` is written left to right in operator order: ``ops[-1]`` acts
    first on a ket.
    """

    coeff: float
    ops: tuple[LadderOp, ...]


# ---------------------------------------------------------------------------
# Low-level reduction on encoded operator strings.
#
# An op is encoded as (orbital << 1) | flag with flag 1 for creation; this
# keeps the worklist below allocation-free apart from tuple slicing.
# ---------------------------------------------------------------------------


def _sort_desc(vals: Iterable[int]) -> tuple[tuple[int, ...] | None, int]:
    """Sort descending, counting transpositions; None signals a repeat."""
    lst = list(vals)
    swaps = 0
    for i in range(1, len(lst)):
        j = i
        while j and lst[j - 1] < lst[j]:
            lst[j - 1], lst[j] = lst[j], lst[j - 1]
            swaps += 1
            j -= 1
    for i in range(1, len(lst)):
        if lst[i - 1] == lst[i]:
            return None, swaps
    return tuple(lst), swaps


def _normal_order_codes(codes: tuple[int, ...], start: int = 0) -> dict[Key, int]:
    """Reduce an encoded operator string to canonical keys with integer signs.

    ``start`` is a scan hint: positions left of it are known defect-free.
    """
    out: dict[Key, int] = {}
    stack: list[tuple[int, tuple[int, ...], int]] = [(1, codes, start)]
    while stack:
        sign, s, lo = stack.pop()
        n = len(s)
        i = lo
        defect = -1
        while i < n - 1:
            if not s[i] & 1 and s[i + 1] & 1:
                defect = i
                break
            i += 1
        if defect >= 0:
            i = defect
            nxt = i - 1 if i else 0
            swapped = s[:i] + (s[i + 1], s[i]) + s[i + 2:]
            stack.append((-sign, swapped, nxt))
            if s[i] >> 1 == s[i + 1] >> 1:
                stack.append((sign, s[:i] + s[i + 2:], nxt))
            continue
        # No defect left: creations all precede annihilations.
        k = 0
        while k < n and s[k] & 1:
            k += 1
        cre_sorted, sw1 = _sort_desc(c >> 1 for c in s[:k])
        if cre_sorted is None:
            continue
        ann_sorted, sw2 = _sort_desc(c >> 1 for c in s[k:])
        if ann_sorted is None:
            continue
        key = (cre_sorted, ann_sorted)
        val = -sign if (sw1 + sw2) & 1 else sign
        out[key] = out.get(key, 0) + val
    return {k: v for k, v in out.items() if v}


def _key_codes(key: Key) -> tuple[int, ...]:
    creations, annihilations = key
    return tuple(o << 1 | 1 for o in creations) + tuple(o << 1 for o in annihilations)


@lru_cache(maxsize=1 << 18)
def _key_product(k1: Key, k2: Key) -> tuple[tuple[Key, int], ...]:
    """Canonical expansion of the product of two canonical keys.

    The coefficients are pure signs/multiplicities, so the expansion is
    cacheable independently of the terms' numerical coefficients.
    """
    codes = _key_codes(k1) + _key_codes(k2)
    boundary = len(k1[0]) + len(k1[1])
    return tuple(_normal_order_codes(codes, max(0, boundary - 1)).items())


def _as_ops(term) -> tuple[float, tuple[LadderOp, ...]]:
    if isinstance(term, LadderTerm):
        return float(term.coeff), tuple(term.ops)
    coeff, ops = term
    return float(coeff), tuple(LadderOp(o.orbital, o.creation) for o in ops)


# ---------------------------------------------------------------------------
# Public operator type.
# ---------------------------------------------------------------------------


class NormalOrderedOperator:
    """A real linear combination of canonical normal-ordered terms.

    The term map is keyed by ``(creations, annihilations)`` tuples, each
    strictly descending.  Instances are immutable by convention: every
    operation returns a new object and ``terms`` must not be mutated.
    """

    __slots__ = ("_terms",)

    def __init__(
        self,
        terms: Mapping[Key, float] | None = None,
        *,
        drop_tolerance: float = DEFAULT_DROP_TOLERANCE,
        _trusted: bool = False,
    ):
        if terms is None:
            self._terms: dict[Key, float] = {}
        elif _trusted:
            self._terms = dict(terms)
        else:
            cleaned: dict[Key, float] = {}
            for key, coeff in terms.items():
                _check_key(key)
                c = float(coeff)
                if abs(c) >= drop_tolerance:
                    cleaned[key] = c
            self._terms = cleaned

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "NormalOrderedOperator":
        return cls()

    @classmethod
    def identity(cls, coeff: float = 1.0) -> "NormalOrderedOperator":
        return cls({IDENTITY_KEY: float(coeff)}, _trusted=True)

    @classmethod
    def from_key(cls, key: Key, coeff: float = 1.0) -> "NormalOrderedOperator":
        return cls({key: coeff})

    # -- inspection --------------------------------------------------------

    @property
    def terms(self) -> dict[Key, float]:
        """The canonical term map.  Treat as read-only."""
        return self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coefficient(self, key: Key) -> float:
        return self._terms.get(key, 0.0)

    def coefficient_l1(self) -> float:
        """Sum of absolute coefficients."""
        return sum(abs(c) for c in self._terms.values())

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def max_orbital(self) -> int:
        """Largest orbital index touched, or -1 for a scalar operator."""
        m = -1
        for creations, annihilations in self._terms:
            for o in creations:
                if o > m:
                    m = o
            for o in annihilations:
                if o > m:
                    m = o
        return m

    def conserves_particle_number(self) -> bool:
        return all(len(c) == len(a) for c, a in self._terms)

    def __repr__(self) -> str:
        return f"NormalOrderedOperator({len(self._terms)} terms)"

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "NormalOrderedOperator") -> "NormalOrderedOperator":
        out = dict(self._terms)
        for key, c in other._terms.items():
            out[key] = out.get(key, 0.0) + c
        return NormalOrderedOperator(_prune(out), _trusted=True)

    def __sub__(self, other: "NormalOrderedOperator") -> "NormalOrderedOperator":
        out = dict(self._terms)
        for key, c in other._terms.items():
            out[key] = out.get(key, 0.0) - c
        return NormalOrderedOperator(_prune(out), _trusted=True)

    def __neg__(self) -> "NormalOrderedOperator":
        return NormalOrderedOperator(
            {k: -c for k, c in self._terms.items()}, _trusted=True
        )

    def scaled(self, factor: float) -> "NormalOrderedOperator":
        factor = float(factor)
        if factor == 0.0:
            return NormalOrderedOperator.zero()
        return NormalOrderedOperator(
            {k: c * factor for k, c in self._terms.items()}, _trusted=True
        )

    def __mul__(self, other):
        if isinstance(other, NormalOrderedOperator):
            return multiply(self, other)
        return self.scaled(other)

    def __rmul__(self, factor: float) -> "NormalOrderedOperator":
        return self.scaled(factor)

    # -- structure ---------------------------------------------------------

    def adjoint(self) -> "NormalOrderedOperator":
        """Hermitian adjoint (real coefficients, so no conjugation)."""
        out: dict[Key, float] = {}
        for (creations, annihilations), c in self._terms.items():
            key, sign = _adjoint_key(creations, annihilations)
            out[key] = out.get(key, 0.0) + sign * c
        return NormalOrderedOperator(out, _trusted=True)

    def hermitian_defect(self) -> float:
        """Max coefficient deviation between the operator and its adjoint."""
        adj = self.adjoint()._terms
        keys = self._terms.keys() | adj.keys()
        return max(
            (abs(self._terms.get(k, 0.0) - adj.get(k, 0.0)) for k in keys),
            default=0.0,
        )

    def pruned(self, drop_tolerance: float = DEFAULT_DROP_TOLERANCE) -> "NormalOrderedOperator":
        return NormalOrderedOperator(
            {k: c for k, c in self._terms.items() if abs(c) >= drop_tolerance},
            _trusted=True,
        )

    def allclose(self, other: "NormalOrderedOperator", atol: float = 1e-12) -> bool:
        keys = self._terms.keys() | other._terms.keys()
        return all(
            abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) <= atol
            for k in keys
        )


def _check_key(key: Key) -> None:
    creations, annihilations = key
    for group in (creations, annihilations):
        for i, o in enumerate(group):
            if not isinstance(o, int) or o < 0:
                raise ValidationError(f"orbital index {o!r} is not a non-negative int")
            if i and group[i - 1] <= o:
                raise ValidationError(
                    f"key group {group} is not strictly descending"
                )


def _prune(terms: dict[Key, float], tol: float = DEFAULT_DROP_TOLERANCE) -> dict[Key, float]:
    return {k: c for k, c in terms.items() if abs(c) >= tol}


def _adjoint_key(creations: tuple[int, ...], annihilations: tuple[int, ...]) -> tuple[Key, int]:
    # (c1..ck)^+ (a1..al) dagger -> creations=annihilations reversed ascending;
    # restoring descending order costs one transposition parity per group.
    k = len(creations)
    l = len(annihilations)
    parity = (k * (k - 1) // 2 + l * (l - 1) // 2) & 1
    return (annihilations, creations), (-1 if parity else 1)


# ---------------------------------------------------------------------------
# Operations.
# ---------------------------------------------------------------------------


def normal_order(
    term: LadderTerm | tuple[float, Iterable[LadderOp]],
    *,
    drop_tolerance: float = DEFAULT_DROP_TOLERANCE,
) -> NormalOrderedOperator:
    """Reduce an arbitrary ladder-operator product to canonical form.

    Repeated anticommutation terminates because every swap either shortens
    the string by two or strictly lowers the number of misordered pairs.
    """
    coeff, ops = _as_ops(term)
    codes = []
    for op in ops:
        if op.orbital < 0:
            raise ValidationError(f"orbital index {op.orbital} is negative")
        codes.append(op.orbital << 1 | (1 if op.creation else 0))
    out: dict[Key, float] = {}
    for key, sign in _normal_order_codes(tuple(codes)).items():
        out[key] = coeff * sign
    return NormalOrderedOperator(out, drop_tolerance=drop_tolerance)


def multiply(
    a: NormalOrderedOperator,
    b: NormalOrderedOperator,
    *,
    drop_tolerance: float = DEFAULT_DROP_TOLERANCE,
) -> NormalOrderedOperator:
    """Operator product, re-reduced to canonical normal-ordered form."""
    out = _multiply_raw(a, b)
    return NormalOrderedOperator(_prune(out, drop_tolerance), _trusted=True)


def _multiply_raw(a: NormalOrderedOperator, b: NormalOrderedOperator) -> dict[Key, float]:
    if not a._terms or not b._terms:
        return {}
    if a.max_orbital() < _MASK_ORBITALS and b.max_orbital() < _MASK_ORBITALS:
        return _multiply_masked(a, b)
    return _multiply_scalar(a, b)


def _multiply_scalar(a: NormalOrderedOperator, b: NormalOrderedOperator) -> dict[Key, float]:
    out: dict[Key, float] = {}
    bterms = b._terms
    for k1, c1 in a._terms.items():
        for k2, c2 in bterms.items():
            c = c1 * c2
            for key, sign in _key_product(k1, k2):
                out[key] = out.get(key, 0.0) + sign * c
    return out


# -- bitmask product kernel --------------------------------------------------
#
# For orbitals below _MASK_ORBITALS a key half fits one machine-word bitmask
# and a whole product A.B vectorizes over B's term array.  Writing a term of
# A as C1^+ A1 and one of B as C2^+ A2, normal ordering only has to push the
# string A1 through C2.  Processing A1's orbitals in ascending order, each
# one either contracts on a partner in C2 (one delta branch per shared
# orbital) or anticommutes through all of C2, which gives one product term
# per contraction subset T of A1 n C2:
#
#     C1^+ A1 C2^+ A2 = sum_T sign(T) (C1 u (C2\T))^+ ((A1\T) u A2)
#
# with the parity of sign(T) = sum_{x in T} |C2 above x|                  (a)
#                            + |A1\T| * |C2|                              (b)
#                            + #{(x in A1\T, t in T) : t < x}             (c)
#                            + #{(u in C1, v in C2\T) : v > u}            (d)
#                            + #{(x in A1\T, y in A2) : y > x}.          (e)
#
# (a) counts the hops before each contraction, (b) the full pass-throughs,
# (c) corrects (b) for partners already contracted, and (d)/(e) re-sort the
# concatenated creation/annihilation strings into descending order.  Terms
# vanish when the merged halves would repeat an orbital.  Everything is a
# popcount over masks, so each (term-of-A, T) pair is a handful of array
# operations over all of B at once.

_MASK_ORBITALS = 31  # packed (cre << 32 | ann) keys must stay inside int64

_FULL_MASK = (1 << _MASK_ORBITALS) - 1

_ABOVE = tuple(
    np.int64(_FULL_MASK & ~((1 << (p + 1)) - 1)) for p in range(_MASK_ORBITALS)
)


def _mask_of(orbitals: tuple[int, ...]) -> int:
    m = 0
    for p in orbitals:
        m |= 1 << p
    return m


@lru_cache(maxsize=None)
def _bits_desc(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        p = mask.bit_length() - 1
        out.append(p)
        mask ^= 1 << p
    return tuple(out)


@lru_cache(maxsize=None)
def _submasks(mask: int) -> tuple[int, ...]:
    subs = []
    s = mask
    while True:
        subs.append(s)
        if not s:
            return tuple(subs)
        s = (s - 1) & mask


def _multiply_masked(a: NormalOrderedOperator, b: NormalOrderedOperator) -> dict[Key, float]:
    bn = len(b._terms)
    b_cre = np.empty(bn, dtype=np.int64)
    b_ann = np.empty(bn, dtype=np.int64)
    b_val = np.empty(bn, dtype=np.float64)
    for i, (key, c) in enumerate(b._terms.items()):
        b_cre[i] = _mask_of(key[0])
        b_ann[i] = _mask_of(key[1])
        b_val[i] = c
    key_chunks: list[np.ndarray] = []
    val_chunks: list[np.ndarray] = []
    for (c1, a1), ca in a._terms.items():
        c1m = _mask_of(c1)
        a1m = _mask_of(a1)
        k = len(a1)
        for t in _submasks(a1m):
            rest_ann = a1m ^ t  # A1 \ T, row-independent
            ok = (b_cre & t) == t
            rem = b_cre & np.int64(~t)  # C2 \ T
            ok &= (rem & c1m) == 0
            ok &= (b_ann & rest_ann) == 0
            if not np.any(ok):
                continue
            cre_rows = b_cre[ok]
            rem_rows = rem[ok]
            ann_rows = b_ann[ok]
            par = np.zeros(cre_rows.shape, dtype=np.int64)
            for x in _bits_desc(t):  # (a) hops before each contraction
                par += np.bitwise_count(cre_rows & _ABOVE[x])
            if (k - t.bit_count()) & 1:  # (b) odd pass-through count
                par += np.bitwise_count(cre_rows)
            for u in _bits_desc(c1m):  # (d) creation merge
                par += np.bitwise_count(rem_rows & _ABOVE[u])
            for x in _bits_desc(rest_ann):  # (e) annihilation merge
                par += np.bitwise_count(ann_rows & _ABOVE[x])
            const = 0
            for x in _bits_desc(t):  # (c) contracted partners below A1\T
                const += (rest_ann >> (x + 1)).bit_count()
            sign = 1.0 - 2.0 * ((par + const) & 1)
            key_chunks.append(((np.int64(c1m) | rem_rows) << 32) | (rest_ann | ann_rows))
            val_chunks.append(ca * sign * b_val[ok])
    if not key_chunks:
        return {}
    uniq, inverse = np.unique(np.concatenate(key_chunks), return_inverse=True)
    sums = np.bincount(inverse, weights=np.concatenate(val_chunks), minlength=len(uniq))
    out: dict[Key, float] = {}
    for packed, v in zip(uniq.tolist(), sums.tolist()):
        out[(_bits_desc(packed >> 32), _bits_desc(packed & _FULL_MASK))] = v
    return out


def commutator(
    a: NormalOrderedOperator,
    b: NormalOrderedOperator,
    *,
    drop_tolerance: float = DEFAULT_DROP_TOLERANCE,
) -> NormalOrderedOperator:
    """``a b - b a``.

    The two products are accumulated independently and subtracted term by
    term, which makes ``commutator(a, b)`` the exact floating-point negation
    of ``commutator(b, a)``.
    """
    ab = _multiply_raw(a, b)
    ba = _multiply_raw(b, a)
    for key, c in ba.items():
        ab[key] = ab.get(key, 0.0) - c
    return NormalOrderedOperator(_prune(ab, drop_tolerance), _trusted=True)


def operator_sum(
    ops: Iterable[NormalOrderedOperator],
    *,
    drop_tolerance: float = DEFAULT_DROP_TOLERANCE,
) -> NormalOrderedOperator:
    """Sum many operators with a single accumulation pass."""
    out: dict[Key, float] = {}
    for op in ops:
        for key, c in op._terms.items():
            out[key] = out.get(key, 0.0) + c
    return NormalOrderedOperator(_prune(out, drop_tolerance), _trusted=True)


def trace(
    op: NormalOrderedOperator,
    n_orbitals: int,
    n_electrons: int | None = None,
) -> float:
    """Trace over the full Fock space, or over one particle-number sector.

    Only keys whose creation and annihilation groups coincide have diagonal
    matrix elements.  Such a key with k orbitals equals
    ``(-1)^(k(k-1)/2) * prod n_p``, so it contributes its coefficient times
    that sign once per basis configuration containing all k orbitals:
    ``2^(N-k)`` configurations in full Fock space, ``C(N-k, n-k)`` in the
    n-electron sector.
    """
    if n_orbitals <= op.max_orbital():
        raise ValidationError(
            f"operator touches orbital {op.max_orbital()} but n_orbitals={n_orbitals}"
        )
    total = 0.0
    for (creations, annihilations), c in op._terms.items():
        if creations != annihilations:
            continue
        k = len(creations)
        sign = -1.0 if (k * (k - 1) // 2) & 1 else 1.0
        if n_electrons is None:
            count = 1 << (n_orbitals - k)
        elif k > n_electrons:
            count = 0
        else:
            count = math.comb(n_orbitals - k, n_electrons - k)
        total += c * sign * count
    return total


def number_operator(n_orbitals: int) -> NormalOrderedOperator:
    """Total particle-number operator on ``n_orbitals`` spin orbitals."""
    return NormalOrderedOperator(
        {((p,), (p,)): 1.0 for p in range(n_orbitals)}, _trusted=True
    )
