"""Occupation-number basis and operator assembly for two boson modes times a spin-1/2.

Operators are normal-ordered monomials

    (a1+)^v1 (a1)^v2 (a2+)^v3 (a2)^v4  (x)  spin channel

with the channel one of identity, sigma0, sigma+ and sigma-.  States are
|n1, n2, spin> with spin UP = (1, 0) and DOWN = (0, 1), so that sigma+ maps
DOWN to UP and sigma0 is diag(1, -1).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SpinChannel",
    "Spin",
    "MonomialTerm",
    "HamiltonianSpec",
    "FockState",
    "Basis",
    "SparseOperator",
    "apply_monomial",
    "ladder_action",
    "assemble_operator",
    "commutator",
    "anticommutator",
    "interior_mask",
    "format_number",
    "parse_number",
]


class SpinChannel(enum.Enum):
    IDENTITY = "identity"
    SIGMA0 = "sigma0"
    SIGMA_PLUS = "sigma_plus"
    SIGMA_MINUS = "sigma_minus"

    @property
    def matrix(self) -> np.ndarray:
        return _SPIN_MATRICES[self]

    @property
    def adjoint(self) -> "SpinChannel":
        if self is SpinChannel.SIGMA_PLUS:
            return SpinChannel.SIGMA_MINUS
        if self is SpinChannel.SIGMA_MINUS:
            return SpinChannel.SIGMA_PLUS
        return self

    @property
    def is_odd(self) -> bool:
        return self in (SpinChannel.SIGMA_PLUS, SpinChannel.SIGMA_MINUS)


class Spin(enum.IntEnum):
    UP = 0
    DOWN = 1

    @property
    def symbol(self) -> str:
        return "up" if self is Spin.UP else "down"


_SPIN_MATRICES = {
    SpinChannel.IDENTITY: np.eye(2),
    SpinChannel.SIGMA0: np.diag([1.0, -1.0]),
    SpinChannel.SIGMA_PLUS: np.array([[0.0, 1.0], [0.0, 0.0]]),
    SpinChannel.SIGMA_MINUS: np.array([[0.0, 0.0], [1.0, 0.0]]),
}


def _spin_action(channel: SpinChannel, spin: Spin) -> tuple[Spin, int] | None:
    """Image of a spin basis vector under a channel, as (spin, sign)."""
    if channel is SpinChannel.IDENTITY:
        return spin, 1
    if channel is SpinChannel.SIGMA0:
        return spin, (1 if spin is Spin.UP else -1)
    if channel is SpinChannel.SIGMA_PLUS:
        return (Spin.UP, 1) if spin is Spin.DOWN else None
    return (Spin.DOWN, 1) if spin is Spin.UP else None


def format_number(value) -> int | float | str:
    """JSON-friendly form of a coefficient; rationals become ``"p/q"`` strings."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return int(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("boolean is not a coefficient")
    if isinstance(value, (int, np.integer)):
        return int(value)
    return float(value)


def parse_number(value) -> int | float | Fraction:
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, bool):
        raise TypeError("boolean is not a coefficient")
    if isinstance(value, (int, Fraction)):
        return value
    return float(value)


@dataclass(frozen=True)
class MonomialTerm:
    """One coefficient times a normal-ordered boson monomial times a spin channel."""

    coefficient: Real
    exponents: tuple[int, int, int, int] = (0, 0, 0, 0)
    channel: SpinChannel = SpinChannel.IDENTITY

    def __post_init__(self):
        exps = tuple(int(v) for v in self.exponents)
        if len(exps) != 4 or any(v < 0 for v in exps):
            raise ValueError(f"exponents must be four nonnegative integers, got {self.exponents!r}")
        if not math.isfinite(float(self.coefficient)):
            raise ValueError("coefficient must be finite")
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "channel", SpinChannel(self.channel))

    @property
    def key(self) -> tuple[tuple[int, int, int, int], SpinChannel]:
        return self.exponents, self.channel

    @property
    def shift(self) -> tuple[int, int]:
        """Net change of (n1, n2) produced by the monomial."""
        v1, v2, v3, v4 = self.exponents
        return v1 - v2, v3 - v4

    def adjoint(self) -> "MonomialTerm":
        v1, v2, v3, v4 = self.exponents
        return MonomialTerm(self.coefficient, (v2, v1, v4, v3), self.channel.adjoint)

    def with_coefficient(self, coefficient) -> "MonomialTerm":
        return MonomialTerm(coefficient, self.exponents, self.channel)

    def to_record(self) -> dict:
        v1, v2, v3, v4 = self.exponents
        return {
            "channel": self.channel.value,
            "v1": v1,
            "v2": v2,
            "v3": v3,
            "v4": v4,
            "coefficient": format_number(self.coefficient),
        }

    @classmethod
    def from_record(cls, record: dict) -> "MonomialTerm":
        return cls(
            parse_number(record["coefficient"]),
            (record["v1"], record["v2"], record["v3"], record["v4"]),
            SpinChannel(record["channel"]),
        )

    def __str__(self) -> str:
        names = ("a1+", "a1", "a2+", "a2")
        parts = []
        for name, v in zip(names, self.exponents):
            if v == 1:
                parts.append(name)
            elif v > 1:
                parts.append(f"({name})^{v}")
        if self.channel is not SpinChannel.IDENTITY:
            parts.append(self.channel.value)
        body = " ".join(parts) if parts else "1"
        return f"{format_number(self.coefficient)} * {body}"


_CHANNEL_ORDER = {c: i for i, c in enumerate(SpinChannel)}


def _term_sort_key(term: MonomialTerm):
    return _CHANNEL_ORDER[term.channel], term.exponents


@dataclass(frozen=True)
class HamiltonianSpec:
    """Coefficient tables of a Hamiltonian, one term per (exponents, channel) key.

    Build with :meth:`from_terms`, which merges repeated keys and drops terms
    whose coefficient is exactly zero.  Terms are stored in canonical order
    (channel, then exponents) so serialization is deterministic.
    """

    terms: tuple[MonomialTerm, ...] = ()

    @classmethod
    def from_terms(cls, terms: Iterable[MonomialTerm]) -> "HamiltonianSpec":
        merged: dict = {}
        for term in terms:
            if term.key in merged:
                merged[term.key] = merged[term.key] + term.coefficient
            else:
                merged[term.key] = term.coefficient
        out = [MonomialTerm(c, k[0], k[1]) for k, c in merged.items() if c != 0]
        out.sort(key=_term_sort_key)
        return cls(tuple(out))

    @classmethod
    def monomial(cls, exponents=(0, 0, 0, 0), channel=SpinChannel.IDENTITY, coefficient=1) -> "HamiltonianSpec":
        return cls.from_terms([MonomialTerm(coefficient, tuple(exponents), channel)])

    @classmethod
    def identity(cls, coefficient=1) -> "HamiltonianSpec":
        return cls.monomial(coefficient=coefficient)

    def __iter__(self) -> Iterator[MonomialTerm]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "HamiltonianSpec") -> "HamiltonianSpec":
        return HamiltonianSpec.from_terms(list(self.terms) + list(other.terms))

    def __sub__(self, other: "HamiltonianSpec") -> "HamiltonianSpec":
        return self + other.scale(-1)

    def scale(self, factor) -> "HamiltonianSpec":
        return HamiltonianSpec.from_terms(t.with_coefficient(t.coefficient * factor) for t in self.terms)

    def coefficient(self, exponents, channel=SpinChannel.IDENTITY):
        for t in self.terms:
            if t.key == (tuple(exponents), SpinChannel(channel)):
                return t.coefficient
        return 0

    def adjoint(self) -> "HamiltonianSpec":
        return HamiltonianSpec.from_terms(t.adjoint() for t in self.terms)

    def max_degree(self) -> tuple[int, int]:
        """Largest per-mode raising power over all terms."""
        d1 = max((max(t.exponents[0], t.exponents[1]) for t in self.terms), default=0)
        d2 = max((max(t.exponents[2], t.exponents[3]) for t in self.terms), default=0)
        return d1, d2

    def active_modes(self) -> tuple[bool, bool]:
        return (
            any(t.exponents[0] or t.exponents[1] for t in self.terms),
            any(t.exponents[2] or t.exponents[3] for t in self.terms),
        )

    def is_odd(self) -> bool:
        """True when every term carries exactly one sigma+/- factor."""
        return bool(self.terms) and all(t.channel.is_odd for t in self.terms)

    def is_even(self) -> bool:
        return all(not t.channel.is_odd for t in self.terms)

    def to_records(self) -> list[dict]:
        return [t.to_record() for t in self.terms]

    @classmethod
    def from_records(cls, records: Sequence[dict]) -> "HamiltonianSpec":
        return cls.from_terms(MonomialTerm.from_record(r) for r in records)

    def dumps(self) -> str:
        return json.dumps({"terms": self.to_records()}, indent=2, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text: str) -> "HamiltonianSpec":
        data = json.loads(text)
        records = data["terms"] if isinstance(data, dict) else data
        return cls.from_records(records)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(str(t) for t in self.terms)


@dataclass(frozen=True, order=True)
class FockState:
    n1: int
    n2: int
    spin: Spin

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError(f"occupations must be nonnegative: {self}")
        object.__setattr__(self, "spin", Spin(self.spin))

    def __str__(self) -> str:
        arrow = "↑" if self.spin is Spin.UP else "↓"
        return f"|{self.n1},{self.n2},{arrow}>"


def ladder_action(term: MonomialTerm, state: FockState) -> tuple[FockState, int, int] | None:
    """Exact image of ``term`` on ``state`` without the coefficient.

    Returns ``(image, sign, q)`` with amplitude ``sign * sqrt(q)``, or None when
    the state is annihilated.  Operators act rightmost first.
    """
    spin = _spin_action(term.channel, state.spin)
    if spin is None:
        return None
    new_spin, sign = spin
    v1, v2, v3, v4 = term.exponents
    q = 1
    n1, n2 = state.n1, state.n2
    if v4 > n2 or v2 > n1:
        return None
    # a2^v4 then (a2+)^v3, then the same for mode 1
    q *= math.perm(n2, v4)
    n2 -= v4
    q *= math.perm(n2 + v3, v3)
    n2 += v3
    q *= math.perm(n1, v2)
    n1 -= v2
    q *= math.perm(n1 + v1, v1)
    n1 += v1
    return FockState(n1, n2, new_spin), sign, q


def apply_monomial(term: MonomialTerm, state: FockState) -> list[tuple[FockState, float]]:
    """Apply one monomial term to a basis state.

    >>> apply_monomial(MonomialTerm(1, (1, 1, 0, 0)), FockState(3, 0, Spin.UP))
    [(FockState(n1=3, n2=0, spin=<Spin.UP: 0>), 3.0)]
    """
    hit = ladder_action(term, state)
    if hit is None:
        return []
    image, sign, q = hit
    return [(image, float(term.coefficient) * sign * math.sqrt(q))]


class Basis:
    """All states with n1 <= N1max and n2 <= N2max, ordered by (n1, n2, spin)."""

    def __init__(self, cutoff: tuple[int, int]):
        n1max, n2max = (int(c) for c in cutoff)
        if n1max < 0 or n2max < 0:
            raise ValueError(f"cutoff must be nonnegative, got {cutoff!r}")
        self.cutoff = (n1max, n2max)
        self.states: tuple[FockState, ...] = tuple(
            FockState(n1, n2, s)
            for n1 in range(n1max + 1)
            for n2 in range(n2max + 1)
            for s in (Spin.UP, Spin.DOWN)
        )
        self.index = {st: i for i, st in enumerate(self.states)}

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __contains__(self, state) -> bool:
        return state in self.index

    def __eq__(self, other) -> bool:
        return isinstance(other, Basis) and other.cutoff == self.cutoff

    def __hash__(self) -> int:
        return hash(self.cutoff)

    def __repr__(self) -> str:
        return f"Basis(cutoff={self.cutoff}, size={len(self)})"

    def ordinal(self, state: FockState) -> int:
        return self.index[state]


class SparseOperator:
    """A real matrix over a :class:`Basis`, stored as CSR."""

    def __init__(self, basis: Basis, matrix):
        matrix = sp.csr_matrix(matrix, dtype=float)
        if matrix.shape != (len(basis), len(basis)):
            raise ValueError(f"matrix shape {matrix.shape} does not match basis size {len(basis)}")
        matrix.eliminate_zeros()
        matrix.sort_indices()
        self.basis = basis
        self.matrix = matrix

    @classmethod
    def zeros(cls, basis: Basis) -> "SparseOperator":
        return cls(basis, sp.csr_matrix((len(basis), len(basis))))

    @classmethod
    def identity(cls, basis: Basis) -> "SparseOperator":
        return cls(basis, sp.identity(len(basis), format="csr"))

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def entries(self) -> dict[tuple[int, int], float]:
        coo = self.matrix.tocoo()
        return {(int(i), int(j)): float(v) for i, j, v in zip(coo.row, coo.col, coo.data)}

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def restrict(self, rows, cols=None) -> np.ndarray:
        """Dense submatrix on the given ordinals."""
        rows = np.asarray(rows, dtype=int)
        cols = rows if cols is None else np.asarray(cols, dtype=int)
        return self.matrix[rows][:, cols].toarray()

    def _check(self, other: "SparseOperator"):
        if not isinstance(other, SparseOperator):
            return NotImplemented
        if other.basis != self.basis:
            raise ValueError("operators live on different bases")
        return None

    def __add__(self, other):
        self._check(other)
        return SparseOperator(self.basis, self.matrix + other.matrix)

    def __sub__(self, other):
        self._check(other)
        return SparseOperator(self.basis, self.matrix - other.matrix)

    def __neg__(self):
        return SparseOperator(self.basis, -self.matrix)

    def __mul__(self, factor):
        return SparseOperator(self.basis, self.matrix * float(factor))

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        return SparseOperator(self.basis, self.matrix @ other.matrix)

    def max_abs(self, mask=None) -> float:
        if mask is None:
            data = self.matrix.data
            return float(np.abs(data).max()) if data.size else 0.0
        sub = self.restrict(mask)
        return float(np.abs(sub).max()) if sub.size else 0.0

    def __repr__(self) -> str:
        return f"SparseOperator({self.basis!r}, nnz={self.matrix.nnz})"


def assemble_operator(spec: HamiltonianSpec, basis: Basis) -> SparseOperator:
    """Matrix of ``spec`` on ``basis``; images outside the cutoff box are dropped."""
    if len(basis) == 0:
        raise ValueError("empty basis")
    rows, cols, vals = [], [], []
    for term in spec:
        coeff = float(term.coefficient)
        for j, state in enumerate(basis.states):
            hit = ladder_action(term, state)
            if hit is None:
                continue
            image, sign, q = hit
            i = basis.index.get(image)
            if i is None:
                continue
            rows.append(i)
            cols.append(j)
            vals.append(coeff * sign * math.sqrt(q))
    n = len(basis)
    # coo -> csr sums duplicates in insertion order
    matrix = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return SparseOperator(basis, matrix)


def commutator(a: SparseOperator, b: SparseOperator) -> SparseOperator:
    if a.basis != b.basis:
        raise ValueError("commutator of operators on different bases")
    return a @ b - b @ a


def anticommutator(a: SparseOperator, b: SparseOperator) -> SparseOperator:
    if a.basis != b.basis:
        raise ValueError("anticommutator of operators on different bases")
    return a @ b + b @ a


def interior_mask(basis: Basis, degree: tuple[int, int]) -> np.ndarray:
    """Ordinals of states at least ``degree`` quanta below the cutoff in each mode."""
    d1, d2 = degree
    n1max, n2max = basis.cutoff
    if d1 > n1max or d2 > n2max:
        raise ValueError(f"degree {degree} exceeds cutoff {basis.cutoff}")
    return np.array(
        [i for i, s in enumerate(basis.states) if s.n1 <= n1max - d1 and s.n2 <= n2max - d2],
        dtype=int,
    )
