"""Number operators N = s a1+a1 + p a2+a2 + r sigma0, conservation and sectors.

All of (s, p, r) and the sector labels are exact rationals, so sector
membership never depends on a floating-point tolerance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy

from .fock import (
    Basis,
    FockState,
    HamiltonianSpec,
    MonomialTerm,
    Spin,
    SpinChannel,
    assemble_operator,
    commutator,
    interior_mask,
)

__all__ = [
    "NumberOperatorSpec",
    "TermResidual",
    "ConservationReport",
    "SectorLabel",
    "SectorLattice",
    "term_residual",
    "check_conservation",
    "solve_conservation",
    "sector_decompose",
    "sector_lattice",
    "numeric_conservation_check",
]


def _frac(value) -> Fraction:
    if isinstance(value, (float, np.floating)):
        # decimal spelling, so 0.1 means 1/10 rather than its binary expansion
        return Fraction(str(float(value)))
    return Fraction(value)


@dataclass(frozen=True)
class NumberOperatorSpec:
    s: Fraction
    p: Fraction
    r: Fraction

    def __post_init__(self):
        vals = [_frac(v) for v in (self.s, self.p, self.r)]
        if all(v == 0 for v in vals):
            raise ValueError("number operator (s, p, r) must not vanish")
        first = next(v for v in vals if v != 0)
        if first < 0:
            vals = [-v for v in vals]
        for name, v in zip("spr", vals):
            object.__setattr__(self, name, v)

    @classmethod
    def parse(cls, text: str) -> "NumberOperatorSpec":
        """Parse ``"1,1,1/2"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected 's,p,r', got {text!r}")
        return cls(*(Fraction(p) for p in parts))

    @property
    def triple(self) -> tuple[Fraction, Fraction, Fraction]:
        return self.s, self.p, self.r

    def eigenvalue(self, state: FockState) -> Fraction:
        sign = 1 if state.spin is Spin.UP else -1
        return self.s * state.n1 + self.p * state.n2 + sign * self.r

    def j_label(self, j: int) -> "SectorLabel":
        """Label of the sector containing |j, 0, up>."""
        return SectorLabel(self.s * j + self.r)

    def as_spec(self) -> HamiltonianSpec:
        return HamiltonianSpec.from_terms(
            [
                MonomialTerm(self.s, (1, 1, 0, 0)),
                MonomialTerm(self.p, (0, 0, 1, 1)),
                MonomialTerm(self.r, (0, 0, 0, 0), SpinChannel.SIGMA0),
            ]
        )

    def to_record(self) -> dict:
        return {k: str(v) for k, v in zip("spr", self.triple)}

    def __str__(self) -> str:
        return f"({self.s}, {self.p}, {self.r})"


@dataclass(frozen=True, order=True)
class SectorLabel:
    eigenvalue: Fraction

    def __post_init__(self):
        object.__setattr__(self, "eigenvalue", _frac(self.eigenvalue))

    @classmethod
    def parse(cls, text: str) -> "SectorLabel":
        return cls(Fraction(text.strip()))

    def __str__(self) -> str:
        return str(self.eigenvalue)


def _channel_sign(channel: SpinChannel) -> int:
    if channel is SpinChannel.SIGMA_PLUS:
        return 1
    if channel is SpinChannel.SIGMA_MINUS:
        return -1
    return 0


def term_residual(term: MonomialTerm, n: NumberOperatorSpec) -> Fraction:
    """Eigenvalue of ad_N on a term: [N, T] = residual * T.

    Derived from [N, a1+] = s a1+, [N, a2+] = p a2+ and [N, sigma+-] = +-2r sigma+-.
    """
    w1, w2 = term.shift
    return n.s * w1 + n.p * w2 + 2 * n.r * _channel_sign(term.channel)


@dataclass(frozen=True)
class TermResidual:
    term: MonomialTerm
    residual: Fraction

    @property
    def channel(self) -> SpinChannel:
        return self.term.channel


@dataclass(frozen=True)
class ConservationReport:
    number_operator: NumberOperatorSpec
    records: tuple[TermResidual, ...]

    @property
    def conserved(self) -> bool:
        return all(rec.residual == 0 for rec in self.records)

    @property
    def violations(self) -> list[TermResidual]:
        return [rec for rec in self.records if rec.residual != 0]

    def to_dict(self) -> dict:
        return {
            "number_operator": self.number_operator.to_record(),
            "conserved": self.conserved,
            "terms": [
                {**rec.term.to_record(), "residual": str(rec.residual)} for rec in self.records
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def check_conservation(spec: HamiltonianSpec, n: NumberOperatorSpec) -> ConservationReport:
    return ConservationReport(n, tuple(TermResidual(t, term_residual(t, n)) for t in spec))


def solve_conservation(spec: HamiltonianSpec) -> list[NumberOperatorSpec]:
    """Rational basis of all (s, p, r) whose N commutes with ``spec``.

    Each basis vector is scaled so its first nonzero component is 1.  An empty
    list means only the trivial solution exists.
    """
    if len(spec) == 0:
        raise ValueError("empty Hamiltonian")
    rows = {(t.shift[0], t.shift[1], 2 * _channel_sign(t.channel)) for t in spec}
    matrix = sympy.Matrix(sorted(rows))
    basis = matrix.nullspace()
    if len(basis) > 1:
        # reduced row echelon form makes the basis canonical
        stacked = sympy.Matrix.hstack(*basis).T.rref()[0]
        basis = [stacked.row(i).T for i in range(stacked.rows)]
    out = []
    for vec in basis:
        vals = [Fraction(int(sympy.fraction(v)[0]), int(sympy.fraction(v)[1])) for v in vec]
        first = next(v for v in vals if v != 0)
        out.append(NumberOperatorSpec(*(v / first for v in vals)))
    return out


def sector_decompose(basis: Basis, n: NumberOperatorSpec) -> dict[SectorLabel, list[FockState]]:
    """Partition ``basis`` by exact N eigenvalue, ascending labels, global order kept."""
    sectors: dict[SectorLabel, list[FockState]] = {}
    for state in basis.states:
        sectors.setdefault(SectorLabel(n.eigenvalue(state)), []).append(state)
    return dict(sorted(sectors.items()))


def numeric_conservation_check(spec: HamiltonianSpec, n: NumberOperatorSpec, cutoff) -> float:
    """Max |[N, H]| over interior rows and columns of a truncated basis."""
    basis = Basis(cutoff)
    d1, d2 = spec.max_degree()
    try:
        mask = interior_mask(basis, (d1 + 1, d2 + 1))
    except ValueError as exc:
        raise ValueError(f"empty interior for cutoff {cutoff}") from exc
    if mask.size == 0:
        raise ValueError(f"empty interior for cutoff {cutoff}")
    h = assemble_operator(spec, basis)
    nop = assemble_operator(n.as_spec(), basis)
    return commutator(nop, h).max_abs(mask)


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


@dataclass(frozen=True)
class SectorLattice:
    """Occupations of one sector in the untruncated space.

    For each spin the states are ``origin + k * direction`` for
    ``k = 0 .. length - 1``; ``length`` is None for an unbounded sector.
    Modes the Hamiltonian never touches are frozen at zero occupation.
    """

    label: SectorLabel
    direction: tuple[int, int]
    origins: dict
    lengths: dict

    @property
    def spins(self) -> list[Spin]:
        return [s for s in (Spin.UP, Spin.DOWN) if s in self.origins]

    @property
    def finite(self) -> bool:
        return all(self.lengths[s] is not None for s in self.spins)

    @property
    def dimension(self) -> int | None:
        if not self.finite:
            return None
        return sum(self.lengths[s] for s in self.spins)

    def state(self, spin: Spin, k: int) -> FockState:
        (o1, o2), (d1, d2) = self.origins[spin], self.direction
        return FockState(o1 + k * d1, o2 + k * d2, spin)

    def contains(self, spin: Spin, k: int) -> bool:
        if spin not in self.origins or k < 0:
            return False
        length = self.lengths[spin]
        return length is None or k < length

    def index_of(self, state: FockState) -> int | None:
        """Lattice index k of ``state`` or None if it is not in the sector."""
        if state.spin not in self.origins:
            return None
        (o1, o2), (d1, d2) = self.origins[state.spin], self.direction
        e1, e2 = state.n1 - o1, state.n2 - o2
        if d1 == 0 and d2 == 0:
            k = 0 if (e1, e2) == (0, 0) else None
        elif d2 != 0:
            k = e2 // d2 if e2 % d2 == 0 else None
        else:
            k = e1 // d1 if e1 % d1 == 0 else None
        if k is None or (e1, e2) != (k * d1, k * d2) or not self.contains(state.spin, k):
            return None
        return k


def _solve_line(a: Fraction, b: Fraction, c: Fraction, active: tuple[bool, bool]):
    """Nonnegative integer solutions of a*n1 + b*n2 = c as (origin, direction, length)."""
    act1, act2 = active
    if not act1:
        a = Fraction(0)
    if not act2:
        b = Fraction(0)
    if act1 and act2:
        if a == 0 and b == 0:
            raise ValueError("number operator leaves both modes free; sector is not one-variable")
        if b == 0:
            n1 = c / a
            if n1.denominator != 1 or n1 < 0:
                return None
            return (int(n1), 0), (0, 1), None
        if a == 0:
            n2 = c / b
            if n2.denominator != 1 or n2 < 0:
                return None
            return (0, int(n2)), (1, 0), None
        lcd = math.lcm(a.denominator, b.denominator, c.denominator)
        A, B, C = int(a * lcd), int(b * lcd), int(c * lcd)
        g, x, y = _egcd(A, B)
        if C % g:
            return None
        x0, y0 = x * (C // g), y * (C // g)
        d1, d2 = B // g, -A // g
        if d2 < 0:
            d1, d2 = -d1, -d2
        # n2 = y0 + t*d2 >= 0 and n1 = x0 + t*d1 >= 0
        t_lo = -(y0 // d2)
        t_hi = None
        if d1 > 0:
            t_lo = max(t_lo, -(x0 // d1))
        else:
            t_hi = x0 // (-d1)
        if t_hi is not None and t_hi < t_lo:
            return None
        origin = (x0 + t_lo * d1, y0 + t_lo * d2)
        length = None if t_hi is None else t_hi - t_lo + 1
        return origin, (d1, d2), length
    # at most one active mode: the inactive one is pinned at zero
    if act1 or act2:
        coef = a if act1 else b
        free = (1, 0) if act1 else (0, 1)
        if coef == 0:
            if c != 0:
                return None
            return (0, 0), free, None
        m = c / coef
        if m.denominator != 1 or m < 0:
            return None
        origin = (int(m), 0) if act1 else (0, int(m))
        return origin, free, 1
    if c != 0:
        return None
    return (0, 0), (0, 0), 1


def sector_lattice(
    n: NumberOperatorSpec,
    label: SectorLabel,
    active_modes: tuple[bool, bool] = (True, True),
) -> SectorLattice:
    """Enumerate a sector of the untruncated space as a one-parameter lattice.

    The lattice direction is the primitive integer vector (d1, d2) with
    s*d1 + p*d2 = 0 and d2 > 0; the origin of each spin branch is its state of
    smallest n2 (smallest n1 when the direction is along mode 1).
    """
    label = label if isinstance(label, SectorLabel) else SectorLabel(label)
    origins, lengths, direction = {}, {}, None
    for spin, sign in ((Spin.UP, 1), (Spin.DOWN, -1)):
        hit = _solve_line(n.s, n.p, label.eigenvalue - sign * n.r, active_modes)
        if hit is None:
            continue
        origin, d, length = hit
        origins[spin] = origin
        lengths[spin] = length
        if direction is None or length != 1:
            direction = d
    if not origins:
        raise ValueError(f"sector {label} is empty")
    return SectorLattice(label, direction, origins, lengths)


def commutator_with_number(spec: HamiltonianSpec, n: NumberOperatorSpec) -> HamiltonianSpec:
    """Symbolic [N, H] as a spec, term by term."""
    return HamiltonianSpec.from_terms(
        t.with_coefficient(t.coefficient * term_residual(t, n)) for t in spec
    )

