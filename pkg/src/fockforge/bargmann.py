"""One-variable realization of a conserved sector.

Inside a sector of N the occupations of each spin branch lie on a line
``origin + k * (d1, d2)``.  In the Bargmann picture (a+ -> z, a -> d/dz) the
sector wavefunction is

    psi = z^origin_up phi1(x) |up> + z^origin_down phi2(x) |down>,  x = z1^d1 z2^d2

and every monomial term acts on x^k as ``P(k) x^(k + shift)`` for a polynomial
P.  Rewriting P in falling powers of the Euler operator x d/dx turns H - E into
a 2x2 system of ODEs with polynomial coefficients, and the same data on the
monomials x^k gives a banded matrix whose Hessenberg minors are the energy
polynomials.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np
import sympy

from .fock import HamiltonianSpec, MonomialTerm, Spin, format_number, ladder_action
from .fock import _spin_action
from .symmetry import (
    NumberOperatorSpec,
    SectorLabel,
    SectorLattice,
    check_conservation,
    sector_lattice,
)

__all__ = [
    "Affine",
    "PolyMatrixODE",
    "ReducedSector",
    "EnergyPolynomialSequence",
    "DegreeReductionWarning",
    "reduce_sector",
    "discretize_ode",
    "extract_ode",
    "energy_polynomials",
    "qes_roots",
    "polynomial_roots",
]

SPINS = (Spin.UP, Spin.DOWN)


class DegreeReductionWarning(UserWarning):
    """Leading polynomial coefficient negligible; degree reduced before root finding."""


class Affine(NamedTuple):
    """const + e * E, affine in the spectral parameter."""

    const: object = 0
    e: object = 0

    def __add__(self, other):
        return Affine(self.const + other.const, self.e + other.e)

    def scale(self, factor):
        return Affine(self.const * factor, self.e * factor)

    def __bool__(self):
        return self.const != 0 or self.e != 0

    def __call__(self, energy):
        return self.const + self.e * energy

    def __str__(self):
        if self.e == 0:
            return _fmt(self.const)
        e = "E" if self.e == 1 else "-E" if self.e == -1 else f"{_fmt(self.e)}*E"
        if self.const == 0:
            return e
        return f"({_fmt(self.const)} + {e})" if not e.startswith("-") else f"({_fmt(self.const)} {e[0]} {e[1:]})"


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _exact(value):
    """Keep exact numbers exact; ints become Fractions so division stays exact."""
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    return value


# polynomial helpers: coefficient lists, lowest power first


def _trim(poly: list) -> list:
    while poly and poly[-1] == 0:
        poly.pop()
    return poly


def _pmul(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


def _padd(a: list, b: list) -> list:
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def _peval(poly: list, k):
    acc = 0
    for c in reversed(poly):
        acc = acc * k + c
    return acc


def _falling_linear(offset: int, slope: int, v: int) -> list:
    """Polynomial in k for (offset + slope k)(offset + slope k - 1)...(v factors)."""
    out = [Fraction(1)]
    for i in range(v):
        out = _pmul(out, [Fraction(offset - i), Fraction(slope)])
    return out


def _newton_falling(poly: list) -> list:
    """Coefficients c_i with poly(k) = sum_i c_i k(k-1)...(k-i+1)."""
    degree = len(poly) - 1
    if degree < 0:
        return []
    values = [_peval(poly, k) for k in range(degree + 1)]
    coeffs = []
    for i in range(degree + 1):
        coeffs.append(values[0] / math.factorial(i))
        values = [values[j + 1] - values[j] for j in range(len(values) - 1)]
    return coeffs


def _orient(lattice: SectorLattice, route: str) -> SectorLattice:
    if route == "S":
        return lattice
    if route != "T":
        raise ValueError(f"route must be 'S' or 'T', got {route!r}")
    if not lattice.finite:
        raise ValueError("the reversed (T) orientation needs a finite sector")
    d1, d2 = lattice.direction
    origins = {
        s: (o[0] + (lattice.lengths[s] - 1) * d1, o[1] + (lattice.lengths[s] - 1) * d2)
        for s, o in lattice.origins.items()
    }
    return SectorLattice(lattice.label, (-d1, -d2), origins, dict(lattice.lengths))


def _prepare(spec: HamiltonianSpec, n: NumberOperatorSpec, sector, route: str = "S") -> SectorLattice:
    if len(spec) == 0:
        raise ValueError("empty Hamiltonian")
    report = check_conservation(spec, n)
    if not report.conserved:
        bad = ", ".join(str(r.term) for r in report.violations)
        raise ValueError(f"Hamiltonian does not conserve N{n}: {bad}")
    label = sector if isinstance(sector, SectorLabel) else SectorLabel(sector)
    return _orient(sector_lattice(n, label, spec.active_modes()), route)


@dataclass(frozen=True)
class _Coupling:
    """Action of one term from branch ``source`` to branch ``target``: x^k -> P(k) x^(k+shift)."""

    term: MonomialTerm
    source: Spin
    target: Spin
    shift: int
    poly: list


def _couplings(spec: HamiltonianSpec, lattice: SectorLattice) -> list[_Coupling]:
    d1, d2 = lattice.direction
    out = []
    for term in spec:
        for source in lattice.spins:
            hit = _spin_action(term.channel, source)
            if hit is None:
                continue
            target, sign = hit
            if target not in lattice.origins:
                continue
            o1, o2 = lattice.origins[source]
            t1, t2 = lattice.origins[target]
            w1, w2 = term.shift
            g1, g2 = o1 + w1 - t1, o2 + w2 - t2
            if (d1, d2) == (0, 0):
                if (g1, g2) != (0, 0):
                    continue
                shift = 0
            else:
                shift = g2 // d2 if d2 else g1 // d1
                if (shift * d1, shift * d2) != (g1, g2):
                    raise AssertionError("conserved term left the sector lattice")
            v1, v2, v3, v4 = term.exponents
            poly = _pmul(_falling_linear(o1, d1, v2), _falling_linear(o2, d2, v4))
            poly = [_exact(term.coefficient) * sign * c for c in poly]
            out.append(_Coupling(term, source, target, shift, _trim(poly)))
    return out


# ---------------------------------------------------------------- ODE


@dataclass(frozen=True)
class PolyMatrixODE:
    """sum_d A_d(x, E) (d/dx)^d phi = 0 with A_d a 2x2 polynomial matrix.

    ``coefficients[(order, row, col)]`` is a tuple of :class:`Affine`, lowest
    power of x first; rows and columns are ordered (up, down).  The ansatz is
    psi = z^origins[up] phi1(x) |up> + z^origins[down] phi2(x) |down> with
    x = z1^direction[0] z2^direction[1].
    """

    label: SectorLabel
    direction: tuple[int, int]
    origins: dict
    coefficients: dict = field(default_factory=dict)

    @property
    def max_order(self) -> int:
        return max((o for o, _, _ in self.coefficients), default=0)

    def entry(self, order: int, row: int, col: int) -> tuple:
        return self.coefficients.get((order, row, col), ())

    def matrix(self, order: int) -> list[list[tuple]]:
        return [[self.entry(order, r, c) for c in range(2)] for r in range(2)]

    def scaled(self, factor) -> "PolyMatrixODE":
        coeffs = {k: tuple(a.scale(factor) for a in v) for k, v in self.coefficients.items()}
        return PolyMatrixODE(self.label, self.direction, dict(self.origins), coeffs)

    def energy_orders(self) -> set[int]:
        return {o for (o, _, _), poly in self.coefficients.items() if any(a.e != 0 for a in poly)}

    def apply_to_monomial(self, col: int, k: int) -> dict[tuple[int, int], Affine]:
        """Image of x^k in component ``col`` as {(row, power): coefficient}."""
        out: dict[tuple[int, int], Affine] = {}
        for (order, row, c), poly in self.coefficients.items():
            if c != col or k < order:
                continue
            fall = math.perm(k, order)
            for power, a in enumerate(poly):
                if not a:
                    continue
                key = (row, k - order + power)
                out[key] = out.get(key, Affine()) + a.scale(fall)
        return {key: a for key, a in out.items() if a}

    def residual(self, phi1, phi2, x, energy):
        """Both component residuals of the ODE for numpy polynomials phi1, phi2."""
        x = np.asarray(x, dtype=float)
        phis = (phi1, phi2)
        res = [np.zeros_like(x), np.zeros_like(x)]
        for (order, row, col), poly in self.coefficients.items():
            coef = sum(float(a(energy)) * x**p for p, a in enumerate(poly))
            res[row] = res[row] + coef * phis[col].deriv(order)(x) if order else res[row] + coef * phis[col](x)
        return res[0], res[1]

    def to_dict(self) -> dict:
        terms = []
        for (order, row, col), poly in sorted(self.coefficients.items()):
            terms.append(
                {
                    "order": order,
                    "row": row,
                    "col": col,
                    "coefficients": [
                        {"power": p, "const": format_number(a.const), "E": format_number(a.e)}
                        for p, a in enumerate(poly)
                        if a
                    ],
                }
            )
        return {
            "sector": str(self.label),
            "x": {"z1_power": self.direction[0], "z2_power": self.direction[1]},
            "origins": {s.symbol: list(o) for s, o in self.origins.items()},
            "terms": terms,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def format(self) -> str:
        """Human-readable matrices, one block per derivative order."""
        d1, d2 = self.direction
        lines = [f"sector N = {self.label}, x = z1^{d1} z2^{d2}"]
        for s, (o1, o2) in self.origins.items():
            comp = "phi1" if s is Spin.UP else "phi2"
            lines.append(f"  {s.symbol}: z1^{o1} z2^{o2} {comp}(x)")
        for order in range(self.max_order + 1):
            lines.append(f"order {order}:")
            for r in range(2):
                cells = [_format_poly(self.entry(order, r, c)) for c in range(2)]
                lines.append("  [ " + " , ".join(cells) + " ]")
        return "\n".join(lines)


def _format_poly(poly: tuple) -> str:
    parts = []
    for p, a in enumerate(poly):
        if not a:
            continue
        xs = "" if p == 0 else "x" if p == 1 else f"x^{p}"
        coef = str(a)
        if not xs:
            parts.append(coef)
        elif coef == "1":
            parts.append(xs)
        elif coef == "-1":
            parts.append(f"-{xs}")
        else:
            parts.append(f"{coef}*{xs}")
    return " + ".join(parts).replace("+ -", "- ") if parts else "0"


def extract_ode(spec: HamiltonianSpec, n: NumberOperatorSpec, sector, route: str = "S") -> PolyMatrixODE:
    """Polynomial-coefficient ODE system equivalent to (H - E) psi = 0 in a sector."""
    lattice = _prepare(spec, n, sector, route)
    row_of = {Spin.UP: 0, Spin.DOWN: 1}
    coeffs: dict[tuple[int, int, int], list] = {}

    def add(order, row, col, power, value: Affine):
        poly = coeffs.setdefault((order, row, col), [])
        while len(poly) <= power:
            poly.append(Affine())
        poly[power] = poly[power] + value

    for cp in _couplings(spec, lattice):
        for i, c in enumerate(_newton_falling(cp.poly)):
            if c == 0:
                continue
            power = cp.shift + i
            if power < 0:
                raise ValueError(
                    f"term {cp.term} needs negative powers of x in sector {lattice.label}; "
                    "no polynomial realization"
                )
            add(i, row_of[cp.target], row_of[cp.source], power, Affine(c, 0))
    for s in lattice.spins:
        add(0, row_of[s], row_of[s], 0, Affine(0, -1))
    cleaned = {}
    for key, poly in coeffs.items():
        while poly and not poly[-1]:
            poly.pop()
        if poly:
            cleaned[key] = tuple(poly)
    return PolyMatrixODE(lattice.label, lattice.direction, dict(lattice.origins), cleaned)


# ---------------------------------------------------------------- reduced sector


@dataclass(frozen=True)
class ReducedSector:
    """H restricted to one sector, in both the orthonormal and the monomial basis.

    ``keys[i] = (spin, k)`` names basis element i: the Fock state ``states[i]``
    for ``fock_block`` and the monomial x^k of that spin component for
    ``monomial_matrix``.  The two matrices are similar, related by the
    diagonal sqrt(n1! n2!).
    """

    label: SectorLabel
    lattice: SectorLattice
    keys: tuple
    states: tuple
    fock_block: np.ndarray
    monomial_matrix: np.ndarray
    finite: bool
    truncation: int | None
    offsets: dict
    lower_bandwidth: int
    upper_bandwidth: int

    @property
    def dimension(self) -> int:
        return len(self.keys)

    @property
    def spinor_degrees(self) -> dict:
        """Highest power of x kept in each spin component."""
        out: dict = {}
        for s, k in self.keys:
            out[s] = max(out.get(s, -1), k)
        return out

    @property
    def exact(self) -> bool:
        return all(not isinstance(v, float) for v in self.monomial_matrix.ravel())

    def monomial_float(self) -> np.ndarray:
        return self.monomial_matrix.astype(float)


def _bandwidths(couplings, offsets, rank) -> tuple[int, int]:
    lower = upper = 0
    for cp in couplings:
        if not cp.poly:
            continue
        col = 2 * offsets[cp.source] + rank[cp.source]
        row = 2 * (offsets[cp.target] + cp.shift) + rank[cp.target]
        lower, upper = max(lower, row - col), max(upper, col - row)
    return lower, upper


def _choose_ordering(couplings, spins):
    """Interleave the two branches so the monomial matrix is as close to Hessenberg as possible."""
    best = None
    for first in SPINS:
        rank = {first: 0, (Spin.DOWN if first is Spin.UP else Spin.UP): 1}
        for off in (0, 1, -1, 2, -2):
            offsets = {Spin.UP: 0, Spin.DOWN: off}
            lo, up = _bandwidths(couplings, offsets, rank)
            score = (min(lo, up), max(lo, up))
            if best is None or score < best[0]:
                best = (score, offsets, rank, lo, up)
    return best[1:]


def reduce_sector(
    spec: HamiltonianSpec,
    n: NumberOperatorSpec,
    sector,
    truncation: int | None = None,
    route: str = "S",
) -> ReducedSector:
    """Matrix of H on one sector, ordered by monomial degree.

    Finite sectors are returned whole and ``truncation`` is ignored; unbounded
    sectors keep the first ``truncation`` basis elements.
    """
    lattice = _prepare(spec, n, sector, route)
    couplings = _couplings(spec, lattice)
    offsets, rank, lower, upper = _choose_ordering(couplings, lattice.spins)
    if lattice.finite:
        keys = [(s, k) for s in lattice.spins for k in range(lattice.lengths[s])]
        used_truncation = None
    else:
        if truncation is None or truncation < 1:
            raise ValueError(f"sector {lattice.label} is unbounded; a positive truncation is required")
        keys = [(s, k) for s in lattice.spins for k in range(truncation + 2) if lattice.contains(s, k)]
        used_truncation = truncation
    keys.sort(key=lambda sk: (sk[1] + offsets[sk[0]], rank[sk[0]]))
    if used_truncation is not None:
        keys = keys[:truncation]
    if not keys:
        raise ValueError(f"sector {lattice.label} is empty")
    states = [lattice.state(s, k) for s, k in keys]
    index = {st: i for i, st in enumerate(states)}
    dim = len(states)
    fock = np.zeros((dim, dim))
    mono = np.zeros((dim, dim), dtype=object)
    facts = [math.factorial(st.n1) * math.factorial(st.n2) for st in states]
    for j, st in enumerate(states):
        for term in spec:
            hit = ladder_action(term, st)
            if hit is None:
                continue
            image, sign, q = hit
            i = index.get(image)
            if i is None:
                continue
            fock[i, j] += float(term.coefficient) * sign * math.sqrt(q)
            # orthonormal -> monomial basis: scale by sqrt(n_j! / n_i!)
            ratio = Fraction(q * facts[j], facts[i])
            root = math.isqrt(ratio.numerator)
            if ratio.denominator != 1 or root * root != ratio.numerator:
                raise AssertionError("monomial-basis amplitude is not an integer")
            mono[i, j] += _exact(term.coefficient) * sign * root
    return ReducedSector(
        label=lattice.label,
        lattice=lattice,
        keys=tuple(keys),
        states=tuple(states),
        fock_block=fock,
        monomial_matrix=mono,
        finite=lattice.finite,
        truncation=used_truncation,
        offsets=offsets,
        lower_bandwidth=lower,
        upper_bandwidth=upper,
    )


def discretize_ode(ode: PolyMatrixODE, keys) -> np.ndarray:
    """E-independent part of the ODE acting on the monomials ``keys``."""
    row_of = {Spin.UP: 0, Spin.DOWN: 1}
    index = {(row_of[s], k): i for i, (s, k) in enumerate(keys)}
    out = np.zeros((len(keys), len(keys)), dtype=object)
    for j, (s, k) in enumerate(keys):
        for (row, power), a in ode.apply_to_monomial(row_of[s], k).items():
            i = index.get((row, power))
            if i is not None:
                out[i, j] += a.const
    return out


# ---------------------------------------------------------------- energy polynomials


@dataclass(frozen=True)
class EnergyPolynomialSequence:
    """P_0 = 1, P_1, ..., P_m: leading principal minors det(E - M_k) of the monomial matrix.

    ``polynomials[k]`` lists coefficients lowest power first.  ``orientation``
    is "upper" when the recursion ran on M itself and "lower" when it ran on
    M^T; ``zero_pivots`` lists the off-band positions where the coupling vanishes
    (the sequence stays valid, but the generating function there splits).
    ``recursion`` is the matrix whose leading minors define the sequence.
    """

    polynomials: tuple
    label: SectorLabel
    orientation: str
    pivots: tuple
    zero_pivots: tuple
    exact: bool
    recursion: np.ndarray

    def __len__(self) -> int:
        return len(self.polynomials)

    def __getitem__(self, k: int) -> list:
        return self.polynomials[k]

    def as_float(self, k: int) -> np.ndarray:
        return np.array([float(c) for c in self.polynomials[k]])

    def evaluate(self, k: int, energy) -> float:
        return float(_peval(list(self.polynomials[k]), energy))


def energy_polynomials(red: ReducedSector, count: int | None = None) -> EnergyPolynomialSequence:
    """Energy polynomials of a reduced sector via the Hessenberg minor recurrence."""
    m = red.monomial_matrix
    dim = m.shape[0]
    count = dim if count is None else count
    if not 0 <= count <= dim:
        raise ValueError(f"count must lie in 0..{dim}")
    lower = max((i - j for i in range(dim) for j in range(dim) if m[i, j] != 0), default=0)
    upper = max((j - i for i in range(dim) for j in range(dim) if m[i, j] != 0), default=0)
    if lower <= 1:
        h, orientation = m, "upper"
    elif upper <= 1:
        h, orientation = m.T, "lower"
    else:
        raise ValueError(
            f"sector {red.label}: bandwidth ({lower}, {upper}) too large for the energy recursion"
        )
    polys = [[Fraction(1) if red.exact else 1.0]]
    pivots = tuple(h[i + 1, i] for i in range(dim - 1))
    for k in range(1, count + 1):
        kk = k - 1
        # (E - h_kk) P_{k-1}
        acc = _padd(_pmul([-h[kk, kk], 1], polys[k - 1]), [])
        prod = 1
        for i in range(kk - 1, -1, -1):
            prod = prod * h[i + 1, i]
            if prod == 0:
                break
            if h[i, kk] != 0:
                acc = _padd(acc, [-h[i, kk] * prod * c for c in polys[i]])
        polys.append(acc)
    zero = tuple(i for i, p in enumerate(pivots) if p == 0)
    recursion = np.array(h[:count, :count], dtype=float)
    return EnergyPolynomialSequence(
        tuple(tuple(p) for p in polys), red.label, orientation, pivots, zero, red.exact, recursion
    )


def _companion_roots(coeffs: list) -> np.ndarray:
    """Companion eigensolve after shifting the origin to the root centroid."""
    deg = len(coeffs) - 1
    if deg < 1:
        return np.array([], dtype=complex)
    lead = coeffs[-1]
    centre = -coeffs[-2] / (deg * lead)
    # Taylor shift p(E) -> p(E + centre), exact when the input is
    shifted = list(coeffs)
    for i in range(deg):
        for j in range(deg - 1, i - 1, -1):
            shifted[j] += centre * shifted[j + 1]
    c = np.array([float(v / lead) for v in shifted])
    companion = np.zeros((deg, deg))
    companion[1:, :-1] = np.eye(deg - 1)
    companion[:, -1] = -c[:-1]
    return np.linalg.eigvals(companion).astype(complex) + float(centre)


def polynomial_roots(coeffs, tol: float = 1e-14) -> np.ndarray:
    """Roots of sum c_i E^i with multiplicity, sorted by (real, imag).

    Exact rational input is first split into its irreducible factors over Q so
    repeated and clustered roots stay accurate; each factor goes through a
    centred companion matrix.
    """
    c = [_exact(v) for v in coeffs]
    while c and abs(c[-1]) < tol:
        warnings.warn("negligible leading coefficient; reducing degree", DegreeReductionWarning, stacklevel=2)
        c.pop()
    if len(c) <= 1:
        return np.array([], dtype=complex)
    if all(isinstance(v, Fraction) for v in c):
        e = sympy.Symbol("E")
        poly = sympy.Poly([sympy.Rational(v.numerator, v.denominator) for v in reversed(c)], e, domain="QQ")
        parts = []
        for factor, mult in poly.factor_list()[1]:
            fc = [Fraction(int(r.p), int(r.q)) for r in reversed(factor.all_coeffs())]
            parts.extend([_companion_roots(fc)] * mult)
        roots = np.concatenate(parts) if parts else np.array([], dtype=complex)
    else:
        roots = _companion_roots([float(v) for v in c])
    order = np.lexsort((roots.imag, roots.real))
    return roots[order]


def qes_roots(seq: EnergyPolynomialSequence, k: int) -> np.ndarray:
    """Roots of P_k with multiplicity, sorted by (real, imag).

    P_k is the characteristic polynomial of the leading k x k block of the
    recursion matrix, which is its companion matrix in the basis P_0..P_{k-1};
    that eigensolve avoids the monomial-coefficient blow-up of high-degree P_k.
    """
    if not 0 <= k < len(seq):
        raise ValueError(f"only P_0..P_{len(seq) - 1} are available")
    lead = seq[k][-1]
    if abs(lead) < 1e-14:
        return polynomial_roots(seq[k])
    roots = np.linalg.eigvals(seq.recursion[:k, :k]).astype(complex)
    order = np.lexsort((roots.imag, roots.real))
    return roots[order]
