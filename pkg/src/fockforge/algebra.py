"""Generator catalog and numerical closure checks on truncated Fock spaces.

A relation either states its right-hand side explicitly, as a polynomial in
the set's operators, or leaves it open; open brackets are expanded by least
squares in the span of the generators plus the identity and the residual of
that fit is the closure measure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

import numpy as np

from .fock import (
    Basis,
    HamiltonianSpec,
    MonomialTerm,
    SparseOperator,
    SpinChannel,
    anticommutator,
    assemble_operator,
    commutator,
    interior_mask,
)

__all__ = [
    "Relation",
    "GeneratorSet",
    "RelationResult",
    "ClosureReport",
    "CATALOG_NAMES",
    "catalog",
    "superbracket",
    "verify_closure",
    "deformed_su2_operators",
]

HALF = Fraction(1, 2)
COMMUTATOR = "commutator"
ANTICOMMUTATOR = "anticommutator"

P, SZ, SP, SM = (
    SpinChannel.IDENTITY,
    SpinChannel.SIGMA0,
    SpinChannel.SIGMA_PLUS,
    SpinChannel.SIGMA_MINUS,
)


def _spec(*terms) -> HamiltonianSpec:
    """Shorthand: _spec((coeff, (v1, v2, v3, v4), channel), ...)."""
    return HamiltonianSpec.from_terms(MonomialTerm(c, v, ch) for c, v, ch in terms)


# An expansion is a tuple of (coefficient, word); a word is a tuple of labels
# multiplied left to right, and the empty word is the identity.
Expansion = tuple


@dataclass(frozen=True)
class Relation:
    bracket: str
    left: str
    right: str
    expected: Expansion | None = None

    def describe(self) -> str:
        l, r = ("[", "]") if self.bracket == COMMUTATOR else ("{", "}")
        head = f"{l}{self.left}, {self.right}{r}"
        if self.expected is None:
            return head
        return f"{head} = {format_expansion(self.expected)}"


def format_expansion(expansion: Expansion) -> str:
    if not expansion:
        return "0"
    parts = []
    for coeff, word in expansion:
        body = "*".join(word) if word else "I"
        parts.append(f"{coeff}*{body}")
    return " + ".join(parts)


@dataclass
class GeneratorSet:
    name: str
    generators: dict[str, HamiltonianSpec]
    relations: list[Relation]
    auxiliary: dict[str, HamiltonianSpec] = field(default_factory=dict)
    graded: bool = False

    def __post_init__(self):
        labels = list(self.generators) + list(self.auxiliary)
        if len(set(labels)) != len(labels):
            raise ValueError(f"{self.name}: duplicate labels")
        known = set(labels)
        for rel in self.relations:
            used = {rel.left, rel.right}
            for _, word in rel.expected or ():
                used.update(word)
            if not used <= known:
                raise ValueError(f"{self.name}: relation {rel.describe()} uses undefined labels")

    @property
    def labels(self) -> list[str]:
        return list(self.generators)

    def is_odd(self, label: str) -> bool:
        return self.graded and self.generators[label].is_odd()

    def operator(self, label: str) -> HamiltonianSpec:
        if label in self.generators:
            return self.generators[label]
        return self.auxiliary[label]


def _all_pairs(labels, odd) -> list[Relation]:
    rels = []
    for a, b in combinations_with_replacement(labels, 2):
        both_odd = odd(a) and odd(b)
        if a == b and not both_odd:
            continue
        rels.append(Relation(ANTICOMMUTATOR if both_odd else COMMUTATOR, a, b))
    return rels


def _su2() -> GeneratorSet:
    gens = {
        "J0": _spec((HALF, (1, 1, 0, 0), P), (-HALF, (0, 0, 1, 1), P)),
        "J+": _spec((1, (1, 0, 0, 1), P)),
        "J-": _spec((1, (0, 1, 1, 0), P)),
    }
    rels = [
        Relation(COMMUTATOR, "J0", "J+", ((1, ("J+",)),)),
        Relation(COMMUTATOR, "J0", "J-", ((-1, ("J-",)),)),
        Relation(COMMUTATOR, "J+", "J-", ((2, ("J0",)),)),
    ]
    return GeneratorSet("su2", gens, rels)


def _su11() -> GeneratorSet:
    gens = {
        "K0": _spec((HALF, (1, 1, 0, 0), P), (HALF, (0, 0, 1, 1), P), (HALF, (0, 0, 0, 0), P)),
        "K+": _spec((1, (1, 0, 1, 0), P)),
        "K-": _spec((1, (0, 1, 0, 1), P)),
    }
    rels = [
        Relation(COMMUTATOR, "K0", "K+", ((1, ("K+",)),)),
        Relation(COMMUTATOR, "K0", "K-", ((-1, ("K-",)),)),
        Relation(COMMUTATOR, "K+", "K-", ((-2, ("K0",)),)),
    ]
    return GeneratorSet("su11", gens, rels)


_SP4R = {
    "a1+a1": (1, 1, 0, 0),
    "a2+a2": (0, 0, 1, 1),
    "a1+a2": (1, 0, 0, 1),
    "a2+a1": (0, 1, 1, 0),
    "a1+a2+": (1, 0, 1, 0),
    "a2a1": (0, 1, 0, 1),
    "a1a1": (0, 2, 0, 0),
    "a2a2": (0, 0, 0, 2),
    "a1+a1+": (2, 0, 0, 0),
    "a2+a2+": (0, 0, 2, 0),
}


def _sp4r() -> GeneratorSet:
    gens = {label: _spec((1, v, P)) for label, v in _SP4R.items()}
    return GeneratorSet("sp4r", gens, _all_pairs(list(gens), lambda _: False))


def _osp(name: str, even: dict, odd: dict) -> GeneratorSet:
    gens = {**even, **odd}
    rels = _all_pairs(list(gens), lambda label: label in odd)
    return GeneratorSet(name, gens, rels, graded=True)


def _osp21_a() -> GeneratorSet:
    even = dict(_su2().generators)
    even["Z"] = _spec((1, (1, 1, 0, 0), P), (1, (0, 0, 1, 1), P), (1, (0, 0, 0, 0), SZ))
    odd = {
        "V+": _spec((1, (0, 0, 0, 1), SP)),
        "V-": _spec((-1, (0, 1, 0, 0), SP)),
        "W+": _spec((1, (1, 0, 0, 0), SM)),
        "W-": _spec((1, (0, 0, 1, 0), SM)),
    }
    return _osp("osp21_a", even, odd)


def _osp21_b() -> GeneratorSet:
    even = dict(_su2().generators)
    even["Z"] = _spec((1, (1, 1, 0, 0), P), (1, (0, 0, 1, 1), P), (-1, (0, 0, 0, 0), SZ))
    odd = {
        "V+": _spec((1, (0, 0, 0, 1), SM)),
        "V-": _spec((-1, (0, 1, 0, 0), SM)),
        "W+": _spec((1, (1, 0, 0, 0), SP)),
        "W-": _spec((1, (0, 0, 1, 0), SP)),
    }
    return _osp("osp21_b", even, odd)


def _osp22_a() -> GeneratorSet:
    even = dict(_su11().generators)
    even["Z"] = _spec((1, (1, 1, 0, 0), P), (-1, (0, 0, 1, 1), P), (-1, (0, 0, 0, 0), SZ))
    odd = {
        "V+": _spec((1, (0, 0, 1, 0), SM)),
        "V-": _spec((1, (0, 1, 0, 0), SM)),
        "W+": _spec((1, (1, 0, 0, 0), SP)),
        "W-": _spec((1, (0, 0, 0, 1), SP)),
    }
    return _osp("osp22_a", even, odd)


def _osp22_b() -> GeneratorSet:
    even = dict(_su11().generators)
    even["Z"] = _spec((1, (1, 1, 0, 0), P), (-1, (0, 0, 1, 1), P), (1, (0, 0, 0, 0), SZ))
    odd = {
        "V+": _spec((1, (0, 0, 1, 0), SP)),
        "V-": _spec((1, (0, 1, 0, 0), SP)),
        "W+": _spec((1, (1, 0, 0, 0), SM)),
        "W-": _spec((1, (0, 0, 0, 1), SM)),
    }
    return _osp("osp22_b", even, odd)


def _deformed_su2() -> GeneratorSet:
    gens = {
        "Y+": _spec((1, (0, 1, 0, 0), SP)),
        "Y-": _spec((1, (1, 0, 0, 0), SM)),
        "Y0": _spec((1, (1, 1, 0, 0), P), (1, (0, 0, 0, 0), SZ)),
    }
    aux = {"N": _spec((1, (1, 1, 0, 0), P), (HALF, (0, 0, 0, 0), SZ))}
    # (1 + 2 Y0)(Y0 - N) - 1/2, expanded
    quadratic = (
        (1, ("Y0",)),
        (-1, ("N",)),
        (2, ("Y0", "Y0")),
        (-2, ("Y0", "N")),
        (-HALF, ()),
    )
    rels = [
        Relation(COMMUTATOR, "Y0", "Y+", ((1, ("Y+",)),)),
        Relation(COMMUTATOR, "Y0", "Y-", ((-1, ("Y-",)),)),
        Relation(COMMUTATOR, "Y+", "Y-", quadratic),
        Relation(COMMUTATOR, "N", "Y+", ()),
        Relation(COMMUTATOR, "N", "Y-", ()),
        Relation(COMMUTATOR, "N", "Y0", ()),
    ]
    return GeneratorSet("deformed_su2", gens, rels, auxiliary=aux)


_BUILDERS = {
    "su2": _su2,
    "su11": _su11,
    "sp4r": _sp4r,
    "osp21_a": _osp21_a,
    "osp21_b": _osp21_b,
    "osp22_a": _osp22_a,
    "osp22_b": _osp22_b,
    "deformed_su2": _deformed_su2,
}
CATALOG_NAMES = tuple(_BUILDERS)


def catalog(name: str) -> GeneratorSet:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown generator set {name!r}; choose from {list(CATALOG_NAMES)}") from None


def superbracket(a: SparseOperator, b: SparseOperator, grading: tuple[bool, bool]) -> SparseOperator:
    """Anticommutator when both operands are odd, commutator otherwise."""
    odd_a, odd_b = grading
    return anticommutator(a, b) if (odd_a and odd_b) else commutator(a, b)


def deformed_su2_operators(basis: Basis) -> dict[str, SparseOperator]:
    gs = _deformed_su2()
    specs = {**gs.generators, **gs.auxiliary}
    return {label: assemble_operator(spec, basis) for label, spec in specs.items()}


@dataclass
class RelationResult:
    relation: Relation
    residual: float
    coefficients: dict[str, float] | None
    passed: bool
    grading_ok: bool | None = None

    def to_dict(self) -> dict:
        return {
            "relation": self.relation.describe(),
            "bracket": self.relation.bracket,
            "left": self.relation.left,
            "right": self.relation.right,
            "residual": float(f"{self.residual:.12g}"),
            "coefficients": self.coefficients,
            "passed": self.passed,
            "grading_ok": self.grading_ok,
        }


@dataclass
class ClosureReport:
    name: str
    cutoff: tuple[int, int]
    tolerance: float
    results: list[RelationResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def max_residual(self) -> float:
        return max((r.residual for r in self.results), default=0.0)

    def to_dict(self) -> dict:
        return {
            "set": self.name,
            "cutoff": list(self.cutoff),
            "tolerance": self.tolerance,
            "passed": self.passed,
            "max_residual": float(f"{self.max_residual:.12g}"),
            "relations": [r.to_dict() for r in self.results],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _degree(spec: HamiltonianSpec) -> np.ndarray:
    return np.array(spec.max_degree())


def _evaluate(expansion: Expansion, ops: dict, basis: Basis) -> SparseOperator:
    total = SparseOperator.zeros(basis)
    for coeff, word in expansion:
        term = SparseOperator.identity(basis)
        for label in word:
            term = term @ ops[label]
        total = total + float(coeff) * term
    return total


def verify_closure(gens: GeneratorSet, cutoff=(10, 10), tol: float = 1e-10) -> ClosureReport:
    """Check every relation of ``gens`` on the interior of a truncated basis."""
    basis = Basis(cutoff)
    specs = {**gens.generators, **gens.auxiliary}
    ops = {label: assemble_operator(spec, basis) for label, spec in specs.items()}
    degrees = {label: _degree(spec) for label, spec in specs.items()}
    gen_labels = gens.labels
    odd_flags = np.array([gens.is_odd(l) for l in gen_labels] + [False])
    results = []
    for rel in gens.relations:
        need = degrees[rel.left] + degrees[rel.right]
        for _, word in rel.expected or ():
            need = np.maximum(need, sum((degrees[l] for l in word), np.zeros(2, dtype=int)))
        need = tuple(int(d) for d in need)
        if need[0] > basis.cutoff[0] or need[1] > basis.cutoff[1]:
            raise ValueError(f"empty interior for {rel.describe()} at cutoff {basis.cutoff}")
        mask = interior_mask(basis, need)
        grading = (gens.is_odd(rel.left), gens.is_odd(rel.right))
        if rel.bracket == ANTICOMMUTATOR:
            lhs = anticommutator(ops[rel.left], ops[rel.right])
        else:
            lhs = commutator(ops[rel.left], ops[rel.right])
        if rel.expected is not None:
            rhs = _evaluate(rel.expected, ops, basis)
            residual = (lhs - rhs).max_abs(mask)
            results.append(RelationResult(rel, residual, None, residual < tol))
            continue
        target = lhs.restrict(mask).ravel()
        columns = [ops[l].restrict(mask).ravel() for l in gen_labels]
        columns.append(np.eye(len(mask)).ravel())
        design = np.column_stack(columns)
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        residual = float(np.abs(design @ coef - target).max()) if target.size else 0.0
        labels = gen_labels + ["I"]
        shown = {l: float(f"{c:.12g}") for l, c in zip(labels, coef) if abs(c) > 1e-9}
        grading_ok = None
        if gens.graded:
            bracket_odd = grading[0] != grading[1]
            wrong = odd_flags if not bracket_odd else ~odd_flags
            grading_ok = bool(np.all(np.abs(coef[wrong]) < tol))
        passed = residual < tol and (grading_ok is not False)
        results.append(RelationResult(rel, residual, shown, passed, grading_ok))
    return ClosureReport(gens.name, basis.cutoff, tol, results)
