"""Built-in models: modified Jaynes-Cummings, two-level Jahn-Teller, JC with Kerr medium.

Each constructor returns the coefficient table of the model in the
normal-ordered monomial form.  Parameters may be floats or exact rationals;
exact inputs keep every coefficient exact.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

import numpy as np
from numpy.polynomial import Polynomial

from .fock import (
    Basis,
    HamiltonianSpec,
    MonomialTerm,
    SpinChannel,
    assemble_operator,
    format_number,
    interior_mask,
    parse_number,
)
from .symmetry import NumberOperatorSpec

__all__ = [
    "ModifiedJCParams",
    "JahnTellerParams",
    "JCKerrParams",
    "AnalyticRangeWarning",
    "DeformedFormCheck",
    "MODIFIED_JC_N",
    "JAHN_TELLER_N",
    "JC_KERR_N",
    "MODELS",
    "modified_jc",
    "jahn_teller",
    "jc_kerr",
    "jc_analytic_energy",
    "jc_analytic_spectrum",
    "jc_analytic_records",
    "jc_eigenfunction",
    "jc_eigenfunction_polynomials",
    "jc_kerr_deformed_form",
    "build_model",
    "load_model_document",
]

HALF = Fraction(1, 2)

P, SZ, SP, SM = (
    SpinChannel.IDENTITY,
    SpinChannel.SIGMA0,
    SpinChannel.SIGMA_PLUS,
    SpinChannel.SIGMA_MINUS,
)


class AnalyticRangeWarning(UserWarning):
    """Closed-form energy evaluated outside the range where it is an eigenvalue."""


def _check_finite(params):
    for f in fields(params):
        value = getattr(params, f.name)
        if not math.isfinite(float(value)):
            raise ValueError(f"{type(params).__name__}.{f.name} must be finite, got {value!r}")


@dataclass(frozen=True)
class ModifiedJCParams:
    omega: float
    omega0: float
    lambda1: float
    lambda2: float

    def __post_init__(self):
        _check_finite(self)


@dataclass(frozen=True)
class JahnTellerParams:
    mu: float
    kappa: float

    def __post_init__(self):
        _check_finite(self)


@dataclass(frozen=True)
class JCKerrParams:
    omega: float
    omega0: float
    kappa: float
    lam: float

    def __post_init__(self):
        _check_finite(self)


MODIFIED_JC_N = NumberOperatorSpec(1, 1, HALF)
JAHN_TELLER_N = NumberOperatorSpec(1, -1, HALF)
JC_KERR_N = NumberOperatorSpec(1, 0, HALF)


def modified_jc(p: ModifiedJCParams) -> HamiltonianSpec:
    """omega (n1 + n2) + omega0/2 sigma0 + lambda1 (a1 s+ + a1+ s-) + lambda2 (a2 s+ + a2+ s-)."""
    return HamiltonianSpec.from_terms(
        [
            MonomialTerm(p.omega, (1, 1, 0, 0), P),
            MonomialTerm(p.omega, (0, 0, 1, 1), P),
            MonomialTerm(HALF * p.omega0, (0, 0, 0, 0), SZ),
            MonomialTerm(p.lambda1, (0, 1, 0, 0), SP),
            MonomialTerm(p.lambda1, (1, 0, 0, 0), SM),
            MonomialTerm(p.lambda2, (0, 0, 0, 1), SP),
            MonomialTerm(p.lambda2, (0, 0, 1, 0), SM),
        ]
    )


def jahn_teller(p: JahnTellerParams) -> HamiltonianSpec:
    """n1 + n2 + 1 + (1/2 + 2 mu) sigma0 + 2 kappa [(a1 + a2+) s+ + (a1+ + a2) s-]."""
    k2 = 2 * p.kappa
    return HamiltonianSpec.from_terms(
        [
            MonomialTerm(1, (1, 1, 0, 0), P),
            MonomialTerm(1, (0, 0, 1, 1), P),
            MonomialTerm(1, (0, 0, 0, 0), P),
            MonomialTerm(HALF + 2 * p.mu, (0, 0, 0, 0), SZ),
            MonomialTerm(k2, (0, 1, 0, 0), SP),
            MonomialTerm(k2, (0, 0, 1, 0), SP),
            MonomialTerm(k2, (1, 0, 0, 0), SM),
            MonomialTerm(k2, (0, 0, 0, 1), SM),
        ]
    )


def jc_kerr(p: JCKerrParams) -> HamiltonianSpec:
    """Single-mode JC plus lam (a+a)^2, normal ordered as lam ((a+)^2 a^2 + a+a)."""
    return HamiltonianSpec.from_terms(
        [
            MonomialTerm(p.omega + p.lam, (1, 1, 0, 0), P),
            MonomialTerm(p.lam, (2, 2, 0, 0), P),
            MonomialTerm(HALF * p.omega0, (0, 0, 0, 0), SZ),
            MonomialTerm(p.kappa, (0, 1, 0, 0), SP),
            MonomialTerm(p.kappa, (1, 0, 0, 0), SM),
        ]
    )


def jc_analytic_energy(p: ModifiedJCParams, j: int, n: int, sign: int) -> float:
    """E = ((2j+1) omega +- sqrt(4n(lambda1^2 + lambda2^2) + (omega0 - omega)^2)) / 2.

    Only 1 <= n <= j + 1 gives eigenvalues of the sector; other n still return
    the formula's value but emit :class:`AnalyticRangeWarning`.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if not 1 <= n <= j + 1:
        warnings.warn(f"n={n} outside 1..{j + 1} for j={j}", AnalyticRangeWarning, stacklevel=2)
    w, w0, l1, l2 = (float(v) for v in (p.omega, p.omega0, p.lambda1, p.lambda2))
    root = math.sqrt(4 * n * (l1 * l1 + l2 * l2) + (w0 - w) ** 2)
    return 0.5 * ((2 * j + 1) * w + sign * root)


def jc_dark_energy(p: ModifiedJCParams, j: int) -> float:
    return (j + 1) * float(p.omega) - 0.5 * float(p.omega0)


def jc_analytic_spectrum(p: ModifiedJCParams, j: int) -> np.ndarray:
    """All 2j + 3 levels of sector j, ascending: paired levels plus the dark level."""
    levels = [jc_analytic_energy(p, j, n, s) for n in range(1, j + 2) for s in (-1, 1)]
    levels.append(jc_dark_energy(p, j))
    return np.sort(np.array(levels))


def jc_analytic_records(p: ModifiedJCParams, j: int) -> list[dict]:
    out = [
        {"n": n, "sign": s, "energy": jc_analytic_energy(p, j, n, s)}
        for n in range(1, j + 2)
        for s in (-1, 1)
    ]
    out.append({"n": 0, "sign": 0, "energy": jc_dark_energy(p, j)})
    return out


def jc_eigenfunction_polynomials(p: ModifiedJCParams, j: int, n: int, sign: int = 1):
    """(phi1, phi2, E) for sector j and branch n, with C1 = 1.

    phi1 = C0 A^(j-n+1) B^(n-1), phi2 = A^(j-n+1) B^n with A = lambda2 - x lambda1,
    B = lambda1 + x lambda2.  C0 follows from the lower component equation.
    """
    if not 1 <= n <= j + 1:
        raise ValueError(f"n={n} gives a non-polynomial solution; need 1 <= n <= {j + 1}")
    l1, l2 = float(p.lambda1), float(p.lambda2)
    if l1 == 0 and l2 == 0:
        raise ValueError("eigenfunctions vanish identically when both couplings are zero")
    energy = jc_analytic_energy(p, j, n, sign)
    a = Polynomial([l2, -l1])
    b = Polynomial([l1, l2])
    c0 = -((j + 1) * float(p.omega) - 0.5 * float(p.omega0) - energy)
    common = a ** (j - n + 1)
    return c0 * common * b ** (n - 1), common * b**n, energy


def jc_eigenfunction(p: ModifiedJCParams, j: int, n: int, x_samples, sign: int = 1):
    phi1, phi2, _ = jc_eigenfunction_polynomials(p, j, n, sign)
    x = np.asarray(x_samples)
    return phi1(x), phi2(x)


@dataclass(frozen=True)
class DeformedFormCheck:
    max_difference: float
    constant: float
    residual: float


def jc_kerr_deformed_form(p: JCKerrParams, cutoff=(12, 0)) -> DeformedFormCheck:
    """Compare the Kerr model with its form in the deformed su(2) generators.

    ``constant`` is the mean diagonal offset (deformed minus original) on the
    interior and ``residual`` the max deviation left after removing it.
    """
    from .algebra import deformed_su2_operators

    basis = Basis(cutoff)
    ops = deformed_su2_operators(basis)
    yp, ym, y0, nop = ops["Y+"], ops["Y-"], ops["Y0"], ops["N"]
    w, w0, k, lam = (float(v) for v in (p.omega, p.omega0, p.kappa, p.lam))
    two_n_minus_y0 = 2 * nop - y0
    deformed = (
        w * two_n_minus_y0
        + w0 * (y0 - nop)
        + k * (yp + ym)
        + lam * (two_n_minus_y0 @ two_n_minus_y0)
    )
    original = assemble_operator(jc_kerr(p), basis)
    deg = (min(4, basis.cutoff[0]), min(4, basis.cutoff[1]))
    mask = interior_mask(basis, deg)
    if mask.size == 0:
        raise ValueError(f"empty interior for cutoff {cutoff}")
    diff = (deformed - original).restrict(mask)
    constant = float(np.mean(np.diag(diff)))
    residual = float(np.abs(diff - constant * np.eye(len(mask))).max())
    return DeformedFormCheck(float(np.abs(diff).max()), constant, residual)


MODELS = {
    "jc": (ModifiedJCParams, modified_jc, MODIFIED_JC_N),
    "jahn-teller": (JahnTellerParams, jahn_teller, JAHN_TELLER_N),
    "jc-kerr": (JCKerrParams, jc_kerr, JC_KERR_N),
}


def build_model(name: str, params: dict):
    """(params object, spec, documented number operator) for a registered model."""
    if name not in MODELS:
        raise KeyError(f"unknown model {name!r}; choose from {sorted(MODELS)}")
    cls, ctor, nspec = MODELS[name]
    expected = {f.name for f in fields(cls)}
    given = set(params)
    if given != expected:
        missing, extra = sorted(expected - given), sorted(given - expected)
        raise ValueError(f"bad parameters for {name}: missing {missing}, unexpected {extra}")
    obj = cls(**{k: parse_number(v) for k, v in params.items()})
    return obj, ctor(obj), nspec


def load_model_document(text: str):
    """Parse ``{"model": name, "params": {...}}``."""
    data = json.loads(text)
    return build_model(data["model"], data["params"])


def dump_model_document(name: str, params) -> str:
    record = {k: format_number(v) for k, v in asdict(params).items()}
    return json.dumps({"model": name, "params": record}, indent=2, sort_keys=True) + "\n"
