"""Exact diagonalization and Bargmann-space reduction for two-mode spin-boson Hamiltonians."""

from .bargmann import energy_polynomials, extract_ode, qes_roots, reduce_sector
from .fock import (
    Basis,
    FockState,
    HamiltonianSpec,
    MonomialTerm,
    Spin,
    SpinChannel,
    apply_monomial,
    assemble_operator,
)
from .symmetry import NumberOperatorSpec, SectorLabel, check_conservation, solve_conservation

__version__ = "0.1.0"

__all__ = [
    "energy_polynomials",
    "extract_ode",
    "qes_roots",
    "reduce_sector",
    "Basis",
    "FockState",
    "HamiltonianSpec",
    "MonomialTerm",
    "Spin",
    "SpinChannel",
    "apply_monomial",
    "assemble_operator",
    "NumberOperatorSpec",
    "SectorLabel",
    "check_conservation",
    "solve_conservation",
]
