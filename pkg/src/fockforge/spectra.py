"""Dense eigensolves for sector blocks, full-space cross-checks and truncation scans."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .bargmann import reduce_sector
from .fock import Basis, HamiltonianSpec, assemble_operator
from .symmetry import NumberOperatorSpec, SectorLabel, sector_lattice

__all__ = [
    "SpectrumResult",
    "DEFAULT_TOLERANCE",
    "diagonalize",
    "sector_spectrum",
    "full_space_sector_spectrum",
    "full_space_spectrum",
    "convergence_scan",
    "spectrum_table_csv",
    "spectrum_json",
]

DEFAULT_TOLERANCE = 1e-8
SYMMETRY_TOL = 1e-12


def _sorted(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    return values[np.lexsort((values.imag, values.real))]


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    symmetric: bool
    label: SectorLabel | None = None
    eigenvectors: np.ndarray | None = None
    truncation: int | None = None
    deltas: np.ndarray | None = None
    history: dict | None = None
    tolerance: float = DEFAULT_TOLERANCE

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def real(self) -> np.ndarray:
        return self.eigenvalues.real

    @property
    def converged(self) -> np.ndarray | None:
        if self.deltas is None:
            return None
        return self.deltas < self.tolerance

    def rows(self) -> list[dict]:
        out = []
        for i, e in enumerate(self.eigenvalues):
            row = {
                "sector": "" if self.label is None else str(self.label),
                "index": i,
                "re": float(e.real),
                "im": float(e.imag),
                "delta": None if self.deltas is None else float(self.deltas[i]),
                "converged": None if self.deltas is None else bool(self.deltas[i] < self.tolerance),
            }
            out.append(row)
        return out

    def to_dict(self) -> dict:
        return {
            "sector": None if self.label is None else str(self.label),
            "symmetric": self.symmetric,
            "truncation": self.truncation,
            "tolerance": self.tolerance,
            "levels": [
                {k: (f"{v:.12g}" if isinstance(v, float) else v) for k, v in row.items() if k != "sector"}
                for row in self.rows()
            ],
            "history": None
            if self.history is None
            else {str(c): [f"{v:.12g}" for v in vals.real] for c, vals in self.history.items()},
        }


def diagonalize(block, vectors: bool = False) -> SpectrumResult:
    """All eigenvalues of a real square block; symmetric blocks take the Hermitian path."""
    a = np.asarray(block, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("block has non-finite entries")
    if a.size == 0:
        return SpectrumResult(np.array([], dtype=complex), True)
    scale = max(1.0, float(np.abs(a).max()))
    symmetric = bool(np.abs(a - a.T).max() <= SYMMETRY_TOL * scale)
    if symmetric:
        if vectors:
            w, v = scipy.linalg.eigh(a)
        else:
            w, v = scipy.linalg.eigvalsh(a), None
        return SpectrumResult(w.astype(complex), True, eigenvectors=v)
    if vectors:
        w, v = scipy.linalg.eig(a)
        order = np.lexsort((w.imag, w.real))
        return SpectrumResult(w[order], False, eigenvectors=v[:, order])
    return SpectrumResult(_sorted(scipy.linalg.eigvals(a)), False)


def sector_spectrum(
    spec: HamiltonianSpec, n: NumberOperatorSpec, sector, truncation: int | None = None
) -> SpectrumResult:
    red = reduce_sector(spec, n, sector, truncation)
    res = diagonalize(red.fock_block)
    res.label, res.truncation = red.label, red.truncation
    return res


def _sector_indices(basis: Basis, n: NumberOperatorSpec, label: SectorLabel) -> list[int]:
    return [i for i, st in enumerate(basis.states) if n.eigenvalue(st) == label.eigenvalue]


def full_space_sector_spectrum(
    spec: HamiltonianSpec, n: NumberOperatorSpec, sector, cutoff
) -> SpectrumResult:
    """Spectrum of the full truncated matrix restricted to one finite sector.

    Raises if the sector does not fit inside ``cutoff``, since the restricted
    block would then be missing states.
    """
    label = sector if isinstance(sector, SectorLabel) else SectorLabel(sector)
    lattice = sector_lattice(n, label, spec.active_modes())
    if not lattice.finite:
        raise ValueError(f"sector {label} is unbounded")
    basis = Basis(cutoff)
    for s in lattice.spins:
        for k in range(lattice.lengths[s]):
            if lattice.state(s, k) not in basis:
                raise ValueError(f"sector {label} does not fit in cutoff {tuple(cutoff)}")
    full = assemble_operator(spec, basis)
    idx = [i for i in _sector_indices(basis, n, label) if _frozen_ok(spec, basis.states[i])]
    res = diagonalize(full.restrict(idx))
    res.label = label
    return res


def _frozen_ok(spec: HamiltonianSpec, state) -> bool:
    active = spec.active_modes()
    return (active[0] or state.n1 == 0) and (active[1] or state.n2 == 0)


def full_space_spectrum(spec: HamiltonianSpec, cutoff) -> SpectrumResult:
    return diagonalize(assemble_operator(spec, Basis(cutoff)).toarray())


def convergence_scan(
    spec: HamiltonianSpec,
    n: NumberOperatorSpec,
    sector,
    cutoffs,
    k: int,
    tolerance: float = DEFAULT_TOLERANCE,
) -> SpectrumResult:
    """Lowest ``k`` levels of a sector at each truncation, with the last change as delta."""
    cutoffs = [int(c) for c in cutoffs]
    if len(cutoffs) < 2:
        raise ValueError("convergence_scan needs at least two cutoffs")
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])) or cutoffs[0] < 1:
        raise ValueError("cutoffs must be positive and increasing")
    history = {}
    for c in cutoffs:
        res = sector_spectrum(spec, n, sector, c)
        if len(res) == 0:
            raise ValueError(f"sector {sector} is empty at cutoff {c}")
        history[c] = res.eigenvalues[:k]
    counts = {len(v) for v in history.values()}
    m = min(counts)
    last, prev = history[cutoffs[-1]][:m], history[cutoffs[-2]][:m]
    deltas = np.abs(last - prev)
    return SpectrumResult(
        last,
        res.symmetric,
        label=res.label,
        truncation=cutoffs[-1],
        deltas=deltas,
        history=history,
        tolerance=tolerance,
    )


def spectrum_table_csv(results) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["sector", "index", "re", "im", "delta", "converged"])
    for res in results:
        for row in res.rows():
            writer.writerow(
                [
                    row["sector"],
                    row["index"],
                    f"{row['re']:.12g}",
                    f"{row['im']:.12g}",
                    "" if row["delta"] is None else f"{row['delta']:.12g}",
                    "" if row["converged"] is None else str(row["converged"]).lower(),
                ]
            )
    return buf.getvalue()


def spectrum_json(results) -> str:
    return json.dumps([r.to_dict() for r in results], indent=2, sort_keys=True) + "\n"
