"""fockforge command line.

Exit codes: 0 success, 1 a verification failed, 2 bad usage or input.
FOCKFORGE_TOL overrides every default tolerance; --tol overrides both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import algebra, bargmann, models, spectra
from .fock import Basis, HamiltonianSpec
from .symmetry import (
    NumberOperatorSpec,
    SectorLabel,
    check_conservation,
    sector_decompose,
    sector_lattice,
    solve_conservation,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

PARAM_FLAGS = {
    "omega": "--omega",
    "omega0": "--omega0",
    "lambda1": "--lambda1",
    "lambda2": "--lambda2",
    "mu": "--mu",
    "kappa": "--kappa",
    "lam": "--lambda",
}


class UsageError(Exception):
    pass


def g12(x) -> str:
    return f"{float(x):.12g}"


@dataclass
class RunConfig:
    model: str | None = None
    spec_file: Path | None = None
    params: dict = field(default_factory=dict)
    number_operator: NumberOperatorSpec | None = None
    cutoffs: list[int] = field(default_factory=list)
    sectors: list[str] = field(default_factory=list)
    output_format: str = "table"
    tolerance: float | None = None
    output: Path | None = None
    needs_source: bool = True

    def __post_init__(self):
        if self.needs_source and (self.model is None) == (self.spec_file is None):
            raise UsageError("give exactly one of --model or --spec-file")
        if any(c <= 0 for c in self.cutoffs):
            raise UsageError("cutoffs must be positive")

    def tol(self, default: float) -> float:
        if self.tolerance is not None:
            return self.tolerance
        env = os.environ.get("FOCKFORGE_TOL")
        if env:
            try:
                return float(env)
            except ValueError as exc:
                raise UsageError(f"FOCKFORGE_TOL={env!r} is not a number") from exc
        return default

    def load(self):
        """(spec, number operator or None, params object or None)."""
        if self.model is not None:
            params = {k: v for k, v in self.params.items() if v is not None}
            _, _, default_n = models.MODELS.get(self.model, (None, None, None))
            if default_n is None:
                raise UsageError(f"unknown model {self.model!r}; choose from {sorted(models.MODELS)}")
            try:
                pobj, spec, default_n = models.build_model(self.model, params)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
            return spec, self.number_operator or default_n, pobj
        text = self.spec_file.read_text()
        data = json.loads(text)
        if isinstance(data, dict) and "model" in data:
            pobj, spec, default_n = models.build_model(data["model"], data["params"])
            return spec, self.number_operator or default_n, pobj
        return HamiltonianSpec.loads(text), self.number_operator, None


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _parse_n(text: str) -> NumberOperatorSpec:
    try:
        return NumberOperatorSpec.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def resolve_sector(text: str, n: NumberOperatorSpec) -> SectorLabel:
    """``j=2`` means the sector of |2, 0, up>; anything else is the N eigenvalue itself."""
    text = text.strip()
    if text.startswith("j="):
        return n.j_label(int(text[2:]))
    return SectorLabel.parse(text)


def _need_n(n, spec):
    if n is not None:
        return n
    found = solve_conservation(spec)
    if len(found) != 1:
        raise UsageError("no unique conserved number operator; pass --n s,p,r")
    return found[0]


def _square(cutoffs: list[int], default: tuple[int, int]) -> tuple[int, int]:
    """``10`` means (10, 10); ``8,4`` means (8, 4)."""
    if not cutoffs:
        return default
    if len(cutoffs) == 1:
        return cutoffs[0], cutoffs[0]
    if len(cutoffs) == 2:
        return cutoffs[0], cutoffs[1]
    raise UsageError(f"expected one or two cutoff values, got {cutoffs}")


def _emit(cfg: RunConfig, text: str):
    if cfg.output is not None:
        cfg.output.write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def cmd_build(cfg: RunConfig, args) -> int:
    spec, _, _ = cfg.load()
    _emit(cfg, spec.dumps())
    return EXIT_OK


def cmd_check_symmetry(cfg: RunConfig, args) -> int:
    spec, n, _ = cfg.load()
    if cfg.number_operator is not None:
        n = cfg.number_operator
    elif cfg.model is not None and not args.use_default_n:
        n = None
    span = solve_conservation(spec)
    if n is None:
        conserved = bool(span)
        report = check_conservation(spec, span[0]) if span else None
    else:
        report = check_conservation(spec, n)
        conserved = report.conserved
    if cfg.output_format == "json":
        doc = {
            "span": [v.to_record() for v in span],
            "report": None if report is None else report.to_dict(),
            "conserved": conserved,
        }
        _emit(cfg, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        lines = ["conserved span: " + (", ".join(str(v) for v in span) if span else "none")]
        if report is not None:
            lines.append(f"checked N{report.number_operator}: {'conserved' if report.conserved else 'NOT conserved'}")
            for r in report.violations:
                lines.append(f"  violation: {r.term}  residual {r.residual}")
        _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK if conserved else EXIT_FAIL


def cmd_sectors(cfg: RunConfig, args) -> int:
    spec, n, _ = cfg.load()
    n = _need_n(n, spec)
    cutoff = _square(cfg.cutoffs, (6, 6))
    basis = Basis(cutoff)
    rows = []
    for label, states in sector_decompose(basis, n).items():
        lat = sector_lattice(n, label, spec.active_modes())
        dim = lat.dimension
        rows.append({"sector": str(label), "in_cutoff": len(states), "dimension": "inf" if dim is None else dim})
    if cfg.output_format == "json":
        _emit(cfg, json.dumps({"n": n.to_record(), "cutoff": list(cutoff), "sectors": rows}, indent=2, sort_keys=True) + "\n")
    elif cfg.output_format == "csv":
        _emit(cfg, "sector,in_cutoff,dimension\n" + "".join(f"{r['sector']},{r['in_cutoff']},{r['dimension']}\n" for r in rows))
    else:
        out = [f"N{n}, cutoff {cutoff}", f"{'sector':>10} {'in cutoff':>10} {'dimension':>10}"]
        out += [f"{r['sector']:>10} {r['in_cutoff']:>10} {r['dimension']!s:>10}" for r in rows]
        _emit(cfg, "\n".join(out) + "\n")
    return EXIT_OK


def _jc_j(label: SectorLabel, n: NumberOperatorSpec) -> int:
    j = (label.eigenvalue - n.r) / n.s
    if j.denominator != 1 or j < 0:
        raise UsageError(f"sector {label} is not a j >= 0 sector")
    return int(j)


def cmd_spectrum(cfg: RunConfig, args) -> int:
    spec, n, pobj = cfg.load()
    n = _need_n(n, spec)
    if not cfg.sectors:
        raise UsageError("spectrum needs at least one --sector")
    tol = cfg.tol(spectra.DEFAULT_TOLERANCE)
    results, analytic = [], {}
    for text in cfg.sectors:
        label = resolve_sector(text, n)
        if len(cfg.cutoffs) >= 2:
            res = spectra.convergence_scan(spec, n, label, cfg.cutoffs, args.levels, tol)
        else:
            res = spectra.sector_spectrum(spec, n, label, cfg.cutoffs[0] if cfg.cutoffs else None)
            if args.levels:
                res.eigenvalues = res.eigenvalues[: args.levels]
        results.append(res)
        if args.analytic:
            if not isinstance(pobj, models.ModifiedJCParams):
                raise UsageError("--analytic is available for the jc model only")
            analytic[label] = models.jc_analytic_spectrum(pobj, _jc_j(label, n))
    if cfg.output_format == "csv":
        _emit(cfg, spectra.spectrum_table_csv(results))
    elif cfg.output_format == "json":
        docs = [r.to_dict() for r in results]
        for d, r in zip(docs, results):
            if r.label in analytic:
                d["analytic"] = [g12(v) for v in analytic[r.label]]
        _emit(cfg, json.dumps(docs, indent=2, sort_keys=True) + "\n")
    else:
        lines = []
        for r in results:
            lines.append(f"sector {r.label}" + ("" if r.truncation is None else f", truncation {r.truncation}"))
            ref = analytic.get(r.label)
            header = f"{'index':>5} {'re':>20} {'im':>20}"
            if r.deltas is not None:
                header += f" {'delta':>20} converged"
            if ref is not None:
                header += f" {'analytic':>20} {'|diff|':>20}"
            lines.append(header)
            for i, row in enumerate(r.rows()):
                line = f"{i:>5} {g12(row['re']):>20} {g12(row['im']):>20}"
                if r.deltas is not None:
                    line += f" {g12(row['delta']):>20} {str(row['converged']).lower()}"
                if ref is not None:
                    line += f" {g12(ref[i]):>20} {g12(abs(ref[i] - row['re'])):>20}"
                lines.append(line)
            if ref is not None:
                lines.append(f"max |diff| = {g12(np.abs(ref - r.real).max())}")
        _emit(cfg, "\n".join(lines) + "\n")
    if args.analytic:
        worst = max(np.abs(analytic[r.label] - r.real).max() for r in results)
        return EXIT_OK if worst < cfg.tol(1e-9) else EXIT_FAIL
    return EXIT_OK


def cmd_ode(cfg: RunConfig, args) -> int:
    spec, n, _ = cfg.load()
    n = _need_n(n, spec)
    if not cfg.sectors:
        raise UsageError("ode needs --sector")
    odes = [bargmann.extract_ode(spec, n, resolve_sector(s, n)) for s in cfg.sectors]
    if cfg.output_format == "json":
        _emit(cfg, json.dumps([o.to_dict() for o in odes], indent=2, sort_keys=True) + "\n")
    else:
        parts = []
        for o in odes:
            parts.append(o.format())
            parts.append(o.dumps().rstrip("\n"))
        _emit(cfg, "\n".join(parts) + "\n")
    return EXIT_OK


def cmd_verify_algebra(cfg: RunConfig, args) -> int:
    names = args.set or list(algebra.CATALOG_NAMES)
    cutoff = _square(cfg.cutoffs, (10, 10))
    tol = cfg.tol(1e-10)
    reports = []
    for name in names:
        try:
            gens = algebra.catalog(name)
        except KeyError as exc:
            raise UsageError(str(exc)) from exc
        reports.append(algebra.verify_closure(gens, cutoff, tol))
    if cfg.output_format == "json":
        _emit(cfg, json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n")
    else:
        lines = []
        for r in reports:
            status = "closed" if r.passed else "FAILED"
            lines.append(f"{r.name}: {status}, {len(r.results)} relations, max residual {g12(r.max_residual)}")
            if args.verbose or not r.passed:
                for rel in r.results:
                    lines.append(f"  {rel.relation.describe()}  residual {g12(rel.residual)}")
        _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_compare(cfg: RunConfig, args) -> int:
    """Sector block, full truncated matrix and energy-polynomial roots must agree."""
    spec, n, pobj = cfg.load()
    n = _need_n(n, spec)
    if not cfg.sectors:
        raise UsageError("compare needs at least one --sector")
    tol = cfg.tol(1e-9)
    rows, ok = [], True
    for text in cfg.sectors:
        label = resolve_sector(text, n)
        red = bargmann.reduce_sector(spec, n, label)
        if not red.finite:
            raise UsageError(f"sector {label} is unbounded; compare needs finite sectors")
        block = spectra.diagonalize(red.fock_block).eigenvalues
        hi = [max(st.n1 for st in red.states), max(st.n2 for st in red.states)]
        cutoff = tuple(cfg.cutoffs[:2]) if len(cfg.cutoffs) >= 2 else (hi[0] + 1, hi[1] + 1)
        full = spectra.full_space_sector_spectrum(spec, n, label, cutoff).eigenvalues
        seq = bargmann.energy_polynomials(red)
        roots = bargmann.polynomial_roots(seq[len(seq) - 1])
        d_full = float(np.abs(block - full).max())
        d_roots = float(np.abs(block - roots).max())
        row = {"sector": str(label), "dimension": red.dimension, "block_vs_full": d_full, "block_vs_roots": d_roots}
        worst = max(d_full, d_roots)
        if isinstance(pobj, models.ModifiedJCParams):
            ref = models.jc_analytic_spectrum(pobj, _jc_j(label, n))
            row["block_vs_analytic"] = float(np.abs(block.real - ref).max())
            worst = max(worst, row["block_vs_analytic"])
        row["pass"] = worst < tol
        ok &= row["pass"]
        rows.append(row)
    if cfg.output_format == "json":
        _emit(cfg, json.dumps({"tolerance": tol, "sectors": rows}, indent=2, sort_keys=True) + "\n")
    else:
        lines = []
        for r in rows:
            cells = [f"sector {r['sector']} (dim {r['dimension']})"]
            cells += [f"{k} {g12(v)}" for k, v in r.items() if k.startswith("block_vs")]
            cells.append("ok" if r["pass"] else "MISMATCH")
            lines.append("  ".join(cells))
        _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "build": cmd_build,
    "check-symmetry": cmd_check_symmetry,
    "sectors": cmd_sectors,
    "spectrum": cmd_spectrum,
    "ode": cmd_ode,
    "verify-algebra": cmd_verify_algebra,
    "compare": cmd_compare,
}


def _model_args(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--model", choices=sorted(models.MODELS))
    src.add_argument("--spec-file", type=Path)
    for dest, flag in PARAM_FLAGS.items():
        p.add_argument(flag, dest=dest, type=Fraction, default=None)
    p.add_argument("--n", type=_parse_n, default=None, help="number operator override 's,p,r'")


def _common_args(p: argparse.ArgumentParser):
    p.add_argument("--format", dest="output_format", choices=("table", "csv", "json"), default="table")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--output", type=Path, default=None)
    p.add_argument("--cutoffs", "--cutoff", dest="cutoffs", type=_parse_ints, default=[])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fockforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _common_args(p)
        if name != "verify-algebra":
            _model_args(p)
        if name in ("spectrum", "ode", "compare"):
            p.add_argument("--sector", dest="sectors", action="append", default=[])
        if name == "spectrum":
            p.add_argument("--levels", type=int, default=0, help="keep only the lowest LEVELS")
            p.add_argument("--analytic", action="store_true")
        if name == "check-symmetry":
            p.add_argument(
                "--use-default-n",
                action="store_true",
                help="check the model's documented N instead of solving for the span",
            )
        if name == "verify-algebra":
            p.add_argument("--set", action="append", default=[])
            p.add_argument("--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify-algebra":
            cfg = RunConfig(
                cutoffs=args.cutoffs,
                output_format=args.output_format,
                tolerance=args.tol,
                output=args.output,
                needs_source=False,
            )
        else:
            params = {k: getattr(args, k) for k in PARAM_FLAGS}
            cfg = RunConfig(
                model=args.model,
                spec_file=args.spec_file,
                params=params,
                number_operator=args.n,
                cutoffs=args.cutoffs,
                sectors=getattr(args, "sectors", []),
                output_format=args.output_format,
                tolerance=args.tol,
                output=args.output,
            )
        if args.command == "spectrum" and args.levels == 0 and len(cfg.cutoffs) >= 2:
            args.levels = 5
        return COMMANDS[args.command](cfg, args)
    except (UsageError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
