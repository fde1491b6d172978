from fractions import Fraction

import numpy as np
import pytest

from fockforge.algebra import (
    ANTICOMMUTATOR,
    CATALOG_NAMES,
    GeneratorSet,
    Relation,
    catalog,
    deformed_su2_operators,
    superbracket,
    verify_closure,
)
from fockforge.fock import Basis, HamiltonianSpec, MonomialTerm, SpinChannel, assemble_operator, commutator, interior_mask

I, SZ, SP, SM = SpinChannel
HALF = Fraction(1, 2)


def _by_pair(report):
    return {(r.relation.left, r.relation.right): r for r in report.results}


def test_su2_generators_as_defined():
    g = catalog("su2")
    assert g.generators["J0"] == HamiltonianSpec.from_terms(
        [MonomialTerm(HALF, (1, 1, 0, 0)), MonomialTerm(-HALF, (0, 0, 1, 1))]
    )
    assert g.generators["J+"] == HamiltonianSpec.monomial((1, 0, 0, 1))
    assert g.generators["J-"] == HamiltonianSpec.monomial((0, 1, 1, 0))
    descriptions = {r.describe() for r in g.relations}
    assert "[J+, J-] = 2*J0" in descriptions


def test_su11_generators_as_defined():
    g = catalog("su11")
    assert g.generators["K0"] == HamiltonianSpec.from_terms(
        [MonomialTerm(HALF, (1, 1, 0, 0)), MonomialTerm(HALF, (0, 0, 1, 1)), MonomialTerm(HALF, (0, 0, 0, 0))]
    )
    assert g.generators["K+"] == HamiltonianSpec.monomial((1, 0, 1, 0))
    assert g.generators["K-"] == HamiltonianSpec.monomial((0, 1, 0, 1))


def test_sp4r_has_ten_bilinears():
    g = catalog("sp4r")
    assert len(g.generators) == 10
    assert all(sum(t.exponents) == 2 for spec in g.generators.values() for t in spec)
    assert len(g.relations) == 45


def test_unknown_set():
    with pytest.raises(KeyError):
        catalog("g2")


def test_bad_relation_label():
    with pytest.raises(ValueError):
        GeneratorSet("x", {"A": HamiltonianSpec.identity()}, [Relation("commutator", "A", "B", ())])


@pytest.mark.parametrize("name", ["su2", "su11"])
def test_classical_closure(name):
    report = verify_closure(catalog(name), (10, 10), 1e-11)
    assert report.passed and report.max_residual < 1e-11


def test_sp4r_closure_and_coefficients():
    report = verify_closure(catalog("sp4r"), (10, 10), 1e-10)
    assert report.passed and len(report.results) == 45
    pairs = _by_pair(report)
    # [a1 a1, a1+ a1+] = 4 a1+ a1 + 2 by normal ordering
    assert pairs[("a1a1", "a1+a1+")].coefficients == pytest.approx({"a1+a1": 4.0, "I": 2.0})
    # [a1+ a2+, a2 a1] = -(n1 + n2 + 1)
    assert pairs[("a1+a2+", "a2a1")].coefficients == pytest.approx({"a1+a1": -1.0, "a2+a2": -1.0, "I": -1.0})
    assert pairs[("a1+a1", "a2a2")].coefficients == {}


@pytest.mark.parametrize("name", ["osp21_a", "osp21_b", "osp22_a", "osp22_b"])
def test_osp_closure_and_grading(name):
    report = verify_closure(catalog(name), (10, 10), 1e-10)
    assert report.passed
    assert all(r.grading_ok for r in report.results)
    odd = [r for r in report.results if r.relation.bracket == ANTICOMMUTATOR]
    assert len(odd) == 10


def test_osp21_a_odd_bracket_baseline():
    # {s+ a2, s- a2+} = n2 + (1 + sigma0)/2 = -J0 + Z/2 + 1/2
    pairs = _by_pair(verify_closure(catalog("osp21_a")))
    assert pairs[("V+", "W-")].coefficients == pytest.approx({"J0": -1.0, "Z": 0.5, "I": 0.5})
    assert pairs[("V+", "V+")].coefficients == {}


@pytest.mark.parametrize("name", ["osp21_a", "osp22_b"])
def test_osp_without_completing_generator_does_not_close(name):
    g = catalog(name)
    gens = {k: v for k, v in g.generators.items() if k != "Z"}
    rels = [r for r in g.relations if "Z" not in (r.left, r.right)]
    report = verify_closure(GeneratorSet(name + "_no_z", gens, rels, graded=True))
    assert not report.passed


def test_deformed_relation_at_cutoff_14():
    report = verify_closure(catalog("deformed_su2"), (14, 0), 1e-11)
    assert report.passed
    pairs = _by_pair(report)
    assert pairs[("Y+", "Y-")].residual < 1e-10
    assert pairs[("Y0", "Y+")].residual < 1e-12
    assert pairs[("Y0", "Y-")].residual < 1e-12
    for other in ("Y+", "Y-", "Y0"):
        assert pairs[("N", other)].residual < 1e-12


def test_deformed_relation_by_hand():
    basis = Basis((14, 0))
    ops = deformed_su2_operators(basis)
    yp, ym, y0, n = ops["Y+"], ops["Y-"], ops["Y0"], ops["N"]
    one = np.eye(len(basis))
    lhs = commutator(yp, ym).toarray()
    rhs = (one + 2 * y0.toarray()) @ (y0.toarray() - n.toarray()) - 0.5 * one
    mask = interior_mask(basis, (4, 0))
    assert np.abs((lhs - rhs)[np.ix_(mask, mask)]).max() < 1e-10


def test_superbracket_grading():
    basis = Basis((3, 3))
    vp = assemble_operator(catalog("osp21_a").generators["V+"], basis)
    j0 = assemble_operator(catalog("su2").generators["J0"], basis)
    assert superbracket(vp, vp, (True, True)).max_abs() == 0
    assert np.array_equal(superbracket(j0, vp, (False, True)).toarray(), commutator(j0, vp).toarray())
    assert np.array_equal(superbracket(j0, j0, (False, False)).toarray(), np.zeros((len(basis),) * 2))


def test_cutoff_too_small():
    with pytest.raises(ValueError, match="interior"):
        verify_closure(catalog("sp4r"), (3, 3))


def test_report_serialization():
    d = verify_closure(catalog("su2"), (6, 6)).to_dict()
    assert d["set"] == "su2" and d["passed"] and len(d["relations"]) == 3


def test_every_catalog_entry_closes():
    for name in CATALOG_NAMES:
        cutoff = (14, 0) if name == "deformed_su2" else (10, 10)
        assert verify_closure(catalog(name), cutoff).passed, name
