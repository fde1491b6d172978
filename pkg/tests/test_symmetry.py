from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from fockforge.fock import Basis, FockState, HamiltonianSpec, MonomialTerm, Spin, SpinChannel, assemble_operator
from fockforge.models import (
    JAHN_TELLER_N,
    JC_KERR_N,
    MODIFIED_JC_N,
    JahnTellerParams,
    JCKerrParams,
    ModifiedJCParams,
    jahn_teller,
    jc_kerr,
    modified_jc,
)
from fockforge.symmetry import (
    NumberOperatorSpec,
    SectorLabel,
    check_conservation,
    numeric_conservation_check,
    sector_decompose,
    sector_lattice,
    solve_conservation,
    term_residual,
)
from oracles import brute_conserved

UP, DOWN = Spin.UP, Spin.DOWN
I, SZ, SP, SM = SpinChannel
JC = modified_jc(ModifiedJCParams(1, Fraction(4, 5), Fraction(3, 10), Fraction(1, 2)))
JT = jahn_teller(JahnTellerParams(Fraction(1, 10), Fraction(1, 5)))
KERR = jc_kerr(JCKerrParams(1, Fraction(3, 2), Fraction(1, 3), Fraction(1, 4)))

small = st.fractions(min_value=-2, max_value=2, max_denominator=3)
nspecs = st.tuples(small, small, small).filter(lambda t: any(t)).map(lambda t: NumberOperatorSpec(*t))
terms = st.builds(
    MonomialTerm,
    st.fractions(min_value=-2, max_value=2, max_denominator=5).filter(bool),
    st.tuples(*[st.integers(0, 2)] * 4),
    st.sampled_from(list(SpinChannel)),
)


def test_normalization():
    n = NumberOperatorSpec(-2, 0, 1)
    assert n.triple == (2, 0, -1)
    assert NumberOperatorSpec.parse("1, -1, 1/2") == NumberOperatorSpec(1, -1, Fraction(1, 2))
    with pytest.raises(ValueError):
        NumberOperatorSpec(0, 0, 0)


def test_documented_models_conserved():
    assert check_conservation(JC, MODIFIED_JC_N).conserved
    assert check_conservation(JT, JAHN_TELLER_N).conserved
    assert check_conservation(KERR, JC_KERR_N).conserved


def test_sigma_plus_creation_residual():
    term = MonomialTerm(1, (1, 0, 0, 0), SP)
    assert term_residual(term, NumberOperatorSpec(1, 1, Fraction(1, 2))) == 2
    assert not check_conservation(HamiltonianSpec.from_terms([term]), MODIFIED_JC_N).conserved


def test_report_serializes_fractions():
    report = check_conservation(JT, NumberOperatorSpec(1, 1, Fraction(1, 2)))
    d = report.to_dict()
    assert d["conserved"] is False
    assert {r["residual"] for r in d["terms"]} >= {"2", "-2", "0"}


def test_solve_models():
    assert solve_conservation(JC) == [NumberOperatorSpec(1, 1, Fraction(1, 2))]
    assert solve_conservation(JT) == [NumberOperatorSpec(1, -1, Fraction(1, 2))]
    # mode 2 never appears in the Kerr model, so its number is conserved too
    assert solve_conservation(KERR) == [NumberOperatorSpec(1, 0, Fraction(1, 2)), NumberOperatorSpec(0, 1, 0)]


def test_solve_empty_raises():
    with pytest.raises(ValueError, match="empty Hamiltonian"):
        solve_conservation(HamiltonianSpec())


def test_solve_mixed_spec_against_brute_force():
    spec = HamiltonianSpec.from_terms(
        [
            MonomialTerm(1, (0, 1, 0, 0), SP),
            MonomialTerm(1, (0, 0, 0, 1), SP),
            MonomialTerm(1, (1, 0, 0, 1)),
        ]
    )
    span = solve_conservation(spec)
    assert span == [NumberOperatorSpec(1, 1, Fraction(1, 2))]
    brute = brute_conserved([(t.shift, t.channel.value) for t in spec])
    assert brute
    for s, p, r in brute:
        # every hit is a multiple of the basis vector
        assert (s, p, r) == tuple(s * v for v in span[0].triple)


def test_solve_two_dimensional_span():
    spec = HamiltonianSpec.from_terms([MonomialTerm(1, (1, 1, 0, 0)), MonomialTerm(1, (0, 0, 0, 0), SZ)])
    span = solve_conservation(spec)
    assert len(span) == 3  # every (s, p, r) works for a diagonal spec
    assert all(check_conservation(spec, n).conserved for n in span)


def test_solve_nothing_conserved():
    spec = HamiltonianSpec.from_terms([MonomialTerm(1, (1, 0, 0, 0)), MonomialTerm(1, (0, 0, 1, 0)), MonomialTerm(1, (0, 0, 0, 0), SP)])
    assert solve_conservation(spec) == []


@given(st.lists(terms, min_size=1, max_size=5))
def test_solution_span_properties(ts):
    spec = HamiltonianSpec.from_terms(ts)
    assume(len(spec))
    span = solve_conservation(spec)
    for n in span:
        assert check_conservation(spec, n).conserved
    brute = brute_conserved([(t.shift, t.channel.value) for t in spec], bound=2)
    if span:
        basis = np.array([[float(v) for v in n.triple] for n in span])
        for hit in brute:
            coef, res, *_ = np.linalg.lstsq(basis.T, np.array([float(v) for v in hit]), rcond=None)
            assert np.allclose(basis.T @ coef, [float(v) for v in hit])
    else:
        assert brute == []


@given(st.lists(terms, min_size=1, max_size=4), nspecs)
def test_exact_and_numeric_agree(ts, n):
    spec = HamiltonianSpec.from_terms(ts)
    assume(len(spec))
    conserved = check_conservation(spec, n).conserved
    value = numeric_conservation_check(spec, n, (8, 8))
    if conserved:
        assert value < 1e-10
    else:
        assert value >= 0.1


def test_numeric_examples():
    assert numeric_conservation_check(JC, MODIFIED_JC_N, (8, 8)) < 1e-12
    assert numeric_conservation_check(JC, NumberOperatorSpec(1, 2, Fraction(1, 2)), (8, 8)) > 0.1
    zero = HamiltonianSpec.from_terms([MonomialTerm(0, (1, 1, 0, 0))])
    assert numeric_conservation_check(zero, MODIFIED_JC_N, (4, 4)) == 0


def test_numeric_check_empty_interior():
    with pytest.raises(ValueError):
        numeric_conservation_check(KERR, JC_KERR_N, (2, 2))


# sectors


def test_jc_sector_three_halves():
    sectors = sector_decompose(Basis((2, 2)), MODIFIED_JC_N)
    got = sectors[SectorLabel(Fraction(3, 2))]
    assert got == [
        FockState(0, 1, UP),
        FockState(0, 2, DOWN),
        FockState(1, 0, UP),
        FockState(1, 1, DOWN),
        FockState(2, 0, DOWN),
    ]
    assert len(got) == 2 * 1 + 3


def test_jt_truncated_sector():
    got = sector_decompose(Basis((3, 3)), JAHN_TELLER_N)[SectorLabel(Fraction(1, 2))]
    assert got == [
        FockState(0, 0, UP),
        FockState(1, 0, DOWN),
        FockState(1, 1, UP),
        FockState(2, 1, DOWN),
        FockState(2, 2, UP),
        FockState(3, 2, DOWN),
        FockState(3, 3, UP),
    ]


def test_p_zero_groups_by_n1_and_spin():
    n = NumberOperatorSpec(1, 0, Fraction(1, 3))
    for label, states in sector_decompose(Basis((3, 3)), n).items():
        assert len({(s.n1, s.spin) for s in states}) == 1


@given(nspecs, st.tuples(st.integers(0, 4), st.integers(0, 4)))
def test_decompose_is_partition(n, cutoff):
    basis = Basis(cutoff)
    sectors = sector_decompose(basis, n)
    flat = [s for group in sectors.values() for s in group]
    assert sorted(flat) == sorted(basis.states) and len(flat) == len(set(flat))
    for label, group in sectors.items():
        assert all(n.eigenvalue(s) == label.eigenvalue for s in group)
        assert [basis.ordinal(s) for s in group] == sorted(basis.ordinal(s) for s in group)


@pytest.mark.parametrize("spec,n", [(JC, MODIFIED_JC_N), (JT, JAHN_TELLER_N), (KERR, JC_KERR_N)])
def test_block_structure_exact_zeros(spec, n):
    basis = Basis((5, 5))
    m = assemble_operator(spec, basis).toarray()
    labels = [n.eigenvalue(s) for s in basis.states]
    for i, li in enumerate(labels):
        for j, lj in enumerate(labels):
            if li != lj:
                assert m[i, j] == 0


# lattices


def test_jc_lattice():
    lat = sector_lattice(MODIFIED_JC_N, MODIFIED_JC_N.j_label(2))
    assert lat.direction == (-1, 1)
    assert lat.origins == {UP: (2, 0), DOWN: (3, 0)}
    assert lat.dimension == 7


def test_jt_lattice_unbounded():
    lat = sector_lattice(JAHN_TELLER_N, SectorLabel(Fraction(1, 2)))
    assert lat.direction == (1, 1) and not lat.finite
    assert lat.state(UP, 3) == FockState(3, 3, UP)
    assert lat.state(DOWN, 0) == FockState(1, 0, DOWN)


def test_negative_jt_label():
    lat = sector_lattice(JAHN_TELLER_N, SectorLabel(Fraction(-3, 2)))
    assert lat.origins == {UP: (0, 2), DOWN: (0, 1)}


def test_kerr_lattice_freezes_unused_mode():
    lat = sector_lattice(JC_KERR_N, SectorLabel(Fraction(3, 2)), KERR.active_modes())
    assert lat.origins == {UP: (1, 0), DOWN: (2, 0)}
    assert lat.dimension == 2


@given(nspecs, st.integers(-6, 6).map(lambda v: SectorLabel(Fraction(v, 2))))
def test_lattice_matches_enumeration(n, label):
    assume(n.s != 0 or n.p != 0)
    cut = 14
    enumerated = {s for s in Basis((cut, cut)).states if n.eigenvalue(s) == label.eigenvalue}
    try:
        lat = sector_lattice(n, label)
    except ValueError:
        assert not enumerated
        return
    assume(lat.finite)
    listed = {lat.state(s, k) for s in lat.spins for k in range(lat.lengths[s])}
    assume(all(st.n1 < cut and st.n2 < cut for st in listed))
    assert listed == enumerated
