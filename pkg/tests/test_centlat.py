import itertools

import pytest
from hypothesis import given, settings, strategies as st

import oracles as orc
from tdlc_lattice import permgroup as pg
from tdlc_lattice.centlat import (abelian_normal_witness, cclem_check, cclem_report,
                                  lc_algebra, perp, perp2_projection_check, screen)
from tdlc_lattice.errors import PreconditionError, TruncationArtefact
from tdlc_lattice.filtration import FilteredGroup, canonical_class, ln_lattice
from tdlc_lattice.lattice import is_boolean
from tdlc_lattice.permgroup import GroupHandle, Perm


def as_set(h):
    return frozenset(tuple(int(x) for x in row) for row in h.elements)


def wreath_a5_c2():
    a5 = pg.alternating_group(5, degree=10)
    swap = Perm(tuple(list(range(5, 10)) + list(range(5))))
    return GroupHandle(10, list(a5.generators) + [swap], name="A5 wr C2")


@settings(max_examples=40, deadline=None)
@given(st.lists(st.permutations(list(range(5))), min_size=1, max_size=2),
       st.lists(st.permutations(list(range(5))), min_size=1, max_size=2))
def test_triple_centraliser_equals_centraliser(ggens, hgens):
    g = GroupHandle(5, ggens + hgens)
    h = GroupHandle(5, hgens)
    c = pg.centraliser(g, h)
    cc = pg.centraliser(g, c)
    assert h.issubgroup(cc)
    assert pg.centraliser(g, cc) == c
    elems = as_set(g)
    assert as_set(c) == orc.centraliser(elems, as_set(h))


def test_screening_on_tree_truncations(w3, w4):
    assert not screen(w3.fg, (2, 1)).passed
    assert screen(w3.fg, (1, 1)).passed
    assert screen(w4.fg, (2, 1)).passed


def test_perp_swaps_simple_factors(a5xa5):
    fg, (left, right) = a5xa5
    p = perp(fg, canonical_class(fg, left))
    assert p.rep == right
    assert p.perp_rep == left


def test_lc_algebra_of_product_of_simple_groups(a5xa5):
    fg, _ = a5xa5
    ln = ln_lattice(fg, 0)
    lc = lc_algebra(fg, ln.elements)
    assert len(lc) == 4
    assert is_boolean(lc)
    assert perp2_projection_check(fg, ln, lc)


def test_unscreened_perp_is_refused(w3):
    fg = w3.fg
    with pytest.raises(PreconditionError):
        perp(fg, canonical_class(fg, fg.ambient), (2, 1))


def test_tree_centralisers_are_not_boolean_at_finite_depth(w4):
    # the deepest member is abelian, so perp of the top class is the top class again
    fg = w4.fg
    with pytest.raises(TruncationArtefact):
        lc_algebra(fg, ln_lattice(fg, 1).elements, (2, 1))


def test_abelian_normal_witness():
    w = abelian_normal_witness(pg.symmetric_group(4))
    assert w is not None and w.order() == 4
    assert abelian_normal_witness(pg.symmetric_group(5)) is None
    assert abelian_normal_witness(wreath_a5_c2()) is None


@pytest.mark.parametrize("make", [
    lambda: pg.symmetric_group(5),
    lambda: pg.direct_product(pg.alternating_group(5), pg.alternating_group(5))[0],
    wreath_a5_c2,
    lambda: pg.direct_product(pg.symmetric_group(5), pg.alternating_group(5))[0],
])
def test_centraliser_identities_on_normal_subgroups(make):
    g = make()
    subs = pg.normal_subgroups(g)
    for a, b in itertools.product(subs, repeat=2):
        report = cclem_report(g, a, b)
        assert all(report.values()), (a.order(), b.order(), report)


def test_centraliser_identities_match_set_oracle():
    g = pg.symmetric_group(5)
    elems = as_set(g)
    for a, b in itertools.product(pg.normal_subgroups(g), repeat=2):
        sa, sb = as_set(a), as_set(b)
        c = lambda x, y: orc.centraliser(x, y)  # noqa: E731
        assert (c(elems, c(elems, sa & sb))
                == c(elems, c(elems, sa)) & c(elems, c(elems, sb)))
        assert c(sa, sb) == c(sa, sa & sb)
        assert c(sa, c(elems, sb)) == c(sa, c(sa, sb))
        assert cclem_check(g, a, b)


@pytest.mark.parametrize("make", [
    lambda: pg.direct_product(pg.symmetric_group(3), pg.symmetric_group(3))[0],
    lambda: pg.direct_product(pg.symmetric_group(3), pg.symmetric_group(4))[0],
    lambda: pg.dihedral_group(4),
])
def test_groups_with_abelian_normal_subgroups_are_ineligible(make):
    g = make()
    with pytest.raises(PreconditionError) as info:
        cclem_report(g, g, g)
    assert info.value.reason["witness_order"] >= 2


def test_non_normal_arguments_are_rejected():
    g = pg.symmetric_group(5)
    h = GroupHandle(5, [Perm.from_cycles(5, (0, 1))])
    with pytest.raises(PreconditionError):
        cclem_report(g, h, g)


def test_screening_verdicts(a5xa5, z8sq):
    fg, _ = a5xa5
    assert screen(fg).passed
    # nothing lies outside the lower level of a constant chain
    assert screen(FilteredGroup.constant(pg.symmetric_group(4))).passed
    verdict = screen(z8sq, (2, 1))
    assert not verdict.passed and verdict.qz_witness is not None
