import pytest

import oracles as orc
from conftest import abelian_chain
from tdlc_lattice import permgroup as pg
from tdlc_lattice.errors import PreconditionError
from tdlc_lattice.filtration import (FilteredGroup, NonNormalChainError, c_stable_check,
                                     canonical_class, fixed_classes, is_locally_normal,
                                     ln_lattice, project_to_depth, projection_meet_check,
                                     qz_trivial_at, qz_witness, visible_abelian_witness)
from tdlc_lattice.lattice import modularity_check
from tdlc_lattice.permgroup import GroupHandle, Perm


def as_set(h):
    return frozenset(tuple(int(x) for x in row) for row in h.elements)


def oracle_ln_size(fg, max_witness):
    """Subgroups of the deepest member normalised by ``U_max_witness``, by brute force."""
    deep = as_set(fg.deep)
    by = as_set(fg.level(max_witness))
    subs = orc.all_subgroups(deep, fg.degree)
    return sum(orc.normalised_by(h, by) for h in subs)


def level2_coordinate_perms(ta):
    """Action of the generators on the level-2 vertices of the depth-3 binary tree."""
    return [[g(2 * v) // 2 for v in range(4)] for g in ta.group.generators]


@pytest.mark.parametrize("mw,expected", [(0, 5), (1, 13), (2, 67)])
def test_w3_structure_lattice_sizes(w3, mw, expected):
    lat = ln_lattice(w3.fg, mw)
    assert lat.n == expected
    assert oracle_ln_size(w3.fg, mw) == expected
    assert modularity_check(lat)


def test_w3_fixed_classes_match_submodule_oracle(w3):
    lat = ln_lattice(w3.fg, 0)
    fixed = fixed_classes(w3.fg, lat)
    oracle = orc.invariant_subspaces(4, level2_coordinate_perms(w3))
    assert len(fixed) == len(oracle) == 5
    assert sorted(c.rep.order() for c in fixed) == sorted(len(s) for s in oracle)


def test_simple_group_constant_chain_is_degenerate():
    fg = FilteredGroup.constant(pg.alternating_group(5))
    lat = ln_lattice(fg, 0)
    assert lat.n == 2
    assert {c.rep.order() for c in lat.elements} == {1, 60}


def test_abelian_structure_lattice(z8sq):
    lat = ln_lattice(z8sq, 0)
    assert lat.n == oracle_ln_size(z8sq, 0) == 5
    assert modularity_check(lat)


def test_join_is_product_of_representatives(w3):
    lat = ln_lattice(w3.fg, 1)
    for a in range(lat.n):
        for b in range(lat.n):
            ra, rb = lat.elements[a].rep, lat.elements[b].rep
            assert lat.elements[lat.join[a, b]].rep == pg.join(ra, rb)
            assert lat.elements[lat.meet[a, b]].rep == pg.intersection(ra, rb)


def test_canonical_class_is_trace_on_deepest_member(w3):
    fg = w3.fg
    g = fg.ambient
    c1 = canonical_class(fg, g)
    c2 = canonical_class(fg, fg.level(1))
    assert c1 == c2
    assert c1.rep == fg.deep
    assert canonical_class(fg, pg.trivial_group(g.degree)).is_zero()


def test_locally_normal_witness_level(w3):
    fg = w3.fg
    # a single bottom swap is normalised only by the deepest member
    swap = GroupHandle(8, [Perm.from_cycles(8, (0, 1))])
    w = is_locally_normal(fg, swap)
    assert w is not None and w.level == 2
    assert is_locally_normal(fg, fg.level(1)).level == 0


def test_non_normal_chain_is_rejected():
    g = pg.symmetric_group(4)
    h = GroupHandle(4, [Perm.from_cycles(4, (0, 1))])
    with pytest.raises(NonNormalChainError):
        FilteredGroup(g, [g, h])
    with pytest.raises(NonNormalChainError):
        FilteredGroup(g, [pg.alternating_group(4)])


def test_quasi_centre_on_product_of_simple_groups(a5xa5):
    fg, _ = a5xa5
    assert qz_witness(fg, 1, 1) is None
    assert qz_trivial_at(fg, 1, 0)


def test_quasi_centre_of_abelian_group(z8sq):
    w = qz_witness(z8sq, 2, 1)
    assert w is not None
    assert w not in z8sq.level(1)
    with pytest.raises(PreconditionError):
        qz_witness(z8sq, 1, 2)


def test_visible_abelian_witness_is_what_it_claims(w3):
    fg = w3.fg
    ab = visible_abelian_witness(fg, 2, 1)
    assert ab is not None
    assert pg.is_abelian(ab)
    assert pg.normalises(fg.level(2), ab)
    assert not ab.issubgroup(fg.level(1))


def test_no_visible_abelian_subgroup_in_product_of_simple_groups(a5xa5):
    fg, _ = a5xa5
    assert visible_abelian_witness(fg, 1, 0) is None


def test_c_stability_of_a_simple_factor(a5xa5):
    fg, (left, right) = a5xa5
    assert c_stable_check(fg, left)
    assert c_stable_check(fg, right)


def test_projection_to_a_shallower_depth(w3):
    fg = w3.fg
    lat = ln_lattice(fg, 1)
    classes = lat.elements
    assert projection_meet_check(fg, classes, 1)
    top = project_to_depth(fg, classes[-1], 1)
    assert top.rep.issubgroup(fg.level(1))


def test_abelian_chain_builder():
    fg = abelian_chain(4, 1)
    assert [u.order() for u in fg.chain] == [16, 4]
