import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles as orc
from tdlc_lattice import permgroup as pg
from tdlc_lattice.errors import InputError, ResourceError
from tdlc_lattice.permgroup import GroupHandle, Perm


def as_set(h: GroupHandle) -> frozenset:
    return frozenset(tuple(int(x) for x in row) for row in h.elements)


perms = st.integers(3, 6).flatmap(
    lambda n: st.lists(st.permutations(list(range(n))), min_size=1, max_size=3))


@settings(max_examples=60, deadline=None)
@given(perms)
def test_order_and_elements_match_bfs_closure(gens):
    n = len(gens[0])
    h = GroupHandle(n, gens)
    oracle = orc.closure(gens, n)
    assert h.order() == len(oracle)
    assert as_set(h) == oracle


@settings(max_examples=40, deadline=None)
@given(perms)
def test_centre_and_centraliser_match_brute_force(gens):
    n = len(gens[0])
    h = GroupHandle(n, gens)
    elems = orc.closure(gens, n)
    assert as_set(pg.centre(h)) == orc.centraliser(elems, elems)
    cyc = GroupHandle(n, gens[:1])
    assert as_set(pg.centraliser(h, cyc)) == orc.centraliser(elems, orc.closure(gens[:1], n))


@settings(max_examples=40, deadline=None)
@given(st.permutations(list(range(6))), st.permutations(list(range(6))),
       st.permutations(list(range(6))))
def test_product_is_right_action_and_associative(a, b, c):
    p, q, r = Perm(tuple(a)), Perm(tuple(b)), Perm(tuple(c))
    assert (p * q).images == orc.mul(tuple(a), tuple(b))
    assert (p * q) * r == p * (q * r)
    assert (p * p.inverse()).is_identity()
    assert p.conj(q).images == orc.conj(tuple(a), tuple(b))


@pytest.mark.parametrize("make,order", [
    (lambda: pg.symmetric_group(4), 24),
    (lambda: pg.alternating_group(5), 60),
    (lambda: pg.dihedral_group(4), 8),
    (lambda: pg.quaternion_group(), 8),
    (lambda: pg.cyclic_group(7), 7),
])
def test_standard_group_orders(make, order):
    assert make().order() == order


@pytest.mark.parametrize("make", [
    lambda: pg.symmetric_group(4),
    lambda: pg.dihedral_group(4),
    lambda: pg.quaternion_group(),
    lambda: pg.direct_product(pg.symmetric_group(3), pg.symmetric_group(3))[0],
])
def test_normal_subgroups_match_subgroup_oracle(make):
    g = make()
    elems = as_set(g)
    oracle = orc.normal_subgroups(elems, g.degree)
    got = {as_set(n) for n in pg.normal_subgroups(g)}
    assert got == oracle


def test_all_subgroups_of_s4_match_oracle():
    g = pg.symmetric_group(4)
    got = {as_set(h) for h in pg.all_subgroups(g)}
    assert len(got) == 30
    assert got == orc.all_subgroups(as_set(g), 4)


def test_conjugacy_classes_partition_the_group():
    g = pg.symmetric_group(5)
    classes = pg.conjugacy_classes(g)
    assert len(classes) == 7
    sizes = sorted(len(c) for c in classes)
    assert sizes == [1, 10, 15, 20, 20, 24, 30]
    assert sum(sizes) == 120


def test_normaliser_and_core():
    g = pg.symmetric_group(4)
    h = GroupHandle(4, [Perm.from_cycles(4, (0, 1))])
    n = pg.normaliser(g, h)
    assert as_set(n) == frozenset(x for x in as_set(g)
                                  if orc.conj((1, 0, 2, 3), x) in as_set(h))
    assert pg.core(g, h).is_trivial()
    v4 = GroupHandle(4, [Perm.from_cycles(4, (0, 1), (2, 3)), Perm.from_cycles(4, (0, 2), (1, 3))])
    assert pg.core(g, pg.normaliser(g, h)).is_trivial()
    assert pg.core(g, pg.dihedral_group(4)) == v4


def test_normal_closure_of_a_transposition_is_everything():
    g = pg.symmetric_group(5)
    t = Perm.from_cycles(5, (0, 1))
    assert pg.normal_closure(g, [t]) == g
    a5 = pg.alternating_group(5)
    assert pg.normal_closure(g, [Perm.from_cycles(5, (0, 1, 2))]) == a5


def test_canonical_key_ignores_generating_set():
    a = GroupHandle(4, [Perm.from_cycles(4, (0, 1, 2, 3)), Perm.from_cycles(4, (0, 1))])
    b = GroupHandle(4, [Perm.from_cycles(4, (0, 1)), Perm.from_cycles(4, (1, 2)),
                        Perm.from_cycles(4, (2, 3))])
    assert a == b
    assert a.canonical_key == b.canonical_key


def test_intersection_and_join():
    g = pg.symmetric_group(4)
    a4 = pg.alternating_group(4)
    d4 = pg.dihedral_group(4)
    assert as_set(pg.intersection(a4, d4)) == as_set(a4) & as_set(d4)
    assert pg.join(a4, d4) == g


def test_direct_product_factors_commute():
    g, (a, b) = pg.direct_product(pg.symmetric_group(3), pg.cyclic_group(4))
    assert g.order() == 24
    assert pg.intersection(a, b).is_trivial()
    assert all(x * y == y * x for x in a.generators for y in b.generators)


def test_bad_permutations_are_rejected():
    with pytest.raises(InputError):
        Perm((0, 0, 1))
    with pytest.raises(InputError):
        Perm(tuple(range(pg.MAX_DEGREE + 1)))
    with pytest.raises(InputError):
        GroupHandle(3, [(1, 0)])


def test_normal_subgroup_count_budget():
    # elementary abelian 2^5 has 374 subspaces, all normal
    g = GroupHandle(10, [Perm.from_cycles(10, (2 * i, 2 * i + 1)) for i in range(5)])
    with pytest.raises(ResourceError):
        pg.normal_subgroups(g, max_count=100)
    assert len(pg.normal_subgroups(g)) == len(orc.f2_subspaces(5)) == 374


def test_subgroup_from_mask_round_trips():
    g = pg.symmetric_group(4)
    a4 = pg.alternating_group(4)
    mask = a4.mask_in(g)
    assert mask.sum() == 12
    assert pg.subgroup_from_mask(g, mask) == a4
    assert np.array_equal(pg.subgroup_from_mask(g, mask).elements, a4.elements)
