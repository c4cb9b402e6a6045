"""Filtered finite groups: a desk-scale model of a t.d.l.c. group.

A :class:`FilteredGroup` is a finite group ``G = U_0`` with a descending chain
``U_0 >= U_1 >= ... >= U_k`` of normal subgroups standing in for a base of
compact open subgroups.  Two subgroups are locally equivalent at this depth iff
they meet the deepest member ``U_k`` in the same subgroup, so a class is stored
as that intersection.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import permgroup as pg
from .errors import InputError, PreconditionError, ResourceError, TruncationArtefact
from .lattice import Check, FiniteLattice, PASS, modularity_check
from .permgroup import GroupHandle, Perm

__all__ = [
    "FilteredGroup", "LocalClass", "LocallyNormalWitness", "NonNormalChainError",
    "DegenerateChainWarning", "canonical_class", "is_locally_normal", "ln_lattice",
    "modularity_check", "quasi_centre_at", "qz_witness", "qz_trivial_at",
    "quasi_centraliser", "c_stable_check", "c_stable_parts", "fixed_classes",
    "project_to_depth", "visible_abelian_witness",
]

DEFAULT_CLASS_BUDGET = 2 ** 14


class NonNormalChainError(InputError):
    """A chain member is not normal in the ambient group (or the chain is not descending)."""


class DegenerateChainWarning(UserWarning):
    pass


class FilteredGroup:
    """Ambient group with a descending chain of normal subgroups.

    ``chain[0]`` must equal ``ambient``.  ``margin`` is how many of the deepest
    levels are distrusted by default when a predicate needs a level pair.
    """

    def __init__(self, ambient: GroupHandle, chain: Sequence[GroupHandle], margin: int = 1,
                 name: str | None = None):
        chain = list(chain)
        if not chain or not chain[0] == ambient:
            raise NonNormalChainError("chain must start with the ambient group")
        for i, (upper, lower) in enumerate(zip(chain, chain[1:])):
            if not lower.issubgroup(upper):
                raise NonNormalChainError("chain is not descending", level=i + 1)
        for i, u in enumerate(chain):
            if not pg.is_normal(ambient, u):
                raise NonNormalChainError("chain member is not normal in the ambient group", level=i)
        k = len(chain) - 1
        if not 0 <= margin <= k:
            raise InputError("margin must lie in 0..k", margin=margin, k=k)
        self.ambient = ambient
        self.chain: tuple[GroupHandle, ...] = tuple(chain)
        self.margin = margin
        self.name = name or ambient.name
        self.warnings: list[str] = []
        # derived results keyed by operation; values depend only on the chain
        self.memo: dict = {}
        if self.deep.is_trivial():
            msg = "deepest chain member is trivial; every class collapses to 0"
            self.warnings.append(msg)
            warnings.warn(msg, DegenerateChainWarning, stacklevel=2)

    @classmethod
    def constant(cls, ambient: GroupHandle, length: int = 1, margin: int = 1) -> "FilteredGroup":
        """Every chain member equals the ambient group (a profinite group with one open subgroup)."""
        return cls(ambient, [ambient] * (length + 1), margin=min(margin, length))

    @property
    def k(self) -> int:
        return len(self.chain) - 1

    def is_constant(self) -> bool:
        """True when every chain member is the ambient group."""
        return all(u.order() == self.ambient.order() for u in self.chain)

    @property
    def degree(self) -> int:
        return self.ambient.degree

    @property
    def deep(self) -> GroupHandle:
        return self.chain[-1]

    def level(self, i: int) -> GroupHandle:
        if not 0 <= i <= self.k:
            raise InputError("level outside the chain", level=i, k=self.k)
        return self.chain[i]

    def default_levels(self) -> tuple[int, int]:
        i = max(self.k - self.margin, 0)
        return i, max(i - 1, 0)

    def truncated(self, depth: int) -> "FilteredGroup":
        """Same ambient, chain cut after level ``depth``."""
        self.level(depth)
        return FilteredGroup(self.ambient, self.chain[:depth + 1],
                             margin=min(self.margin, depth), name=self.name)

    def open_subgroup(self, i: int) -> "FilteredGroup":
        """``U_i`` with its inherited chain ``U_i >= ... >= U_k``."""
        u = self.level(i)
        return FilteredGroup(u, self.chain[i:], margin=min(self.margin, self.k - i),
                             name=f"U_{i}({self.name})")

    def check_subgroup(self, h: GroupHandle, what: str = "subgroup"):
        if h.degree != self.degree:
            raise InputError("degree mismatch", expected=self.degree, got=h.degree)
        if not h.issubgroup(self.ambient):
            raise InputError(f"{what} is not contained in the ambient group")

    # -- deep-level arithmetic ---------------------------------------------------

    def deep_mask(self, h: GroupHandle) -> np.ndarray:
        """Mask of ``h n U_k`` over ``U_k.elements``."""
        if h.order() >= self.deep.order():
            return h.contains_rows(self.deep.elements)
        mask = np.zeros(len(self.deep.elements), dtype=bool)
        pos = self.deep.index.lookup(h.elements)
        mask[pos[pos >= 0]] = True
        return mask

    def deep_subgroup(self, mask: np.ndarray) -> GroupHandle:
        return pg.subgroup_from_mask(self.deep, mask)

    def conjugation_maps(self, by: GroupHandle) -> list[np.ndarray]:
        """For each generator ``x`` of ``by``, the permutation of ``U_k``'s elements ``e -> x^-1 e x``."""
        rows = self.deep.elements
        return [self.deep.index.lookup(pg.conjugate_rows_by(rows, x)) for x in by.generators]

    def __repr__(self) -> str:
        orders = [u.order() for u in self.chain]
        return f"FilteredGroup({self.name}, chain orders={orders}, margin={self.margin})"


@dataclass(frozen=True, eq=False)
class LocalClass:
    """Local-equivalence class, stored as its trace ``rep = source n U_k``.

    Equality is equality of ``rep``; ``source`` and ``witness`` are kept for
    reporting and for checks that need a representative above ``U_k``.
    """

    rep: GroupHandle
    witness: int | None = None
    source: GroupHandle | None = None

    @property
    def key(self) -> tuple:
        return self.rep.canonical_key

    @property
    def representative(self) -> GroupHandle:
        return self.source if self.source is not None else self.rep

    def __eq__(self, other) -> bool:
        if not isinstance(other, LocalClass):
            return NotImplemented
        return self.rep == other.rep

    def __hash__(self) -> int:
        return hash(self.key)

    def is_zero(self) -> bool:
        return self.rep.is_trivial()

    def describe(self, fg: FilteredGroup | None = None) -> str:
        if self.rep.is_trivial():
            return "0"
        if fg is not None and self.rep.order() == fg.deep.order():
            return "inf"
        gens = " ".join(str(g) for g in self.rep.canonical_generators)
        return f"[{self.rep.order()}: {gens}]"

    def to_dict(self) -> dict:
        return {
            "order": self.rep.order(),
            "generators": [g.to_list() for g in self.rep.canonical_generators],
            "witness": self.witness,
        }


@dataclass(frozen=True)
class LocallyNormalWitness:
    subgroup: GroupHandle
    level: int


def canonical_class(fg: FilteredGroup, h: GroupHandle) -> LocalClass:
    """Class of ``h``: its intersection with the deepest chain member."""
    fg.check_subgroup(h)
    rep = fg.deep_subgroup(fg.deep_mask(h))
    lnw = is_locally_normal(fg, h)
    return LocalClass(rep, lnw.level if lnw else None, h)


def is_locally_normal(fg: FilteredGroup, h: GroupHandle) -> LocallyNormalWitness | None:
    """Smallest chain level normalising ``h``, or None."""
    fg.check_subgroup(h)
    for i, u in enumerate(fg.chain):
        if pg.normalises(u, h):
            return LocallyNormalWitness(h, i)
    return None


def _orbit_closure(fg: FilteredGroup, maps: list[np.ndarray], start: int) -> np.ndarray:
    seen = {start}
    queue = deque([start])
    while queue:
        i = queue.popleft()
        for m in maps:
            j = int(m[i])
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return np.fromiter(seen, dtype=np.int64)


def invariant_subgroup_masks(fg: FilteredGroup, level: int, budget: int = DEFAULT_CLASS_BUDGET
                             ) -> list[np.ndarray]:
    """Every subgroup of ``U_k`` normalised by ``U_level``, as masks over ``U_k.elements``.

    Atoms are ``U_level``-normal closures of single elements; every invariant
    subgroup is the join of the atoms of its elements, so joining atoms to a
    fixed point is exhaustive.
    """
    deep = fg.deep
    rows = deep.elements
    n = len(rows)
    maps = fg.conjugation_maps(fg.level(level))
    atoms: dict[bytes, np.ndarray] = {}
    done = np.zeros(n, dtype=bool)
    done[0] = True
    for start in range(1, n):
        if done[start]:
            continue
        orbit = _orbit_closure(fg, maps, start)
        closure = GroupHandle(deep.degree, [Perm._trusted(rows[i]) for i in orbit])
        mask = closure.contains_rows(rows)
        # conjugates and generators of the same cyclic subgroup give the same atom
        done[orbit] = True
        x = Perm._trusted(rows[start])
        powers = [x]
        while not powers[-1].is_identity():
            powers.append(powers[-1] * x)
        m = len(powers)
        coprime = [powers[j - 1].images for j in range(1, m) if math.gcd(j, m) == 1]
        done[deep.index.lookup(np.array(coprime, dtype=rows.dtype))] = True
        atoms.setdefault(mask.tobytes(), mask)
    bottom = np.zeros(n, dtype=bool)
    bottom[0] = True
    found = {bottom.tobytes(): bottom}
    queue = deque([bottom])
    atom_list = sorted(atoms.values(), key=lambda m: (int(m.sum()), m.tobytes()))
    while queue:
        cur = queue.popleft()
        for atom in atom_list:
            if not (atom & ~cur).any():
                continue
            joined = pg._mask_product(deep, cur, atom)
            key = joined.tobytes()
            if key not in found:
                found[key] = joined
                if len(found) > budget:
                    raise ResourceError("locally normal class enumeration exceeded its budget",
                                        count=len(found), budget=budget, level=level)
                queue.append(joined)
    return list(found.values())


def ln_lattice(fg: FilteredGroup, max_witness: int, budget: int = DEFAULT_CLASS_BUDGET
               ) -> FiniteLattice:
    """Lattice of classes whose trace on ``U_k`` is normalised by ``U_max_witness``.

    Meet is intersection of traces and join is their product; both are
    cross-checked against the inclusion order.
    """
    fg.level(max_witness)
    masks = invariant_subgroup_masks(fg, max_witness, budget)
    classes = []
    for m in masks:
        rep = fg.deep_subgroup(m)
        # U_w normalises rep, so the least such level is at most max_witness
        w = next(i for i, u in enumerate(fg.chain) if i >= max_witness or pg.normalises(u, rep))
        classes.append(LocalClass(rep, w, rep))
    order = sorted(range(len(classes)), key=lambda i: classes[i].key)
    classes = [classes[i] for i in order]
    M = np.array([masks[i] for i in order], dtype=bool)
    lat = _lattice_from_masks(fg, classes, M)
    _check_join_is_product(lat, M)
    return lat


def _lattice_from_masks(fg: FilteredGroup, classes: list[LocalClass], M: np.ndarray
                        ) -> FiniteLattice:
    n = len(classes)
    packed = np.packbits(M, axis=1)
    position = {row.tobytes(): i for i, row in enumerate(packed)}
    meet = np.empty((n, n), dtype=np.int32)
    for a in range(n):
        inter = np.packbits(M[a] & M, axis=1)
        try:
            meet[a] = [position[r.tobytes()] for r in inter]
        except KeyError:
            raise ResourceError("class set is not closed under intersection") from None
    Mf = M.astype(np.float32)
    leq = (Mf @ (~M).astype(np.float32).T) == 0
    return FiniteLattice(classes, leq, keys=[c.key for c in classes], meet=meet,
                         label=lambda c: c.describe(fg))


def _check_join_is_product(lat: FiniteLattice, M: np.ndarray):
    # the lub contains both reps, so equal size with |AB| = |A||B|/|A n B| means lub = AB
    sizes = M.sum(axis=1).astype(np.int64)
    prod = sizes[:, None] * sizes[None, :] // sizes[lat.meet]
    bad = prod != sizes[lat.join]
    if bad.any():
        a, b = map(int, np.argwhere(bad)[0])
        raise TruncationArtefact("join of two classes is not the product of their reps", pair=[a, b])


# -- quasi-centre calculus --------------------------------------------------------


def quasi_centre_at(fg: FilteredGroup, i: int) -> GroupHandle:
    """``C_G(U_i)``, the level-``i`` shadow of the quasi-centre."""
    return pg.centraliser(fg.ambient, fg.level(i))


def qz_witness(fg: FilteredGroup, i: int, j: int) -> Perm | None:
    """An element outside ``U_j`` centralising ``U_i``, or None."""
    fg.level(i)
    fg.level(j)
    if j > i:
        raise PreconditionError("margin levels need j <= i", i=i, j=j)
    qz = quasi_centre_at(fg, i)
    outside = ~fg.level(j).contains_rows(qz.elements)
    if outside.any():
        return Perm._trusted(qz.elements[int(np.argmax(outside))])
    return None


def qz_trivial_at(fg: FilteredGroup, i: int, j: int) -> bool:
    """True iff nothing outside ``U_j`` centralises ``U_i``."""
    return qz_witness(fg, i, j) is None


def quasi_centraliser(fg: FilteredGroup, h: GroupHandle, inside: GroupHandle | None = None
                      ) -> GroupHandle:
    """``C_inside(h n U_k)``; independence of the level used for ``h`` is asserted."""
    inside = fg.ambient if inside is None else inside
    fg.check_subgroup(h)
    fg.check_subgroup(inside, "inside")
    trace = fg.deep_subgroup(fg.deep_mask(h))
    result = pg.centraliser(inside, trace)
    for i, u in enumerate(fg.chain):
        again = pg.centraliser(inside, fg.deep_subgroup(fg.deep_mask(pg.intersection(h, u))))
        if not again == result:
            raise TruncationArtefact("quasi-centraliser depends on the level", level=i)
    return result


@dataclass(frozen=True)
class CStableParts:
    via_definition: GroupHandle
    via_product: GroupHandle

    @property
    def stable(self) -> bool:
        return self.via_definition.is_trivial()


def c_stable_parts(fg: FilteredGroup, h: GroupHandle) -> CStableParts:
    """Both routes to ``QC(h) n QC(C(h)) n U_k``: directly and through ``QC(h C(h))``."""
    fg.check_subgroup(h)
    g, deep = fg.ambient, fg.deep
    c = pg.centraliser(g, h)
    first = pg.centraliser(deep, fg.deep_subgroup(fg.deep_mask(h)))
    second = pg.centraliser(deep, fg.deep_subgroup(fg.deep_mask(c)))
    direct = pg.intersection(first, second)
    hc = pg.join(h, c)
    via = pg.centraliser(deep, fg.deep_subgroup(fg.deep_mask(hc)))
    return CStableParts(direct, via)


def c_stable_check(fg: FilteredGroup, h: GroupHandle) -> bool:
    """Truncated C-stability: ``QC_G(h) n QC_G(C_G(h)) n U_k`` is trivial.

    The product route ``QC_G(h C_G(h)) n U_k`` must agree; at finite depth it can
    only be smaller, and a mismatch is reported as a truncation artefact.
    """
    parts = c_stable_parts(fg, h)
    if not parts.via_definition == parts.via_product:
        raise TruncationArtefact(
            "the two C-stability routes disagree at this depth",
            definition_order=parts.via_definition.order(),
            product_order=parts.via_product.order())
    return parts.stable


def fixed_classes(fg: FilteredGroup, lat: FiniteLattice) -> list[LocalClass]:
    """Classes whose trace is invariant under conjugation by the whole ambient group."""
    return [c for c in lat.elements if pg.is_normal(fg.ambient, c.rep)]


def project_to_depth(fg: FilteredGroup, alpha: LocalClass, depth: int) -> LocalClass:
    """The class of ``alpha``'s representative in the chain cut at ``depth``."""
    shallow = fg.truncated(depth)
    return canonical_class(shallow, alpha.representative)


def projection_meet_check(fg: FilteredGroup, classes: Sequence[LocalClass], depth: int) -> Check:
    """``project(a n b) = project(a) n project(b)`` on representatives."""
    shallow = fg.truncated(depth)
    for a in classes:
        for b in classes:
            both = pg.intersection(a.representative, b.representative)
            lhs = canonical_class(shallow, both).rep
            rhs = pg.intersection(project_to_depth(fg, a, depth).rep,
                                  project_to_depth(fg, b, depth).rep)
            if not lhs == rhs:
                return Check(False, (a.describe(fg), b.describe(fg)))
    return PASS


def visible_abelian_witness(fg: FilteredGroup, i: int, j: int,
                            budget: int = pg.DEFAULT_BUDGET) -> GroupHandle | None:
    """An abelian subgroup normalised by ``U_i`` and not inside ``U_j``, or None.

    Such a subgroup exists iff some ``g`` outside ``U_j`` commutes with all of
    its ``U_i``-conjugates, and then ``<g^U_i>`` is one.  Chain members are
    normal, so one ``g`` per conjugacy class of ``G`` suffices.
    """
    g = fg.ambient
    if g.order() > budget:
        raise ResourceError("visible-abelian search exceeds its budget",
                            order=g.order(), budget=budget)
    ui, uj = fg.level(i), fg.level(j)
    u_rows = ui.elements
    u_inv = pg._inverse_rows(u_rows)
    for cls in pg.conjugacy_classes(g):
        x = Perm._trusted(g.elements[cls[0]])
        if x in uj:
            continue
        conj = pg._conj_rows(u_rows, x, u_inv)
        xarr = np.asarray(x.images, dtype=conj.dtype)
        if (xarr[conj] == conj[:, xarr]).all():
            return GroupHandle(g.degree, (Perm._trusted(r) for r in np.unique(conj, axis=0)))
    return None
