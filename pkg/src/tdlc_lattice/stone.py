"""Finite Stone duality.

A finite Boolean algebra is the algebra of all subsets of its atoms, so the
points of the Stone space are the atoms and ``a`` corresponds to the set of
atoms below it.  Group actions and embeddings are carried across explicitly
and every transported map is checked rather than assumed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, InternalInconsistency
from .filtration import FilteredGroup
from .lattice import PASS, BooleanAlg, Check, lattice_hom_check, powerset_algebra
from .permgroup import GroupHandle, Perm

__all__ = [
    "StoneSpace", "stone_space", "AlgebraAction", "is_smooth", "stabiliser_levels",
    "StoneMap", "equivariant_quotient", "embedding_by_key", "algebra_map_of",
    "point_permutation_of", "aut_transport_check", "finest_partition", "is_partition",
]


def _atom_list(alg: BooleanAlg) -> list[int]:
    # the one-element algebra has no atoms and an empty Stone space
    return alg.atoms()


@dataclass
class StoneSpace:
    """Points are the atoms of ``algebra``; ``membership[p, a]`` is ``atom_p <= a``."""

    algebra: BooleanAlg
    atoms: list[int]
    membership: np.ndarray

    def __len__(self) -> int:
        return len(self.atoms)

    def labels(self) -> list[str]:
        return [self.algebra.lattice.label(a) for a in self.atoms]

    def clopen(self, a: int) -> frozenset[int]:
        """Points of ``S(a)``."""
        return frozenset(np.flatnonzero(self.membership[:, a]).tolist())

    def mask(self, a: int) -> int:
        return sum(1 << p for p in self.clopen(a))

    def ultrafilter(self, p: int) -> list[int]:
        return np.flatnonzero(self.membership[p]).tolist()

    def check(self) -> Check:
        """Ultrafilter laws for every point and atomicity of the algebra."""
        lat = self.algebra.lattice
        comp = self.algebra.complement
        m = self.membership
        leq = lat.leq.astype(np.float32)
        up = (m.astype(np.float32) @ leq) > 0
        bad = np.argwhere(up & ~m)
        if len(bad):
            return Check(False, ("not upward closed", *map(int, bad[0])))
        for p in range(len(self)):
            members = np.flatnonzero(m[p])
            closed = m[p][lat.meet[np.ix_(members, members)]]
            if not closed.all():
                i, j = np.argwhere(~closed)[0]
                return Check(False, ("not meet closed", p, int(members[i]), int(members[j])))
        one = m ^ m[:, comp]
        if not one.all():
            p, a = np.argwhere(~one)[0]
            return Check(False, ("not exactly one of a and its complement", int(p), int(a)))
        for a in range(lat.n):
            acc = lat.bottom
            for p in self.clopen(a):
                acc = int(lat.join[acc, self.atoms[p]])
            if acc != a:
                return Check(False, ("not the join of its atoms", a))
        return PASS

    def clopen_algebra(self) -> BooleanAlg:
        """All subsets of the (discrete, finite) point set."""
        return powerset_algebra(len(self))

    def round_trip(self) -> list[int]:
        """Index map ``a -> S(a)`` into :meth:`clopen_algebra`."""
        return [self.mask(a) for a in range(self.algebra.lattice.n)]

    def round_trip_check(self) -> Check:
        """``a -> S(a)`` is a Boolean isomorphism onto the clopen algebra."""
        ok = self.check()
        if not ok:
            return ok
        target = self.clopen_algebra()
        f = self.round_trip()
        if sorted(f) != list(range(target.lattice.n)):
            return Check(False, ("not a bijection", len(set(f)), target.lattice.n))
        return lattice_hom_check(f, self.algebra.lattice, target.lattice, "boolean",
                                 src_complement=self.algebra.complement,
                                 tgt_complement=target.complement)

    def to_dict(self) -> dict:
        return {"points": self.labels(),
                "membership": [format(self._bits(p), "x") for p in range(len(self))]}

    def _bits(self, p: int) -> int:
        return sum(1 << int(a) for a in np.flatnonzero(self.membership[p]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def stone_space(alg: BooleanAlg) -> StoneSpace:
    lat = alg.lattice
    atoms = _atom_list(alg)
    membership = lat.leq[atoms, :] if atoms else np.zeros((0, lat.n), dtype=bool)
    return StoneSpace(alg, atoms, np.array(membership, dtype=bool))


# -- actions --------------------------------------------------------------------------


class AlgebraAction:
    """Right action of a permutation group on a finite Boolean algebra.

    ``act(g)`` returns the image index of every algebra element under ``g``.
    Maps are cached per element.
    """

    def __init__(self, group: GroupHandle, alg: BooleanAlg, act: Callable[[Perm], Sequence[int]]):
        self.group = group
        self.alg = alg
        self._act = act
        self._cache: dict[tuple, np.ndarray] = {}

    def map(self, g: Perm) -> np.ndarray:
        key = g.images
        if key not in self._cache:
            img = np.asarray(self._act(g), dtype=np.int64)
            if img.shape != (self.alg.lattice.n,):
                raise InputError("action map has the wrong length")
            self._cache[key] = img
        return self._cache[key]

    def point_map(self, g: Perm) -> np.ndarray:
        """Induced permutation of the atoms, in :func:`stone_space` order."""
        atoms = _atom_list(self.alg)
        pos = {a: i for i, a in enumerate(atoms)}
        img = self.map(g)
        out = []
        for a in atoms:
            b = int(img[a])
            if b not in pos:
                raise InputError("group element does not send atoms to atoms", atom=a)
            out.append(pos[b])
        return np.asarray(out, dtype=np.int64)

    def check(self) -> Check:
        """Generators act by automorphisms; the action law holds on generator pairs."""
        lat = self.alg.lattice
        ident = Perm.identity(self.group.degree)
        if not (self.map(ident) == np.arange(lat.n)).all():
            return Check(False, ("identity acts nontrivially",))
        gens = list(self.group.generators)
        for s in gens:
            f = self.map(s)
            if sorted(f.tolist()) != list(range(lat.n)):
                return Check(False, ("not a bijection", str(s)))
            ok = lattice_hom_check(f, lat, lat, "boolean", src_complement=self.alg.complement,
                                   tgt_complement=self.alg.complement)
            if not ok:
                return Check(False, ("not an automorphism", str(s), ok.witness))
        for s in gens:
            for t in gens:
                if not (self.map(s * t) == self.map(t)[self.map(s)]).all():
                    return Check(False, ("action law", str(s), str(t)))
        return PASS

    @classmethod
    def trivial(cls, group: GroupHandle, alg: BooleanAlg) -> "AlgebraAction":
        n = alg.lattice.n
        return cls(group, alg, lambda g: np.arange(n))

    @classmethod
    def from_points(cls, group: GroupHandle, alg: BooleanAlg,
                    atom_of_point: Sequence[int]) -> "AlgebraAction":
        """Action induced by permuting the points the group acts on.

        ``atom_of_point[x]`` names the atom (by position in ``alg.atoms()``)
        containing point ``x``; atoms must be blocks for the group.
        """
        atom_of_point = np.asarray(atom_of_point, dtype=np.int64)
        if atom_of_point.shape != (group.degree,):
            raise InputError("need one atom per point", degree=group.degree)
        space = stone_space(alg)
        lookup = {space.mask(a): a for a in range(alg.lattice.n)}
        members = [np.flatnonzero(atom_of_point == i) for i in range(len(space))]
        if any(len(m) == 0 for m in members):
            raise InputError("every atom must contain a point")

        def act(g: Perm) -> np.ndarray:
            arr = np.asarray(g.to_list())
            atom_img = []
            for i, pts in enumerate(members):
                imgs = set(atom_of_point[arr[pts]].tolist())
                if len(imgs) != 1:
                    raise InputError("atoms are not blocks of the action", atom=i)
                atom_img.append(imgs.pop())
            out = []
            for a in range(alg.lattice.n):
                m = sum(1 << atom_img[p] for p in space.clopen(a))
                out.append(lookup[m])
            return out

        return cls(group, alg, act)


def stabiliser_levels(action: AlgebraAction, fg: FilteredGroup) -> list[int | None]:
    """Per algebra element, the least chain level fixing it (None if ``U_k`` does not)."""
    if not action.group == fg.ambient:
        raise InputError("action group is not the ambient group")
    n = action.alg.lattice.n
    out: list[int | None] = [None] * n
    for i in range(fg.k, -1, -1):
        fixed = np.ones(n, dtype=bool)
        for s in fg.level(i).generators:
            fixed &= action.map(s) == np.arange(n)
        # chain members shrink, so the last level that fixes ``a`` is the least
        for a in np.flatnonzero(fixed):
            out[a] = i
    return out


def is_smooth(action: AlgebraAction, fg: FilteredGroup) -> Check:
    """Every element's stabiliser contains a chain member; witness names one that does not."""
    levels = stabiliser_levels(action, fg)
    for a, lvl in enumerate(levels):
        if lvl is None:
            return Check(False, action.alg.lattice.label(a))
    return PASS


# -- embeddings and their duals ---------------------------------------------------------


def embedding_by_key(src: BooleanAlg, tgt: BooleanAlg,
                     key: Callable[[object], object] | None = None) -> list[int]:
    """Index map sending each source element to the target element with the same key."""
    key = key or (lambda x: x)
    table = {key(e): i for i, e in enumerate(tgt.lattice.elements)}
    out = []
    for e in src.lattice.elements:
        k = key(e)
        if k not in table:
            raise InputError("source element has no counterpart", element=str(e))
        out.append(table[k])
    return out


@dataclass
class StoneMap:
    """``S(B) -> S(A)`` dual to an embedding ``A -> B``; ``mapping[p]`` is a point of ``S(A)``."""

    source: StoneSpace
    target: StoneSpace
    mapping: list[int]

    def labelled(self) -> dict[str, str]:
        s, t = self.source.labels(), self.target.labels()
        return {s[p]: t[q] for p, q in enumerate(self.mapping)}

    def compose(self, other: "StoneMap") -> "StoneMap":
        """``other`` after ``self``."""
        return StoneMap(self.source, other.target, [other.mapping[q] for q in self.mapping])


def equivariant_quotient(embed: Sequence[int], src: BooleanAlg, tgt: BooleanAlg,
                         act_src: AlgebraAction | None = None,
                         act_tgt: AlgebraAction | None = None) -> StoneMap:
    """Pull ultrafilters of ``tgt`` back along ``embed``; checks surjectivity and equivariance."""
    embed = np.asarray(embed, dtype=np.int64)
    if len(set(embed.tolist())) != len(embed):
        raise InputError("embedding is not injective")
    ok = lattice_hom_check(embed, src.lattice, tgt.lattice, "boolean",
                           src_complement=src.complement, tgt_complement=tgt.complement)
    if not ok:
        raise InputError("map is not a Boolean embedding", witness=list(map(str, ok.witness)))
    if (act_src is None) != (act_tgt is None):
        raise InputError("supply both actions or neither")
    gens = []
    if act_src is not None:
        if not act_src.group == act_tgt.group:
            raise InputError("actions are by different groups")
        gens = list(act_src.group.generators)
        for s in gens:
            if not (embed[act_src.map(s)] == act_tgt.map(s)[embed]).all():
                raise InputError("embedding does not commute with the actions", generator=str(s))
    big, small = stone_space(tgt), stone_space(src)
    pos = {a: i for i, a in enumerate(small.atoms)}
    mapping = []
    for p in range(len(big)):
        pulled = big.membership[p][embed]
        members = np.flatnonzero(pulled)
        bottom = src.lattice.top
        for a in members:
            bottom = int(src.lattice.meet[bottom, a])
        if bottom not in pos or not (small.membership[pos[bottom]] == pulled).all():
            raise InternalInconsistency("pullback is not a principal ultrafilter", point=p)
        mapping.append(pos[bottom])
    if len(small) and set(mapping) != set(range(len(small))):
        raise InternalInconsistency("dual map is not surjective")
    for s in gens:
        pb, ps = act_tgt.point_map(s), act_src.point_map(s)
        for p in range(len(big)):
            if mapping[pb[p]] != ps[mapping[p]]:
                raise InternalInconsistency("dual map is not equivariant", generator=str(s),
                                            point=p)
    return StoneMap(big, small, mapping)


# -- automorphisms ---------------------------------------------------------------------


def algebra_map_of(alg: BooleanAlg, sigma: Sequence[int]) -> np.ndarray:
    """Algebra map induced by a permutation of the points."""
    space = stone_space(alg)
    if sorted(sigma) != list(range(len(space))):
        raise InputError("not a permutation of the points")
    lookup = {space.mask(a): a for a in range(alg.lattice.n)}
    return np.asarray([lookup[sum(1 << sigma[p] for p in space.clopen(a))]
                       for a in range(alg.lattice.n)], dtype=np.int64)


def point_permutation_of(alg: BooleanAlg, phi: Sequence[int]) -> list[int]:
    """Point permutation induced by an algebra automorphism."""
    atoms = _atom_list(alg)
    pos = {a: i for i, a in enumerate(atoms)}
    out = []
    for a in atoms:
        b = int(phi[a])
        if b not in pos:
            raise InputError("map does not send atoms to atoms", atom=a)
        out.append(pos[b])
    return out


def aut_transport_check(alg: BooleanAlg, sigma: Sequence[int]) -> bool:
    """Points-to-algebra and algebra-to-points transports are mutually inverse at ``sigma``."""
    lat = alg.lattice
    phi = algebra_map_of(alg, sigma)
    if sorted(phi.tolist()) != list(range(lat.n)):
        return False
    if not lattice_hom_check(phi, lat, lat, "boolean", src_complement=alg.complement,
                             tgt_complement=alg.complement):
        return False
    back = point_permutation_of(alg, phi)
    return list(back) == list(sigma) and (algebra_map_of(alg, back) == phi).all()


# -- partitions ----------------------------------------------------------------------------


def finest_partition(alg: BooleanAlg, a: int) -> list[int]:
    """Atoms below ``a``."""
    return [int(x) for x in _atom_list(alg) if alg.lattice.leq[x, a]]


def is_partition(alg: BooleanAlg, a: int, parts: Sequence[int]) -> bool:
    """Nonzero, pairwise disjoint elements joining to ``a``."""
    lat = alg.lattice
    acc = lat.bottom
    for i, p in enumerate(parts):
        if p == lat.bottom:
            return False
        for q in parts[i + 1:]:
            if lat.meet[p, q] != lat.bottom:
                return False
        acc = int(lat.join[acc, p])
    return acc == a
