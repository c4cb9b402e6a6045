"""Rooted trees, automaton groups and branch certificates at finite depth.

Leaves of the depth-``d`` truncation of the ``m``-ary tree are numbered
``0..m^d-1`` by reading their address as a base-``m`` numeral, first letter
most significant.  A vertex at level ``j`` is an address of length ``j`` and
its cone is a contiguous block of ``m^(d-j)`` leaves.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import permgroup as pg
from .centlat import CentClass, perp_of_rep
from .errors import InputError, ResourceError, TruncationArtefact
from .filtration import FilteredGroup, LocalClass, canonical_class, ln_lattice
from .lattice import BooleanAlg, Check, FiniteLattice, PASS
from .permgroup import GroupHandle, Perm

__all__ = [
    "TreeSpec", "AutomatonState", "WreathAutomaton", "ClopenSet", "TreeAction", "truncate",
    "rist", "branch_certify", "theta_embedding", "latrist_verify", "lnip_analysis",
    "full_automaton", "odometer_automaton", "identity_automaton", "clopen_algebra",
    "tree_group", "rist_by_fixing", "clopens_up_to", "latrist_sides", "level_stabiliser",
    "atom_action", "theta_class", "action_kernel",
]

Address = tuple[int, ...]


@dataclass(frozen=True)
class TreeSpec:
    arity: int
    depth: int

    def __post_init__(self):
        if self.arity < 2:
            raise InputError("arity must be at least 2", arity=self.arity)
        if self.depth < 1:
            raise InputError("depth must be at least 1", depth=self.depth)
        if self.arity ** self.depth > pg.MAX_DEGREE:
            raise ResourceError("too many leaves for the permutation engine",
                                leaves=self.arity ** self.depth)

    @property
    def leaves(self) -> int:
        return self.arity ** self.depth

    def vertices(self, level: int) -> list[Address]:
        return list(itertools.product(range(self.arity), repeat=level))

    def cone(self, v: Address) -> range:
        """Leaf indices below ``v``."""
        if len(v) > self.depth or any(not 0 <= x < self.arity for x in v):
            raise InputError("vertex not in the tree", vertex=list(v))
        width = self.arity ** (self.depth - len(v))
        start = 0
        for x in v:
            start = start * self.arity + x
        return range(start * width, (start + 1) * width)

    def address(self, leaf: int, level: int | None = None) -> Address:
        level = self.depth if level is None else level
        digits = []
        for _ in range(self.depth):
            digits.append(leaf % self.arity)
            leaf //= self.arity
        return tuple(reversed(digits))[:level]

    def format(self, v: Address) -> str:
        sep = "" if self.arity <= 10 else "."
        return sep.join(str(x) for x in v)

    def parse(self, text: str) -> Address:
        if self.arity > 10:
            return tuple(int(x) for x in text.split(".")) if text else ()
        return tuple(int(ch) for ch in text)


# -- automata ---------------------------------------------------------------------


@dataclass(frozen=True)
class AutomatonState:
    root_perm: tuple[int, ...]
    sections: tuple[str, ...]


IDENTITY_STATE = "e"


@dataclass
class WreathAutomaton:
    """States given by a root permutation of the alphabet and one section per letter.

    ``state(x w) = root_perm[x] . sections[x](w)``.
    """

    arity: int
    states: dict[str, AutomatonState]
    generators: tuple[str, ...]

    def __post_init__(self):
        m = self.arity
        states = dict(self.states)
        states.setdefault(IDENTITY_STATE, AutomatonState(tuple(range(m)), (IDENTITY_STATE,) * m))
        e = states[IDENTITY_STATE]
        if e.root_perm != tuple(range(m)) or set(e.sections) != {IDENTITY_STATE}:
            raise InputError("state 'e' is reserved for the identity")
        for name, st in states.items():
            if sorted(st.root_perm) != list(range(m)):
                raise InputError("root permutation is not a permutation of the alphabet", state=name)
            if len(st.sections) != m:
                raise InputError("wrong number of sections", state=name)
            for s in st.sections:
                if s not in states:
                    raise InputError("dangling state name", state=name, section=s)
        for g in self.generators:
            if g not in states:
                raise InputError("dangling generator name", generator=g)
        self.states = states
        self.generators = tuple(self.generators)

    def expand(self, name: str, depth: int) -> tuple[int, ...]:
        """Permutation of the ``m^depth`` level-``depth`` vertices induced by ``name``."""
        memo: dict[tuple[str, int], np.ndarray] = {}
        m = self.arity

        def perm(state: str, d: int) -> np.ndarray:
            if d == 0:
                return np.zeros(1, dtype=np.int64)
            key = (state, d)
            if key not in memo:
                st = self.states[state]
                width = m ** (d - 1)
                out = np.empty(m * width, dtype=np.int64)
                for x in range(m):
                    out[x * width:(x + 1) * width] = st.root_perm[x] * width + perm(st.sections[x], d - 1)
                memo[key] = out
            return memo[key]

        return tuple(int(i) for i in perm(name, depth))

    def to_dict(self) -> dict:
        return {
            "arity": self.arity,
            "states": {n: {"root_perm": list(s.root_perm), "sections": list(s.sections)}
                       for n, s in sorted(self.states.items())},
            "generators": list(self.generators),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "WreathAutomaton":
        try:
            m = int(data["arity"])
            states = {str(n): AutomatonState(tuple(int(x) for x in s["root_perm"]),
                                             tuple(str(x) for x in s["sections"]))
                      for n, s in data["states"].items()}
            gens = tuple(str(g) for g in data["generators"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError("malformed automaton", detail=str(exc)) from exc
        return cls(m, states, gens)


def full_automaton(arity: int, depth: int) -> WreathAutomaton:
    """Generators of the whole automorphism group of the depth-``depth`` truncation.

    ``t_j`` and ``c_j`` act as a transposition and an ``m``-cycle at the vertex
    ``0^j`` and trivially elsewhere.
    """
    m = arity
    states: dict[str, AutomatonState] = {}
    gens = []
    roots = {"t": (1, 0) + tuple(range(2, m)), "c": tuple(range(1, m)) + (0,)}
    kinds = ["t"] if m == 2 else ["t", "c"]
    for kind in kinds:
        for j in range(depth):
            below = f"{kind}{j - 1}" if j else None
            name = f"{kind}{j}"
            if j == 0:
                states[name] = AutomatonState(roots[kind], (IDENTITY_STATE,) * m)
            else:
                states[name] = AutomatonState(tuple(range(m)), (below,) + (IDENTITY_STATE,) * (m - 1))
            gens.append(name)
    return WreathAutomaton(m, states, tuple(gens))


def odometer_automaton() -> WreathAutomaton:
    """The binary adding machine ``a = (0 1)(e, a)``."""
    return WreathAutomaton(2, {"a": AutomatonState((1, 0), (IDENTITY_STATE, "a"))}, ("a",))


def identity_automaton(arity: int = 2) -> WreathAutomaton:
    return WreathAutomaton(arity, {}, (IDENTITY_STATE,))


# -- clopen sets --------------------------------------------------------------------


@dataclass(frozen=True)
class ClopenSet:
    """Union of cones below an antichain, kept in canonical (merged) form."""

    tree: TreeSpec
    antichain: tuple[Address, ...]

    @classmethod
    def from_vertices(cls, tree: TreeSpec, vertices: Iterable[Address | str]) -> "ClopenSet":
        verts = [tree.parse(v) if isinstance(v, str) else tuple(v) for v in vertices]
        leaves = set()
        for v in verts:
            leaves.update(tree.cone(v))
        return cls.from_leaves(tree, leaves)

    @classmethod
    def from_leaves(cls, tree: TreeSpec, leaves: Iterable[int]) -> "ClopenSet":
        current = {tree.address(int(p)) for p in leaves}
        m = tree.arity
        # merge complete sibling families upward
        for level in range(tree.depth, 0, -1):
            parents: dict[Address, int] = {}
            for v in current:
                if len(v) == level:
                    parents[v[:-1]] = parents.get(v[:-1], 0) + 1
            for p, count in parents.items():
                if count == m:
                    current -= {p + (x,) for x in range(m)}
                    current.add(p)
        return cls(tree, tuple(sorted(current, key=lambda v: (tree.cone(v).start, len(v)))))

    @classmethod
    def whole(cls, tree: TreeSpec) -> "ClopenSet":
        return cls(tree, ((),))

    @classmethod
    def empty(cls, tree: TreeSpec) -> "ClopenSet":
        return cls(tree, ())

    @cached_property
    def leaves(self) -> frozenset[int]:
        out = set()
        for v in self.antichain:
            out.update(self.tree.cone(v))
        return frozenset(out)

    @property
    def level(self) -> int:
        """Deepest level used by the antichain (0 for empty or whole)."""
        return max((len(v) for v in self.antichain), default=0)

    def complement(self) -> "ClopenSet":
        return ClopenSet.from_leaves(self.tree, set(range(self.tree.leaves)) - self.leaves)

    def __and__(self, other: "ClopenSet") -> "ClopenSet":
        return ClopenSet.from_leaves(self.tree, self.leaves & other.leaves)

    def __or__(self, other: "ClopenSet") -> "ClopenSet":
        return ClopenSet.from_leaves(self.tree, self.leaves | other.leaves)

    def __le__(self, other: "ClopenSet") -> bool:
        return self.leaves <= other.leaves

    def is_empty(self) -> bool:
        return not self.antichain

    def image(self, g: Perm) -> "ClopenSet":
        return ClopenSet.from_leaves(self.tree, (g(p) for p in self.leaves))

    def addresses(self) -> list[str]:
        return [self.tree.format(v) for v in self.antichain]

    def __str__(self) -> str:
        if self.antichain == ((),):
            return "X"
        return "{" + ",".join(self.addresses()) + "}"


def clopens_up_to(tree: TreeSpec, level: int) -> list[ClopenSet]:
    """Every clopen whose antichain lies at levels ``<= level``."""
    verts = tree.vertices(level)
    if len(verts) > 14:
        raise ResourceError("too many clopen sets to enumerate", cones=len(verts))
    out = []
    for bits in range(2 ** len(verts)):
        chosen = [v for i, v in enumerate(verts) if bits >> i & 1]
        out.append(ClopenSet.from_vertices(tree, chosen))
    return out


def clopen_algebra(tree: TreeSpec, level: int) -> BooleanAlg:
    """Boolean algebra of unions of level-``level`` cones, ordered by inclusion."""
    sets = clopens_up_to(tree, level)
    n = len(sets)
    leaf_masks = np.zeros((n, tree.leaves), dtype=bool)
    for i, c in enumerate(sets):
        leaf_masks[i, list(c.leaves)] = True
    leq = ~(leaf_masks[:, None, :] & ~leaf_masks[None, :, :]).any(axis=2)
    lat = FiniteLattice(sets, leq, keys=[tuple(c.antichain) for c in sets], label=str)
    pos = {tuple(c.antichain): i for i, c in enumerate(sets)}
    comp = [pos[tuple(c.complement().antichain)] for c in sets]
    return BooleanAlg(lat, comp, meta={"level": level})


# -- tree actions -------------------------------------------------------------------


@dataclass
class TreeAction:
    tree: TreeSpec
    fg: FilteredGroup
    automaton: WreathAutomaton | None = None

    @property
    def group(self) -> GroupHandle:
        return self.fg.ambient


def level_stabiliser(g: GroupHandle, tree: TreeSpec, level: int) -> GroupHandle:
    rows = g.elements.astype(np.int64)
    block = tree.arity ** (tree.depth - level)
    mask = (rows // block == np.arange(tree.leaves) // block).all(axis=1)
    return pg.subgroup_from_mask(g, mask, name=f"St({level})")


def truncate(aut: WreathAutomaton, tree: TreeSpec, margin: int = 1) -> TreeAction:
    """Action on level-``depth`` vertices with the level stabilisers ``0..depth-1`` as chain."""
    if aut.arity != tree.arity:
        raise InputError("automaton arity does not match the tree", automaton=aut.arity,
                         tree=tree.arity)
    gens = [Perm(aut.expand(name, tree.depth)) for name in aut.generators]
    g = GroupHandle(tree.leaves, gens, name=f"T({tree.arity},{tree.depth})")
    chain = [g] + [level_stabiliser(g, tree, j) for j in range(1, tree.depth)]
    fg = FilteredGroup(g, chain, margin=min(margin, tree.depth - 1), name=g.name)
    return TreeAction(tree, fg, aut)


def tree_group(arity: int, depth: int, margin: int = 1) -> TreeAction:
    """The full truncated automorphism group ``W``, e.g. order 128 for ``(2, 3)``."""
    tree = TreeSpec(arity, depth)
    return truncate(full_automaton(arity, depth), tree, margin)


def rist(ta: TreeAction, c: ClopenSet, inside: GroupHandle | None = None) -> GroupHandle:
    """Elements of ``inside`` (default the whole group) fixing every leaf outside ``c``."""
    g = ta.group if inside is None else inside
    outside = np.array(sorted(set(range(ta.tree.leaves)) - c.leaves), dtype=np.int64)
    if len(outside) == 0:
        return g
    rows = g.elements
    mask = (rows[:, outside] == outside).all(axis=1)
    return pg.subgroup_from_mask(g, mask, name=f"rist{c}")


def rist_by_fixing(ta: TreeAction, c: ClopenSet) -> GroupHandle:
    """Pointwise stabiliser of the complement built one point at a time."""
    h = ta.group
    for p in sorted(set(range(ta.tree.leaves)) - c.leaves):
        rows = h.elements
        h = pg.subgroup_from_mask(h, rows[:, p] == p)
    return h


def _stabilises(g: Perm, c: ClopenSet) -> bool:
    return all(g(p) in c.leaves for p in c.leaves)


def action_kernel(ta: TreeAction) -> GroupHandle:
    """Elements acting trivially on the boundary (trivial for a faithful truncation)."""
    return rist(ta, ClopenSet.empty(ta.tree))


@dataclass
class BranchReport:
    certified_level: int
    smooth: bool
    weakly_branch: bool
    locally_branch: bool
    witnesses: dict[str, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"certified_level": self.certified_level, "smooth": self.smooth,
                "weakly_branch": self.weakly_branch, "locally_branch": self.locally_branch,
                "witnesses": self.witnesses}


def branch_certify(ta: TreeAction, max_level: int) -> BranchReport:
    """Check smoothness, weak branching and local branching on clopens up to ``max_level``.

    Rigid stabilisers are compared with the kernel of the boundary action; the
    first failing clopen (in enumeration order) is returned as the witness.
    """
    if not 0 <= max_level <= ta.tree.depth - 1:
        raise InputError("max_level must lie in 0..depth-1", max_level=max_level)
    fg = ta.fg
    kernel = action_kernel(ta)
    report = BranchReport(max_level, True, True, True)
    rists: dict[tuple, GroupHandle] = {}

    def get_rist(c: ClopenSet) -> GroupHandle:
        if c.antichain not in rists:
            rists[c.antichain] = rist(ta, c)
        return rists[c.antichain]

    for c in clopens_up_to(ta.tree, max_level):
        if report.smooth and not any(all(_stabilises(x, c) for x in u.generators) for u in fg.chain):
            report.smooth = False
            report.witnesses["smooth"] = {"clopen": c.addresses()}
        if c.is_empty():
            continue
        r = get_rist(c)
        if report.weakly_branch and r.issubgroup(kernel):
            report.weakly_branch = False
            report.witnesses["weakly_branch"] = {"clopen": c.addresses()}
        if report.locally_branch:
            prod = pg.join(r, get_rist(c.complement()))
            if not any(u.issubgroup(prod) for u in fg.chain):
                report.locally_branch = False
                report.witnesses["locally_branch"] = {"clopen": c.addresses()}
    if not report.weakly_branch:
        report.locally_branch = False
        report.witnesses.setdefault("locally_branch", report.witnesses["weakly_branch"])
    return report


# -- theta and latrist ----------------------------------------------------------------


@dataclass
class ThetaReport:
    level: int
    classes: dict[str, CentClass]
    injective: bool
    meets: bool
    complements: bool
    in_ld: bool | None

    def to_dict(self, fg: FilteredGroup) -> dict:
        return {"level": self.level, "injective": self.injective, "meets": self.meets,
                "complements": self.complements, "in_ld": self.in_ld,
                "classes": {k: v.describe(fg) for k, v in sorted(self.classes.items())}}


def theta_class(ta: TreeAction, c: ClopenSet) -> CentClass:
    fg = ta.fg
    cls = canonical_class(fg, rist(ta, c))
    return CentClass(cls, perp_of_rep(fg, cls.rep))


def theta_embedding(ta: TreeAction, max_level: int, check_ld: bool = True) -> ThetaReport:
    """``c -> [rist(c) n U_k]`` on clopens up to ``max_level``, with every compatibility checked.

    Raises :class:`TruncationArtefact` naming the first failing pair.
    """
    cert = branch_certify(ta, max_level)
    if not cert.weakly_branch:
        raise InputError("action is not weakly branch up to this level",
                         witness=cert.witnesses["weakly_branch"])
    fg = ta.fg
    sets = clopens_up_to(ta.tree, max_level)
    theta = {c.antichain: theta_class(ta, c) for c in sets}
    names = {c.antichain: str(c) for c in sets}
    by_key: dict[tuple, ClopenSet] = {}
    for c in sets:
        key = theta[c.antichain].key
        if key in by_key:
            raise TruncationArtefact("theta is not injective",
                                     pair=[str(by_key[key]), str(c)])
        by_key[key] = c
    for a, b in itertools.combinations(sets, 2):
        meet = theta[(a & b).antichain].rep
        if not meet == pg.intersection(theta[a.antichain].rep, theta[b.antichain].rep):
            raise TruncationArtefact("theta does not preserve meets", pair=[str(a), str(b)])
    for c in sets:
        comp = theta[c.complement().antichain]
        if not comp.rep == theta[c.antichain].perp_rep:
            raise TruncationArtefact("theta of the complement is not the perp of theta",
                                     clopen=str(c), complement_order=comp.rep.order(),
                                     perp_order=theta[c.antichain].perp_rep.order())
    in_ld = None
    if check_ld and cert.locally_branch:
        from .decomp import ld_members
        members = ld_members(fg, canonical_class(fg, fg.ambient))
        keys = {m.key for m in members}
        missing = [str(c) for c in sets if theta[c.antichain].key not in keys]
        in_ld = not missing
        if missing:
            raise TruncationArtefact("theta leaves the local decomposition lattice",
                                     clopen=missing[0])
    return ThetaReport(max_level, {names[k]: v for k, v in theta.items()}, True, True, True, in_ld)


def latrist_sides(ta: TreeAction, c: ClopenSet) -> tuple[GroupHandle, GroupHandle]:
    """``rist(c) n U_k`` and ``C_G(C_G(rist(c) n U_k)) n U_k``."""
    fg = ta.fg
    g = fg.ambient
    left = canonical_class(fg, rist(ta, c)).rep
    right = canonical_class(fg, pg.centraliser(g, pg.centraliser(g, left))).rep
    return left, right


def latrist_verify(ta: TreeAction, c: ClopenSet) -> bool:
    left, right = latrist_sides(ta, c)
    return left == right


# -- locally faithful points --------------------------------------------------------------


@dataclass
class LnipReport:
    points: list[str]
    locally_faithful: list[str]
    lnip: bool
    minimal: bool
    proper_rists_trivial: bool | None

    def to_dict(self) -> dict:
        return {"points": self.points, "locally_faithful": self.locally_faithful,
                "lnip": self.lnip, "minimal": self.minimal,
                "proper_rists_trivial": self.proper_rists_trivial}


def atom_action(ta: TreeAction, alg: BooleanAlg) -> tuple[list[int], np.ndarray]:
    """Atoms of a clopen algebra and, per group element, the induced permutation of them."""
    lat = alg.lattice
    atoms = lat.atoms() or [lat.top]
    leaf_to_atom = np.full(ta.tree.leaves, -1, dtype=np.int64)
    for idx, a in enumerate(atoms):
        leaf_to_atom[sorted(lat.elements[a].leaves)] = idx
    if (leaf_to_atom < 0).any():
        raise InputError("atoms of the algebra do not cover the boundary")
    rows = ta.group.elements.astype(np.int64)
    firsts = [min(lat.elements[a].leaves) for a in atoms]
    images = leaf_to_atom[rows[:, firsts]]
    # an element must carry each atom onto an atom
    for idx, a in enumerate(atoms):
        leaves = sorted(lat.elements[a].leaves)
        if not (leaf_to_atom[rows[:, leaves]] == images[:, [idx]]).all():
            raise InputError("group does not act on this algebra", atom=str(lat.elements[a]))
    return atoms, images


def lnip_analysis(ta: TreeAction, alg: BooleanAlg, action=None) -> LnipReport:
    """Points (atoms) of ``alg`` at which the group acts locally faithfully.

    Pointwise stabilisers shrink as the neighbourhood grows, so at a finite
    algebra ``p`` is locally faithful iff the stabiliser of the atom ``p`` is
    trivial.  ``action`` may supply the ``(|G|, atoms)`` image table.
    """
    atoms, images = action if action is not None else atom_action(ta, alg)
    n_atoms = len(atoms)
    ident = np.arange(n_atoms)
    if ((images == ident).all(axis=1)).sum() != 1:
        raise InputError("action on the algebra is not faithful")
    names = [str(alg.lattice.elements[a]) for a in atoms]
    faithful = [names[p] for p in range(n_atoms) if (images[:, p] == p).sum() == 1]
    orbit = set(images[:, 0].tolist())
    minimal = orbit == set(range(n_atoms))
    lnip = _has_lnip(ta)
    proper = None
    if lnip and minimal:
        lat = alg.lattice
        proper = True
        for a in range(lat.n):
            if a == lat.top:
                continue
            outside = [i for i, at in enumerate(atoms) if not lat.leq[at, a]]
            fixing = (images[:, outside] == np.asarray(outside)).all(axis=1)
            if fixing.sum() > 1:
                proper = False
                raise TruncationArtefact("LNIP and minimality hold but a proper rigid stabiliser "
                                         "is nontrivial", element=str(lat.elements[a]))
    return LnipReport(names, faithful, lnip, minimal, proper)


def _has_lnip(ta: TreeAction) -> bool:
    """Every two nonzero classes of the structure lattice meet nontrivially."""
    fg = ta.fg
    lat = ln_lattice(fg, fg.k)
    nonzero = [i for i in range(lat.n) if i != lat.bottom]
    sub = lat.meet[np.ix_(nonzero, nonzero)]
    return not (sub == lat.bottom).any()
