"""Explicit finite lattices and Boolean algebras.

Elements are identified by position.  ``leq``, ``meet`` and ``join`` are dense
numpy tables, so every axiom check is an exhaustive vectorised sweep.  A lattice
may omit its join table (meet-semilattice), which is the input shape for
:func:`boolflip_construct`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, NamedTuple, Sequence

import numpy as np

from .errors import HypothesisRejected, InputError, InternalInconsistency, ResourceError

MAX_ELEMENTS = 2 ** 14


class Check(NamedTuple):
    """Outcome of an exhaustive check; ``witness`` is None on success."""

    ok: bool
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


PASS = Check(True)


def _idx_dtype(n: int):
    return np.int16 if n < 2 ** 15 else np.int32


class FiniteLattice:
    """A finite poset with least element, meet table and optional join table.

    ``keys`` give each element a stable identity; duplicates (by key) are
    merged at construction, keeping the first occurrence.
    """

    def __init__(self, elements: Sequence[Any], leq: np.ndarray, *,
                 keys: Sequence[Hashable] | None = None,
                 meet: np.ndarray | None = None,
                 join: np.ndarray | None = None,
                 with_join: bool = True,
                 label: Callable[[Any], str] | None = None):
        n = len(elements)
        if n == 0:
            raise InputError("a lattice needs at least one element")
        if n > MAX_ELEMENTS:
            raise ResourceError("lattice exceeds the element cap", size=n, cap=MAX_ELEMENTS)
        self.elements = list(elements)
        self.keys = list(keys) if keys is not None else list(self.elements)
        if len(set(self.keys)) != n:
            raise InputError("duplicate keys; deduplicate with FiniteLattice.from_order")
        self.leq = np.asarray(leq, dtype=bool)
        if self.leq.shape != (n, n):
            raise InputError("leq table has the wrong shape", shape=list(self.leq.shape))
        self._label = label
        self._check_order()
        self.meet = self._bound_table(meet, lower=True)
        self.join = self._bound_table(join, lower=False) if (join is not None or with_join) else None
        self._position = {k: i for i, k in enumerate(self.keys)}

    # -- construction -------------------------------------------------------

    @classmethod
    def from_order(cls, elements: Iterable[Any], leq: Callable[[Any, Any], bool], *,
                   key: Callable[[Any], Hashable] = lambda x: x, with_join: bool = True,
                   label: Callable[[Any], str] | None = None) -> "FiniteLattice":
        elems, keys = _dedupe(elements, key)
        n = len(elems)
        table = np.array([[leq(a, b) for b in elems] for a in elems], dtype=bool).reshape(n, n)
        return cls(elems, table, keys=keys, with_join=with_join, label=label)

    @classmethod
    def from_meet(cls, elements: Iterable[Any], meet: Callable[[Any, Any], Any], *,
                  key: Callable[[Any], Hashable] = lambda x: x, with_join: bool = True,
                  label: Callable[[Any], str] | None = None) -> "FiniteLattice":
        """Order derived from a meet operation closed on ``elements``."""
        elems, keys = _dedupe(elements, key)
        pos = {k: i for i, k in enumerate(keys)}
        n = len(elems)
        table = np.empty((n, n), dtype=_idx_dtype(n))
        for i, a in enumerate(elems):
            for j in range(i, n):
                m = key(meet(a, elems[j]))
                if m not in pos:
                    raise InputError("meet leaves the element set", pair=[keys[i], keys[j]])
                table[i, j] = table[j, i] = pos[m]
        leq = table == np.arange(n)[:, None]
        return cls(elems, leq, keys=keys, meet=table, with_join=with_join, label=label)

    def _check_order(self):
        leq = self.leq
        n = len(leq)
        if not leq.diagonal().all():
            raise InputError("leq is not reflexive")
        both = leq & leq.T
        np.fill_diagonal(both, False)
        if both.any():
            a, b = map(int, np.argwhere(both)[0])
            raise InputError("leq is not antisymmetric", pair=[a, b])
        # a <= b and b <= c  =>  a <= c, as a boolean matrix product
        f = leq.astype(np.float32)
        closure = (f @ f) > 0
        if (closure & ~leq).any():
            a, c = map(int, np.argwhere(closure & ~leq)[0])
            raise InputError("leq is not transitive", pair=[a, c])
        bottoms = np.flatnonzero(leq.all(axis=1))
        if len(bottoms) != 1:
            raise InputError("no least element")
        self.bottom = int(bottoms[0])
        tops = np.flatnonzero(leq.all(axis=0))
        self.top = int(tops[0]) if len(tops) else None
        self.n = n

    def _bound_table(self, given: np.ndarray | None, *, lower: bool) -> np.ndarray:
        """Greatest lower (or least upper) bound table, validated against ``leq``."""
        leq = self.leq if lower else self.leq.T
        n = self.n
        # height = number of elements below; a bound with maximal height among
        # common lower bounds must dominate all of them if the bound exists
        height = leq.sum(axis=0)
        table = np.empty((n, n), dtype=_idx_dtype(n))
        for a in range(n):
            common = leq[:, a][:, None] & leq  # [x, b]: x <= a and x <= b
            if given is None:
                if not common.any(axis=0).all():
                    b = int(np.flatnonzero(~common.any(axis=0))[0])
                    raise InputError("no common bound", pair=[a, b], kind="meet" if lower else "join")
                row = np.where(common, height[:, None], -1).argmax(axis=0)
            else:
                row = np.asarray(given[a])
            ok = common[row, np.arange(n)] & (common <= leq[:, row]).all(axis=0)
            if not ok.all():
                b = int(np.flatnonzero(~ok)[0])
                raise InputError("bound table disagrees with the order" if given is not None
                                 else "pair has no unique bound",
                                 pair=[a, b], kind="meet" if lower else "join")
            table[a] = row
        return table

    # -- access -------------------------------------------------------------

    def __len__(self) -> int:
        return self.n

    def __iter__(self):
        return iter(self.elements)

    def position(self, key: Hashable) -> int:
        try:
            return self._position[key]
        except KeyError:
            raise InputError("element not in lattice", key=str(key)) from None

    def label(self, i: int) -> str:
        if self._label is not None:
            return self._label(self.elements[i])
        return str(self.keys[i])

    def atoms(self) -> list[int]:
        below = self.leq.sum(axis=0)
        return [int(i) for i in np.flatnonzero(below == 2)]

    def covers(self) -> list[tuple[int, int]]:
        """Covering pairs ``(a, b)``: ``a < b`` with nothing strictly between."""
        strict = self.leq.copy()
        np.fill_diagonal(strict, False)
        s = strict.astype(np.float32)
        between = (s @ s) > 0
        return [(int(a), int(b)) for a, b in np.argwhere(strict & ~between)]

    def require_join(self):
        if self.join is None:
            raise InputError("operation needs a join table")

    def sublattice(self, indices: Sequence[int]) -> "FiniteLattice":
        idx = np.asarray(sorted(set(int(i) for i in indices)), dtype=np.int64)
        return FiniteLattice([self.elements[i] for i in idx], self.leq[np.ix_(idx, idx)],
                             keys=[self.keys[i] for i in idx], with_join=self.join is not None,
                             label=self._label)

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": i, "key": self.label(i)} for i in range(self.n)],
            "bottom": self.bottom,
            "top": self.top,
            "covers": [list(p) for p in self.covers()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_dot(self, name: str = "lattice") -> str:
        lines = [f"digraph {json.dumps(name)} {{", "  rankdir=BT;", "  node [shape=box];"]
        for i in range(self.n):
            lines.append(f"  n{i} [label={json.dumps(self.label(i))}];")
        for a, b in self.covers():
            lines.append(f"  n{a} -> n{b} [arrowhead=none];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dedupe(elements: Iterable[Any], key: Callable[[Any], Hashable]):
    elems, keys, seen = [], [], set()
    for e in elements:
        k = key(e)
        if k in seen:
            continue
        seen.add(k)
        elems.append(e)
        keys.append(k)
    return elems, keys


@dataclass(frozen=True)
class Involution:
    """Candidate order-reversing involution, as an index table."""

    map: np.ndarray

    def check(self, lat: FiniteLattice) -> Check:
        f = np.asarray(self.map)
        if f.shape != (lat.n,) or f.min() < 0 or f.max() >= lat.n:
            return Check(False, ("not a total map",))
        bad = np.flatnonzero(f[f] != np.arange(lat.n))
        if len(bad):
            return Check(False, ("not an involution", int(bad[0])))
        # a <= b must give f(b) <= f(a)
        viol = lat.leq & ~lat.leq[np.ix_(f, f)].T
        if viol.any():
            a, b = map(int, np.argwhere(viol)[0])
            return Check(False, ("not order-reversing", a, b))
        return PASS


@dataclass
class BooleanAlg:
    lattice: FiniteLattice
    complement: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lattice.require_join()
        self.complement = np.asarray(self.complement, dtype=np.int64)

    def __len__(self) -> int:
        return self.lattice.n

    @property
    def bottom(self) -> int:
        return self.lattice.bottom

    @property
    def top(self) -> int:
        return self.lattice.top

    def atoms(self) -> list[int]:
        return self.lattice.atoms()

    def to_dict(self) -> dict:
        d = self.lattice.to_dict()
        d["complement"] = [int(c) for c in self.complement]
        d.update(self.meta)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


# -- exhaustive checks ----------------------------------------------------------


def modularity_check(lat: FiniteLattice) -> Check:
    """``a <= c  =>  a v (b ^ c) = (a v b) ^ c``; witness is the first bad ``(a, b, c)``."""
    lat.require_join()
    meet, join, leq = lat.meet, lat.join, lat.leq
    for a in range(lat.n):
        lhs = join[a][meet]                 # [b, c] -> a v (b ^ c)
        rhs = meet[join[a]]                 # [b, c] -> (a v b) ^ c
        bad = (lhs != rhs) & leq[a][None, :]
        if bad.any():
            b, c = map(int, np.argwhere(bad)[0])
            return Check(False, (a, b, c))
    return PASS


def is_distributive(lat: FiniteLattice) -> Check:
    """``a ^ (b v c) = (a ^ b) v (a ^ c)`` over all triples."""
    lat.require_join()
    meet, join = lat.meet, lat.join
    for a in range(lat.n):
        lhs = meet[a][join]
        ma = meet[a]
        rhs = join[ma[:, None], ma[None, :]]
        bad = lhs != rhs
        if bad.any():
            b, c = map(int, np.argwhere(bad)[0])
            return Check(False, (a, b, c))
    return PASS


def is_modular(lat: FiniteLattice) -> Check:
    return modularity_check(lat)


def is_boolean(alg: BooleanAlg) -> Check:
    """Complement laws, involution, order reversal and distributivity."""
    lat = alg.lattice
    if lat.top is None:
        return Check(False, ("no greatest element",))
    comp = alg.complement
    idx = np.arange(lat.n)
    bad = np.flatnonzero(lat.meet[idx, comp] != lat.bottom)
    if len(bad):
        return Check(False, ("a ^ a' != 0", int(bad[0])))
    bad = np.flatnonzero(lat.join[idx, comp] != lat.top)
    if len(bad):
        return Check(False, ("a v a' != 1", int(bad[0])))
    inv = Involution(comp).check(lat)
    if not inv:
        return inv
    dist = is_distributive(lat)
    if not dist:
        return Check(False, ("not distributive",) + dist.witness)
    return PASS


def de_morgan_check(alg: BooleanAlg) -> Check:
    lat, c = alg.lattice, alg.complement
    lhs = c[lat.meet]
    rhs = lat.join[c[:, None], c[None, :]]
    if (lhs != rhs).any():
        a, b = map(int, np.argwhere(lhs != rhs)[0])
        return Check(False, (a, b))
    return PASS


# -- boolflip -------------------------------------------------------------------


def boolflip_construct(m: FiniteLattice, inv: Involution | Sequence[int]) -> BooleanAlg:
    """Boolean algebra from a meet-semilattice with 0 and a separating involution.

    The hypothesis ``a ^ b = 0  <=>  b <= a'`` is checked for every pair; the
    join is then ``(a' ^ b')'`` and the top is ``0'``.
    """
    if not isinstance(inv, Involution):
        inv = Involution(np.asarray(inv, dtype=np.int64))
    f = np.asarray(inv.map, dtype=np.int64)
    basic = inv.check(m)
    if not basic:
        raise HypothesisRejected("candidate map is not an order-reversing involution",
                                 witness=_jsonable(basic.witness))
    disjoint = m.meet == m.bottom
    below_perp = m.leq[np.arange(m.n)[None, :], f[:, None]]  # [a, b]: b <= a'
    bad = disjoint != below_perp
    if bad.any():
        a, b = map(int, np.argwhere(bad)[0])
        raise HypothesisRejected("a ^ b = 0 does not match b <= a'",
                                 witness=[a, b], keys=[str(m.keys[a]), str(m.keys[b])])
    join = f[m.meet[f[:, None], f[None, :]]]
    try:
        lat = FiniteLattice(m.elements, m.leq, keys=m.keys, meet=m.meet, join=join,
                            label=m._label)
    except InputError as exc:
        raise InternalInconsistency("De Morgan join is not a least upper bound",
                                    detail=exc.reason) from exc
    alg = BooleanAlg(lat, f)
    if lat.top != int(f[lat.bottom]):
        raise InternalInconsistency("0' is not the maximum")
    verdict = is_boolean(alg)
    if not verdict:
        raise InternalInconsistency("boolflip output fails a Boolean axiom",
                                    witness=_jsonable(verdict.witness))
    return alg


def _jsonable(w):
    if w is None:
        return None
    return [x if isinstance(x, (str, int)) else int(x) for x in w]


# -- subalgebras and homomorphisms ------------------------------------------------


def subalgebra_generated(alg: BooleanAlg, seed: Iterable[int]) -> BooleanAlg:
    """Closure of ``seed`` together with 0 and 1 under meet, join and complement."""
    lat = alg.lattice
    comp = alg.complement
    current = {lat.bottom, lat.top}
    for s in seed:
        s = int(s)
        if not 0 <= s < lat.n:
            raise InputError("seed element not in the algebra", element=s)
        current.add(s)
    frontier = set(current)
    while frontier:
        new = set()
        for a in frontier:
            new.add(int(comp[a]))
            for b in current:
                new.add(int(lat.meet[a, b]))
                new.add(int(lat.join[a, b]))
        frontier = new - current
        current |= frontier
    idx = sorted(current)
    sub = lat.sublattice(idx)
    pos = {old: new for new, old in enumerate(idx)}
    sub_alg = BooleanAlg(sub, np.array([pos[int(comp[i])] for i in idx]),
                         meta={"embedding": idx})
    return sub_alg


def lattice_hom_check(f: Sequence[int], src: FiniteLattice, tgt: FiniteLattice,
                      kind: str = "full", *, src_complement=None, tgt_complement=None) -> Check:
    """Whether the index map ``f`` preserves the operations named by ``kind``.

    ``kind`` is ``meet``, ``join``, ``full`` (both) or ``boolean`` (both plus
    bounds and complements; the complements must then be supplied).
    """
    if kind not in {"meet", "join", "full", "boolean"}:
        raise InputError("unknown homomorphism kind", kind=kind)
    f = np.asarray(f, dtype=np.int64)
    if f.shape != (src.n,):
        raise InputError("map must be total on the source")
    if kind in {"meet", "full", "boolean"}:
        bad = f[src.meet] != tgt.meet[f[:, None], f[None, :]]
        if bad.any():
            a, b = map(int, np.argwhere(bad)[0])
            return Check(False, ("meet", a, b))
    if kind in {"join", "full", "boolean"}:
        src.require_join()
        tgt.require_join()
        bad = f[src.join] != tgt.join[f[:, None], f[None, :]]
        if bad.any():
            a, b = map(int, np.argwhere(bad)[0])
            return Check(False, ("join", a, b))
    if kind == "boolean":
        if src_complement is None or tgt_complement is None:
            raise InputError("boolean homomorphism check needs both complements")
        if f[src.bottom] != tgt.bottom or f[src.top] != tgt.top:
            return Check(False, ("bounds",))
        sc = np.asarray(src_complement)
        tc = np.asarray(tgt_complement)
        bad = np.flatnonzero(f[sc] != tc[f])
        if len(bad):
            return Check(False, ("complement", int(bad[0])))
    return PASS


# -- standard lattices ------------------------------------------------------------


def powerset_algebra(n: int) -> BooleanAlg:
    """All subsets of ``range(n)`` as bitmasks, ordered by inclusion."""
    if 2 ** n > MAX_ELEMENTS:
        raise ResourceError("power set too large", n=n)
    size = 2 ** n
    masks = np.arange(size)
    leq = (masks[:, None] & ~masks[None, :]) == 0
    lat = FiniteLattice([frozenset(i for i in range(n) if s >> i & 1) for s in range(size)], leq,
                        keys=list(range(size)), meet=masks[:, None] & masks[None, :],
                        join=masks[:, None] | masks[None, :],
                        label=lambda s: "{" + ",".join(map(str, sorted(s))) + "}")
    return BooleanAlg(lat, (size - 1) ^ masks)


def chain_lattice(n: int) -> FiniteLattice:
    idx = np.arange(n)
    return FiniteLattice(list(range(n)), idx[:, None] <= idx[None, :])


def pentagon() -> FiniteLattice:
    """N5: ``0 < a < b < 1`` and ``0 < c < 1``."""
    names = ["0", "a", "b", "c", "1"]
    up = {("0", x) for x in names} | {("a", "b"), ("a", "1"), ("b", "1"), ("c", "1")}
    return FiniteLattice.from_order(names, lambda x, y: x == y or (x, y) in up)


def diamond() -> FiniteLattice:
    """M3: three pairwise incomparable atoms under a common top."""
    names = ["0", "a", "b", "c", "1"]
    return FiniteLattice.from_order(
        names, lambda x, y: x == y or x == "0" or y == "1")


def relabel(alg: BooleanAlg, perm: Sequence[int]) -> BooleanAlg:
    """Relabel the elements of ``alg`` by ``perm`` (new position of old element i)."""
    perm = np.asarray(perm, dtype=np.int64)
    inv = np.argsort(perm)
    lat = alg.lattice
    elems = [lat.elements[i] for i in inv]
    keys = [lat.keys[i] for i in inv]
    leq = lat.leq[np.ix_(inv, inv)]
    meet = perm[lat.meet[np.ix_(inv, inv)]]
    join = perm[lat.join[np.ix_(inv, inv)]]
    new = FiniteLattice(elems, leq, keys=keys, meet=meet, join=join, label=lat._label)
    return BooleanAlg(new, perm[alg.complement[inv]])

