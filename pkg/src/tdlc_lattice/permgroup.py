"""Finite permutation groups: Schreier-Sims chains plus vectorised element sets.

Permutations act on the right and are stored as image arrays, so ``p * q``
applies ``p`` first and then ``q`` and ``x ** g`` style conjugation is
``g^-1 x g``.  Every subgroup operation works on the full element list of the
enclosing group (numpy rows); the stabiliser chain answers order and
membership.  The two routes are independent and the test-suite plays them off
against each other and against :func:`exhaustive_closure`.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InputError, ResourceError

MAX_DEGREE = 4096
DEFAULT_BUDGET = 2 ** 16
DEFAULT_COUNT_BUDGET = 2 ** 12
_DTYPE = np.uint16


@dataclass(frozen=True, slots=True)
class Perm:
    """A bijection of ``{0..n-1}``; ``images[p]`` is the image of ``p``."""

    images: tuple[int, ...]

    def __post_init__(self):
        n = len(self.images)
        if n < 1 or n > MAX_DEGREE:
            raise InputError(f"degree {n} outside 1..{MAX_DEGREE}")
        if sorted(self.images) != list(range(n)):
            raise InputError("not a permutation", images=list(self.images))

    @classmethod
    def _trusted(cls, images) -> "Perm":
        obj = object.__new__(cls)
        object.__setattr__(obj, "images", tuple(int(i) for i in images))
        return obj

    @classmethod
    def identity(cls, degree: int) -> "Perm":
        return cls(tuple(range(degree)))

    @classmethod
    def from_cycles(cls, degree: int, *cycles: Sequence[int]) -> "Perm":
        images = list(range(degree))
        for cyc in cycles:
            for a, b in zip(cyc, tuple(cyc[1:]) + (cyc[0],)):
                images[a] = b
        return cls(tuple(images))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, point: int) -> int:
        return self.images[point]

    def __mul__(self, other: "Perm") -> "Perm":
        if other.degree != self.degree:
            raise InputError("degree mismatch in product")
        o = other.images
        return Perm._trusted(o[i] for i in self.images)

    def inverse(self) -> "Perm":
        inv = [0] * self.degree
        for i, j in enumerate(self.images):
            inv[j] = i
        return Perm._trusted(inv)

    def __pow__(self, e: int) -> "Perm":
        base = self if e >= 0 else self.inverse()
        result = Perm.identity(self.degree)
        for _ in range(abs(e)):
            result = result * base
        return result

    def conj(self, x: "Perm") -> "Perm":
        """``x^-1 * self * x``."""
        return x.inverse() * self * x

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def cycles(self) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for i in range(self.degree):
            if i in seen or self.images[i] == i:
                continue
            cyc, j = [i], self.images[i]
            seen.add(i)
            while j != i:
                seen.add(j)
                cyc.append(j)
                j = self.images[j]
            out.append(tuple(cyc))
        return out

    def to_list(self) -> list[int]:
        return list(self.images)

    def __str__(self) -> str:
        cyc = self.cycles()
        return "".join("(" + " ".join(map(str, c)) + ")" for c in cyc) or "()"


def _mul(a: tuple, b: tuple) -> tuple:
    return tuple(b[i] for i in a)


def _inv(a: tuple) -> tuple:
    out = [0] * len(a)
    for i, j in enumerate(a):
        out[j] = i
    return tuple(out)


def _first_moved(a: tuple) -> int:
    for i, j in enumerate(a):
        if i != j:
            return i
    raise ValueError("identity has no moved point")


class _StabChain:
    """Deterministic Schreier-Sims (Holt's SCHREIERSIMS with stripping)."""

    def __init__(self, degree: int, gens: Sequence[tuple]):
        self.degree = degree
        self.ident = tuple(range(degree))
        self.base: list[int] = []
        self.trans: list[dict[int, tuple]] = []
        self.trans_inv: list[dict[int, tuple]] = []
        self._build([g for g in gens if g != self.ident])

    def _orbit(self, level: int, gens: list[tuple]):
        b = self.base[level]
        tr = {b: self.ident}
        queue = deque([b])
        while queue:
            pt = queue.popleft()
            u = tr[pt]
            for x in gens:
                q = x[pt]
                if q not in tr:
                    tr[q] = _mul(u, x)
                    queue.append(q)
        self.trans[level] = tr
        self.trans_inv[level] = {p: _inv(u) for p, u in tr.items()}

    def strip(self, g: tuple, start: int = 0) -> tuple[tuple, int]:
        for level in range(start, len(self.base)):
            beta = g[self.base[level]]
            uinv = self.trans_inv[level].get(beta)
            if uinv is None:
                return g, level
            g = _mul(g, uinv)
        return g, len(self.base)

    def _build(self, strong: list[tuple]):
        base = self.base
        for g in strong:
            if all(g[b] == b for b in base):
                base.append(_first_moved(g))
        k = len(base)
        level_gens = [[s for s in strong if all(s[b] == b for b in base[:i])] for i in range(k)]
        self.trans = [dict() for _ in range(k)]
        self.trans_inv = [dict() for _ in range(k)]
        for i in range(k):
            self._orbit(i, level_gens[i])
        i = k - 1
        while i >= 0:
            clean = True
            for beta, u in list(self.trans[i].items()):
                for x in level_gens[i]:
                    ux = _mul(u, x)
                    h = _mul(ux, self.trans_inv[i][ux[base[i]]])
                    if h == self.ident:
                        continue
                    h2, j = self.strip(h, i + 1)
                    if j < k or h2 != self.ident:
                        clean = False
                        if j == k:
                            base.append(_first_moved(h2))
                            k += 1
                            level_gens.append([])
                            self.trans.append({})
                            self.trans_inv.append({})
                        for lvl in range(i + 1, j + 1):
                            level_gens[lvl].append(h2)
                            self._orbit(lvl, level_gens[lvl])
                        i = j
                        break
                if not clean:
                    break
            if clean:
                i -= 1

    def order(self) -> int:
        out = 1
        for tr in self.trans:
            out *= len(tr)
        return out

    def contains(self, g: tuple) -> bool:
        h, j = self.strip(g)
        return j == len(self.base) and h == self.ident

    def elements(self) -> np.ndarray:
        rows = np.array([self.ident], dtype=_DTYPE)
        for level in range(len(self.base) - 1, -1, -1):
            t = np.array(list(self.trans[level].values()), dtype=_DTYPE)
            rows = t[:, rows].reshape(-1, self.degree)
        return rows


def _void(rows: np.ndarray) -> np.ndarray:
    rows = np.ascontiguousarray(rows, dtype=_DTYPE)
    return rows.view(np.dtype((np.void, rows.shape[1] * rows.itemsize))).ravel()


def _lex_sorted(rows: np.ndarray) -> np.ndarray:
    if len(rows) <= 1:
        return rows
    return rows[np.lexsort(rows.T[::-1])]


class ElementIndex:
    """Vectorised row -> position lookup over a fixed array of permutations."""

    def __init__(self, rows: np.ndarray):
        self.rows = rows
        keys = _void(rows)
        self._order = np.argsort(keys, kind="stable")
        self._sorted = keys[self._order]

    def lookup(self, queries: np.ndarray) -> np.ndarray:
        """Positions of ``queries`` in ``rows``; -1 where absent."""
        if len(queries) == 0:
            return np.zeros(0, dtype=np.int64)
        q = _void(queries)
        pos = np.searchsorted(self._sorted, q)
        pos[pos == len(self._sorted)] = 0
        hit = self._sorted[pos] == q
        return np.where(hit, self._order[pos], -1)

    def contains(self, queries: np.ndarray) -> np.ndarray:
        return self.lookup(queries) >= 0


class GroupHandle:
    """Immutable finitely generated permutation group.

    Equality is mutual containment of generators; the generating set itself is
    not part of the identity of the group.
    """

    def __init__(self, degree: int, generators: Iterable = (), *, name: str | None = None):
        if not 1 <= degree <= MAX_DEGREE:
            raise InputError(f"degree {degree} outside 1..{MAX_DEGREE}")
        gens = []
        seen = set()
        for g in generators:
            g = g if isinstance(g, Perm) else Perm(tuple(int(i) for i in g))
            if g.degree != degree:
                raise InputError("generator degree mismatch", expected=degree, got=g.degree)
            if g.is_identity() or g.images in seen:
                continue
            seen.add(g.images)
            gens.append(g)
        self.degree = degree
        self.generators: tuple[Perm, ...] = tuple(gens)
        self.name = name

    @classmethod
    def _from_rows(cls, degree: int, rows: np.ndarray, name: str | None = None) -> "GroupHandle":
        """Subgroup whose complete element set is ``rows`` (lexicographically sorted)."""
        rows = _lex_sorted(rows)
        gens: list[tuple] = []
        target = len(rows)
        if target > 1:
            chain = _StabChain(degree, [])
            covered = np.zeros(target, dtype=bool)
            covered[0] = True  # identity is lexicographically least
            index = ElementIndex(rows)
            while chain.order() < target:
                pick = int(np.argmin(covered))
                gens.append(tuple(int(i) for i in rows[pick]))
                chain = _StabChain(degree, gens)
                pos = index.lookup(chain.elements())
                if (pos < 0).any():
                    raise InputError("rows do not form a subgroup")
                covered[pos] = True
        h = cls(degree, (Perm._trusted(g) for g in gens), name=name)
        h.__dict__["elements"] = rows
        # greedy picks in lexicographic order are exactly the canonical generators
        h.__dict__["canonical_generators"] = h.generators
        return h

    # -- stabiliser chain route -------------------------------------------------

    @cached_property
    def _chain(self) -> _StabChain:
        return _StabChain(self.degree, [g.images for g in self.generators])

    def order(self) -> int:
        return self._chain.order()

    def __len__(self) -> int:
        return self.order()

    def __contains__(self, g) -> bool:
        g = g if isinstance(g, Perm) else Perm(tuple(g))
        if g.degree != self.degree:
            raise InputError("degree mismatch in membership test")
        return self._chain.contains(g.images)

    # -- element route ----------------------------------------------------------

    @cached_property
    def elements(self) -> np.ndarray:
        """All elements as a lexicographically sorted ``(order, degree)`` array."""
        return _lex_sorted(self._chain.elements())

    @cached_property
    def index(self) -> ElementIndex:
        return ElementIndex(self.elements)

    def contains_rows(self, rows: np.ndarray) -> np.ndarray:
        return self.index.contains(rows)

    def __iter__(self) -> Iterator[Perm]:
        for row in self.elements:
            yield Perm._trusted(row)

    @cached_property
    def canonical_generators(self) -> tuple[Perm, ...]:
        """Greedy generators taken in lexicographic element order; depends only on the set."""
        return GroupHandle._from_rows(self.degree, self.elements).generators

    def mask_in(self, g: "GroupHandle") -> np.ndarray:
        """Boolean mask of ``self`` over ``g.elements``."""
        return self.contains_rows(g.elements)

    @cached_property
    def canonical_key(self) -> tuple:
        return (self.order(),) + tuple(g.images for g in self.canonical_generators)

    # -- comparisons ------------------------------------------------------------

    def issubgroup(self, other: "GroupHandle") -> bool:
        _check_degree(self, other)
        return all(g in other for g in self.generators)

    def __le__(self, other: "GroupHandle") -> bool:
        return self.issubgroup(other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupHandle):
            return NotImplemented
        return (self.degree == other.degree and self.order() == other.order()
                and self.issubgroup(other))

    def __hash__(self) -> int:
        return hash((self.degree, self.order()))

    def is_trivial(self) -> bool:
        return not self.generators

    def identity(self) -> Perm:
        return Perm.identity(self.degree)

    def __repr__(self) -> str:
        label = self.name or "<" + ", ".join(str(g) for g in self.generators) + ">"
        return f"GroupHandle({label}, degree={self.degree}, order={self.order()})"


def _check_degree(*groups: GroupHandle):
    degrees = {g.degree for g in groups}
    if len(degrees) > 1:
        raise InputError("degree mismatch", degrees=sorted(degrees))


def _inverse_rows(rows: np.ndarray) -> np.ndarray:
    return np.argsort(rows, axis=1).astype(_DTYPE)


def _conj_rows(elem_rows: np.ndarray, y: Perm, inv_rows: np.ndarray | None = None) -> np.ndarray:
    """Rows of ``x^-1 y x`` for every row ``x``."""
    if inv_rows is None:
        inv_rows = _inverse_rows(elem_rows)
    yarr = np.asarray(y.images, dtype=_DTYPE)
    return np.take_along_axis(elem_rows, yarr[inv_rows], axis=1)


def conjugate_rows_by(rows: np.ndarray, x: Perm) -> np.ndarray:
    """Rows of ``x^-1 e x`` for every row ``e``."""
    xarr = np.asarray(x.images, dtype=_DTYPE)
    xinv = np.argsort(xarr).astype(_DTYPE)
    return xarr[rows[:, xinv]]


def _commute_mask(elem_rows: np.ndarray, y: Perm) -> np.ndarray:
    yarr = np.asarray(y.images, dtype=_DTYPE)
    return (yarr[elem_rows] == elem_rows[:, yarr]).all(axis=1)


def subgroup_from_mask(g: GroupHandle, mask: np.ndarray, name: str | None = None) -> GroupHandle:
    return GroupHandle._from_rows(g.degree, g.elements[mask], name=name)


def order(g: GroupHandle) -> int:
    return g.order()


def trivial_group(degree: int) -> GroupHandle:
    return GroupHandle(degree, (), name="1")


def centraliser(g: GroupHandle, h: GroupHandle | Iterable[Perm]) -> GroupHandle:
    """``{x in g : xy = yx for all y in h}``."""
    gens = h.generators if isinstance(h, GroupHandle) else tuple(h)
    for y in gens:
        if y.degree != g.degree:
            raise InputError("degree mismatch", expected=g.degree, got=y.degree)
    mask = np.ones(len(g.elements), dtype=bool)
    for y in gens:
        mask &= _commute_mask(g.elements, y)
    return subgroup_from_mask(g, mask)


def normaliser(g: GroupHandle, h: GroupHandle) -> GroupHandle:
    _check_degree(g, h)
    rows = g.elements
    inv = _inverse_rows(rows)
    mask = np.ones(len(rows), dtype=bool)
    for y in h.generators:
        mask &= h.contains_rows(_conj_rows(rows, y, inv))
    return subgroup_from_mask(g, mask)


def intersection(a: GroupHandle, b: GroupHandle) -> GroupHandle:
    _check_degree(a, b)
    if a.order() > b.order():
        a, b = b, a
    if a.issubgroup(b):
        return a
    return subgroup_from_mask(a, b.contains_rows(a.elements))


def join(*groups: GroupHandle) -> GroupHandle:
    """Subgroup generated by the union."""
    _check_degree(*groups)
    return GroupHandle(groups[0].degree, itertools.chain.from_iterable(x.generators for x in groups))


def product_set_is_subgroup(a: GroupHandle, b: GroupHandle) -> bool:
    """Whether the set ``ab`` is a subgroup, via ``|<a,b>| = |a||b|/|a n b|``."""
    return join(a, b).order() * intersection(a, b).order() == a.order() * b.order()


def normal_closure(g: GroupHandle, s: Iterable[Perm] | GroupHandle) -> GroupHandle:
    """Smallest subgroup of ``g`` containing ``s`` and normalised by ``g``."""
    seeds = list(s.generators if isinstance(s, GroupHandle) else s)
    for x in seeds:
        if x.degree != g.degree:
            raise InputError("degree mismatch", expected=g.degree, got=x.degree)
        if x not in g:
            raise InputError("element outside the group", element=x.to_list())
    gens = [x for x in seeds if not x.is_identity()]
    current = GroupHandle(g.degree, gens)
    queue = deque(gens)
    while queue:
        t = queue.popleft()
        for x in g.generators:
            c = t.conj(x)
            if c not in current:
                gens.append(c)
                current = GroupHandle(g.degree, gens)
                queue.append(c)
    return current


def is_normal(g: GroupHandle, h: GroupHandle) -> bool:
    """Whether ``h`` is normalised by every generator of ``g`` (``h`` need not lie in ``g``)."""
    _check_degree(g, h)
    return all(y.conj(x) in h for x in g.generators for y in h.generators)


def normalises(x_group: GroupHandle, h: GroupHandle) -> bool:
    return is_normal(x_group, h)


def centre(g: GroupHandle) -> GroupHandle:
    return centraliser(g, g)


def is_abelian(g: GroupHandle) -> bool:
    gens = g.generators
    return all(a * b == b * a for a, b in itertools.combinations(gens, 2))


def conjugate(g: GroupHandle, h: GroupHandle, x: Perm) -> GroupHandle:
    """``x^-1 h x``; ``x`` must lie in ``g``."""
    _check_degree(g, h)
    if x not in g:
        raise InputError("conjugating element outside the group", element=x.to_list())
    return GroupHandle(h.degree, (y.conj(x) for y in h.generators))


def core(g: GroupHandle, h: GroupHandle) -> GroupHandle:
    """Largest subgroup of ``h`` normalised by ``g``."""
    _check_degree(g, h)
    current = h
    changed = True
    while changed:
        changed = False
        for x in g.generators:
            conj = GroupHandle(h.degree, (y.conj(x) for y in current.generators))
            if not current.issubgroup(conj):
                current = intersection(current, conj)
                changed = True
    return current


def conjugacy_classes(g: GroupHandle) -> list[np.ndarray]:
    """Conjugacy classes as arrays of positions into ``g.elements``, ordered by least member."""
    rows = g.elements
    maps = [g.index.lookup(conjugate_rows_by(rows, x)) for x in g.generators]
    label = np.full(len(rows), -1, dtype=np.int64)
    classes = []
    for start in range(len(rows)):
        if label[start] >= 0:
            continue
        label[start] = len(classes)
        members = [start]
        queue = [start]
        while queue:
            i = queue.pop()
            for m in maps:
                j = int(m[i])
                if label[j] < 0:
                    label[j] = len(classes)
                    members.append(j)
                    queue.append(j)
        classes.append(np.array(sorted(members), dtype=np.int64))
    return classes


def _mask_product(g: GroupHandle, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Mask of the set product ``AB`` for element masks ``a``, ``b`` of ``g`` (A normalised by B)."""
    rows = g.elements
    out = a.copy()
    a_rows = rows[a]
    for j in np.flatnonzero(b):
        if out[j]:
            continue
        out[g.index.lookup(rows[j][a_rows])] = True
    return out


def normal_subgroups(g: GroupHandle, budget: int = DEFAULT_BUDGET,
                     max_count: int = DEFAULT_COUNT_BUDGET) -> list[GroupHandle]:
    """Every normal subgroup of ``g``, as joins of normal closures of conjugacy classes.

    ``budget`` caps the group order and ``max_count`` the number of subgroups.
    """
    if g.order() > budget:
        raise ResourceError("group order exceeds the normal-subgroup budget",
                            order=g.order(), budget=budget)
    n = len(g.elements)
    closures: dict[bytes, np.ndarray] = {}
    for cls in conjugacy_classes(g):
        rep = Perm._trusted(g.elements[cls[0]])
        if rep.is_identity():
            continue
        nc = normal_closure(g, [rep])
        mask = nc.contains_rows(g.elements)
        closures.setdefault(mask.tobytes(), mask)
    atoms = list(closures.values())
    start = np.zeros(n, dtype=bool)
    start[0] = True
    found = {start.tobytes(): start}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for atom in atoms:
            if not (atom & ~cur).any():
                continue
            joined = _mask_product(g, cur, atom)
            key = joined.tobytes()
            if key not in found:
                found[key] = joined
                if len(found) > max_count:
                    raise ResourceError("too many normal subgroups", count=len(found),
                                        max_count=max_count)
                queue.append(joined)
    subs = [subgroup_from_mask(g, m) for m in found.values()]
    subs.sort(key=lambda h: h.canonical_key)
    return subs


def all_subgroups(g: GroupHandle, budget: int = 2 ** 10) -> list[GroupHandle]:
    """Every subgroup, by cyclic extension; exhaustive oracle for small groups only."""
    if g.order() > budget:
        raise ResourceError("group order exceeds the all-subgroups budget",
                            order=g.order(), budget=budget)
    rows = g.elements
    n = len(rows)
    cyclic: dict[bytes, np.ndarray] = {}
    for i in range(1, n):
        mask = GroupHandle(g.degree, [Perm._trusted(rows[i])]).contains_rows(rows)
        cyclic.setdefault(mask.tobytes(), mask)
    start = np.zeros(n, dtype=bool)
    start[0] = True
    found = {start.tobytes(): start}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        base_gens = _small_gens(rows, cur)
        for cyc in cyclic.values():
            if not (cyc & ~cur).any():
                continue
            mask = GroupHandle(g.degree, base_gens + _small_gens(rows, cyc)).contains_rows(rows)
            key = mask.tobytes()
            if key not in found:
                found[key] = mask
                queue.append(mask)
    subs = [subgroup_from_mask(g, m) for m in found.values()]
    subs.sort(key=lambda h: h.canonical_key)
    return subs


def _small_gens(rows: np.ndarray, mask: np.ndarray) -> list[Perm]:
    return list(GroupHandle._from_rows(rows.shape[1], rows[mask]).generators)


def exhaustive_closure(degree: int, generators: Iterable) -> set[tuple[int, ...]]:
    """Brute-force closure under composition; independent of the stabiliser chain."""
    gens = [tuple(g.images if isinstance(g, Perm) else g) for g in generators]
    ident = tuple(range(degree))
    seen = {ident}
    queue = deque([ident])
    while queue:
        a = queue.popleft()
        for x in gens:
            b = _mul(a, x)
            if b not in seen:
                seen.add(b)
                queue.append(b)
    return seen


# -- standard groups --------------------------------------------------------


def symmetric_group(n: int, offset: int = 0, degree: int | None = None) -> GroupHandle:
    degree = degree or n + offset
    pts = list(range(offset, offset + n))
    gens = []
    if n >= 2:
        gens.append(Perm.from_cycles(degree, pts[:2]))
    if n >= 3:
        gens.append(Perm.from_cycles(degree, pts))
    return GroupHandle(degree, gens, name=f"S{n}")


def alternating_group(n: int, offset: int = 0, degree: int | None = None) -> GroupHandle:
    degree = degree or n + offset
    pts = list(range(offset, offset + n))
    gens = [Perm.from_cycles(degree, [pts[0], pts[1], pts[i]]) for i in range(2, n)]
    return GroupHandle(degree, gens, name=f"A{n}")


def cyclic_group(n: int, offset: int = 0, degree: int | None = None) -> GroupHandle:
    degree = degree or n + offset
    gens = [Perm.from_cycles(degree, list(range(offset, offset + n)))] if n > 1 else []
    return GroupHandle(degree, gens, name=f"C{n}")


def dihedral_group(n: int, offset: int = 0, degree: int | None = None) -> GroupHandle:
    """Symmetries of an n-gon (order 2n) on n points."""
    degree = degree or n + offset
    pts = list(range(offset, offset + n))
    rot = Perm.from_cycles(degree, pts)
    refl = Perm.from_cycles(degree, *[(pts[i], pts[n - 1 - i]) for i in range(n // 2)])
    return GroupHandle(degree, [rot, refl], name=f"D{n}")


def quaternion_group() -> GroupHandle:
    """Q8 in its regular representation on 8 points."""
    # elements 1,i,j,k,-1,-i,-j,-k -> 0..7; right multiplication by i and j
    table = {
        "i": [1, 4, 3, 6, 5, 0, 7, 2],
        "j": [2, 7, 4, 1, 6, 3, 0, 5],
    }
    return GroupHandle(8, [Perm(tuple(table["i"])), Perm(tuple(table["j"]))], name="Q8")


def direct_product(*factors: GroupHandle) -> tuple[GroupHandle, list[GroupHandle]]:
    """External direct product on disjoint point sets; returns (product, embedded factors)."""
    degree = sum(f.degree for f in factors)
    embedded = []
    offset = 0
    for f in factors:
        gens = []
        for g in f.generators:
            images = list(range(degree))
            for i, j in enumerate(g.images):
                images[offset + i] = offset + j
            gens.append(Perm._trusted(images))
        embedded.append(GroupHandle(degree, gens, name=f.name))
        offset += f.degree
    if not embedded:
        return trivial_group(1), []
    product = join(*embedded)
    product.name = " x ".join(f.name or "?" for f in factors)
    return product, embedded


def diagonal(product: GroupHandle, factors: Sequence[GroupHandle], source: GroupHandle) -> GroupHandle:
    """Diagonal copy of ``source`` in a product of equal-degree copies of it."""
    degree = product.degree
    width = source.degree
    gens = []
    for g in source.generators:
        images = list(range(degree))
        for k in range(len(factors)):
            for i, j in enumerate(g.images):
                images[k * width + i] = k * width + j
        gens.append(Perm._trusted(images))
    return GroupHandle(degree, gens, name="diag")
