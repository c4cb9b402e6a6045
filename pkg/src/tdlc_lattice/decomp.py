"""Direct factors of centreless groups and the local decomposition lattice.

In a centreless group a normal subgroup ``N`` is a direct factor exactly when
``N C(N)`` is everything and ``N n C(N)`` is trivial; the complement is then
forced to be ``C(N)``.  All searches below use that criterion, so they only
ever look at normal subgroups.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from . import permgroup as pg
from .errors import (HypothesisRejected, InternalInconsistency, PreconditionError, ResourceError,
                     TruncationArtefact)
from .filtration import (FilteredGroup, LocalClass, c_stable_check, canonical_class,
                         is_locally_normal)
from .lattice import BooleanAlg, FiniteLattice, boolflip_construct
from .permgroup import GroupHandle

__all__ = [
    "Decomposition", "direct_factor_failure", "is_direct_factor", "direct_complement",
    "direct_factors", "krs_decompose", "dirfac_split", "ld_members", "ld_lattice",
    "ld_transitive_check",
]

# Hosts up to this order get the exhaustive normal-subgroup route.
EXHAUSTIVE_ORDER = 2 ** 12
EXHAUSTIVE_COUNT = 2 ** 10


def _gens(h: GroupHandle) -> list[list[int]]:
    return [g.to_list() for g in h.canonical_generators]


def _require_centreless(h: GroupHandle, what: str = "group"):
    z = pg.centre(h)
    if not z.is_trivial():
        raise PreconditionError(f"{what} has nontrivial centre", centre_order=z.order(),
                                centre=_gens(z))


def direct_factor_failure(h: GroupHandle, kf: GroupHandle) -> str | None:
    """Name of the first failing direct-factor condition, or None."""
    if not kf.issubgroup(h):
        return "not a subgroup"
    c = pg.centraliser(h, kf)
    meet = pg.intersection(kf, c)
    if not meet.is_trivial():
        return "K n C_H(K) is nontrivial"
    if kf.order() * c.order() != h.order():
        return "K C_H(K) is not H"
    return None


def is_direct_factor(h: GroupHandle, kf: GroupHandle) -> bool:
    return direct_factor_failure(h, kf) is None


def direct_complement(h: GroupHandle, kf: GroupHandle) -> GroupHandle:
    """The unique direct complement ``C_h(kf)`` of a direct factor of a centreless group."""
    _require_centreless(h)
    why = direct_factor_failure(h, kf)
    if why is not None:
        raise PreconditionError("not a direct factor", condition=why)
    comp = pg.centraliser(h, kf)
    if not pg.centraliser(h, comp) == kf:
        raise InternalInconsistency("direct factor is not its own double centraliser")
    return comp


def _exhaustive_factors(h: GroupHandle) -> list[GroupHandle]:
    subs = pg.normal_subgroups(h, budget=EXHAUSTIVE_ORDER, max_count=EXHAUSTIVE_COUNT)
    return [n for n in subs if is_direct_factor(h, n)]


def _targeted_factors(h: GroupHandle) -> list[GroupHandle]:
    """Direct factors reachable from normal closures of single classes.

    Each minimal normal subgroup is the closure of one class; its double
    centraliser is the candidate factor.  Products of commuting factors found
    so far are then tested as well, so the result is closed under the
    operations that generate all direct factors from the indecomposable ones.
    """
    found: dict[tuple, GroupHandle] = {}

    def offer(n: GroupHandle):
        if n.canonical_key not in found and is_direct_factor(h, n):
            found[n.canonical_key] = n

    offer(pg.trivial_group(h.degree))
    offer(h)
    closures = []
    for cls in pg.conjugacy_classes(h):
        x = pg.Perm._trusted(h.elements[cls[0]])
        if not x.is_identity():
            closures.append(pg.normal_closure(h, [x]))
    closures.sort(key=lambda n: (n.order(), n.canonical_key))
    for n in closures:
        offer(n)
        offer(pg.centraliser(h, pg.centraliser(h, n)))
    grew = True
    while grew:
        grew = False
        current = list(found.values())
        for a, b in itertools.combinations(current, 2):
            if pg.intersection(a, b).is_trivial():
                before = len(found)
                offer(pg.join(a, b))
                grew |= len(found) > before
    return list(found.values())


def _is_prime_power(n: int) -> bool:
    p = next((q for q in range(2, n + 1) if n % q == 0), n)
    while n % p == 0 and n > 1:
        n //= p
    return n == 1


def direct_factors(h: GroupHandle, exhaustive: bool | None = None) -> list[GroupHandle]:
    """Normal subgroups passing the centraliser criterion, sorted by (order, key).

    ``exhaustive=None`` picks the exhaustive route when the group is small
    enough and falls back to the targeted search otherwise.
    """
    if _is_prime_power(h.order()) and h.order() > 1:
        # nontrivial normal subgroups of a p-group meet the centre, which centralises them
        return [pg.trivial_group(h.degree)]
    if exhaustive is None:
        try:
            out = _exhaustive_factors(h)
        except ResourceError:
            out = _targeted_factors(h)
    elif exhaustive:
        out = _exhaustive_factors(h)
    else:
        out = _targeted_factors(h)
    return sorted(out, key=lambda n: (n.order(), n.canonical_key))


@dataclass
class Decomposition:
    """Indecomposable direct factors of ``of``."""

    factors: tuple[GroupHandle, ...]
    of: GroupHandle
    meta: dict = field(default_factory=dict)

    def validate(self):
        for a, b in itertools.combinations(self.factors, 2):
            if not pg.intersection(a, b).is_trivial():
                raise InternalInconsistency("factors intersect nontrivially")
            if not all(x * y == y * x for x in a.canonical_generators
                       for y in b.canonical_generators):
                raise InternalInconsistency("factors do not commute")
        total = 1
        for f in self.factors:
            total *= f.order()
        if total != self.of.order():
            raise InternalInconsistency("factor orders do not multiply to the group order",
                                        product=total, order=self.of.order())

    def direct_factors(self) -> list[GroupHandle]:
        """All ``2^n`` products of subsets of the factors."""
        out = []
        for r in range(len(self.factors) + 1):
            for sub in itertools.combinations(self.factors, r):
                out.append(pg.join(*sub) if sub else pg.trivial_group(self.of.degree))
        return sorted(out, key=lambda n: (n.order(), n.canonical_key))

    def to_dict(self) -> dict:
        return {"order": self.of.order(),
                "factors": [{"order": f.order(), "generators": _gens(f)} for f in self.factors],
                **self.meta}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def krs_decompose(h: GroupHandle, exhaustive: bool | None = None) -> Decomposition:
    """The unique decomposition of a centreless group into indecomposable factors."""
    _require_centreless(h)
    factors = direct_factors(h, exhaustive)
    nontrivial = [f for f in factors if not f.is_trivial()]
    minimal = [f for f in nontrivial
               if not any(g.order() < f.order() and g.issubgroup(f) for g in nontrivial)]
    dec = Decomposition(tuple(minimal), h, {"direct_factor_count": len(factors)})
    dec.validate()
    if len(factors) != 2 ** len(minimal):
        raise InternalInconsistency("direct-factor count is not a power of the factor count",
                                    factors=len(factors), indecomposable=len(minimal))
    return dec


def dirfac_split(g: GroupHandle, kf: GroupHandle, h: GroupHandle) -> tuple[GroupHandle, GroupHandle]:
    """``(h n kf, C_h(kf))`` for ``h`` equal to its own double centraliser in ``g``."""
    _require_centreless(g)
    why = direct_factor_failure(g, kf)
    if why is not None:
        raise PreconditionError("not a direct factor", condition=why)
    if not h.issubgroup(g):
        raise PreconditionError("h is not a subgroup of g")
    cc = pg.centraliser(g, pg.centraliser(g, h))
    if not cc == h:
        raise PreconditionError("h is not its own double centraliser",
                                order=h.order(), double_centraliser_order=cc.order())
    a = pg.intersection(h, kf)
    b = pg.centraliser(h, kf)
    if not (pg.intersection(a, b).is_trivial() and a.order() * b.order() == h.order()):
        raise InternalInconsistency("split parts do not multiply back to h",
                                    parts=[a.order(), b.order()], order=h.order())
    return a, b


# -- local decomposition lattice ---------------------------------------------------------


def _hosts(fg: FilteredGroup, alpha: LocalClass) -> list[GroupHandle]:
    src = alpha.representative
    seen: dict[tuple, GroupHandle] = {}
    for u in fg.chain:
        h = pg.intersection(src, u)
        seen.setdefault(h.canonical_key, h)
    return list(seen.values())


def ld_members(fg: FilteredGroup, alpha: LocalClass,
               exhaustive: bool | None = None) -> list[LocalClass]:
    """Classes of locally normal direct factors of ``source n U_i`` over all levels.

    ``0`` and ``alpha`` are always members.  The list is sorted by key.
    """
    out: dict[tuple, LocalClass] = {}
    zero = canonical_class(fg, pg.trivial_group(fg.degree))
    for c in (zero, alpha):
        out.setdefault(c.key, c)
    if alpha.is_zero():
        return sorted(out.values(), key=lambda c: c.key)
    for host in _hosts(fg, alpha):
        for kf in direct_factors(host, exhaustive):
            if is_locally_normal(fg, kf) is None:
                continue
            c = canonical_class(fg, kf)
            out.setdefault(c.key, c)
    return sorted(out.values(), key=lambda c: c.key)


def _require_c_stable(fg: FilteredGroup, alpha: LocalClass, unsafe: bool) -> bool:
    try:
        stable = c_stable_check(fg, alpha.representative)
    except TruncationArtefact:
        stable = False
    if not stable and not unsafe:
        raise PreconditionError("class is not C-stable at this depth; rerun with unsafe",
                                cls=alpha.describe(fg))
    return stable


def ld_lattice(fg: FilteredGroup, alpha: LocalClass, exhaustive: bool | None = None,
               unsafe: bool = False) -> BooleanAlg:
    """``LD(G; alpha)`` with complement ``beta -> [C_rep(beta)]`` relative to ``alpha``."""
    stable = _require_c_stable(fg, alpha, unsafe)
    elems = ld_members(fg, alpha, exhaustive)
    pos = {c.key: i for i, c in enumerate(elems)}
    n = len(elems)
    meet = np.empty((n, n), dtype=np.int32)
    for a in range(n):
        for b in range(a, n):
            key = pg.intersection(elems[a].rep, elems[b].rep).canonical_key
            if key not in pos:
                raise HypothesisRejected("members are not closed under meet",
                                         pair=[elems[a].describe(fg), elems[b].describe(fg)])
            meet[a, b] = meet[b, a] = pos[key]
    inv = []
    for c in elems:
        key = pg.centraliser(alpha.rep, c.rep).canonical_key
        if key not in pos:
            raise HypothesisRejected("relative complement is not a member",
                                     cls=c.describe(fg))
        inv.append(pos[key])
    leq = meet == np.arange(n)[:, None]
    semi = FiniteLattice(elems, leq, keys=[c.key for c in elems], meet=meet, with_join=False,
                         label=lambda c: c.describe(fg))
    alg = boolflip_construct(semi, inv)
    alg.meta.update({"c_stable": stable, "top": alpha.describe(fg)})
    return alg


def ld_transitive_check(fg: FilteredGroup, alpha: LocalClass, beta: LocalClass,
                        exhaustive: bool | None = None, unsafe: bool = False) -> bool:
    """``alpha in LD(beta)``, after checking it agrees with ``LD(alpha) <= LD(beta)``."""
    for c in (alpha, beta):
        _require_c_stable(fg, c, unsafe)
    inner = {c.key for c in ld_members(fg, alpha, exhaustive)}
    outer = {c.key for c in ld_members(fg, beta, exhaustive)}
    member = alpha.key in outer
    if member != (inner <= outer):
        exc = InternalInconsistency if fg.is_constant() else TruncationArtefact
        raise exc("membership and inclusion of decomposition lattices disagree",
                  member=member, included=inner <= outer)
    return member
