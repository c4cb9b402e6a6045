"""The centraliser lattice at finite depth.

``perp`` sends a class to the class of its centraliser in ``U_k``.  The image
of ``perp``, closed under meets, is the candidate Boolean algebra; the join is
always the De Morgan dual of the meet.  Every identity the construction
depends on is re-checked on the concrete tables and failures are reported with
a witness rather than repaired.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import permgroup as pg
from .errors import HypothesisRejected, PreconditionError, TruncationArtefact
from .filtration import (FilteredGroup, LocalClass, canonical_class, qz_witness,
                         visible_abelian_witness)
from .lattice import (BooleanAlg, Check, FiniteLattice, PASS, boolflip_construct,
                      lattice_hom_check)
from .permgroup import GroupHandle

__all__ = [
    "CentClass", "Screening", "screen", "perp", "perp_of_rep", "lc_algebra",
    "perp2_projection_check", "cclem_check", "cclem_report", "abelian_normal_witness",
]


@dataclass(frozen=True)
class Screening:
    """Result of the margin screening that licenses ``perp``."""

    levels: tuple[int, int]
    qz_witness: list[int] | None
    abelian_witness: list[list[int]] | None

    @property
    def passed(self) -> bool:
        return self.qz_witness is None and self.abelian_witness is None

    def to_dict(self) -> dict:
        return {"levels": list(self.levels), "passed": self.passed,
                "qz_witness": self.qz_witness, "abelian_witness": self.abelian_witness}


def screen(fg: FilteredGroup, levels: tuple[int, int] | None = None) -> Screening:
    """Trivial quasi-centre and no visible abelian locally normal subgroup at ``levels``."""
    levels = tuple(levels) if levels is not None else fg.default_levels()
    cache = fg.memo.setdefault("screen", {})
    if levels not in cache:
        i, j = levels
        qz = qz_witness(fg, i, j)
        ab = visible_abelian_witness(fg, i, j)
        cache[levels] = Screening(
            levels, qz.to_list() if qz else None,
            [g.to_list() for g in ab.canonical_generators] if ab is not None else None)
    return cache[levels]


@dataclass(frozen=True, eq=False)
class CentClass:
    """A class in the image of ``perp`` with its own ``perp`` cached."""

    cls: LocalClass
    perp_rep: GroupHandle
    validated: bool = True

    @property
    def rep(self) -> GroupHandle:
        return self.cls.rep

    @property
    def key(self) -> tuple:
        return self.cls.key

    def __eq__(self, other) -> bool:
        if not isinstance(other, CentClass):
            return NotImplemented
        return self.cls == other.cls

    def __hash__(self) -> int:
        return hash(self.key)

    def describe(self, fg: FilteredGroup | None = None) -> str:
        return self.cls.describe(fg)


def perp_of_rep(fg: FilteredGroup, rep: GroupHandle) -> GroupHandle:
    """``C_{U_k}(rep)`` for a subgroup of ``U_k``."""
    return pg.centraliser(fg.deep, rep)


def _cent_class(fg: FilteredGroup, rep: GroupHandle, validated: bool) -> CentClass:
    return CentClass(LocalClass(rep, None, rep), perp_of_rep(fg, rep), validated)


def _stability_levels(fg: FilteredGroup, alpha: LocalClass) -> range:
    lo = max(fg.k - fg.margin, alpha.witness or 0)
    return range(lo, fg.k + 1)


def perp(fg: FilteredGroup, alpha: LocalClass, levels: tuple[int, int] | None = None,
         unsafe: bool = False) -> CentClass:
    """``alpha^perp`` as the class of ``C_{U_k}(rep)``.

    Without ``unsafe`` the group must pass :func:`screen`.  The answer is also
    recomputed as ``C_{U_i}(source n U_j) n U_k`` for the levels ``i, j`` inside
    the margin; any disagreement means the depth is too shallow for ``alpha``.
    """
    verdict = screen(fg, levels)
    if not verdict.passed and not unsafe:
        raise PreconditionError("margin screening failed; rerun with unsafe to tag results",
                                screening=verdict.to_dict())
    result = perp_of_rep(fg, alpha.rep)
    src = alpha.representative
    for i in _stability_levels(fg, alpha):
        for j in _stability_levels(fg, alpha):
            trace = pg.intersection(src, fg.level(j))
            other = canonical_class(fg, pg.centraliser(fg.level(i), trace)).rep
            if not other == result:
                raise TruncationArtefact("perp depends on the levels used", i=i, j=j,
                                         expected_order=result.order(),
                                         got_order=other.order())
    return _cent_class(fg, result, verdict.passed)


def lc_algebra(fg: FilteredGroup, seeds=(), levels: tuple[int, int] | None = None,
               unsafe: bool = False) -> BooleanAlg:
    """Boolean algebra generated by ``{perp(s)}`` together with ``0`` and ``inf``.

    The set is closed under intersection and ``perp``; join is ``(a' ^ b')'``.
    Axiom failures surface as :class:`TruncationArtefact` with the witness.
    """
    validated = screen(fg, levels).passed
    start = [_cent_class(fg, pg.trivial_group(fg.degree), validated),
             _cent_class(fg, fg.deep, validated)]
    start += [perp(fg, s, levels, unsafe) for s in seeds]
    known: dict[tuple, CentClass] = {}
    queue = []
    for c in start:
        if c.key not in known:
            known[c.key] = c
            queue.append(c)
    while queue:
        fresh = []
        for a in queue:
            p = _cent_class(fg, a.perp_rep, validated)
            cands = [p] + [_cent_class(fg, pg.intersection(a.rep, b.rep), validated)
                           for b in list(known.values())]
            for c in cands:
                if c.key not in known:
                    known[c.key] = c
                    fresh.append(c)
        queue = fresh
    elems = sorted(known.values(), key=lambda c: c.key)
    pos = {c.key: i for i, c in enumerate(elems)}
    n = len(elems)
    meet = np.empty((n, n), dtype=np.int32)
    for a in range(n):
        for b in range(a, n):
            m = pg.intersection(elems[a].rep, elems[b].rep).canonical_key
            meet[a, b] = meet[b, a] = pos[m]
    leq = meet == np.arange(n)[:, None]
    semi = FiniteLattice(elems, leq, keys=[c.key for c in elems], meet=meet, with_join=False,
                         label=lambda c: c.describe(fg))
    inv = [pos[elems[a].perp_rep.canonical_key] for a in range(n)]
    try:
        alg = boolflip_construct(semi, inv)
    except HypothesisRejected as exc:
        raise TruncationArtefact("centraliser classes do not form a Boolean algebra at this depth",
                                 detail=exc.reason, size=n) from exc
    alg.meta["validated"] = validated
    return alg


def perp2_projection_check(fg: FilteredGroup, ln_lat: FiniteLattice, lc_alg: BooleanAlg) -> Check:
    """``perp^2`` maps ``ln_lat`` onto ``lc_alg`` preserving meet and (De Morgan) join."""
    lc = lc_alg.lattice
    image = []
    for alpha in ln_lat.elements:
        twice = perp_of_rep(fg, perp_of_rep(fg, alpha.rep))
        key = twice.canonical_key
        if key not in lc._position:
            return Check(False, ("not in LC", alpha.describe(fg)))
        image.append(lc.position(key))
    if set(image) != set(range(lc.n)):
        missing = min(set(range(lc.n)) - set(image))
        return Check(False, ("not surjective", lc.label(missing)))
    return lattice_hom_check(image, ln_lat, lc, "full")


# -- Lemma identities on normal subgroups --------------------------------------------


def abelian_normal_witness(g: GroupHandle) -> GroupHandle | None:
    """A nontrivial abelian normal subgroup of ``g``, or None.

    Minimal normal subgroups are normal closures of single elements, so it is
    enough to test one closure per conjugacy class.
    """
    for cls in pg.conjugacy_classes(g):
        x = pg.Perm._trusted(g.elements[cls[0]])
        if x.is_identity():
            continue
        nc = pg.normal_closure(g, [x])
        if pg.is_abelian(nc):
            return nc
    return None


def cclem_report(g: GroupHandle, a: GroupHandle, b: GroupHandle) -> dict[str, bool]:
    for name, h in (("a", a), ("b", b)):
        if not h.issubgroup(g) or not pg.is_normal(g, h):
            raise PreconditionError(f"{name} is not a normal subgroup")
    w = abelian_normal_witness(g)
    if w is not None:
        raise PreconditionError("group has a nontrivial abelian normal subgroup",
                                witness=[x.to_list() for x in w.canonical_generators],
                                witness_order=w.order())

    def c(x, y):
        return pg.centraliser(x, y)

    ab = pg.intersection(a, b)
    return {
        "double_centraliser_meet": c(g, c(g, ab)) == pg.intersection(c(g, c(g, a)), c(g, c(g, b))),
        "centraliser_of_meet": c(a, b) == c(a, ab),
        "relative_double_centraliser": c(a, c(g, b)) == c(a, c(a, b)),
    }


def cclem_check(g: GroupHandle, a: GroupHandle, b: GroupHandle) -> bool:
    return all(cclem_report(g, a, b).values())
