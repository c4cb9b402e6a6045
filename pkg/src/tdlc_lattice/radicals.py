"""Quasi-hypercentre and the abelian-class regular radical of a filtered group.

Both radicals are intersections of the normal subgroups whose quotient passes
a margin predicate: trivial quasi-centre for ``QZ^inf``, and additionally no
visible abelian locally normal subgroup for ``R_[A]``.  Quotients are realised
as the regular permutation action on right cosets, so they live in the same
engine as everything else.  Class membership in [A] is never decided
directly; only the semisimplicity characterisation is used.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import permgroup as pg
from .errors import (InternalInconsistency, PreconditionError, ResourceError,
                     TruncationArtefact)
from .filtration import (FilteredGroup, canonical_class, is_locally_normal, qz_witness,
                         visible_abelian_witness)
from .lattice import PASS, Check
from .permgroup import GroupHandle, Perm

__all__ = [
    "QuotientFiltered", "StableClassAbelian", "qc_modulo", "qz_hypercentre",
    "c_semisimple_check", "regular_radical", "qualifying_normal_subgroups",
    "StabilityReport", "stability_checks", "NormalRepresentative",
    "normal_representative", "normal_representative_report", "radical_report",
]

QUOTIENT_DEGREE_CAP = min(2 ** 14, pg.MAX_DEGREE)


class StableClassAbelian:
    """Marker for the class [A]; membership is never computed."""

    name = "[A]"


def _gens(h: GroupHandle) -> list[list[int]]:
    return [g.to_list() for g in h.canonical_generators]


def _resolve_levels(fg: FilteredGroup, levels) -> tuple[int, int]:
    i, j = tuple(levels) if levels is not None else fg.default_levels()
    fg.level(i)
    fg.level(j)
    if j > i:
        raise PreconditionError("margin levels need j <= i", i=i, j=j)
    return i, j


def _artefact_or_bug(fg: FilteredGroup):
    return InternalInconsistency if fg.is_constant() else TruncationArtefact


# -- quotients ---------------------------------------------------------------------------


class QuotientFiltered:
    """``G/N`` acting on right cosets of ``N``, with the image chain ``U_i N / N``."""

    def __init__(self, base: FilteredGroup, kernel: GroupHandle):
        g = base.ambient
        if not kernel.issubgroup(g) or not pg.is_normal(g, kernel):
            raise PreconditionError("kernel is not a normal subgroup of the ambient group")
        m = g.order() // kernel.order()
        if m > QUOTIENT_DEGREE_CAP:
            raise ResourceError("quotient degree exceeds the cap", degree=m,
                                cap=QUOTIENT_DEGREE_CAP)
        self.base = base
        self.kernel = kernel
        rows = g.elements
        labels = np.full(len(rows), -1, dtype=np.int64)
        reps = []
        krows = kernel.elements.astype(np.int64)
        for idx in range(len(rows)):
            if labels[idx] >= 0:
                continue
            coset = g.index.lookup(rows[idx][krows])
            labels[coset] = len(reps)
            reps.append(idx)
        self.labels = labels
        self._reps = rows[np.asarray(reps)].astype(np.int64)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            image = [self.image(u) for u in base.chain]
            self.quotient = FilteredGroup(image[0], image, margin=base.margin,
                                          name=f"{base.name}/N")

    @property
    def degree(self) -> int:
        return len(self._reps)

    def project(self, x: Perm) -> Perm:
        """Permutation of the cosets induced by ``x``."""
        arr = np.asarray(x.images, dtype=np.int64)
        pos = self.base.ambient.index.lookup(arr[self._reps])
        return Perm._trusted(self.labels[pos])

    def image(self, h: GroupHandle) -> GroupHandle:
        return GroupHandle(self.degree, [self.project(x) for x in h.generators])

    def preimage_mask(self, q: GroupHandle) -> np.ndarray:
        """Mask over ``G.elements`` of the full preimage of ``q``.

        In the regular action an element is determined by the image of the
        trivial coset, which is the label of its own coset.
        """
        present = np.unique(q.elements[:, 0].astype(np.int64))
        return np.isin(self.labels, present)

    def preimage(self, q: GroupHandle) -> GroupHandle:
        return pg.subgroup_from_mask(self.base.ambient, self.preimage_mask(q))


# -- quasi-centraliser modulo ------------------------------------------------------------


def _commutators_in(g: GroupHandle, x: Perm, target: GroupHandle) -> np.ndarray:
    """Mask over ``g.elements`` of those ``y`` with ``[y, x] = y^-1 x^-1 y x`` in ``target``."""
    rows = g.elements.astype(np.int64)
    inv = pg._inverse_rows(g.elements).astype(np.int64)
    xa = np.asarray(x.images, dtype=np.int64)
    xinv = np.argsort(xa)
    # right action: (a*b)[i] = b[a[i]]
    step = xinv[inv]
    step = np.take_along_axis(rows, step, axis=1)
    comm = xa[step]
    return target.contains_rows(comm.astype(g.elements.dtype))


def qc_modulo(fg: FilteredGroup, kpair: tuple[GroupHandle, GroupHandle]) -> GroupHandle:
    """``{g : [g, K n U_k] <= L}``, the deepest-level form of the quasi-centraliser modulo ``L``."""
    k_grp, l_grp = kpair
    fg.check_subgroup(k_grp, "K")
    fg.check_subgroup(l_grp, "L")
    if not l_grp.issubgroup(k_grp) or not pg.is_normal(k_grp, l_grp):
        raise PreconditionError("L must be a normal subgroup of K")
    g = fg.ambient
    for name, h in (("K", k_grp), ("L", l_grp)):
        cls = canonical_class(fg, h)
        for x in g.generators:
            if not canonical_class(fg, pg.conjugate(g, h, x)) == cls:
                raise PreconditionError(f"conjugates of {name} leave its class", generator=str(x))
    trace = pg.intersection(k_grp, fg.deep)
    mask = np.ones(len(g.elements), dtype=bool)
    # L is normalised by the trace, so generators of the trace suffice
    for x in trace.generators:
        mask &= _commutators_in(g, x, l_grp)
    result = pg.subgroup_from_mask(g, mask)
    if not l_grp.issubgroup(result):
        raise InternalInconsistency("quasi-centraliser modulo L does not contain L")
    if not pg.is_normal(g, result):
        raise _artefact_or_bug(fg)("quasi-centraliser modulo L is not normal at this depth",
                                   order=result.order())
    return result


# -- predicates ----------------------------------------------------------------------------


def c_semisimple_check(fg: FilteredGroup, levels=None) -> Check:
    """Margin-trivial quasi-centre and no visible abelian locally normal subgroup."""
    i, j = _resolve_levels(fg, levels)
    g = fg.ambient
    if not g.is_trivial() and pg.is_abelian(g) and not g.issubgroup(fg.level(j)):
        return Check(False, {"abelian": _gens(g)})
    qz = qz_witness(fg, i, j)
    if qz is not None:
        return Check(False, {"quasi_centre": qz.to_list()})
    ab = visible_abelian_witness(fg, i, j)
    if ab is not None:
        return Check(False, {"abelian": _gens(ab)})
    return PASS


def _qz_predicate(fg: FilteredGroup, levels) -> Check:
    i, j = levels
    w = qz_witness(fg, i, j)
    return PASS if w is None else Check(False, {"quasi_centre": w.to_list()})


_PREDICATES = {"qz": _qz_predicate, "semisimple": c_semisimple_check}


def qualifying_normal_subgroups(fg: FilteredGroup, predicate: str, levels=None,
                                budget: int = pg.DEFAULT_BUDGET,
                                max_count: int = pg.DEFAULT_COUNT_BUDGET) -> list[GroupHandle]:
    """Every normal ``N`` whose quotient passes ``predicate`` (``"qz"`` or ``"semisimple"``)."""
    levels = _resolve_levels(fg, levels)
    test = _PREDICATES[predicate]
    out = []
    for n in pg.normal_subgroups(fg.ambient, budget, max_count):
        if test(QuotientFiltered(fg, n).quotient, levels):
            out.append(n)
    return out


def _radical(fg: FilteredGroup, predicate: str, levels, budget: int) -> GroupHandle:
    g = fg.ambient
    test = _PREDICATES[predicate]
    if test(fg, levels):
        return pg.trivial_group(g.degree)
    try:
        subs = pg.normal_subgroups(g, budget)
    except ResourceError as exc:
        raise ResourceError("normal-subgroup enumeration over budget; try the qc route",
                            **{k: v for k, v in exc.reason.items()
                               if k not in {"error", "message"}}) from exc
    mask = np.ones(len(g.elements), dtype=bool)
    for n in subs:
        if n.is_trivial():
            continue
        if test(QuotientFiltered(fg, n).quotient, levels):
            mask &= n.contains_rows(g.elements)
    result = pg.subgroup_from_mask(g, mask)
    verdict = test(QuotientFiltered(fg, result).quotient, levels)
    if not verdict:
        raise _artefact_or_bug(fg)("quotient by the intersection fails the predicate",
                                   predicate=predicate, witness=verdict.witness)
    return result


def qz_hypercentre(fg: FilteredGroup, mode: str = "exhaustive", levels=None,
                   budget: int = pg.DEFAULT_BUDGET, open_index: int | None = None) -> GroupHandle:
    """``QZ^inf`` at the margin.

    ``exhaustive`` intersects the qualifying normal subgroups.  ``qc_route``
    takes ``V = U_t`` (``t`` defaults to the upper margin level), computes
    ``QZ^inf(V)`` on the inherited chain at its own default margin, and returns
    ``QC_G(V / QZ^inf(V))``.  ``both`` runs the two and insists they agree.
    """
    levels = _resolve_levels(fg, levels)
    if mode not in {"exhaustive", "qc_route", "both"}:
        raise PreconditionError("unknown mode", mode=mode)
    exhaustive = None
    if mode in {"exhaustive", "both"}:
        exhaustive = _radical(fg, "qz", levels, budget)
        if mode == "exhaustive":
            return exhaustive
    t = levels[0] if open_index is None else open_index
    sub = fg.open_subgroup(t)
    inner = _radical(sub, "qz", sub.default_levels(), budget)
    routed = qc_modulo(fg, (fg.level(t), inner))
    if exhaustive is not None and not routed == exhaustive:
        raise _artefact_or_bug(fg)("qc route and exhaustive search disagree",
                                   exhaustive_order=exhaustive.order(),
                                   qc_route_order=routed.order(), open_index=t)
    return routed


def regular_radical(fg: FilteredGroup, levels=None, budget: int = pg.DEFAULT_BUDGET) -> GroupHandle:
    """``R_[A]`` at the margin; contains ``QZ^inf`` by construction, which is re-checked."""
    levels = _resolve_levels(fg, levels)
    result = _radical(fg, "semisimple", levels, budget)
    qz = _radical(fg, "qz", levels, budget)
    if not qz.issubgroup(result):
        raise InternalInconsistency("quasi-hypercentre is not inside the regular radical")
    return result


# -- stability under open subgroups --------------------------------------------------------


@dataclass
class StabilityReport:
    open_index: int
    levels: tuple[int, int]
    sub_levels: tuple[int, int]
    identities: dict = field(default_factory=dict)

    @property
    def below_margin(self) -> bool:
        """The lower level does not reach below ``U_i``, so the sub-chain predicate is vacuous."""
        return self.levels[1] - self.open_index < 1

    def holds(self) -> bool:
        return all(v["status"] == "holds" for v in self.identities.values())

    def to_dict(self) -> dict:
        return {"open_index": self.open_index, "levels": list(self.levels),
                "sub_levels": list(self.sub_levels), "below_margin": self.below_margin,
                "identities": self.identities}


def stability_checks(fg: FilteredGroup, open_index: int, levels=None,
                     budget: int = pg.DEFAULT_BUDGET) -> StabilityReport:
    """Compare ``X(U_i)`` with ``X(G) n U_i`` for both radicals.

    Levels are re-indexed into the inherited chain and clamped at 0.  When the
    lower level lands on ``U_i`` itself the sub-chain predicate is vacuous and
    a mismatch is reported as ``artefact``; otherwise it is a ``violation``.
    """
    levels = _resolve_levels(fg, levels)
    sub = fg.open_subgroup(open_index)
    sub_levels = (max(levels[0] - open_index, 0), max(levels[1] - open_index, 0))
    report = StabilityReport(open_index, levels, sub_levels)
    h = fg.level(open_index)
    for name, fn in (("quasi_hypercentre", lambda f, lv: _radical(f, "qz", lv, budget)),
                     ("regular_radical", lambda f, lv: _radical(f, "semisimple", lv, budget))):
        whole = pg.intersection(fn(fg, levels), h)
        local = fn(sub, sub_levels)
        status = "holds" if local == whole else (
            "artefact" if report.below_margin else "violation")
        report.identities[name] = {"status": status,
                                   "sub_order": local.order(), "restricted_order": whole.order()}
    return report


# -- normal representatives -----------------------------------------------------------------


@dataclass
class NormalRepresentative:
    closure: GroupHandle
    index: int
    deep_index: int
    normalised_trace: tuple[int, int]

    def to_dict(self) -> dict:
        return {"order": self.closure.order(), "generators": _gens(self.closure),
                "index": self.index, "deep_index": self.deep_index,
                "normalised_trace": list(self.normalised_trace)}


def normal_representative_report(fg: FilteredGroup, l_grp: GroupHandle) -> NormalRepresentative:
    """Normal closure of a commensurated locally normal subgroup, with its index over ``l``."""
    fg.check_subgroup(l_grp)
    if is_locally_normal(fg, l_grp) is None:
        raise PreconditionError("subgroup is not locally normal")
    g = fg.ambient
    cls = canonical_class(fg, l_grp)
    for x in g.generators:
        if not canonical_class(fg, pg.conjugate(g, l_grp, x)) == cls:
            raise PreconditionError("subgroup is not commensurated at this depth",
                                    generator=x.to_list())
    m = pg.normal_closure(g, l_grp)
    if not l_grp.issubgroup(m):
        raise InternalInconsistency("normal closure does not contain the subgroup")
    m_deep = pg.intersection(m, fg.deep)
    if not cls.rep.issubgroup(m_deep):
        raise InternalInconsistency("deep trace of the closure misses the subgroup's trace")
    # some member l n U_t with the same class is normalised by a chain member
    trace = None
    for t in range(fg.k + 1):
        s = pg.intersection(l_grp, fg.level(t))
        if not canonical_class(fg, s) == cls:
            continue
        lnw = is_locally_normal(fg, s)
        if lnw is not None:
            trace = (t, lnw.level)
            break
    if trace is None:
        raise _artefact_or_bug(fg)("no chain member normalises a representative of the class")
    return NormalRepresentative(m, m.order() // l_grp.order(),
                                m_deep.order() // cls.rep.order(), trace)


def normal_representative(fg: FilteredGroup, l_grp: GroupHandle) -> GroupHandle:
    return normal_representative_report(fg, l_grp).closure


def radical_report(fg: FilteredGroup, levels=None, budget: int = pg.DEFAULT_BUDGET) -> dict:
    """Both radicals and the semisimplicity verdict as a JSON-ready dict."""
    levels = _resolve_levels(fg, levels)
    qz = _radical(fg, "qz", levels, budget)
    rad = _radical(fg, "semisimple", levels, budget)
    verdict = c_semisimple_check(fg, levels)
    return {
        "levels": list(levels),
        "quasi_hypercentre": {"order": qz.order(), "generators": _gens(qz)},
        "regular_radical": {"order": rad.order(), "generators": _gens(rad)},
        "contained": qz.issubgroup(rad),
        "semisimple": verdict.ok,
        "witness": verdict.witness,
    }


def radical_report_json(fg: FilteredGroup, levels=None) -> str:
    return json.dumps(radical_report(fg, levels), sort_keys=True, indent=2)
