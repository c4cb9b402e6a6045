"""Named verification suites run by ``verify``.

A suite is a list of named checks on one input.  Each check passes, fails
(a checked identity broke) or is skipped (its precondition does not hold for
this input, e.g. screening failed).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

from . import permgroup as pg
from .branch import (TreeAction, branch_certify, clopen_algebra, clopens_up_to, latrist_sides,
                     theta_embedding)
from .centlat import cclem_report, lc_algebra, perp2_projection_check, screen
from .errors import InputError, PropertyViolation
from .filtration import FilteredGroup, ln_lattice
from .lattice import (Check, boolflip_construct, de_morgan_check, is_boolean, is_distributive,
                      modularity_check, powerset_algebra, relabel)
from .radicals import qz_hypercentre, regular_radical, stability_checks
from .stone import (AlgebraAction, embedding_by_key, equivariant_quotient, is_smooth,
                    stone_space)

__all__ = ["CheckResult", "SUITES", "run_suite", "leaf_atoms"]


@dataclass
class CheckResult:
    name: str
    status: str
    detail: object = None

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "detail": self.detail}


def _run(name: str, fn: Callable[[], object]) -> CheckResult:
    try:
        out = fn()
    except PropertyViolation as exc:
        return CheckResult(name, "failed", exc.reason)
    except InputError as exc:
        return CheckResult(name, "skipped", exc.reason)
    if isinstance(out, Check):
        return CheckResult(name, "passed" if out.ok else "failed",
                           None if out.ok else _plain(out.witness))
    if isinstance(out, tuple):
        ok, detail = out
        return CheckResult(name, "passed" if ok else "failed", _plain(detail))
    return CheckResult(name, "passed" if out else "failed")


def _plain(x):
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)


def leaf_atoms(alg, tree) -> list[int]:
    """Atom position of every leaf, for a clopen algebra."""
    space = stone_space(alg)
    out = [0] * tree.leaves
    for i, a in enumerate(space.atoms):
        for leaf in alg.lattice.elements[a].leaves:
            out[leaf] = i
    return out


def _algebra_axioms(prefix: str, alg) -> list[CheckResult]:
    return [
        _run(f"{prefix}: boolean axioms", lambda: is_boolean(alg)),
        _run(f"{prefix}: de morgan", lambda: de_morgan_check(alg)),
        _run(f"{prefix}: distributive", lambda: is_distributive(alg.lattice)),
        _run(f"{prefix}: boolflip reconstructs", lambda: _reconstructs(alg)),
        _run(f"{prefix}: stone round trip", lambda: stone_space(alg).round_trip_check()),
    ]


def _reconstructs(alg) -> bool:
    lat = alg.lattice
    rebuilt = boolflip_construct(lat, alg.complement)
    return bool((rebuilt.lattice.join == lat.join).all())


def boolean_suite(fg: FilteredGroup, ta: TreeAction | None, *, depth: int, max_witness: int,
                  seed: int = 0) -> list[CheckResult]:
    out = []
    rng = random.Random(seed)
    for n in range(0, 6):
        alg = powerset_algebra(n)
        out += _algebra_axioms(f"power set 2^{n}", alg)
    for trial in range(5):
        n = rng.randint(1, 5)
        alg = powerset_algebra(n)
        perm = list(range(alg.lattice.n))
        rng.shuffle(perm)
        out += _algebra_axioms(f"relabelled 2^{n} #{trial}", relabel(alg, perm))
    if ta is not None:
        for level in range(min(depth, ta.tree.depth, 3) + 1):
            out += _algebra_axioms(f"clopens level {level}", clopen_algebra(ta.tree, level))
    return out


def modular_suite(fg, ta, *, depth, max_witness, seed=0) -> list[CheckResult]:
    lat = ln_lattice(fg, max_witness)
    return [_run(f"ln lattice (max witness {max_witness}, {lat.n} classes): modular",
                 lambda: modularity_check(lat))]


def centlat_suite(fg, ta, *, depth, max_witness, seed=0) -> list[CheckResult]:
    out = [_run("margin screening", lambda: (screen(fg).passed, screen(fg).to_dict()))]
    state = {}

    def build():
        ln = ln_lattice(fg, max_witness)
        state["ln"] = ln
        state["lc"] = lc_algebra(fg, ln.elements)
        return is_boolean(state["lc"])

    out.append(_run("lc algebra: boolean axioms", build))
    if "lc" in state:
        out.append(_run("perp^2 projection", lambda: perp2_projection_check(
            fg, state["ln"], state["lc"])))
    g = fg.ambient
    if g.order() <= 2 ** 10:
        subs = pg.normal_subgroups(g)
        failures = []

        def identities():
            for a in subs:
                for b in subs:
                    report = cclem_report(g, a, b)
                    if not all(report.values()):
                        failures.append([a.order(), b.order(), report])
            return not failures, failures[:1]

        out.append(_run("centraliser identities on normal subgroups", identities))
    return out


def stone_suite(fg, ta, *, depth, max_witness, seed=0) -> list[CheckResult]:
    out = []
    if ta is None:
        def lc_round_trip():
            return stone_space(lc_algebra(fg, ln_lattice(fg, max_witness).elements)
                               ).round_trip_check()
        out.append(_run("lc algebra: stone round trip", lc_round_trip))
        return out
    top = min(depth, ta.tree.depth - 1)
    algs = [clopen_algebra(ta.tree, lvl) for lvl in range(top + 1)]
    acts = [AlgebraAction.from_points(ta.group, a, leaf_atoms(a, ta.tree)) for a in algs]
    for lvl, (alg, act) in enumerate(zip(algs, acts)):
        out.append(_run(f"level {lvl}: round trip", lambda a=alg: stone_space(a).round_trip_check()))
        out.append(_run(f"level {lvl}: action by automorphisms", act.check))
        out.append(_run(f"level {lvl}: smooth", lambda a=act: is_smooth(a, fg)))
    for lvl in range(top):
        def quotient(lo=lvl):
            emb = embedding_by_key(algs[lo], algs[lo + 1])
            q = equivariant_quotient(emb, algs[lo], algs[lo + 1], acts[lo], acts[lo + 1])
            big, small = algs[lo + 1].lattice, algs[lo].lattice
            ok = all(big.elements[q.source.atoms[p]].antichain[0][:lo]
                     == small.elements[q.target.atoms[t]].antichain[0]
                     for p, t in enumerate(q.mapping))
            return ok, q.labelled()
        out.append(_run(f"level {lvl} into {lvl + 1}: quotient truncates addresses", quotient))
    return out


def radicals_suite(fg, ta, *, depth, max_witness, seed=0) -> list[CheckResult]:
    state = {}

    def qz():
        state["qz"] = qz_hypercentre(fg)
        return True, {"order": state["qz"].order()}

    def rad():
        state["rad"] = regular_radical(fg)
        return True, {"order": state["rad"].order()}

    out = [_run("quasi-hypercentre", qz), _run("regular radical", rad)]
    if "qz" in state and "rad" in state:
        out.append(_run("containment", lambda: state["qz"].issubgroup(state["rad"])))
    if fg.k >= 1:
        def stab():
            report = stability_checks(fg, 1)
            bad = [k for k, v in report.identities.items() if v["status"] == "violation"]
            return not bad, report.to_dict()
        out.append(_run("stability under U_1", stab))
    return out


def branch_suite(fg, ta, *, depth, max_witness, seed=0) -> list[CheckResult]:
    if ta is None:
        raise InputError("branch suite needs a tree input")
    level = min(depth, ta.tree.depth - 1)
    out = [_run("branch certificate", lambda: (lambda r: (r.weakly_branch, r.to_dict()))(
        branch_certify(ta, level)))]
    for c in clopens_up_to(ta.tree, max(ta.tree.depth - 2, 0)):
        def latrist(c=c):
            left, right = latrist_sides(ta, c)
            return left == right, {"rist": left.order(), "double_centraliser": right.order()}
        out.append(_run(f"latrist {c}", latrist))
    out.append(_run("theta embedding", lambda: (True, theta_embedding(ta, min(level, 2),
                                                                       check_ld=False).to_dict(fg))))
    return out


SUITES = {
    "boolean": boolean_suite,
    "modular": modular_suite,
    "centlat": centlat_suite,
    "stone": stone_suite,
    "radicals": radicals_suite,
    "branch": branch_suite,
}


def run_suite(name: str, fg: FilteredGroup, ta: TreeAction | None, *, depth: int,
              max_witness: int, seed: int = 0) -> list[CheckResult]:
    if name == "all":
        out = []
        for key, fn in SUITES.items():
            if key == "branch" and ta is None:
                continue
            out += [CheckResult(f"{key}/{r.name}", r.status, r.detail)
                    for r in fn(fg, ta, depth=depth, max_witness=max_witness, seed=seed)]
        return out
    if name not in SUITES:
        raise InputError("unknown suite", suite=name, known=sorted(SUITES) + ["all"])
    return SUITES[name](fg, ta, depth=depth, max_witness=max_witness, seed=seed)
