"""Acceptance criteria, one test per criterion.

Each test prints a single ``CRITERION n: PASS|FAIL`` line with its runtime and
a short detail; the lines are repeated in the terminal summary.  Runtime
limits are part of each criterion.  Run directly with
``python3 tests/test_acceptance.py`` to get only the summary lines.
"""

from __future__ import annotations

import functools
import itertools
import random
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles as orc  # noqa: E402
from conftest import abelian_chain  # noqa: E402
from tdlc_lattice import permgroup as pg  # noqa: E402
from tdlc_lattice.branch import (ClopenSet, clopen_algebra, clopens_up_to, latrist_sides,  # noqa: E402
                                 rist, theta_embedding, tree_group)
from tdlc_lattice.centlat import (abelian_normal_witness, cclem_report, lc_algebra,  # noqa: E402
                                  perp, perp2_projection_check, screen)
from tdlc_lattice.decomp import krs_decompose, ld_lattice  # noqa: E402
from tdlc_lattice.errors import (HypothesisRejected, InternalInconsistency,  # noqa: E402
                                 LatticeToolError, TruncationArtefact)
from tdlc_lattice.filtration import (FilteredGroup, c_stable_check, canonical_class,  # noqa: E402
                                     fixed_classes, is_locally_normal, ln_lattice,
                                     qz_witness)
from tdlc_lattice.lattice import (FiniteLattice, boolflip_construct, de_morgan_check,  # noqa: E402
                                  is_boolean, is_distributive, modularity_check,
                                  powerset_algebra, relabel, subalgebra_generated)
from tdlc_lattice.permgroup import GroupHandle, Perm  # noqa: E402
from tdlc_lattice.radicals import (QuotientFiltered, c_semisimple_check,  # noqa: E402
                                   qualifying_normal_subgroups, qz_hypercentre, regular_radical)
from tdlc_lattice.stone import (AlgebraAction, embedding_by_key, equivariant_quotient,  # noqa: E402
                                stone_space)
from tdlc_lattice.suites import leaf_atoms  # noqa: E402

warnings.filterwarnings("ignore", module="tdlc_lattice")

RESULTS: dict[int, str] = {}


def criterion(number: int, title: str, limit: float):
    """Time the body, print one PASS/FAIL line and fail the test on any miss."""
    def wrap(body):
        @functools.wraps(body)
        def run(*args, **kwargs):
            start = time.perf_counter()
            try:
                ok, detail = body(*args, **kwargs)
            except LatticeToolError as exc:
                ok, detail = False, exc.reason
            elapsed = time.perf_counter() - start
            if elapsed >= limit:
                ok, detail = False, f"over time limit {limit:.0f}s; {detail}"
            line = (f"CRITERION {number}: {'PASS' if ok else 'FAIL'} [{elapsed:.1f}s / {limit:.0f}s] "
                    f"{title} -- {detail}")
            RESULTS[number] = line
            print(line, flush=True)
            assert ok, line
        return run
    return wrap


def as_set(h):
    return frozenset(tuple(int(x) for x in row) for row in h.elements)


@functools.lru_cache(maxsize=None)
def trees(depth):
    return tree_group(2, depth)


# -- 1 ------------------------------------------------------------------------------


@criterion(1, "W_4 level-2 splitting gives 16 distinct sub-product classes in LN", 60)
def test_criterion_01_structure_lattice_counts():
    ta = trees(4)
    fg = ta.fg
    lat = ln_lattice(fg, 2)
    present = {c.key for c in lat.elements}
    vertices = ta.tree.vertices(2)
    keys = []
    for r in range(len(vertices) + 1):
        for sub in itertools.combinations(vertices, r):
            keys.append(canonical_class(fg, rist(ta, ClopenSet.from_vertices(ta.tree, sub))).key)
    distinct = len(set(keys))
    inside = sum(k in present for k in set(keys))
    ok = len(keys) == 16 and distinct == 16 and inside == 16
    return ok, f"{distinct} distinct, {inside} in LN ({lat.n} classes)"


# -- 2 ------------------------------------------------------------------------------


@criterion(2, "simple group with constant chain has LN = {0, inf}", 1)
def test_criterion_02_degenerate_lattice():
    sizes = {}
    for name, g in (("A5", pg.alternating_group(5)), ("A6", pg.alternating_group(6))):
        fg = FilteredGroup.constant(g)
        lat = ln_lattice(fg, fg.k)
        orders = sorted(c.rep.order() for c in lat.elements)
        sizes[name] = orders
    ok = sizes == {"A5": [1, 60], "A6": [1, 360]}
    return ok, f"class orders {sizes}"


# -- 3 ------------------------------------------------------------------------------


@criterion(3, "modularity of LN outputs (W_3, W_4 level-restricted, (Z/8)^2)", 120)
def test_criterion_03_modularity():
    cases = [(f"W_3 mw{w}", trees(3).fg, w) for w in range(3)]
    cases.append(("W_4 mw2", trees(4).fg, 2))
    z8 = abelian_chain(8, 2)
    cases += [(f"(Z/8)^2 mw{w}", z8, w) for w in range(3)]
    bad = []
    sizes = []
    for name, fg, w in cases:
        lat = ln_lattice(fg, w)
        sizes.append(f"{name}:{lat.n}")
        verdict = modularity_check(lat)
        if not verdict:
            bad.append((name, verdict.witness))
    return not bad, f"violations {bad or 0}; sizes {', '.join(sizes)}"


# -- 4 ------------------------------------------------------------------------------


def complement_is_valid(lat: FiniteLattice, f) -> bool:
    """Independent check of the boolflip hypothesis on plain Python lists."""
    n = lat.n
    leq = lat.leq.tolist()
    meet = lat.meet.tolist()
    if sorted(set(f)) != list(range(n)) or any(f[f[a]] != a for a in range(n)):
        return False
    for a in range(n):
        for b in range(n):
            if leq[a][b] and not leq[f[b]][f[a]]:
                return False
            if (meet[a][b] == lat.bottom) != bool(leq[b][f[a]]):
                return False
    return True


def semilattice(alg):
    lat = alg.lattice
    return FiniteLattice(lat.elements, lat.leq, keys=lat.keys, meet=lat.meet, with_join=False)


@criterion(4, "boolflip on 100 random power sets and 20 mutated involutions", 30)
def test_criterion_04_boolflip():
    rng = random.Random(20240531)
    built = 0
    internal = []
    for _ in range(100):
        n = rng.randint(0, 5)
        base = powerset_algebra(n)
        perm = list(range(len(base)))
        rng.shuffle(perm)
        alg = relabel(base, perm)
        try:
            out = boolflip_construct(semilattice(alg), alg.complement)
        except InternalInconsistency as exc:
            internal.append(exc.reason)
            continue
        if (is_boolean(out) and de_morgan_check(out) and is_distributive(out.lattice)
                and np.array_equal(out.lattice.join, alg.lattice.join)):
            built += 1
    rejected = 0
    mutants = 0
    while mutants < 20:
        n = rng.randint(2, 5)
        base = powerset_algebra(n)
        lat = semilattice(base)
        f = base.complement.tolist()
        if mutants % 2 == 0:
            a, b = rng.sample(range(len(f)), 2)
            tau = list(range(len(f)))
            tau[a], tau[b] = b, a
            g = [tau[f[tau[x]]] for x in range(len(f))]
        else:
            g = list(f)
            a = rng.randrange(len(f))
            g[a] = rng.choice([x for x in range(len(f)) if x != f[a]])
        if complement_is_valid(lat, g):
            continue
        mutants += 1
        try:
            boolflip_construct(lat, g)
        except HypothesisRejected as exc:
            if exc.reason.get("witness"):
                rejected += 1
        except InternalInconsistency as exc:
            internal.append(exc.reason)
    ok = built == 100 and rejected == 20 and not internal
    return ok, f"built {built}/100, rejected {rejected}/20, internal errors {len(internal)}"


# -- 5 ------------------------------------------------------------------------------


@criterion(5, "LC axioms, perp^2 projection and theta on W_3, W_4 at margin (2,1)", 300)
def test_criterion_05_centraliser_lattice():
    failures = []
    for depth in (3, 4):
        ta = trees(depth)
        fg = ta.fg
        name = f"W_{depth}"
        try:
            ln = ln_lattice(fg, 1)
            lc = lc_algebra(fg, ln.elements, (2, 1))
            for label, verdict in (("boolean", is_boolean(lc)), ("de morgan", de_morgan_check(lc)),
                                   ("perp^2", perp2_projection_check(fg, ln, lc))):
                if not verdict:
                    failures.append(f"{name} {label}: {verdict.witness}")
        except LatticeToolError as exc:
            failures.append(f"{name} lc: {exc.reason['error']} {exc.reason['message']}")
        try:
            theta_embedding(ta, 2)
        except LatticeToolError as exc:
            failures.append(f"{name} theta: {exc.reason['message']} at {exc.reason.get('clopen')}")
    return not failures, "; ".join(failures) or "all hold"


# -- 6 ------------------------------------------------------------------------------


@criterion(6, "rist(c) = C(C(rist(c))) on U_k for clopens of level <= 2 in W_4", 300)
def test_criterion_06_latrist():
    ta = trees(4)
    bad = []
    sets = clopens_up_to(ta.tree, ta.tree.depth - 2)
    for c in sets:
        left, right = latrist_sides(ta, c)
        if not left == right:
            bad.append(f"{c}:{left.order()}vs{right.order()}")
    return not bad, f"{len(sets) - len(bad)}/{len(sets)} hold; failing {bad[:4]}"


# -- 7 ------------------------------------------------------------------------------


@criterion(7, "KRS of S3 x S3: 2 factors, 4 direct factors, matching the oracle", 60)
def test_criterion_07_krs():
    g, _ = pg.direct_product(pg.symmetric_group(3), pg.symmetric_group(3))
    dec = krs_decompose(g)
    oracle = orc.direct_factor_pairs(as_set(g), g.degree)
    got = {as_set(f) for f in dec.direct_factors()}
    ok = len(dec.factors) == 2 and dec.meta["direct_factor_count"] == 4 and got == oracle
    return ok, (f"{len(dec.factors)} factors, {dec.meta['direct_factor_count']} direct factors, "
                f"oracle {len(oracle)}")


# -- 8 ------------------------------------------------------------------------------


def a5_by_z8():
    g, (a, z) = pg.direct_product(pg.alternating_group(5), pg.cyclic_group(8))
    x = z.generators[0]
    chain = [g] + [pg.join(a, GroupHandle(g.degree, [x ** (2 ** s)])) for s in (1, 2)]
    return FilteredGroup(g, chain, name="A5 x Z/8")


@criterion(8, "radicals: values, quotient re-pass, minimality, containment", 600)
def test_criterion_08_radicals():
    cases = [
        ("(Z/8)^2", abelian_chain(8, 2), (2, 1), "everything"),
        ("(Z/4)^2", abelian_chain(4, 2), (2, 1), "everything"),
        ("(Z/16)^2", abelian_chain(16, 3), (2, 1), "everything"),
        ("W_4", trees(4).fg, (2, 1), "trivial"),
        ("W_3", trees(3).fg, (1, 1), None),
        ("A5 x Z/8", a5_by_z8(), (2, 1), None),
    ]
    problems = []
    minimal_checked = 0
    for name, fg, levels, expect in cases:
        g = fg.ambient
        qz = qz_hypercentre(fg, levels=levels)
        rad = regular_radical(fg, levels)
        if expect == "everything" and not (qz == g and rad == g):
            problems.append(f"{name}: expected G, got {qz.order()}/{rad.order()}")
        if expect == "trivial" and not (qz.is_trivial() and rad.is_trivial()):
            problems.append(f"{name}: expected 1, got {qz.order()}/{rad.order()}")
        if not qz.issubgroup(rad):
            problems.append(f"{name}: QZ not inside R")
        q_qz, q_rad = (fg if n.is_trivial() else QuotientFiltered(fg, n).quotient
                       for n in (qz, rad))
        if qz_witness(q_qz, *levels) is not None:
            problems.append(f"{name}: G/QZ fails the predicate")
        if not c_semisimple_check(q_rad, levels):
            problems.append(f"{name}: G/R fails the predicate")
        if g.order() <= 512:
            oracle = orc.normal_subgroups_by_classes(as_set(g), g.degree)
            for pred, radical in (("qz", qz), ("semisimple", rad)):
                keys = {as_set(n) for n in qualifying_normal_subgroups(fg, pred, levels)}
                if not keys <= oracle or as_set(radical) != frozenset.intersection(*keys):
                    problems.append(f"{name}: {pred} radical is not the least qualifying subgroup")
            minimal_checked += 1
    return not problems, (f"{len(cases)} inputs, minimality on {minimal_checked}; "
                          f"{'; '.join(problems) or 'no problems'}")


# -- 9 ------------------------------------------------------------------------------


@criterion(9, "fixed_classes(W_3) has exactly 4 classes and matches the submodule oracle", 60)
def test_criterion_09_fixed_points():
    ta = trees(3)
    fixed = fixed_classes(ta.fg, ln_lattice(ta.fg, 0))
    perms = [[g(2 * v) // 2 for v in range(4)] for g in ta.group.generators]
    oracle = orc.invariant_subspaces(4, perms)
    orders = sorted(c.rep.order() for c in fixed)
    ok = len(fixed) == 4 and len(oracle) == len(fixed)
    return ok, f"{len(fixed)} classes (orders {orders}); oracle {len(oracle)}; required 4"


# -- 10 -----------------------------------------------------------------------------


@criterion(10, "Stone round trip on every algebra; level-1 into level-2 quotient", 60)
def test_criterion_10_stone():
    rng = random.Random(7)
    algebras = [(f"2^{n}", powerset_algebra(n)) for n in range(11)]
    for i in range(20):
        n = rng.randint(1, 6)
        perm = list(range(2 ** n))
        rng.shuffle(perm)
        algebras.append((f"relabelled 2^{n} #{i}", relabel(powerset_algebra(n), perm)))
    for depth in (3, 4):
        tree = trees(depth).tree
        algebras += [(f"clopens W_{depth} level {lvl}", clopen_algebra(tree, lvl))
                     for lvl in range(min(depth, 3) + 1)]
    big = powerset_algebra(5)
    algebras += [(f"subalgebra #{i}", subalgebra_generated(big, rng.sample(range(32), 2)))
                 for i in range(5)]
    fg = FilteredGroup.constant(pg.direct_product(pg.alternating_group(5),
                                                  pg.alternating_group(5))[0])
    algebras.append(("LD(A5 x A5)", ld_lattice(fg, canonical_class(fg, fg.ambient))))
    algebras.append(("LC(A5 x A5)", lc_algebra(fg, ln_lattice(fg, 0).elements)))
    failed = [name for name, alg in algebras if len(alg) <= 1024
              and not stone_space(alg).round_trip_check()]
    ta = trees(3)
    a1, a2 = clopen_algebra(ta.tree, 1), clopen_algebra(ta.tree, 2)
    acts = [AlgebraAction.from_points(ta.group, a, leaf_atoms(a, ta.tree)) for a in (a1, a2)]
    q = equivariant_quotient(embedding_by_key(a1, a2), a1, a2, *acts)
    src, tgt = stone_space(a2), stone_space(a1)
    truncation = {}
    for p in range(len(src)):
        address = a2.lattice.elements[src.atoms[p]].antichain[0]
        truncation[p] = next(t for t in range(len(tgt))
                             if a1.lattice.elements[tgt.atoms[t]].antichain[0] == address[:1])
    exact = all(q.mapping[p] == truncation[p] for p in range(len(src)))
    ok = not failed and exact
    return ok, (f"{len(algebras) - len(failed)}/{len(algebras)} round trips; quotient "
                f"{q.labelled()} {'exact' if exact else 'WRONG'}")


# -- 11 -----------------------------------------------------------------------------


def _subjects(name):
    if name in ("W_3", "W_4"):
        ta = trees(int(name[-1]))
        fg = ta.fg
        hs = list(fg.chain) + [pg.centre(fg.ambient)]
        hs += [rist(ta, c) for c in clopens_up_to(ta.tree, 2)]
        return fg, hs
    make = {
        "S3 x S3": lambda: pg.direct_product(pg.symmetric_group(3), pg.symmetric_group(3))[0],
        "S3 x S4": lambda: pg.direct_product(pg.symmetric_group(3), pg.symmetric_group(4))[0],
    }[name]
    g = make()
    return FilteredGroup.constant(g), pg.all_subgroups(g)


def _wreath():
    a5 = pg.alternating_group(5, degree=10)
    swap = Perm(tuple(list(range(5, 10)) + list(range(5))))
    g = GroupHandle(10, list(a5.generators) + [swap], name="A5 wr C2")
    base = pg.join(a5, GroupHandle(10, [x.conj(swap) for x in a5.generators]))
    return FilteredGroup(g, [g, base])


def _has_abelian_locally_normal(fg) -> bool:
    """Some x != 1 commutes with all its conjugates under the deepest member."""
    gens = list(fg.deep.generators)
    seen = set()
    for row in fg.ambient.elements[1:]:
        x = Perm._trusted(row)
        if x in seen:
            continue
        orbit, frontier = {x}, [x]
        while frontier:
            y = frontier.pop()
            for u in gens:
                z = y.conj(u)
                if z not in orbit:
                    orbit.add(z)
                    frontier.append(z)
        seen |= orbit
        conj = list(orbit)
        if all(a * b == b * a for i, a in enumerate(conj) for b in conj[i + 1:]):
            return True
    return False


def _stability_violations(fg, ks) -> int:
    bad = 0
    for k in ks:
        for u, v in itertools.product(fg.chain, repeat=2):
            if not pg.centraliser(u, pg.intersection(k, u)) == pg.centraliser(u, pg.intersection(k, v)):
                bad += 1
    return bad


@criterion(11, "C^3 = C, QC identities, C-stability stability and centraliser identities", 600)
def test_criterion_11_double_centralisers():
    C, I = pg.centraliser, pg.intersection
    counts = {"elcent": [0, 0], "bewcor": [0, 0], "goodqc": [0, 0], "cstab": [0, 0],
              "cclem": [0, 0]}
    violations = []
    ineligible = []
    for name in ("W_3", "W_4", "S3 x S3", "S3 x S4"):
        fg, hs = _subjects(name)
        g, deep = fg.ambient, fg.deep
        for h in hs:
            c = C(g, h)
            cc = C(g, c)
            counts["elcent"][0] += 1
            if h.issubgroup(cc) and C(g, cc) == c:
                counts["elcent"][1] += 1
            else:
                violations.append(f"elcent {name} {h.order()}")
            hk = I(h, deep)
            if C(h, hk).is_trivial():
                counts["bewcor"][0] += 1
                if I(C(g, hk), pg.normaliser(g, h)) == c:
                    counts["bewcor"][1] += 1
                else:
                    violations.append(f"bewcor {name} {h.order()}")
            try:
                stable = c_stable_check(fg, h)
            except TruncationArtefact:
                stable = False
            if stable and is_locally_normal(fg, h) is not None:
                counts["goodqc"][0] += 1
                ok = all(C(u, hk) == C(u, I(h, u))
                         and C(u, I(C(g, hk), deep)) == C(u, C(u, I(h, u))) for u in fg.chain)
                counts["goodqc"][1] += ok
                if not ok:
                    violations.append(f"goodqc {name} {h.order()}")
        if _has_abelian_locally_normal(fg):
            ineligible.append(f"{name}: abelian locally normal subgroup")
        if abelian_normal_witness(g) is not None:
            ineligible.append(f"{name}: abelian normal subgroup")
    # inputs meeting the hypotheses of the C-stability and centraliser identities
    extras = [
        ("A5 x A5", FilteredGroup.constant(pg.direct_product(pg.alternating_group(5),
                                                             pg.alternating_group(5))[0])),
        ("A5 wr C2", _wreath()),
        ("S5 x A5", FilteredGroup.constant(pg.direct_product(pg.symmetric_group(5),
                                                             pg.alternating_group(5))[0])),
    ]
    for name, fg in extras:
        g = fg.ambient
        if _has_abelian_locally_normal(fg) or not screen(fg).passed:
            ineligible.append(f"{name}: hypotheses fail")
            continue
        normals = pg.normal_subgroups(g)
        locally_normal = [h for h in pg.normal_subgroups(fg.deep) if is_locally_normal(fg, h)]
        counts["cstab"][0] += len(locally_normal)
        bad = _stability_violations(fg, locally_normal)
        counts["cstab"][1] += len(locally_normal) - min(bad, len(locally_normal))
        if bad:
            violations.append(f"cstab {name} {bad}")
        for a, b in itertools.product(normals, repeat=2):
            counts["cclem"][0] += 1
            report = cclem_report(g, a, b)
            if all(report.values()):
                counts["cclem"][1] += 1
            else:
                violations.append(f"cclem {name} {a.order()},{b.order()} {report}")
        for lc_class in ln_lattice(fg, 0).elements:
            try:
                perp(fg, lc_class)
            except TruncationArtefact:
                violations.append(f"perp stability {name} {lc_class.rep.order()}")
    summary = ", ".join(f"{k} {v[1]}/{v[0]}" for k, v in counts.items())
    return not violations, (f"{summary}; violations {violations[:3] or 0}; "
                            f"ineligible: {'; '.join(ineligible)}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:terminal", "-s"]) and 1)
