"""Command-line front end.

Input is a JSON group spec, either

    {"kind": "permutation", "degree": 8,
     "generators": {"a": [1, 0, 2, ...], ...},
     "filtration": [["b", "c"], ["c"]],            # levels 1..k; level 0 is every generator
     "margin": 1}

or

    {"kind": "tree", "arity": 2, "depth": 4,
     "states": {"a": {"root_perm": [1, 0], "sections": ["e", "a"]}},
     "generators": ["a"]}

A tree spec may say ``"automaton": "full"`` or ``"odometer"`` instead of
listing states.  Filtration entries may also be inline image arrays.
Output is canonical JSON (sorted keys) or DOT.  Exit status: 0 success,
1 a checked property failed, 2 bad input, 3 budget exceeded.  Errors print a
JSON reason object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass
from typing import Any

from .branch import (TreeAction, TreeSpec, WreathAutomaton, branch_certify, clopen_algebra,
                     full_automaton, odometer_automaton, theta_embedding, truncate)
from .centlat import lc_algebra, screen
from .decomp import ld_lattice
from .errors import InputError, LatticeToolError
from .filtration import FilteredGroup, canonical_class, fixed_classes, ln_lattice
from .lattice import modularity_check
from .permgroup import GroupHandle, Perm
from .radicals import radical_report
from .stone import AlgebraAction, is_smooth, stone_space
from .suites import leaf_atoms, run_suite

COMMANDS = ("ln", "ld", "lc", "stone", "branch", "radicals", "fixed-points", "verify")


@dataclass
class Loaded:
    fg: FilteredGroup
    tree: TreeAction | None
    names: dict[str, Perm]


@dataclass
class RunConfig:
    margin_i: int | None
    margin_j: int | None
    max_witness: int | None
    depth: int | None
    budget: int
    fmt: str
    suite: str
    unsafe: bool

    def levels(self, fg: FilteredGroup) -> tuple[int, int]:
        i, j = fg.default_levels()
        i = i if self.margin_i is None else self.margin_i
        j = j if self.margin_j is None else self.margin_j
        for lvl in (i, j):
            if not 0 <= lvl <= fg.k:
                raise InputError("margin level outside the chain", level=lvl, k=fg.k)
        return i, j

    def witness(self, fg: FilteredGroup) -> int:
        mw = min(1, fg.k) if self.max_witness is None else self.max_witness
        if not 0 <= mw <= fg.k:
            raise InputError("max witness outside the chain", max_witness=mw, k=fg.k)
        return mw


# -- loading ----------------------------------------------------------------------------


def _perm(images: Any, degree: int) -> Perm:
    if not isinstance(images, list) or len(images) != degree:
        raise InputError("generator must be an image array of the stated degree", degree=degree)
    return Perm(tuple(int(x) for x in images))


def load_spec(data: dict, margin: int | None = None) -> Loaded:
    if not isinstance(data, dict) or "kind" not in data:
        raise InputError("spec must be an object with a 'kind' field")
    kind = data["kind"]
    m = int(data.get("margin", 1)) if margin is None else margin
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if kind == "permutation":
            return _load_permutation(data, m)
        if kind == "tree":
            return _load_tree(data, m)
    raise InputError("unknown kind", kind=kind)


def _load_permutation(data: dict, margin: int) -> Loaded:
    try:
        degree = int(data["degree"])
        named = {str(k): _perm(v, degree) for k, v in data["generators"].items()}
        levels = data.get("filtration", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError("malformed permutation spec", detail=str(exc)) from exc
    g = GroupHandle(degree, named.values(), name=data.get("name"))
    chain = [g]
    for lvl, entry in enumerate(levels, start=1):
        gens = []
        for item in entry:
            if isinstance(item, str):
                if item not in named:
                    raise InputError("unknown generator name", level=lvl, name=item)
                gens.append(named[item])
            else:
                gens.append(_perm(item, degree))
        chain.append(GroupHandle(degree, gens))
    margin = min(margin, len(chain) - 1)
    return Loaded(FilteredGroup(g, chain, margin=margin, name=data.get("name")), None, named)


def _load_tree(data: dict, margin: int) -> Loaded:
    try:
        arity, depth = int(data["arity"]), int(data["depth"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError("tree spec needs integer arity and depth", detail=str(exc)) from exc
    preset = data.get("automaton")
    if preset == "full":
        aut = full_automaton(arity, depth)
    elif preset == "odometer":
        aut = odometer_automaton()
    elif preset is None:
        aut = WreathAutomaton.from_dict({"arity": arity, "states": data.get("states", {}),
                                         "generators": data.get("generators", [])})
    else:
        raise InputError("unknown automaton preset", automaton=preset)
    ta = truncate(aut, TreeSpec(arity, depth), margin)
    names = {n: Perm(aut.expand(n, depth)) for n in aut.generators}
    return Loaded(ta.fg, ta, names)


def read_input(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError("cannot read input", path=path, detail=exc.strerror) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError("malformed JSON", path=path, line=exc.lineno, column=exc.colno,
                         detail=exc.msg) from exc


# -- commands ---------------------------------------------------------------------------


def _lattice_out(lat, cfg: RunConfig, extra: dict | None = None):
    if cfg.fmt == "dot":
        return lat.to_dot()
    return {"lattice": lat.to_dict(), **(extra or {})}


def cmd_ln(ld: Loaded, cfg: RunConfig):
    fg = ld.fg
    lat = ln_lattice(fg, cfg.witness(fg), budget=cfg.budget)
    mod = modularity_check(lat)
    return _lattice_out(lat, cfg, {"max_witness": cfg.witness(fg), "modular": mod.ok,
                                   "modularity_witness": mod.witness})


def cmd_ld(ld: Loaded, cfg: RunConfig):
    fg = ld.fg
    alg = ld_lattice(fg, canonical_class(fg, fg.ambient), unsafe=cfg.unsafe)
    if cfg.fmt == "dot":
        return alg.lattice.to_dot()
    return alg.to_dict()


def cmd_lc(ld: Loaded, cfg: RunConfig):
    fg = ld.fg
    levels = cfg.levels(fg)
    seeds = ln_lattice(fg, cfg.witness(fg), budget=cfg.budget).elements
    alg = lc_algebra(fg, seeds, levels, unsafe=cfg.unsafe)
    if cfg.fmt == "dot":
        return alg.lattice.to_dot()
    return {**alg.to_dict(), "screening": screen(fg, levels).to_dict()}


def cmd_stone(ld: Loaded, cfg: RunConfig):
    fg, ta = ld.fg, ld.tree
    if ta is not None:
        level = ta.tree.depth - 1 if cfg.depth is None else cfg.depth
        if not 0 <= level <= ta.tree.depth:
            raise InputError("depth outside the tree", depth=level)
        alg = clopen_algebra(ta.tree, level)
        act = AlgebraAction.from_points(ta.group, alg, leaf_atoms(alg, ta.tree))
        smooth = is_smooth(act, fg)
        extra = {"smooth": smooth.ok, "smooth_witness": smooth.witness, "level": level}
    else:
        seeds = ln_lattice(fg, cfg.witness(fg), budget=cfg.budget).elements
        alg = lc_algebra(fg, seeds, cfg.levels(fg), unsafe=cfg.unsafe)
        extra = {}
    space = stone_space(alg)
    rt = space.round_trip_check()
    return {**space.to_dict(), "round_trip": rt.ok, "round_trip_witness": rt.witness, **extra}


def cmd_branch(ld: Loaded, cfg: RunConfig):
    ta = ld.tree
    if ta is None:
        raise InputError("branch needs a tree input")
    level = min(2, ta.tree.depth - 1) if cfg.depth is None else cfg.depth
    report = branch_certify(ta, level).to_dict()
    if report["weakly_branch"]:
        report["theta"] = theta_embedding(ta, level, check_ld=False).to_dict(ta.fg)
    return report


def cmd_radicals(ld: Loaded, cfg: RunConfig):
    return radical_report(ld.fg, cfg.levels(ld.fg), budget=max(cfg.budget, ld.fg.ambient.order()))


def cmd_fixed_points(ld: Loaded, cfg: RunConfig):
    fg = ld.fg
    lat = ln_lattice(fg, cfg.witness(fg), budget=cfg.budget)
    fixed = fixed_classes(fg, lat)
    return {"max_witness": cfg.witness(fg), "classes": [c.to_dict() for c in fixed],
            "count": len(fixed)}


def cmd_verify(ld: Loaded, cfg: RunConfig):
    fg = ld.fg
    depth = (ld.tree.tree.depth - 1 if ld.tree else fg.k) if cfg.depth is None else cfg.depth
    results = run_suite(cfg.suite, fg, ld.tree, depth=depth, max_witness=cfg.witness(fg))
    failed = [r.name for r in results if r.status == "failed"]
    return {"suite": cfg.suite, "checks": [r.to_dict() for r in results],
            "passed": sum(r.status == "passed" for r in results),
            "failed": failed,
            "skipped": sum(r.status == "skipped" for r in results)}, (1 if failed else 0)


HANDLERS = {
    "ln": cmd_ln, "ld": cmd_ld, "lc": cmd_lc, "stone": cmd_stone, "branch": cmd_branch,
    "radicals": cmd_radicals, "fixed-points": cmd_fixed_points, "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tdlc-lattice",
                                description="Local structure lattices of filtered finite groups.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", required=True, help="JSON group spec")
    p.add_argument("--margin-i", type=int, help="upper margin level")
    p.add_argument("--margin-j", type=int, help="lower margin level")
    p.add_argument("--max-witness", type=int, help="deepest level allowed to normalise a class")
    p.add_argument("--depth", type=int, help="clopen level for tree commands")
    p.add_argument("--budget", type=int, default=2 ** 14, help="enumeration budget")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--suite", default="all", help="suite for verify")
    p.add_argument("--unsafe", action="store_true", help="run centraliser operations unscreened")
    return p


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(args.margin_i, args.margin_j, args.max_witness, args.depth, args.budget,
                    args.format, args.suite, args.unsafe)
    status = 0
    try:
        if cfg.budget <= 0:
            raise InputError("budget must be positive", budget=cfg.budget)
        loaded = load_spec(read_input(args.input))
        if cfg.fmt == "dot" and args.command not in {"ln", "ld", "lc"}:
            raise InputError("dot output is only available for lattices", command=args.command)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            out = HANDLERS[args.command](loaded, cfg)
        if isinstance(out, tuple):
            out, status = out
    except LatticeToolError as exc:
        print(json.dumps(exc.reason, sort_keys=True, default=str), file=sys.stderr)
        return exc.exit_code
    text = out if isinstance(out, str) else json.dumps(out, sort_keys=True, indent=2, default=str)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
