"""Command-line entry point: solving, classification, reductions, gadget
construction, verification and benchmarking over the JSON formats.

Every run emits a manifest on stderr (timing lives only there, so the
primary stdout output is byte-identical across repeated runs).  Exit
codes: 0 success / yes, 1 failed check / no, 2 usage, 3 validation,
4 cap refusal.
"""

import argparse
import hashlib
import json
import os
import random
import sys
import time

from .core import (
    CapExceeded,
    DemandPattern,
    MulticutInstance,
    ValidationError,
    WeightedGraph,
    instance_from_json,
    instance_to_json,
    isMulticut,
    weight_to_json,
)
from .embedding import embeddingFromInstance, minFaceCover, planarRotation, traceFaces

VERSION = "0.1.0"


# ---------------------------------------------------------------------------
# seeded corpus generation
# ---------------------------------------------------------------------------

def seededPlaneInstance(seed, max_n=12, max_t=4, max_weight=9):
    """A random connected plane multicut instance, deterministic per seed.

    Built from a random spanning tree plus extra edges kept only while
    the graph stays planar and simple; the rotation comes from the
    planarity check."""
    rng = random.Random(seed if isinstance(seed, int) else hash(seed))
    while True:
        n = rng.randint(4, max_n)
        g = WeightedGraph(n)
        present = set()
        for v in range(1, n):
            u = rng.randrange(v)
            g.add_edge(u, v, rng.randint(0, max_weight))
            present.add((u, v))
        extra = rng.randint(0, 2 * n)
        for _ in range(extra):
            u, v = rng.randrange(n), rng.randrange(n)
            if u == v:
                continue
            key = (min(u, v), max(u, v))
            if key in present:
                continue
            trial = g.copy()
            trial.add_edge(key[0], key[1], rng.randint(0, max_weight))
            if planarRotation(trial) is not None:
                g = trial
                present.add(key)
        rotation = planarRotation(g)
        if rotation is None:
            continue
        t = rng.randint(2, min(max_t, n))
        terminals = sorted(rng.sample(range(n), t))
        pairs = [(a, b) for i, a in enumerate(terminals)
                 for b in terminals[i + 1:]]
        rng.shuffle(pairs)
        demands = sorted(pairs[:rng.randint(1, min(4, len(pairs)))])
        return MulticutInstance(g, DemandPattern(terminals, demands),
                                None, rotation)


def corpusInstances(count, seed=0, **kwargs):
    return [seededPlaneInstance((seed, i), **kwargs) for i in range(count)]


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------

def _sha(data):
    return hashlib.sha256(data.encode()).hexdigest()


def _hash_file(path):
    try:
        with open(path, "rb") as f:
            return hashlib.sha256(f.read()).hexdigest()
    except OSError:
        return None


def _dump(payload):
    return json.dumps(payload, indent=1, sort_keys=True)


class _Run:
    def __init__(self, args, input_paths, caps=None):
        self.command = args.command
        self.arguments = {k: v for k, v in sorted(vars(args).items())
                          if k != "command" and v is not None}
        self.input_hashes = {p: _hash_file(p) for p in input_paths}
        self.caps = caps
        self.t0 = time.monotonic()

    def emit(self, payload, out_path=None):
        text = _dump(payload)
        if out_path:
            with open(out_path, "w") as f:
                f.write(text + "\n")
        else:
            print(text)
        manifest = {
            "command": self.command,
            "arguments": {k: str(v) for k, v in self.arguments.items()},
            "inputHashes": self.input_hashes,
            "versions": {"mcwb": VERSION},
            "capsUsed": self.caps,
            "wallClockMs": round(1000 * (time.monotonic() - self.t0), 3),
            "resultDigest": _sha(text),
        }
        print(json.dumps(manifest, sort_keys=True), file=sys.stderr)


def _load_json(path):
    with open(path) as f:
        return json.load(f)


def _load_caps(args):
    from .solver import SolverCaps
    path = getattr(args, "caps", None) or os.environ.get("MCWB_CAPS")
    if path is None:
        return SolverCaps(), None
    return SolverCaps.from_json(_load_json(path)), path


def _write_dot(graph, path, terminals=()):
    lines = ["graph G {"]
    terms = set(terminals)
    for v in range(graph.n):
        shape = ' [shape=box]' if v in terms else ''
        lines.append(f"  {v}{shape};")
    for (u, v, w) in graph.edges:
        lines.append(f'  {u} -- {v} [label="{weight_to_json(w)}"];')
    lines.append("}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _solve_by_method(instance, method, caps):
    from .oracles import minMulticutByPartition, minMulticutByTreewidthDP
    from .solver import solveMulticutPlanar
    if method == "oracle":
        w, cut = minMulticutByPartition(instance)
        return w, cut, "partition-oracle", True
    if method == "twdp":
        w, cut, _ = minMulticutByTreewidthDP(instance)
        return w, cut, "treewidth-dp", True
    res = solveMulticutPlanar(instance, caps=caps)
    return res.weight, res.cut, res.strategy, res.certifiedOptimal


def cmd_solve(args):
    caps, caps_path = _load_caps(args)
    run = _Run(args, [args.input], caps.to_json())
    instance = instance_from_json(_load_json(args.input))
    w, cut, strategy, certified = _solve_by_method(instance, args.method, caps)
    if args.dot:
        _write_dot(instance.graph, args.dot, instance.pattern.terminals)
    run.emit({"weight": weight_to_json(w), "cut": sorted(cut),
              "strategy": strategy, "certifiedOptimal": certified,
              "method": args.method}, args.output)
    return 0


def cmd_decide(args):
    caps, _ = _load_caps(args)
    run = _Run(args, [args.input], caps.to_json())
    instance = instance_from_json(_load_json(args.input))
    budget = args.budget if args.budget is not None else instance.budget
    if budget is None:
        raise ValidationError("decide needs a budget (--budget or instance)")
    w, cut, strategy, _ = _solve_by_method(instance, args.method, caps)
    yes = w <= budget
    run.emit({"weight": weight_to_json(w), "budget": weight_to_json(budget),
              "answer": "yes" if yes else "no", "strategy": strategy},
             args.output)
    return 0 if yes else 1


def cmd_classify_pattern(args):
    from .patterns import classifyPattern, graph_from_json
    run = _Run(args, [args.input])
    H = graph_from_json(_load_json(args.input))
    verdict = classifyPattern(H, args.t)
    run.emit(verdict.to_json(), args.output)
    return 0


def cmd_reduce(args):
    run = _Run(args, [args.input])
    data = _load_json(args.input)
    if args.kind == "unweighted":
        from .lifts import expandToUnweighted
        out = expandToUnweighted(instance_from_json(data))
        run.emit(instance_to_json(out), args.output)
        return 0
    if args.kind == "lift":
        from .lifts import liftProjection
        from .patterns import graph_from_json
        instance = instance_from_json(data["instance"])
        H = graph_from_json(data["H"])
        steps = [tuple(s) for s in data["steps"]]
        rep = liftProjection(instance, H, steps)
        payload = {"steps": [list(s) for s in rep.steps_applied],
                   "sizeRatio": [rep.size_ratio.numerator,
                                 rep.size_ratio.denominator]}
        if rep.shortcut is not None:
            payload["shortcut"] = rep.shortcut
        else:
            payload["instance"] = instance_to_json(rep.output)
        run.emit(payload, args.output)
        return 0
    from .gadgets import (CspInstance, TilingInstance, buildGroup3TCInstance,
                          buildTilingInstance)
    if args.kind == "tiling":
        red = buildTilingInstance(TilingInstance.from_json(data),
                                  mode=args.mode)
    else:
        red = buildGroup3TCInstance(CspInstance.from_json(data))
    payload = red.to_json()
    payload["instance"] = instance_to_json(red.instance)
    run.emit(payload, args.output)
    return 0


def _parse_pair_set(text):
    pairs = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        x, y = part.split(",")
        pairs.append((int(x), int(y)))
    return pairs


def cmd_make_gadget(args):
    from .gadgets import buildGridGadget
    run = _Run(args, [])
    gadget = buildGridGadget(args.delta, _parse_pair_set(args.set),
                             encoder=args.encoder)
    payload = gadget.to_json()
    payload["edgeList"] = [[u, v, weight_to_json(w)]
                           for (u, v, w) in gadget.graph.edges]
    payload["corners"] = gadget.corners()
    payload["sideVertices"] = {s: gadget.side_vertices(s)
                               for s in ("U", "D", "L", "R")}
    if args.dot:
        _write_dot(gadget.graph, args.dot, gadget.corners().values())
    run.emit(payload, args.output)
    return 0


def cmd_verify(args):
    run = _Run(args, [args.input])
    if args.what == "gadget":
        from .gadgets import buildGridGadget, verifyGadget
        data = _load_json(args.input)
        gadget = buildGridGadget(data["delta"], data["S"],
                                 encoder=data.get("encoder", "repoCell"))
        report = verifyGadget(gadget)
        report["forced"] = {str(k): v for k, v in report["forced"].items()}
        run.emit(report, args.output)
        return 0 if report["passed"] else 1
    if args.what == "dual":
        from .dual import dualFromMulticut, minimizeDual
        from .oracles import minMulticutByPartition
        instance = instance_from_json(_load_json(args.input))
        emb = embeddingFromInstance(instance)
        w, cut = minMulticutByPartition(instance)
        dd = dualFromMulticut(emb, instance.pattern, cut)
        small = minimizeDual(dd, instance.pattern)
        regions = small.regions()
        terms = set(instance.pattern.terminals)
        report = {
            "cut": sorted(cut),
            "weight": weight_to_json(w),
            "eGMatchesCut": small.e_G() == sorted(cut) or dd.e_G() == sorted(cut),
            "separates": small.separates(instance.pattern.demand_edges),
            "faces": len(regions),
            "faceTerminal": all(terms & set(r) for r in regions),
            "facesAtMostT": len(regions) <= len(instance.pattern.terminals),
        }
        report["passed"] = bool(report["separates"] and report["faceTerminal"]
                                and report["facesAtMostT"])
        run.emit(report, args.output)
        return 0 if report["passed"] else 1
    # witness
    instance = instance_from_json(_load_json(args.input))
    cut = sorted(int(x) for x in args.cut.split(",") if x.strip())
    ok = isMulticut(instance, cut)
    weight = sum(instance.graph.weight(e) for e in cut)
    report = {"cut": cut, "isMulticut": ok,
              "weight": weight_to_json(weight)}
    if instance.budget is not None:
        report["withinBudget"] = weight <= instance.budget
        ok = ok and report["withinBudget"]
    run.emit(report, args.output)
    return 0 if ok else 1


def cmd_bench(args):
    caps, _ = _load_caps(args)
    run = _Run(args, [args.input], caps.to_json())
    instance = instance_from_json(_load_json(args.input))
    from .solver import solveMulticutPlanar
    res = None
    times = []
    for _ in range(args.repeat):
        t0 = time.monotonic()
        res = solveMulticutPlanar(instance, caps=caps)
        times.append(time.monotonic() - t0)
    print(json.dumps({"runs": len(times),
                      "msPerRun": [round(1000 * x, 3) for x in times]},
                     sort_keys=True), file=sys.stderr)
    run.emit({"weight": weight_to_json(res.weight), "cut": sorted(res.cut),
              "strategy": res.strategy, "statistics": res.statistics},
             args.output)
    return 0


def _suite_oracle_equiv(count, seed):
    from .oracles import minMulticutByPartition, minMulticutByTreewidthDP
    from .solver import solveMulticutPlanar
    cases = []
    ok = True
    for i, inst in enumerate(corpusInstances(count, seed, max_n=9)):
        w1, _ = minMulticutByPartition(inst)
        w2, _, _ = minMulticutByTreewidthDP(inst)
        res = solveMulticutPlanar(inst)
        agree = w1 == w2 == res.weight
        ok = ok and agree and res.certifiedOptimal
        cases.append({"case": i, "weight": weight_to_json(w1),
                      "agree": agree, "certified": res.certifiedOptimal})
    return ok, cases


def _suite_gadget_d1():
    from .gadgets import buildGridGadget, checkDiagonalBlocking, verifyGadget
    gadget = buildGridGadget(1, [(1, 1)])
    report = verifyGadget(gadget)
    blocking = checkDiagonalBlocking(gadget)
    ok = report["passed"] and blocking
    return ok, [{"verify": {k: report[k] for k in
                            ("item1", "item2", "item3", "passed")},
                 "diagonalBlocking": blocking}]


def cmd_corpus(args):
    run = _Run(args, [])
    if args.suite == "oracle-equiv":
        ok, cases = _suite_oracle_equiv(args.count, args.seed)
    elif args.suite == "gadget-d1":
        ok, cases = _suite_gadget_d1()
    else:
        print(f"unknown suite {args.suite!r}", file=sys.stderr)
        return 2
    run.emit({"suite": args.suite, "seed": args.seed,
              "passed": ok, "cases": cases}, args.output)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def _build_parser():
    p = argparse.ArgumentParser(prog="mcwb")
    p.add_argument("--jobs", type=int, default=1,
                   help="reserved for parallel runs; execution is serial")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, output=True):
        sp.add_argument("--caps", help="caps JSON file (or env MCWB_CAPS)")
        if output:
            sp.add_argument("--output", help="write the result JSON here "
                                             "instead of stdout")

    sp = sub.add_parser("solve")
    sp.add_argument("input")
    sp.add_argument("--method", choices=["oracle", "twdp", "planar"],
                    default="planar")
    sp.add_argument("--dot", help="also export the graph as DOT")
    add_common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("decide")
    sp.add_argument("input")
    sp.add_argument("--budget", type=int)
    sp.add_argument("--method", choices=["oracle", "twdp", "planar"],
                    default="planar")
    add_common(sp)
    sp.set_defaults(func=cmd_decide)

    sp = sub.add_parser("classify-pattern")
    sp.add_argument("input")
    sp.add_argument("--t", type=int, required=True)
    add_common(sp)
    sp.set_defaults(func=cmd_classify_pattern)

    sp = sub.add_parser("reduce")
    sp.add_argument("kind", choices=["lift", "tiling", "csp3t", "unweighted"])
    sp.add_argument("input")
    sp.add_argument("output_path", nargs="?")
    sp.add_argument("--mode", choices=["four-terminal", "three-terminal"],
                    default="four-terminal")
    add_common(sp)
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("make-gadget")
    sp.add_argument("output_path", nargs="?")
    sp.add_argument("--delta", type=int, required=True)
    sp.add_argument("--set", required=True,
                    help='pair set, e.g. "1,1;2,1"')
    sp.add_argument("--encoder", default="repoCell")
    sp.add_argument("--dot", help="also export the gadget graph as DOT")
    add_common(sp)
    sp.set_defaults(func=cmd_make_gadget)

    sp = sub.add_parser("verify")
    sp.add_argument("what", choices=["gadget", "dual", "witness"])
    sp.add_argument("input")
    sp.add_argument("--cut", default="",
                    help="comma-separated edge ids (witness mode)")
    add_common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("bench")
    sp.add_argument("input")
    sp.add_argument("--repeat", type=int, default=1)
    add_common(sp)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("corpus")
    sp.add_argument("suite")
    sp.add_argument("--count", type=int, default=25)
    sp.add_argument("--seed", type=int, default=0)
    add_common(sp)
    sp.set_defaults(func=cmd_corpus)

    return p


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    # the reduce/make-gadget positional output doubles as --output
    if getattr(args, "output_path", None) and not getattr(args, "output", None):
        args.output = args.output_path
    try:
        return args.func(args)
    except (ValidationError, ValueError, KeyError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except CapExceeded as e:
        print(f"cap refusal: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
