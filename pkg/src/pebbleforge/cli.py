"""Command-line front end.

Exit codes: 0 success or property holds, 1 property fails (the verdict JSON
carries the counterexample), 2 usage or input error, 3 a size cap was hit.

Every leaf command takes ``-o/--out``.  With it, the primary output goes to
that path, side outputs go next to it, and ``<out>.manifest.json`` records
the command line, seed, versions, file digests, wall-clock time and caps
hit.  Without it, the primary output is printed to stdout.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import random
import sys
import time
from pathlib import Path

from . import __version__
from .constructions import (
    BASE_KINDS,
    BaseGraphError,
    EXTERNAL,
    build_main,
    build_superconcentrator,
    disjoint_paths,
    verify_superconcentrator,
)
from .expander import TooLargeError, build_local_expander, exact_ratio, threshold, verify_local_expander
from .generators import binary_tree, complete_dag, empty_dag, path_dag, random_dag
from .graph import Dag, GraphError, NodeSet, load_graph
from .mhf import REAL_HASH, TEST_STUB, make_oracle, naive_evaluate, parse_hex_inputs
from .pebbling import (
    BwPebbling,
    PebblingFormatError,
    metrics,
    metrics_csv,
    pebbling_from_json,
    validate_file_text,
)
from .reduction import reduce_dr, reduce_ss
from .robustness import (
    DepthRobustnessError,
    build_extreme_dr,
    check_depth_robust_exact,
    check_depth_robust_sampled,
    gamma_good,
)
from .strategies import (
    OBJECTIVES,
    OracleCapError,
    OracleLimits,
    PreconditionError,
    brute_force,
    naive_pebble,
    reducible_bw_bound,
    reducible_bw_strategy,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


class CapHit(Exception):
    pass


def _dump(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class Run:
    """Collects outputs for one invocation and writes its manifest."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.start = time.perf_counter()
        self.inputs: list[Path] = []
        self.outputs: list[Path] = []
        self.caps_hit: list[str] = []
        self.out = Path(args.out) if getattr(args, "out", None) else None

    def read_graph(self, path: str) -> Dag:
        p = Path(path)
        self.inputs.append(p)
        try:
            return load_graph(p)
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc}") from exc

    def read_text(self, path: str) -> str:
        p = Path(path)
        self.inputs.append(p)
        try:
            return p.read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc}") from exc

    def side_path(self, suffix: str) -> Path | None:
        return None if self.out is None else self.out.with_name(self.out.name + suffix)

    def write(self, path: Path, text: str) -> None:
        path.write_text(text, encoding="utf-8")
        self.outputs.append(path)

    def emit(self, text: str, summary: dict | None = None) -> None:
        """Primary output to --out (printing ``summary``) or to stdout."""
        if self.out is None:
            sys.stdout.write(text)
            return
        self.write(self.out, text)
        if summary is not None:
            sys.stdout.write(_dump(summary))

    def finish(self) -> None:
        if self.out is None:
            return
        versions = {"pebbleforge": __version__, "python": platform.python_version()}
        for mod in ("numpy", "numba"):
            try:
                versions[mod] = __import__(mod).__version__
            except ImportError:
                pass
        manifest = {
            "command": self.argv,
            "seed": getattr(self.args, "seed", None),
            "jobs": getattr(self.args, "jobs", None),
            "versions": versions,
            "inputs": {str(p): _digest(p) for p in self.inputs if p.exists()},
            "outputs": {str(p): _digest(p) for p in self.outputs},
            "wall_clock_seconds": round(time.perf_counter() - self.start, 6),
            "caps_hit": self.caps_hit,
        }
        path = self.side_path(".manifest.json")
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _nodes(text: str) -> NodeSet:
    text = text.strip()
    if not text:
        return NodeSet()
    try:
        return NodeSet(int(t) for t in text.replace(" ", ",").split(",") if t)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a node list: {text!r}") from exc


def _ratio(text: str):
    try:
        q = exact_ratio(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    return q


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


# -- gen -------------------------------------------------------------------

def _emit_graph(run: Run, g: Dag) -> None:
    run.emit(g.to_json(), {"n": g.n, "edges": len(g.edges), "indeg": g.indeg_cap,
                           "graph_hash": g.graph_hash()})


def cmd_gen(run: Run) -> int:
    a = run.args
    kind = a.kind
    if kind == "local-expander":
        g = build_local_expander(a.n, a.delta, a.seed, m_delta=a.m_delta,
                                 degree_cap=a.degree_cap, short_edge_span=a.short_span)
    elif kind == "extreme-dr":
        g = build_extreme_dr(a.n, a.epsilon, a.seed)
    elif kind in ("reduce-dr", "reduce-ss"):
        src = run.read_graph(a.graph)
        g, m = (reduce_dr if kind == "reduce-dr" else reduce_ss)(src)
        side = run.side_path(".map.json")
        if side is not None:
            run.write(side, _dump(m.to_dict()))
    elif kind == "superconcentrator":
        sc = build_superconcentrator(a.m, a.seed, k_exhaustive=a.k_exhaustive, samples=a.samples)
        if not sc.certificate["ok"]:
            raise UsageError(f"superconcentrator check failed: {sc.certificate['counterexample']}")
        recipe = dict(sc.dag.recipe)
        recipe.update({"inputs": sc.inputs.to_list(), "outputs": sc.outputs.to_list(),
                       "certificate": sc.certificate})
        g = sc.dag.with_recipe(recipe)
    elif kind == "main":
        external = None
        if a.base == EXTERNAL:
            if not a.base_graph:
                raise UsageError("--base external needs --base-graph FILE")
            external = run.read_graph(a.base_graph)
        g = build_main(a.n, a.epsilon, a.seed, a.base, external).dag
    else:
        g = _basic(a)
    _emit_graph(run, g)
    return EXIT_OK


def _basic(a) -> Dag:
    fam = a.family
    if fam == "path":
        g = path_dag(a.n)
    elif fam == "complete":
        g = complete_dag(a.n)
    elif fam == "empty":
        g = empty_dag(a.n)
    elif fam == "binary-tree":
        g = binary_tree(a.n)
    else:
        g = random_dag(a.n, random.Random(a.seed), edge_prob=a.edge_prob, max_indeg=a.max_indeg)
    recipe = {"kind": fam, "n": a.n}
    if fam == "random":
        recipe.update({"seed": a.seed, "edge_prob": a.edge_prob, "max_indeg": a.max_indeg})
    return g.with_recipe(recipe)


# -- pebble / oracle -------------------------------------------------------

def _pebble_outputs(run: Run, g: Dag, p, s: int, extra: dict) -> None:
    rep = metrics(g, p)
    summary = {"metrics": rep.to_dict(), **extra}
    side = run.side_path(".metrics.csv")
    if side is not None:
        run.write(side, metrics_csv(p, s))
    run.emit(p.to_json(g), summary)


def cmd_pebble(run: Run) -> int:
    a = run.args
    g = run.read_graph(a.graph)
    if a.strategy == "naive":
        p = naive_pebble(g)
        _pebble_outputs(run, g, p, a.s, {"strategy": "naive"})
        return EXIT_OK
    if a.strategy == "reducible-bw":
        try:
            p = reducible_bw_strategy(g, a.set, a.d)
        except PreconditionError as exc:
            raise UsageError(str(exc)) from exc
        bound = reducible_bw_bound(len(a.set), a.d, g.size)
        _pebble_outputs(run, g, p, a.s, {"strategy": "reducible-bw", "bound": bound})
        return EXIT_OK
    return _oracle(run, g)


def _oracle(run: Run, g: Dag) -> int:
    a = run.args
    limits = OracleLimits(a.max_nodes, a.max_states)
    try:
        res = brute_force(g, a.objective, a.mode, s=a.s if a.objective == "ss" else None, limits=limits)
    except OracleCapError as exc:
        run.caps_hit.append(str(exc))
        raise CapHit(str(exc)) from exc
    doc = res.to_dict(g)
    wit = doc.pop("witness")
    side = run.side_path(".witness.json")
    if side is not None and res.witness is not None:
        run.write(side, res.witness.to_json(g))
        doc["witness_file"] = str(side)
    elif run.out is None:
        doc["witness"] = wit
    run.emit(_dump(doc), {"value": res.value, "exact": res.exact})
    if not res.exact:
        run.caps_hit.append(f"state cap reached; lower bound {res.lower_bound}")
        return EXIT_CAP
    return EXIT_OK


def cmd_oracle(run: Run) -> int:
    return _oracle(run, run.read_graph(run.args.graph))


# -- verify ----------------------------------------------------------------

def _verdict(run: Run, doc: dict) -> int:
    run.emit(_dump(doc), doc)
    return EXIT_OK if doc["holds"] else EXIT_FAIL


def _witness_doc(run: Run) -> dict | None:
    if not getattr(run.args, "witness", None):
        return None
    try:
        return json.loads(run.read_text(run.args.witness))
    except json.JSONDecodeError as exc:
        raise UsageError(f"witness file is not JSON: {exc}") from exc


def cmd_verify(run: Run) -> int:
    a = run.args
    g = run.read_graph(a.graph)
    prop = a.property
    if prop in ("pebbling", "bw-pebbling"):
        text = run.read_text(a.pebbling)
        bad = validate_file_text(g, text)
        doc = {"property": prop, "holds": bad is None,
               "violation": bad.to_dict() if bad else None}
        if bad is None:
            p = pebbling_from_json(text)
            if (prop == "bw-pebbling") != isinstance(p, BwPebbling):
                doc.update(holds=False, violation={"step": 0, "rule": 0, "node": None,
                                                   "message": f"file mode {p.mode} does not match {prop}"})
            else:
                doc["metrics"] = metrics(g, p, check=False).to_dict()
        return _verdict(run, doc)

    if prop == "local-expander":
        wit = _witness_doc(run)
        if wit is not None:
            return _verdict(run, _recheck_expander(g, a.delta, wit))
        try:
            bad = verify_local_expander(g, a.delta, a.r_max)
        except TooLargeError as exc:
            run.caps_hit.append(str(exc))
            raise CapHit(str(exc)) from exc
        doc = {"property": prop, "delta": str(a.delta), "r_max": a.r_max, "holds": bad is None,
               "counterexample": None}
        if bad is not None:
            x, r, xs, ys = bad
            doc["counterexample"] = {"x": x, "r": r, "A": xs.to_list(), "B": ys.to_list()}
        return _verdict(run, doc)

    if prop == "depth-robust":
        wit = _witness_doc(run)
        if wit is not None:
            return _verdict(run, _recheck_depth(g, a.e, a.d, wit))
        try:
            if a.method == "exact":
                v = check_depth_robust_exact(g, a.e, a.d)
            else:
                v = check_depth_robust_sampled(g, a.e, a.d, a.samples, a.seed)
        except DepthRobustnessError as exc:
            run.caps_hit.append(str(exc))
            raise CapHit(str(exc)) from exc
        return _verdict(run, {"property": prop, **v.to_dict()})

    if prop == "superconcentrator":
        ins = a.inputs if a.inputs is not None else NodeSet((g.recipe or {}).get("inputs", []))
        outs = a.outputs if a.outputs is not None else NodeSet((g.recipe or {}).get("outputs", []))
        if not ins or len(ins) != len(outs):
            raise UsageError("need equal-sized non-empty --inputs and --outputs")
        wit = _witness_doc(run)
        if wit is not None:
            return _verdict(run, _recheck_sc(g, wit))
        try:
            bad = verify_superconcentrator(g, ins, outs, a.k, samples=a.samples, seed=a.seed)
        except ValueError as exc:
            run.caps_hit.append(str(exc))
            raise CapHit(str(exc)) from exc
        doc = {"property": prop, "k_exhaustive": a.k, "samples": a.samples, "holds": bad is None,
               "counterexample": None}
        if bad is not None:
            doc["counterexample"] = {"inputs": bad[0].to_list(), "outputs": bad[1].to_list(),
                                     "flow": bad[2]}
        return _verdict(run, doc)

    # good-nodes: holds when the count meets n - |S|(1+gamma)/(1-gamma)
    rep = gamma_good(g, a.set, a.gamma, a.mode)
    doc = {"property": prop, **rep.to_dict(), "holds": len(rep.good) >= rep.bound}
    return _verdict(run, doc)


def _counterexample(wit: dict) -> dict:
    if not isinstance(wit, dict):
        raise UsageError("witness must be a JSON object")
    return wit.get("counterexample", wit) or {}


def _recheck_expander(g: Dag, delta, wit: dict) -> dict:
    c = _counterexample(wit)
    try:
        x, r, xs, ys = int(c["x"]), int(c["r"]), NodeSet(c["A"]), NodeSet(c["B"])
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed local-expander witness: {exc}") from exc
    k = threshold(delta, r)
    shaped = (len(xs) >= k and len(ys) >= k and xs <= NodeSet.interval(x - r + 1, x)
              and ys <= NodeSet.interval(x + 1, x + r) and 1 <= x - r + 1 and x + r <= g.n)
    edge = any(g.child_mask(u) & ys.mask for u in xs) if shaped else True
    confirmed = shaped and not edge
    return {"property": "local-expander", "witness_confirmed": confirmed, "holds": not confirmed,
            "counterexample": c if confirmed else None}


def _recheck_depth(g: Dag, e: int, d: int, wit: dict) -> dict:
    c = wit.get("witness") if isinstance(wit, dict) and "witness" in wit else wit
    if c is None:
        raise UsageError("the verdict holds and carries no counterexample to re-check")
    try:
        s = NodeSet(c)
    except TypeError as exc:
        raise UsageError("depth-robust witness must be a node list") from exc
    depth = g.remove(s).depth()
    confirmed = len(s) <= e and depth < d
    return {"property": "depth-robust", "e": e, "d": d, "witness": s.to_list(),
            "depth_after_removal": depth, "witness_confirmed": confirmed, "holds": not confirmed}


def _recheck_sc(g: Dag, wit: dict) -> dict:
    c = _counterexample(wit)
    try:
        ins, outs = NodeSet(c["inputs"]), NodeSet(c["outputs"])
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed superconcentrator witness: {exc}") from exc
    flow = disjoint_paths(g, ins, outs)
    confirmed = flow < len(ins)
    return {"property": "superconcentrator", "flow": flow, "witness_confirmed": confirmed,
            "holds": not confirmed}


# -- mhf -------------------------------------------------------------------

def cmd_mhf(run: Run) -> int:
    a = run.args
    g = run.read_graph(a.graph)
    try:
        x = parse_hex_inputs(a.input)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    oracle = make_oracle(a.backend, a.w, a.seed, log=a.call_log)
    outputs, trace = naive_evaluate(g, x, oracle)
    block = a.block_size or a.w
    doc = {"labels": [o.hex() for o in outputs], "oracle": oracle.describe(),
           **trace.to_dict(block)}
    doc.pop("state_bits")
    doc.pop("calls")
    side = run.side_path(".trace.csv")
    if side is not None:
        run.write(side, trace.to_csv(block))
    else:
        doc["trace_csv"] = trace.to_csv(block)
    if a.call_log:
        log = [{"input": i.hex(), "output": o.hex()} for i, o in oracle.call_log]
        log_path = run.side_path(".calls.json")
        if log_path is not None:
            run.write(log_path, _dump(log))
        else:
            doc["call_log"] = log
    run.emit(_dump(doc), {"labels": doc["labels"], "total_calls": trace.total_calls})
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="single source of randomness")
    p.add_argument("--jobs", type=_positive, default=1, help="worker cap (recorded; work is single-threaded)")
    p.add_argument("-o", "--out", help="output path; side files and the manifest go next to it")
    return p


def _oracle_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--objective", choices=OBJECTIVES, required=True)
    p.add_argument("--mode", choices=("seq", "par", "sequential", "parallel"), default="par")
    p.add_argument("--s", type=_positive, default=None, help="threshold for the ss objective")
    p.add_argument("--max-nodes", type=_positive, default=None)
    p.add_argument("--max-states", type=int, default=-1)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="pebbleforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="build a graph file").add_subparsers(dest="kind", required=True)
    p = gen.add_parser("local-expander", parents=[common])
    p.add_argument("--n", type=_nonneg, required=True)
    p.add_argument("--delta", type=_ratio, required=True)
    p.add_argument("--m-delta", type=_positive, default=None)
    p.add_argument("--degree-cap", type=_positive, default=None)
    p.add_argument("--short-span", type=_positive, default=None)
    p = gen.add_parser("extreme-dr", parents=[common])
    p.add_argument("--n", type=_nonneg, required=True)
    p.add_argument("--epsilon", type=_ratio, required=True)
    for name in ("reduce-dr", "reduce-ss"):
        p = gen.add_parser(name, parents=[common])
        p.add_argument("graph")
    p = gen.add_parser("superconcentrator", parents=[common])
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--k-exhaustive", type=_positive, default=3)
    p.add_argument("--samples", type=_nonneg, default=200)
    p = gen.add_parser("main", parents=[common])
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--epsilon", type=_ratio, required=True)
    p.add_argument("--base", choices=BASE_KINDS, default=BASE_KINDS[0])
    p.add_argument("--base-graph", help="graph file for --base external")
    p = gen.add_parser("basic", parents=[common], help="path, complete, empty, binary-tree or random")
    p.add_argument("--family", choices=("path", "complete", "empty", "binary-tree", "random"), required=True)
    p.add_argument("--n", type=_nonneg, required=True, help="node count (height for binary-tree)")
    p.add_argument("--edge-prob", type=float, default=None)
    p.add_argument("--max-indeg", type=_positive, default=None)

    peb = sub.add_parser("pebble", help="produce a pebbling").add_subparsers(dest="strategy", required=True)
    p = peb.add_parser("naive", parents=[common])
    p.add_argument("graph")
    p.add_argument("--s", type=_positive, default=1, help="block threshold for the metrics CSV")
    p = peb.add_parser("reducible-bw", parents=[common])
    p.add_argument("graph")
    p.add_argument("--d", type=_nonneg, required=True)
    p.add_argument("--set", type=_nodes, required=True, help="comma-separated node ids")
    p.add_argument("--s", type=_positive, default=1)
    p = peb.add_parser("oracle", parents=[common])
    p.add_argument("graph")
    _oracle_args(p)

    ver = sub.add_parser("verify", help="check a property").add_subparsers(dest="property", required=True)
    for name in ("pebbling", "bw-pebbling"):
        p = ver.add_parser(name, parents=[common])
        p.add_argument("graph")
        p.add_argument("pebbling")
    p = ver.add_parser("local-expander", parents=[common])
    p.add_argument("graph")
    p.add_argument("--delta", type=_ratio, required=True)
    p.add_argument("--r-max", type=_positive, default=None)
    p.add_argument("--witness", help="re-check a counterexample from an earlier verdict")
    p = ver.add_parser("depth-robust", parents=[common])
    p.add_argument("graph")
    p.add_argument("--e", type=_nonneg, required=True)
    p.add_argument("--d", type=_nonneg, required=True)
    p.add_argument("--method", choices=("exact", "sampled"), default="exact")
    p.add_argument("--samples", type=_positive, default=1000)
    p.add_argument("--witness", help="re-check a counterexample from an earlier verdict")
    p = ver.add_parser("superconcentrator", parents=[common])
    p.add_argument("graph")
    p.add_argument("--inputs", type=_nodes, default=None)
    p.add_argument("--outputs", type=_nodes, default=None)
    p.add_argument("--k", type=_positive, default=3, help="exhaustive up to k paths")
    p.add_argument("--samples", type=_nonneg, default=200)
    p.add_argument("--witness", help="re-check a counterexample from an earlier verdict")
    p = ver.add_parser("good-nodes", parents=[common])
    p.add_argument("graph")
    p.add_argument("--set", type=_nodes, required=True)
    p.add_argument("--gamma", type=_ratio, required=True)
    p.add_argument("--mode", choices=("strict", "truncated"), default="strict")

    mhf = sub.add_parser("mhf", help="graph-labeling function").add_subparsers(dest="action", required=True)
    p = mhf.add_parser("evaluate", parents=[common])
    p.add_argument("graph")
    p.add_argument("--input", nargs="*", default=[], help="one hex string per source")
    p.add_argument("--w", type=_positive, default=256)
    p.add_argument("--backend", choices=(REAL_HASH, TEST_STUB), default=REAL_HASH)
    p.add_argument("--block-size", type=_positive, default=None, help="SMC block size in bits (default w)")
    p.add_argument("--call-log", action="store_true", help="export the oracle call log")

    p = sub.add_parser("oracle", parents=[common], help="exact optimal pebbling")
    p.add_argument("graph")
    _oracle_args(p)
    return parser


HANDLERS = {"gen": cmd_gen, "pebble": cmd_pebble, "verify": cmd_verify, "mhf": cmd_mhf,
            "oracle": cmd_oracle}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    run = Run(args, argv)
    try:
        code = HANDLERS[args.command](run)
    except CapHit as exc:
        print(f"error: cap reached: {exc}", file=sys.stderr)
        code = EXIT_CAP
    except (UsageError, GraphError, PebblingFormatError, BaseGraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    run.finish()
    return code


if __name__ == "__main__":
    sys.exit(main())
