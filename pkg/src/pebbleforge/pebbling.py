"""Pebbling data model, legality checking, the sequential transform and metrics.

A black pebbling is a list of configurations ``P_0 = {}, P_1, ..., P_t``.
Placing a pebble on ``v`` at step i needs every parent of ``v`` in
``P_{i-1}``; pebbles may be dropped at any step.  Sequential mode adds the
limit of one new pebble per step.  The black/white game keeps a pair
``(black, white)`` per step; see ``validate_bw`` for its rules.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .graph import Dag, NodeSet, as_nodeset

PEBBLING_FORMAT = "pebbleforge-peb/1"
SEQUENTIAL = "sequential"
PARALLEL = "parallel"
BLACK_WHITE = "bw"
MODES = (SEQUENTIAL, PARALLEL)


class PebblingError(ValueError):
    """Raised when an operation needs a legal pebbling and gets an illegal one."""

    def __init__(self, violation: "Violation"):
        super().__init__(str(violation))
        self.violation = violation


@dataclass(frozen=True)
class Violation:
    step: int
    rule: int
    node: int | None
    message: str = ""

    def __str__(self) -> str:
        where = f" at node {self.node}" if self.node is not None else ""
        return f"step {self.step}, rule {self.rule}{where}: {self.message}"

    def to_dict(self) -> dict:
        return {"step": self.step, "rule": self.rule, "node": self.node, "message": self.message}


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


@dataclass(frozen=True)
class Pebbling:
    steps: tuple[NodeSet, ...]
    mode: str = PARALLEL
    target: NodeSet | None = None

    @classmethod
    def of(cls, steps: Iterable[Iterable[int]], mode: str = PARALLEL, target=None) -> "Pebbling":
        return cls(tuple(as_nodeset(s) for s in steps), _check_mode(mode),
                   None if target is None else as_nodeset(target))

    @property
    def time(self) -> int:
        return len(self.steps) - 1

    def sizes(self) -> list[int]:
        return [len(p) for p in self.steps[1:]]

    def with_mode(self, mode: str) -> "Pebbling":
        return Pebbling(self.steps, _check_mode(mode), self.target)

    def to_document(self, g: Dag | None = None) -> dict:
        doc = {
            "format": PEBBLING_FORMAT,
            "graph_hash": g.graph_hash() if g is not None else None,
            "mode": self.mode,
            "steps": [p.to_list() for p in self.steps],
        }
        if self.target is not None:
            doc["target"] = self.target.to_list()
        return doc

    def to_json(self, g: Dag | None = None) -> str:
        return json.dumps(self.to_document(g), sort_keys=True, separators=(",", ":")) + "\n"


@dataclass(frozen=True)
class BwPebbling:
    """Parallel-black sequential-white pebbling: steps are (black, white) pairs."""

    steps: tuple[tuple[NodeSet, NodeSet], ...]
    target: NodeSet | None = None

    @classmethod
    def of(cls, steps: Iterable[Sequence[Iterable[int]]], target=None) -> "BwPebbling":
        return cls(tuple((as_nodeset(b), as_nodeset(w)) for b, w in steps),
                   None if target is None else as_nodeset(target))

    @property
    def time(self) -> int:
        return len(self.steps) - 1

    @property
    def mode(self) -> str:
        return BLACK_WHITE

    def sizes(self) -> list[int]:
        return [len(b | w) for b, w in self.steps[1:]]

    def to_document(self, g: Dag | None = None) -> dict:
        doc = {
            "format": PEBBLING_FORMAT,
            "graph_hash": g.graph_hash() if g is not None else None,
            "mode": BLACK_WHITE,
            "steps": [[b.to_list(), w.to_list()] for b, w in self.steps],
        }
        if self.target is not None:
            doc["target"] = self.target.to_list()
        return doc

    def to_json(self, g: Dag | None = None) -> str:
        return json.dumps(self.to_document(g), sort_keys=True, separators=(",", ":")) + "\n"


# -- legality ------------------------------------------------------------

def _range_violation(g: Dag, step: int, conf: NodeSet) -> Violation | None:
    stray = conf - g.nodes()
    if stray:
        return Violation(step, 0, stray.min(), "node outside the graph")
    return None


def validate(g: Dag, p: Pebbling, mode: str | None = None) -> Violation | None:
    """First violation of ``p`` on ``g``, or None when the pebbling is legal.

    Rule 0 covers malformed input (non-empty start, unknown nodes).  Within a
    step, rule 3 (one new pebble, sequential only) is reported before rule 2
    (parents pebbled at the previous step).  Rule 1 (targets covered) is
    checked last.
    """
    mode = _check_mode(mode or p.mode)
    if not p.steps:
        return Violation(0, 0, None, "a pebbling needs the initial configuration")
    if p.steps[0]:
        return Violation(0, 0, p.steps[0].min(), "initial configuration must be empty")
    target = g.sinks() if p.target is None else p.target
    stray = target - g.nodes()
    if stray:
        return Violation(0, 0, stray.min(), "target node outside the graph")
    covered = 0
    prev = p.steps[0]
    for i in range(1, len(p.steps)):
        cur = p.steps[i]
        bad = _range_violation(g, i, cur)
        if bad:
            return bad
        new = cur - prev
        if mode == SEQUENTIAL and len(new) > 1:
            second = list(new)[1]
            return Violation(i, 3, second, "more than one pebble placed in a sequential step")
        for v in new:
            if g.parent_mask(v) & ~prev.mask:
                return Violation(i, 2, v, "placed while a parent was unpebbled at the previous step")
        covered |= cur.mask
        prev = cur
    missing = NodeSet.from_mask(target.mask & ~covered)
    if missing:
        return Violation(len(p.steps) - 1, 1, missing.min(), "target never pebbled")
    return None


def is_legal(g: Dag, p: Pebbling, mode: str | None = None) -> bool:
    return validate(g, p, mode) is None


def require_legal(g: Dag, p: Pebbling, mode: str | None = None) -> None:
    bad = validate(g, p, mode)
    if bad is not None:
        raise PebblingError(bad)


def first_cover_steps(g: Dag, p: Pebbling) -> dict[int, int]:
    """For each target node, the first step at which it carries a pebble."""
    target = g.sinks() if p.target is None else p.target
    out: dict[int, int] = {}
    for i, conf in enumerate(p.steps):
        for v in conf & target:
            out.setdefault(v, i)
    return out


def validate_bw(g: Dag, p: BwPebbling) -> Violation | None:
    """Check the five black/white rules.

    1. no white pebbles remain at the end;
    2. at most one new white pebble per step;
    3. a white pebble is removed only if its parents carried a pebble
       (either colour) at the previous step;
    4. a black pebble is placed only under the same condition;
    5. every target node carries a pebble at some step.
    """
    if not p.steps:
        return Violation(0, 0, None, "a pebbling needs the initial configuration")
    b0, w0 = p.steps[0]
    if b0 or w0:
        return Violation(0, 0, (b0 | w0).min(), "initial configuration must be empty")
    target = g.sinks() if p.target is None else p.target
    covered = 0
    pb, pw = p.steps[0]
    for i in range(1, len(p.steps)):
        b, w = p.steps[i]
        bad = _range_violation(g, i, b | w)
        if bad:
            return bad
        prev_any = pb.mask | pw.mask
        new_white = w - pw
        if len(new_white) > 1:
            return Violation(i, 2, list(new_white)[1], "more than one white pebble placed")
        for v in pw - w:
            if g.parent_mask(v) & ~prev_any:
                return Violation(i, 3, v, "white pebble removed before its parents were pebbled")
        for v in b - pb:
            if g.parent_mask(v) & ~prev_any:
                return Violation(i, 4, v, "black pebble placed while a parent was unpebbled")
        covered |= b.mask | w.mask
        pb, pw = b, w
    if pw:
        return Violation(len(p.steps) - 1, 1, pw.min(), "white pebbles remain at the end")
    missing = NodeSet.from_mask(target.mask & ~covered)
    if missing:
        return Violation(len(p.steps) - 1, 5, missing.min(), "target never pebbled")
    return None


# -- sequential transform -----------------------------------------------

def seq_transform(g: Dag, p: Pebbling) -> Pebbling:
    """Serialize a legal parallel pebbling.

    The new pebbles of each parallel step are placed one at a time in
    ascending node order on top of the previous anchor configuration, and
    the step's own configuration closes the run.  A step that only removes
    pebbles produces no output step; its removals are folded into the next
    placing step, which keeps the output time equal to the number of
    placements.
    """
    require_legal(g, p, PARALLEL)
    out = [NodeSet()]
    anchor = NodeSet()
    prev = p.steps[0]
    for cur in p.steps[1:]:
        new = list(cur - prev)
        prev = cur
        if not new:
            continue
        acc = anchor
        for v in new[:-1]:
            acc = acc | NodeSet.from_mask(1 << (v - 1))
            out.append(acc)
        out.append(cur)
        anchor = cur
    return Pebbling(tuple(out), SEQUENTIAL, p.target)


def anchor_indices(p: Pebbling) -> list[int]:
    """A_i = number of placements in steps 1..i."""
    out = [0]
    for prev, cur in zip(p.steps, p.steps[1:]):
        out.append(out[-1] + len(cur - prev))
    return out


# -- metrics ---------------------------------------------------------------

@dataclass(frozen=True)
class MetricsReport:
    time: int
    space: int
    spacetime: int
    cc: int
    ss_profile: dict[int, int] = field(default_factory=dict)
    am_ss_profile: dict[int, int] = field(default_factory=dict)
    bw_cc: int | None = None

    def ss(self, s: int) -> int:
        if s < 1:
            raise ValueError("threshold must be at least 1")
        return self.ss_profile.get(s, 0)

    def am_ss(self, s: int) -> int:
        if s < 1:
            raise ValueError("threshold must be at least 1")
        return self.am_ss_profile.get(s, 0)

    def to_dict(self) -> dict:
        return {
            "time": self.time, "space": self.space, "spacetime": self.spacetime,
            "cc": self.cc, "bw_cc": self.bw_cc,
            "ss_profile": {str(k): v for k, v in self.ss_profile.items()},
            "am_ss_profile": {str(k): v for k, v in self.am_ss_profile.items()},
        }


def _report(sizes: list[int], bw: bool) -> MetricsReport:
    t = len(sizes)
    space = max(sizes, default=0)
    cc = sum(sizes)
    ss_profile = {s: sum(1 for x in sizes if x >= s) for s in range(1, space + 1)}
    am_profile = {s: sum(x // s for x in sizes) for s in range(1, space + 1)}
    return MetricsReport(t, space, t * space, cc, ss_profile, am_profile, cc if bw else None)


def metrics(g: Dag, p: Pebbling | BwPebbling, *, check: bool = True) -> MetricsReport:
    """All complexity measures; space, cc and the profiles range over steps 1..t."""
    if isinstance(p, BwPebbling):
        if check:
            bad = validate_bw(g, p)
            if bad:
                raise PebblingError(bad)
        return _report(p.sizes(), True)
    if check:
        require_legal(g, p)
    return _report(p.sizes(), False)


def sustained_space(p: Pebbling | BwPebbling, s: int) -> int:
    return sum(1 for x in p.sizes() if x >= s)


def amortized_sustained_space(p: Pebbling | BwPebbling, s: int) -> int:
    return sum(x // s for x in p.sizes())


def cumulative_complexity(p: Pebbling | BwPebbling) -> int:
    return sum(p.sizes())


def metrics_csv(p: Pebbling | BwPebbling, s: int) -> str:
    if s < 1:
        raise ValueError("threshold must be at least 1")
    rows = ["step,pebbles,blocks_at_s"]
    for i, x in enumerate([0] + p.sizes()):
        rows.append(f"{i},{x},{x // s}")
    return "\n".join(rows) + "\n"


# -- file IO ---------------------------------------------------------------

class PebblingFormatError(ValueError):
    pass


def _node_list(raw) -> list[int]:
    if not isinstance(raw, list):
        raise PebblingFormatError("configuration must be a list of node ids")
    out = []
    for v in raw:
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise PebblingFormatError(f"invalid node id {v!r}")
        out.append(v)
    return out


def pebbling_from_document(doc) -> Pebbling | BwPebbling:
    if not isinstance(doc, dict) or doc.get("format") != PEBBLING_FORMAT:
        raise PebblingFormatError(f"not a {PEBBLING_FORMAT} document")
    mode = doc.get("mode")
    steps = doc.get("steps")
    if not isinstance(steps, list):
        raise PebblingFormatError("steps must be a list")
    target = doc.get("target")
    target = None if target is None else NodeSet(_node_list(target))
    if mode == BLACK_WHITE:
        pairs = []
        for st in steps:
            if not isinstance(st, list) or len(st) != 2:
                raise PebblingFormatError("black/white steps must be [black, white] pairs")
            pairs.append((NodeSet(_node_list(st[0])), NodeSet(_node_list(st[1]))))
        return BwPebbling(tuple(pairs), target)
    if mode not in MODES:
        raise PebblingFormatError(f"unknown mode {mode!r}")
    return Pebbling(tuple(NodeSet(_node_list(st)) for st in steps), mode, target)


def pebbling_from_json(text: str) -> Pebbling | BwPebbling:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PebblingFormatError(f"invalid JSON: {exc}") from exc
    return pebbling_from_document(doc)


def validate_file_text(g: Dag, text: str) -> Violation | None:
    """Total validator over raw file contents: a violation or None, never an exception."""
    try:
        p = pebbling_from_json(text)
    except PebblingFormatError as exc:
        return Violation(0, 0, None, f"malformed pebbling file: {exc}")
    if isinstance(p, BwPebbling):
        return validate_bw(g, p)
    return validate(g, p)
