"""Graph labeling function, its naive evaluator and memory accounting.

Each node's label is the oracle applied to (x, v, inputs) where the inputs
are x_j for the j-th source and the parents' labels (ascending parent id)
otherwise.  The output is the tuple of sink labels in ascending order.

Oracle inputs use a prefix-free encoding: a 4-byte big-endian field count,
then for each field an 8-byte big-endian length and the bytes.  Node ids
are 8-byte big-endian integers and x is nested-encoded as a single field.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .graph import Dag

REAL_HASH = "real-hash"
TEST_STUB = "test-stub"
DEFAULT_W = 256


def encode_fields(fields: Sequence[bytes]) -> bytes:
    out = [len(fields).to_bytes(4, "big")]
    for f in fields:
        out.append(len(f).to_bytes(8, "big"))
        out.append(bytes(f))
    return b"".join(out)


def encode_node(v: int) -> bytes:
    return int(v).to_bytes(8, "big")


def encode_input(x: Sequence[bytes]) -> bytes:
    return encode_fields([bytes(xi) for xi in x])


def label_input(x_enc: bytes, v: int, inputs: Sequence[bytes]) -> bytes:
    return encode_fields([x_enc, encode_node(v), *inputs])


def _truncate(stream: bytes, w: int) -> bytes:
    nbytes = (w + 7) // 8
    out = bytearray(stream[:nbytes])
    spare = nbytes * 8 - w
    if spare:
        out[-1] &= (0xFF << spare) & 0xFF
    return bytes(out)


class _Oracle:
    backend = ""

    def __init__(self, w: int = DEFAULT_W, log: bool = False):
        if w < 1:
            raise ValueError("w must be positive")
        self.w = w
        self.calls = 0
        self.log_enabled = log
        self.call_log: list[tuple[bytes, bytes]] = []

    def _block(self, data: bytes, counter: int) -> bytes:
        raise NotImplementedError

    def __call__(self, data: bytes) -> bytes:
        """Leftmost w bits of the digest stream (counter mode beyond one block)."""
        self.calls += 1
        need = (self.w + 7) // 8
        stream = b""
        counter = 0
        while len(stream) < need:
            stream += self._block(data, counter)
            counter += 1
        out = _truncate(stream, self.w)
        if self.log_enabled:
            self.call_log.append((data, out))
        return out

    def describe(self) -> dict:
        return {"backend": self.backend, "w": self.w}


class HashOracle(_Oracle):
    """SHA-256 backend."""

    backend = REAL_HASH

    def _block(self, data: bytes, counter: int) -> bytes:
        if counter == 0:
            return hashlib.sha256(data).digest()
        return hashlib.sha256(counter.to_bytes(8, "big") + data).digest()


class StubOracle(_Oracle):
    """Seeded keyed BLAKE2b backend for reproducible test vectors; logs by default."""

    backend = TEST_STUB

    def __init__(self, seed: int = 0, w: int = DEFAULT_W, log: bool = True):
        super().__init__(w, log)
        self.seed = seed
        self._key = hashlib.sha256(b"stub-oracle" + int(seed).to_bytes(8, "big", signed=True)).digest()

    def _block(self, data: bytes, counter: int) -> bytes:
        h = hashlib.blake2b(data, key=self._key, digest_size=64,
                            person=counter.to_bytes(8, "big") + b"\0" * 8)
        return h.digest()

    def describe(self) -> dict:
        return {"backend": self.backend, "w": self.w, "seed": self.seed}


def make_oracle(backend: str, w: int = DEFAULT_W, seed: int = 0, log: bool = False) -> _Oracle:
    if backend == REAL_HASH:
        return HashOracle(w, log)
    if backend == TEST_STUB:
        return StubOracle(seed, w, log)
    raise ValueError(f"unknown backend {backend!r}")


def _check_arity(g: Dag, x: Sequence[bytes]) -> list[int]:
    sources = list(g.sources())
    if len(x) != len(sources):
        raise ValueError(f"graph has {len(sources)} sources but {len(x)} inputs were given")
    return sources


def _label_all(g: Dag, x: Sequence[bytes], oracle) -> dict[int, bytes]:
    sources = _check_arity(g, x)
    source_rank = {v: j for j, v in enumerate(sources)}
    x_enc = encode_input(x)
    labels: dict[int, bytes] = {}
    for v in g.node_list():
        if v in source_rank:
            inputs = [bytes(x[source_rank[v]])]
        else:
            inputs = [labels[u] for u in g.parent_list(v)]
        labels[v] = oracle(label_input(x_enc, v, inputs))
    return labels


def graph_function(g: Dag, x: Sequence[bytes], oracle) -> list[bytes]:
    """Sink labels in ascending sink order."""
    labels = _label_all(g, x, oracle)
    return [labels[v] for v in g.sinks()]


@dataclass
class LabelingTrace:
    w: int
    state_bits: list[int] = field(default_factory=list)
    calls: list[int] = field(default_factory=list)

    @property
    def total_calls(self) -> int:
        return sum(self.calls)

    def smc_threshold(self, block_bits: int) -> int:
        """Steps whose state holds at least one full block."""
        return sum(1 for b in self.state_bits if b >= block_bits)

    def smc_block_sum(self, block_bits: int) -> int:
        """Sum over steps of the number of whole blocks in the state."""
        return sum(b // block_bits for b in self.state_bits)

    def to_csv(self, block_bits: int | None = None) -> str:
        head = "step,state_bits,calls"
        if block_bits:
            head += ",blocks,at_threshold"
        rows = [head]
        for i, (b, c) in enumerate(zip(self.state_bits, self.calls), start=1):
            row = f"{i},{b},{c}"
            if block_bits:
                row += f",{b // block_bits},{int(b >= block_bits)}"
            rows.append(row)
        return "\n".join(rows) + "\n"

    def to_dict(self, block_bits: int | None = None) -> dict:
        doc = {"w": self.w, "state_bits": self.state_bits, "calls": self.calls,
               "total_calls": self.total_calls}
        if block_bits:
            doc["block_bits"] = block_bits
            doc["smc_threshold_count"] = self.smc_threshold(block_bits)
            doc["smc_block_sum"] = self.smc_block_sum(block_bits)
        return doc


def naive_evaluate(g: Dag, x: Sequence[bytes], oracle) -> tuple[list[bytes], LabelingTrace]:
    """Compute labels one per step in topological order, keeping all of them."""
    sources = _check_arity(g, x)
    source_rank = {v: j for j, v in enumerate(sources)}
    x_enc = encode_input(x)
    labels: dict[int, bytes] = {}
    trace = LabelingTrace(oracle.w)
    for i, v in enumerate(g.node_list(), start=1):
        before = oracle.calls
        if v in source_rank:
            inputs = [bytes(x[source_rank[v]])]
        else:
            inputs = [labels[u] for u in g.parent_list(v)]
        labels[v] = oracle(label_input(x_enc, v, inputs))
        trace.state_bits.append(i * oracle.w)
        trace.calls.append(oracle.calls - before)
    return [labels[v] for v in g.sinks()], trace


def alpha_bound(q: int, s: int, t: int, n: int, w: int) -> int:
    """0 when q < n, else min(q // n, t // (n - s // w)).

    If n - s // w <= 0 the second term is undefined; the first term is
    returned with a warning.
    """
    if min(q, s, t, n) < 0 or w < 1:
        raise ValueError("parameters must be non-negative and w positive")
    if n == 0:
        raise ValueError("n must be positive")
    if q < n:
        return 0
    denom = n - s // w
    if denom <= 0:
        warnings.warn("n - floor(s/w) <= 0: returning floor(q/n) alone", stacklevel=2)
        return q // n
    return min(q // n, t // denom)


@dataclass(frozen=True)
class SmhfParameters:
    ss_value: int
    beta: float
    epsilon: float
    beta_exact: Fraction | None
    epsilon_exact: Fraction | None

    def to_dict(self) -> dict:
        return {
            "ss_value": self.ss_value, "beta": self.beta, "epsilon": self.epsilon,
            "beta_exact": str(self.beta_exact) if self.beta_exact is not None else None,
            "epsilon_exact": str(self.epsilon_exact) if self.epsilon_exact is not None else None,
        }


def _exact_log2(q: int) -> int | None:
    return q.bit_length() - 1 if q > 0 and q & (q - 1) == 0 else None


def smhf_parameters(g: Dag, s: int, w: int, q: int, lam, ss_value: int | None = None) -> SmhfParameters:
    """beta = ss * (w - log2 q) / (1 + lambda) and epsilon = q / 2**w + 2**-lambda.

    ``ss_value`` defaults to the exact parallel s-sustained space of ``g``
    from the brute-force oracle.  Exact rationals are reported whenever
    log2 q and lambda are integers.
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    if w <= math.log2(q):
        raise ValueError("w must exceed log2 q")
    if ss_value is None:
        from .strategies import min_ss
        ss_value = min_ss(g, s)
    lg = _exact_log2(q)
    lam_int = isinstance(lam, int) or (isinstance(lam, float) and lam.is_integer())
    beta_exact = None
    eps_exact = None
    if lg is not None and lam_int:
        beta_exact = Fraction(ss_value * (w - lg), 1 + int(lam))
    if lam_int:
        lam_i = int(lam)
        eps_exact = Fraction(q, 2 ** w) + (Fraction(1, 2 ** lam_i) if lam_i >= 0 else Fraction(2 ** -lam_i))
    beta = ss_value * (w - math.log2(q)) / (1 + lam)
    epsilon = q / 2.0 ** w + 2.0 ** (-lam)
    return SmhfParameters(ss_value, beta, epsilon, beta_exact, eps_exact)


def parse_hex_inputs(values: Sequence[str]) -> list[bytes]:
    out = []
    for v in values:
        v = v[2:] if v.lower().startswith("0x") else v
        try:
            out.append(bytes.fromhex(v))
        except ValueError as exc:
            raise ValueError(f"input {v!r} is not hex") from exc
    return out
