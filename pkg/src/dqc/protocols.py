"""Debate systems built from circuits: the KW descent and cross-examination."""

from __future__ import annotations

from math import ceil, log2
from typing import Optional

from .circuit import AND, OR, Circuit
from .debate import DebateSystem, IndexSpace, Strategy, Verifier
from .errors import PreconditionError
from .normalize import Literal, NormalizedCircuit


def ceil_log2(m: int) -> int:
    return 0 if m <= 1 else ceil(log2(m))


def build_kw_debate(nc: NormalizedCircuit) -> DebateSystem:
    """Karchmer-Wigderson descent through an alternating AND-rooted circuit.

    The selector for the node at depth t sits at position n + t, so Prover 0
    answers at AND levels and Prover 1 at OR levels.  Bit 0 picks the left
    child.  The verifier reads the selectors down to a literal, then that
    input: at most depth + 1 probes.
    """
    if not nc.check_alternation():
        raise PreconditionError("circuit is not in leveled alternating form")
    n, d = nc.n_inputs, nc.depth
    k = max(1, ceil(d / 2))
    nodes, root = nc.nodes, nc.root
    cache: dict[tuple, list[int]] = {}

    def values(x):
        if x not in cache:
            cache[x] = nc.node_values(x)
        return cache[x]

    def value(ref, x):
        return ref.value(x) if isinstance(ref, Literal) else values(x)[ref]

    def current(h, depth):
        ref = root
        for t in range(depth):
            if isinstance(ref, Literal):
                break
            _, a, b = nodes[ref]
            ref = b if h[t] else a
        return ref

    def make(kind, wanted):
        def strategy(x, h):
            ref = current(h, len(h))
            if isinstance(ref, Literal):
                return 0        # descent already finished: dummy bit
            assert nodes[ref][0] == kind
            _, a, b = nodes[ref]
            if value(a, x) == wanted:
                return 0
            return 1 if value(b, x) == wanted else 0
        return strategy

    def program():
        ref, t = root, 0
        while not isinstance(ref, Literal):
            bit = yield n + t
            _, a, b = nodes[ref]
            ref = b if bit else a
            t += 1
        xb = yield ref.var - 1
        return xb if ref.positive else 1 - xb

    space = IndexSpace(n, k)
    verifier = Verifier(space, d + 1, program, "kw")
    return DebateSystem(n, k, make(AND, 0), make(OR, 1), verifier, d + 1, "kw",
                        {"normalized": nc, "depth": d})


_TABLE = {
    AND: lambda ops: ops[0] & ops[1],
    OR: lambda ops: ops[0] | ops[1],
    "NOT": lambda ops: 1 - ops[0],
}


def crossexam_layer(n: int, base_k: int, base0: Optional[Strategy], base1: Optional[Strategy],
                    c: Circuit, label: str, meta: Optional[dict] = None) -> DebateSystem:
    """Append a cross-examination of circuit ``c`` after ``base_k`` existing rounds.

    Input wire i of ``c`` is position i of the index space, so ``c`` reads x
    and the first ``base_k`` rounds of transcript.  Prover 0 then claims every
    gate value (m rounds) and Prover 1 names a gate with a B-bit index
    (B rounds, MSB first, out-of-range means the output gate).
    """
    if c.n_inputs != n + 2 * base_k:
        raise PreconditionError(f"circuit has {c.n_inputs} inputs, need {n + 2 * base_k}")
    m = c.size
    width = max(ceil_log2(m), 1)
    k = base_k + m + width
    out = c.output
    support = c.input_support()
    gate_base = base_k

    def claim_pos(g):
        return n + 2 * (gate_base + g)

    def index_pos(b):
        return n + 2 * (gate_base + m + b) + 1

    cache: dict[tuple, list[int]] = {}

    def gate_values(x, h):
        key = (x, tuple(h[i - n] for i in support if i >= n))
        if key not in cache:
            z = [0] * c.n_inputs
            for i in support:
                z[i] = x[i] if i < n else h[i - n]
            cache[key] = c.eval_wires(z)
        return cache[key]

    def challenge(x, h):
        def claim(g):
            return h[2 * (gate_base + g)]
        if claim(out) == 1:
            return out
        for g, gate in enumerate(c.gates):
            ops = [(x[w] if w < n else h[w - n]) if w < c.n_inputs else claim(w - c.n_inputs)
                   for w in gate.ops]
            if claim(g) != _TABLE[gate.kind](ops):
                return g
        return out

    def s0(x, h):
        j = len(h) // 2
        if j < base_k:
            return base0(x, h)
        g = j - base_k
        if g < m:
            return gate_values(x, h)[c.n_inputs + g]
        return 0

    def s1(x, h):
        j = len(h) // 2
        if j < base_k:
            return base1(x, h)
        b = j - base_k - m
        if b < 0:
            return 0
        return (challenge(x, h) >> (width - 1 - b)) & 1

    def program():
        t = 0
        for b in range(width):
            t = 2 * t + (yield index_pos(b))
        if t >= m:
            t = out
        claimed = yield claim_pos(t)
        gate = c.gates[t]
        got: dict[int, int] = {}
        for w in gate.ops:
            if w not in got:
                got[w] = yield (w if w < c.n_inputs else claim_pos(w - c.n_inputs))
        if claimed != _TABLE[gate.kind]([got[w] for w in gate.ops]):
            return 1
        return 1 if (t == out and claimed == 1) else 0

    ell = width + 3
    space = IndexSpace(n, k)
    verifier = Verifier(space, ell, program, label)
    info = {"circuit": c, "m": m, "index_bits": width, "base_k": base_k}
    info.update(meta or {})
    return DebateSystem(n, k, s0, s1, verifier, ell, label, info)


def build_crossexam_debate(c: Circuit) -> DebateSystem:
    return crossexam_layer(c.n_inputs, 0, None, None, c, "crossexam")


def size_bound_note(max_probes: int, m: int) -> str:
    """Arithmetic reading of the size bound: probes <= log2(m) + 3 means 2^(probes-3) <= m."""
    lhs = 2 ** (max_probes - 3) if max_probes >= 3 else 0
    return f"2^(probes-3)={lhs} {'<=' if lhs <= m else '>'} m={m}"
