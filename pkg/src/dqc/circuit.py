"""Fan-in-2 circuits over AND/OR/NOT.

A circuit over ``n_inputs`` variables is a list of gates in topological
order.  Every signal is addressed by a *wire* number: wires ``0..n-1`` are
the inputs x_1..x_n and wire ``n + j`` is the output of gate ``j``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .boolfn import BoolFn, Bits, to_bits
from .errors import InputShapeError, ParseError, PreconditionError

AND, OR, NOT = "AND", "OR", "NOT"
KINDS = (AND, OR, NOT)
ARITY = {AND: 2, OR: 2, NOT: 1}

# Builder-only constant pseudo-wires; never stored in a Circuit.
ZERO, ONE = -1, -2

_INPUT_RE = re.compile(r"x([0-9]+)$")


@dataclass(frozen=True)
class Gate:
    kind: str
    ops: tuple[int, ...]


@dataclass(frozen=True)
class Circuit:
    n_inputs: int
    gates: tuple[Gate, ...]
    output: int
    names: tuple[str, ...] = ()
    _depths: tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.n_inputs < 1:
            raise PreconditionError("a circuit needs at least one input")
        if not self.gates:
            raise PreconditionError("a circuit needs at least one gate")
        n = self.n_inputs
        depths = []
        for j, g in enumerate(self.gates):
            if g.kind not in ARITY:
                raise PreconditionError(f"gate {j}: unknown kind {g.kind!r}")
            if len(g.ops) != ARITY[g.kind]:
                raise PreconditionError(f"gate {j}: {g.kind} takes {ARITY[g.kind]} operands")
            d = 0
            for w in g.ops:
                if not 0 <= w < n + j:
                    raise PreconditionError(f"gate {j}: operand wire {w} is not an input or earlier gate")
                if w >= n:
                    d = max(d, depths[w - n])
            depths.append(d + 1)
        if not 0 <= self.output < len(self.gates):
            raise PreconditionError(f"output gate {self.output} out of range")
        if not self.names:
            object.__setattr__(self, "names", tuple(f"g{j + 1}" for j in range(len(self.gates))))
        elif len(self.names) != len(self.gates):
            raise PreconditionError("one name per gate required")
        object.__setattr__(self, "_depths", tuple(depths))

    @property
    def size(self) -> int:
        return len(self.gates)

    @property
    def depth(self) -> int:
        return self._depths[self.output]

    @property
    def output_wire(self) -> int:
        return self.n_inputs + self.output

    def wire_name(self, w: int) -> str:
        return f"x{w + 1}" if w < self.n_inputs else self.names[w - self.n_inputs]

    def eval_wires(self, x: Sequence[int]) -> list[int]:
        """Values of every wire (inputs followed by gates) under ``x``."""
        vals = list(x)
        for g in self.gates:
            if g.kind == AND:
                vals.append(vals[g.ops[0]] & vals[g.ops[1]])
            elif g.kind == OR:
                vals.append(vals[g.ops[0]] | vals[g.ops[1]])
            else:
                vals.append(1 - vals[g.ops[0]])
        return vals

    def evaluate(self, x: Sequence[int]) -> int:
        return self.eval_wires(x)[self.output_wire]

    def input_support(self) -> list[int]:
        """Input wires referenced by any gate, ascending."""
        return sorted({w for g in self.gates for w in g.ops if w < self.n_inputs})

    def truth_table(self) -> np.ndarray:
        """Output on all 2^n inputs (x_1 lowest-order), computed bitwise in numpy."""
        if self.n_inputs > 22:
            raise PreconditionError("truth table too large")
        idx = np.arange(1 << self.n_inputs, dtype=np.int64)
        vals = [((idx >> i) & 1).astype(bool) for i in range(self.n_inputs)]
        for g in self.gates:
            if g.kind == AND:
                vals.append(vals[g.ops[0]] & vals[g.ops[1]])
            elif g.kind == OR:
                vals.append(vals[g.ops[0]] | vals[g.ops[1]])
            else:
                vals.append(~vals[g.ops[0]])
        return vals[self.output_wire].astype(np.uint8)

    def to_boolfn(self, name: str = "") -> BoolFn:
        return BoolFn(self.n_inputs, tuple(int(b) for b in self.truth_table()), name)


def eval_circuit(c: Circuit, x: Bits) -> int:
    bits = to_bits(x)
    if len(bits) != c.n_inputs:
        raise InputShapeError(f"expected {c.n_inputs} input bits, got {len(bits)}")
    return c.evaluate(bits)


def circuit_metrics(c: Circuit) -> tuple[int, int]:
    # recomputed from scratch rather than trusting the cached depths
    depth = [0] * c.n_inputs
    for g in c.gates:
        depth.append(1 + max(depth[w] for w in g.ops))
    return len(c.gates), depth[c.output_wire]


def equivalent(a: Circuit, b: Circuit) -> bool:
    return a.n_inputs == b.n_inputs and bool(np.array_equal(a.truth_table(), b.truth_table()))


# -- netlist text format ------------------------------------------------------

def parse_netlist(text: str) -> Circuit:
    n = None
    gates: list[Gate] = []
    names: list[str] = []
    index: dict[str, int] = {}
    output = None
    seen_output_line = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if seen_output_line is not None:
            raise ParseError("statement after 'output'", lineno)
        tok = line.split()
        head = tok[0]
        if n is None:
            if head != "inputs" or len(tok) != 2:
                raise ParseError("first statement must be 'inputs <n>'", lineno)
            try:
                n = int(tok[1])
            except ValueError:
                raise ParseError(f"bad input count {tok[1]!r}", lineno) from None
            if n < 1:
                raise ParseError("input count must be positive", lineno)
            continue
        if head == "inputs":
            raise ParseError("'inputs' given twice", lineno)
        if head == "gate":
            if len(tok) < 3:
                raise ParseError("gate needs an id and a kind", lineno)
            gid, kind, refs = tok[1], tok[2].upper(), tok[3:]
            if kind not in ARITY:
                raise ParseError(f"unknown gate kind {tok[2]!r}", lineno)
            if len(refs) != ARITY[kind]:
                raise ParseError(f"{kind} takes {ARITY[kind]} operands, got {len(refs)}", lineno)
            if gid in index or _INPUT_RE.match(gid):
                raise ParseError(f"gate id {gid!r} is reserved or already declared", lineno)
            ops = []
            for r in refs:
                m = _INPUT_RE.match(r)
                if m:
                    i = int(m.group(1))
                    if not 1 <= i <= n:
                        raise ParseError(f"input {r} out of range 1..{n}", lineno)
                    ops.append(i - 1)
                elif r in index:
                    ops.append(n + index[r])
                else:
                    raise ParseError(f"unknown operand {r!r} (forward reference?)", lineno)
            index[gid] = len(gates)
            gates.append(Gate(kind, tuple(ops)))
            names.append(gid)
            continue
        if head == "output":
            if len(tok) != 2:
                raise ParseError("'output <id>' expected", lineno)
            if tok[1] not in index:
                raise ParseError(f"unknown output gate {tok[1]!r}", lineno)
            output = index[tok[1]]
            seen_output_line = lineno
            continue
        raise ParseError(f"unknown statement {head!r}", lineno)
    if n is None:
        raise ParseError("missing 'inputs' statement")
    if output is None:
        raise ParseError("missing 'output' statement")
    return Circuit(n, tuple(gates), output, tuple(names))


def load_netlist(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return parse_netlist(fh.read())


def to_netlist(c: Circuit) -> str:
    lines = [f"inputs {c.n_inputs}"]
    for name, g in zip(c.names, c.gates):
        lines.append(f"gate {name} {g.kind} " + " ".join(c.wire_name(w) for w in g.ops))
    lines.append(f"output {c.names[c.output]}")
    return "\n".join(lines) + "\n"


# -- construction ---------------------------------------------------------------

class CircuitBuilder:
    """Incremental gate emitter with constant folding and shared negations."""

    def __init__(self, n_inputs: int):
        self.n = n_inputs
        self.gates: list[Gate] = []
        self._not: dict[int, int] = {}

    def _emit(self, kind: str, *ops: int) -> int:
        self.gates.append(Gate(kind, ops))
        return self.n + len(self.gates) - 1

    def AND(self, a: int, b: int) -> int:
        if a == ZERO or b == ZERO:
            return ZERO
        if a == ONE:
            return b
        if b == ONE:
            return a
        return self._emit(AND, a, b)

    def OR(self, a: int, b: int) -> int:
        if a == ONE or b == ONE:
            return ONE
        if a == ZERO:
            return b
        if b == ZERO:
            return a
        return self._emit(OR, a, b)

    def NOT(self, a: int) -> int:
        if a == ZERO:
            return ONE
        if a == ONE:
            return ZERO
        if a not in self._not:
            self._not[a] = self._emit(NOT, a)
        return self._not[a]

    def xor(self, a: int, b: int) -> tuple[int, int]:
        """Four-gate XOR (a|b) & ~(a&b); also returns the a&b wire."""
        both = self.AND(a, b)
        return self.AND(self.OR(a, b), self.NOT(both)), both

    def xnor(self, a: int, b: int) -> int:
        return self.NOT(self.xor(a, b)[0])

    def mux(self, s: int, a: int, b: int) -> int:
        """``a`` when s = 0, ``b`` when s = 1."""
        if a == b:
            return a
        if s in (ZERO, ONE):
            return a if s == ZERO else b
        if a == ZERO and b == ONE:
            return s
        if a == ONE and b == ZERO:
            return self.NOT(s)
        if a == ZERO:
            return self.AND(s, b)
        if b == ZERO:
            return self.AND(self.NOT(s), a)
        if a == ONE:
            return self.OR(self.NOT(s), b)
        if b == ONE:
            return self.OR(s, a)
        return self.OR(self.AND(self.NOT(s), a), self.AND(s, b))

    def all_of(self, wires: Sequence[int]) -> int:
        acc = ONE
        for w in wires:
            acc = self.AND(acc, w)
        return acc

    def inline(self, c: Circuit, inputs: Sequence[int]) -> int:
        """Copy ``c`` with its inputs bound to ``inputs``; returns its output wire."""
        if len(inputs) != c.n_inputs:
            raise PreconditionError("inline: wrong number of input wires")
        wires = list(inputs)
        for g in c.gates:
            ops = [wires[w] for w in g.ops]
            if g.kind == AND:
                wires.append(self.AND(*ops))
            elif g.kind == OR:
                wires.append(self.OR(*ops))
            else:
                wires.append(self.NOT(*ops))
        return wires[c.output_wire]

    def finish(self, out: int) -> Circuit:
        """Freeze with ``out`` as the output, materializing constants and bare inputs."""
        if out == ZERO:
            out = self._emit(AND, 0, self.NOT(0))
        elif out == ONE:
            out = self._emit(OR, 0, self.NOT(0))
        elif out < self.n:
            out = self._emit(AND, out, out)
        return Circuit(self.n, tuple(self.gates), out - self.n)

    @property
    def size(self) -> int:
        return len(self.gates)


def majority_circuit(t: int) -> Circuit:
    """Majority of ``t`` (odd) bits: full-adder population count, then >= (t+1)/2."""
    if t < 1 or t % 2 == 0:
        raise PreconditionError(f"majority needs an odd input count, got {t}")
    b = CircuitBuilder(t)
    return b.finish(majority_into(b, list(range(t))))


def majority_into(b: CircuitBuilder, wires: Sequence[int]) -> int:
    count = popcount_into(b, wires)
    return at_least_into(b, count, (len(wires) + 1) // 2)


def popcount_into(b: CircuitBuilder, wires: Sequence[int]) -> list[int]:
    """Binary count of ``wires`` (LSB first) via column compression of full adders."""
    columns = [list(wires)]
    j = 0
    while j < len(columns):
        col = columns[j]
        while len(col) > 1:
            if len(col) >= 3:
                a, c, d = col.pop(0), col.pop(0), col.pop(0)
                p, ac = b.xor(a, c)
                s, pd = b.xor(p, d)
                carry = b.OR(ac, pd)
            else:
                a, c = col.pop(0), col.pop(0)
                s, carry = b.xor(a, c)
            col.append(s)
            if j + 1 == len(columns):
                columns.append([])
            columns[j + 1].append(carry)
        j += 1
    return [col[0] if col else ZERO for col in columns]


def at_least_into(b: CircuitBuilder, count: Sequence[int], threshold: int) -> int:
    """count >= threshold for a constant threshold (count LSB first)."""
    if threshold <= 0:
        return ONE
    if threshold >= 1 << len(count):
        return ZERO
    ge = ONE  # comparison of the empty low suffix: equal counts as >=
    for j, w in enumerate(count):
        if (threshold >> j) & 1:
            ge = b.AND(w, ge)
        else:
            ge = b.OR(w, ge)
    return ge


# -- named circuits -------------------------------------------------------------

def _balanced(b: CircuitBuilder, wires: list[int], op: Callable[[int, int], int]) -> int:
    while len(wires) > 1:
        nxt = [op(wires[i], wires[i + 1]) for i in range(0, len(wires) - 1, 2)]
        if len(wires) % 2:
            nxt.append(wires[-1])
        wires = nxt
    return wires[0]


def and_circuit(n: int) -> Circuit:
    b = CircuitBuilder(n)
    return b.finish(_balanced(b, list(range(n)), b.AND))


def or_circuit(n: int) -> Circuit:
    b = CircuitBuilder(n)
    return b.finish(_balanced(b, list(range(n)), b.OR))


def parity_circuit(n: int) -> Circuit:
    """Balanced tree of four-gate XOR gadgets: 4(n-1) gates."""
    b = CircuitBuilder(n)
    return b.finish(_balanced(b, list(range(n)), lambda u, v: b.xor(u, v)[0]))


def const_circuit(n: int, bit: int) -> Circuit:
    b = CircuitBuilder(n)
    return b.finish(ONE if bit else ZERO)


def circuit_from_function(f: BoolFn) -> Circuit:
    """Sum-of-minterms circuit for an arbitrary truth table."""
    b = CircuitBuilder(f.n)
    terms = []
    for v, bit in enumerate(f.table):
        if bit:
            lits = [i if (v >> i) & 1 else b.NOT(i) for i in range(f.n)]
            terms.append(_balanced(b, lits, b.AND))
    out = _balanced(b, terms, b.OR) if terms else ZERO
    return b.finish(out)


def named_circuit(name: str, n: int) -> Circuit:
    if name == "and":
        return and_circuit(n)
    if name == "or":
        return or_circuit(n)
    if name == "parity":
        return parity_circuit(n)
    if name == "majority":
        return majority_circuit(n)
    if name in ("const0", "const1"):
        return const_circuit(n, int(name[-1]))
    raise ValueError(f"unknown built-in circuit {name!r}")


def random_circuit(rng, n: int, m: int) -> Circuit:
    """Random DAG with ``m`` gates; operands drawn uniformly from earlier wires.

    The last gate is the output.  ``rng`` is a ``random.Random``.
    """
    gates = []
    for j in range(m):
        r = rng.random()
        kind = NOT if r < 0.2 else (AND if r < 0.6 else OR)
        wires = n + j
        if kind == NOT:
            ops = (rng.randrange(wires),)
        else:
            ops = (rng.randrange(wires), rng.randrange(wires))
        gates.append(Gate(kind, ops))
    return Circuit(n, tuple(gates), m - 1)
