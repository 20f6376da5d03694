"""Leveled alternating AND/OR form with negations pushed to the leaves."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

from .circuit import AND, NOT, OR, Circuit, CircuitBuilder


class Literal(NamedTuple):
    var: int        # 1-based input index
    positive: bool

    def value(self, x: Sequence[int]) -> int:
        b = x[self.var - 1]
        return b if self.positive else 1 - b

    def __str__(self):
        return f"{'' if self.positive else '~'}x{self.var}"


Ref = Union[int, Literal]


@dataclass(frozen=True)
class NormalizedCircuit:
    """AND-rooted DAG whose kinds alternate strictly along every root-to-leaf path.

    ``nodes[j] = (kind, left, right)``; children are earlier node ids or
    literals.  The root is the last node.
    """

    n_inputs: int
    nodes: tuple[tuple[str, Ref, Ref], ...]
    source: Circuit

    @property
    def root(self) -> int:
        return len(self.nodes) - 1

    @property
    def depth(self) -> int:
        d: list[int] = []
        for _, a, b in self.nodes:
            d.append(1 + max(0 if isinstance(c, Literal) else d[c] for c in (a, b)))
        return d[-1]

    @property
    def levels(self) -> list[str]:
        return [AND if i % 2 == 0 else OR for i in range(self.depth)]

    @property
    def leaves(self) -> set[Literal]:
        return {c for _, a, b in self.nodes for c in (a, b) if isinstance(c, Literal)}

    def node_values(self, x: Sequence[int]) -> list[int]:
        vals: list[int] = []
        for kind, a, b in self.nodes:
            va = a.value(x) if isinstance(a, Literal) else vals[a]
            vb = b.value(x) if isinstance(b, Literal) else vals[b]
            vals.append(va & vb if kind == AND else va | vb)
        return vals

    def evaluate(self, x: Sequence[int]) -> int:
        return self.node_values(x)[-1]

    def to_circuit(self) -> Circuit:
        """Gate-level form; negative literals become NOT gates on inputs."""
        b = CircuitBuilder(self.n_inputs)
        wires: list[int] = []

        def wire(c: Ref) -> int:
            if isinstance(c, Literal):
                return c.var - 1 if c.positive else b.NOT(c.var - 1)
            return wires[c]

        for kind, l, r in self.nodes:
            # bypass folding so identity pads AND(g,g) survive
            wires.append(b._emit(kind, wire(l), wire(r)))
        return Circuit(self.n_inputs, tuple(b.gates), len(b.gates) - 1)

    def check_alternation(self) -> bool:
        if self.nodes[-1][0] != AND:
            return False
        for kind, a, b in self.nodes:
            for c in (a, b):
                if not isinstance(c, Literal) and self.nodes[c][0] == kind:
                    return False
        return True


_DUAL = {AND: OR, OR: AND}


def normalize_alternating(c: Circuit) -> NormalizedCircuit:
    """Push NOTs to the leaves (De Morgan) and pad levels to strict alternation.

    Where a gate's effective kind matches its parent level, an identity gate
    of the missing kind (``OR(g, g)`` or ``AND(g, g)``) is inserted.
    """
    n = c.n_inputs
    nodes: list[tuple[str, Ref, Ref]] = []
    memo: dict[tuple[int, bool, str], Ref] = {}

    def new(kind: str, a: Ref, b: Ref) -> int:
        nodes.append((kind, a, b))
        return len(nodes) - 1

    def emit(w: int, neg: bool, want: str) -> Ref:
        if w < n:
            return Literal(w + 1, not neg)
        key = (w, neg, want)
        if key in memo:
            return memo[key]
        g = c.gates[w - n]
        if g.kind == NOT:
            ref = emit(g.ops[0], not neg, want)
        else:
            eff = _DUAL[g.kind] if neg else g.kind
            if eff == want:
                left = emit(g.ops[0], neg, _DUAL[want])
                right = emit(g.ops[1], neg, _DUAL[want])
                ref = new(want, left, right)
            else:
                inner = emit(w, neg, eff)
                ref = new(want, inner, inner)
        memo[key] = ref
        return ref

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20 * c.size + 1000))
    try:
        root = emit(c.output_wire, False, AND)
    finally:
        sys.setrecursionlimit(limit)
    if isinstance(root, Literal):
        root = new(AND, root, root)
    if root != len(nodes) - 1:
        # memo hit on an earlier node: re-append so the root is last
        kind, a, b = nodes[root]
        new(kind, a, b)
    return NormalizedCircuit(n, tuple(nodes), c)
