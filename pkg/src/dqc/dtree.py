"""Deterministic decision trees over a flat index space."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .circuit import ONE, ZERO, Circuit, CircuitBuilder
from .errors import ParseError, PreconditionError


@dataclass(frozen=True)
class DecisionTree:
    """Nodes are ``("node", index, child0, child1)`` or ``("leaf", bit)``; node 0 is the root."""

    space: int
    nodes: tuple[tuple, ...]

    def __post_init__(self):
        if not self.nodes:
            raise PreconditionError("empty decision tree")
        seen = set()
        stack = [0]
        while stack:
            j = stack.pop()
            if j in seen:
                raise PreconditionError(f"decision tree node {j} reached twice")
            seen.add(j)
            node = self.nodes[j]
            if node[0] == "leaf":
                if node[1] not in (0, 1):
                    raise PreconditionError(f"leaf {j} has non-bit verdict")
                continue
            _, idx, c0, c1 = node
            if not 0 <= idx < self.space:
                raise PreconditionError(f"node {j} queries {idx} outside [0, {self.space})")
            for c in (c0, c1):
                if not 0 <= c < len(self.nodes):
                    raise PreconditionError(f"node {j} has dangling child {c}")
            stack += [c0, c1]

    @property
    def depth(self) -> int:
        def d(j):
            node = self.nodes[j]
            return 0 if node[0] == "leaf" else 1 + max(d(node[2]), d(node[3]))
        return d(0)

    def evaluate(self, read: Callable[[int], int]) -> tuple[int, list[int]]:
        probes = []
        node = self.nodes[0]
        while node[0] == "node":
            probes.append(node[1])
            node = self.nodes[node[3] if read(node[1]) else node[2]]
        return node[1], probes

    def leaf_of(self, read: Callable[[int], int]) -> int:
        j = 0
        while self.nodes[j][0] == "node":
            node = self.nodes[j]
            j = node[3] if read(node[1]) else node[2]
        return j

    def queried_indices(self) -> set[int]:
        return {node[1] for node in self.nodes if node[0] == "node"}

    def internal_count(self) -> int:
        return sum(1 for node in self.nodes if node[0] == "node")

    def complement(self) -> "DecisionTree":
        return DecisionTree(self.space, tuple(
            ("leaf", 1 - nd[1]) if nd[0] == "leaf" else nd for nd in self.nodes))

    def with_leaves_flipped(self, which: Iterable[int]) -> "DecisionTree":
        which = set(which)
        return DecisionTree(self.space, tuple(
            ("leaf", 1 - nd[1]) if nd[0] == "leaf" and j in which else nd
            for j, nd in enumerate(self.nodes)))

    def leaf_ids(self) -> list[int]:
        return [j for j, nd in enumerate(self.nodes) if nd[0] == "leaf"]


def constant_tree(space: int, bit: int) -> DecisionTree:
    return DecisionTree(space, (("leaf", bit),))


def random_tree(rng, space: int, depth: int, indices: Sequence[int] | None = None,
                stop: float = 0.15) -> DecisionTree:
    """Random tree of depth <= ``depth`` with no index repeated on a path."""
    pool = list(range(space)) if indices is None else list(indices)
    nodes: list = []

    def grow(d, used):
        j = len(nodes)
        nodes.append(None)
        free = [i for i in pool if i not in used]
        if d == 0 or not free or (d < depth and rng.random() < stop):
            nodes[j] = ("leaf", rng.randrange(2))
            return j
        idx = rng.choice(free)
        c0 = grow(d - 1, used | {idx})
        c1 = grow(d - 1, used | {idx})
        nodes[j] = ("node", idx, c0, c1)
        return j

    grow(depth, frozenset())
    return DecisionTree(space, tuple(nodes))


def decision_tree_to_circuit(t: DecisionTree) -> Circuit:
    """Multiplexer circuit: at most 3 gates per internal node plus shared NOTs."""
    b = CircuitBuilder(t.space)
    return b.finish(tree_into(b, t, list(range(t.space))))


def tree_into(b: CircuitBuilder, t: DecisionTree, inputs: Sequence[int]) -> int:
    memo: dict[int, int] = {}

    def wire(j):
        if j not in memo:
            node = t.nodes[j]
            if node[0] == "leaf":
                memo[j] = ONE if node[1] else ZERO
            else:
                _, idx, c0, c1 = node
                memo[j] = b.mux(inputs[idx], wire(c0), wire(c1))
        return memo[j]

    return wire(0)


# -- text format ------------------------------------------------------------------
# space <N>
# node <id> <index> <child0-id> <child1-id>
# leaf <id> <bit>
# The first record is the root.

def tree_records(t: DecisionTree) -> list[str]:
    out = []
    for j, nd in enumerate(t.nodes):
        if nd[0] == "leaf":
            out.append(f"leaf {j} {nd[1]}")
        else:
            out.append(f"node {j} {nd[1]} {nd[2]} {nd[3]}")
    return out


def format_tree(t: DecisionTree) -> str:
    return "\n".join([f"space {t.space}"] + tree_records(t)) + "\n"


def build_tree(space: int, records: list[tuple[int, list[str]]]) -> DecisionTree:
    ids: dict[str, int] = {}
    for j, (lineno, tok) in enumerate(records):
        if tok[1] in ids:
            raise ParseError(f"duplicate node id {tok[1]!r}", lineno)
        ids[tok[1]] = j
    nodes = []
    for lineno, tok in records:
        try:
            if tok[0] == "leaf" and len(tok) == 3:
                nodes.append(("leaf", int(tok[2])))
            elif tok[0] == "node" and len(tok) == 5:
                nodes.append(("node", int(tok[2]), ids[tok[3]], ids[tok[4]]))
            else:
                raise ParseError(f"malformed record {' '.join(tok)!r}", lineno)
        except KeyError as e:
            raise ParseError(f"unknown child id {e.args[0]!r}", lineno) from None
        except ValueError:
            raise ParseError(f"non-integer field in {' '.join(tok)!r}", lineno) from None
    try:
        return DecisionTree(space, tuple(nodes))
    except PreconditionError as e:
        raise ParseError(str(e)) from None


def parse_tree(text: str) -> DecisionTree:
    space = None
    records = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "space" and space is None and len(tok) == 2:
            space = int(tok[1])
        elif tok[0] in ("node", "leaf"):
            records.append((lineno, tok))
        else:
            raise ParseError(f"unexpected {tok[0]!r}", lineno)
    if space is None:
        raise ParseError("missing 'space <N>' header")
    return build_tree(space, records)


def load_tree(path) -> DecisionTree:
    with open(path, encoding="utf-8") as fh:
        return parse_tree(fh.read())
