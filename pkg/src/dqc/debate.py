"""Debate systems: transcripts, query-bounded verifiers, and exhaustive checks.

Positions of the concatenated string x_1..x_n, alpha_1, beta_1, ..., alpha_k,
beta_k are numbered 0..n+2k-1.  Prover 0 writes the alpha bits and Prover 1
the beta bits, one bit per round, Prover 0 first.

A *strategy* is a callable ``strategy(x, history) -> bit`` where ``history``
is the sequence of transcript bits written so far.  A *verifier program* is a
generator function: it yields positions to query, receives the answers, and
returns the verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, NamedTuple, Optional, Sequence

from .boolfn import BoolFn, int_to_bits, to_bits
from .dtree import DecisionTree
from .errors import (BudgetExceeded, InputShapeError, PreconditionError,
                     VerifierContractError)

DEFAULT_BUDGET = 1 << 26
PATH_BUDGET_ELL = 24

Strategy = Callable[[tuple, Sequence[int]], int]


class IndexSpace(NamedTuple):
    n: int
    k: int

    @property
    def total(self) -> int:
        return self.n + 2 * self.k

    def alpha(self, j: int) -> int:
        """Position of alpha_j (1-based round)."""
        return self.n + 2 * (j - 1)

    def beta(self, j: int) -> int:
        return self.n + 2 * (j - 1) + 1

    def describe(self, p: int) -> str:
        if p < self.n:
            return f"x{p + 1}"
        j, r = divmod(p - self.n, 2)
        return f"{'ab'[r]}{j + 1}"


class Query(NamedTuple):
    index: int


class Verdict(NamedTuple):
    bit: int


class Verifier:
    """Adaptive query machine with a declared bound ``ell`` on probes per path."""

    def __init__(self, space: IndexSpace, ell: int, program: Callable[[], Iterator],
                 label: str = ""):
        self.space = space
        self.ell = ell
        self.program = program
        self.label = label
        self._tree: Optional[DecisionTree] = None

    @classmethod
    def from_tree(cls, space: IndexSpace, tree: DecisionTree, label: str = "tree") -> "Verifier":
        if tree.space != space.total:
            raise PreconditionError("tree index space does not match")

        def program():
            node = tree.nodes[0]
            while node[0] == "node":
                ans = yield node[1]
                node = tree.nodes[node[3] if ans else node[2]]
            return node[1]

        v = cls(space, tree.depth, program, label)
        v._tree = tree
        return v

    def _check(self, idx, probes):
        if not isinstance(idx, int) or not 0 <= idx < self.space.total:
            raise VerifierContractError(f"{self.label}: query {idx!r} outside index space")
        if idx in probes:
            raise VerifierContractError(f"{self.label}: repeated query {idx}")
        if len(probes) >= self.ell:
            raise VerifierContractError(f"{self.label}: more than {self.ell} queries")

    def run(self, read: Callable[[int], int]) -> tuple[int, list[int]]:
        """Drive the program against ``read``; returns (verdict, probes in order)."""
        gen = self.program()
        probes: list[int] = []
        try:
            idx = next(gen)
            while True:
                self._check(idx, probes)
                probes.append(idx)
                idx = gen.send(read(idx))
        except StopIteration as stop:
            bit = stop.value
        if bit not in (0, 1):
            raise VerifierContractError(f"{self.label}: verdict {bit!r} is not a bit")
        return bit, probes

    def next_action(self, history: Sequence[tuple[int, int]]):
        """Behavioral contract: next Query or the Verdict after ``history``."""
        gen = self.program()
        try:
            idx = next(gen)
            for i, (q, ans) in enumerate(history):
                if q != idx:
                    raise VerifierContractError(f"history step {i} queried {q}, program wants {idx}")
                idx = gen.send(ans)
        except StopIteration as stop:
            return Verdict(stop.value)
        return Query(idx)

    def evaluate(self, z: Sequence[int]) -> int:
        """V on a full string x || transcript."""
        return self.run(z.__getitem__)[0]

    def tree(self, budget: int = 1 << PATH_BUDGET_ELL) -> DecisionTree:
        """Flatten by exploring both answers at every query (cached)."""
        if self._tree is None:
            nodes: list = []
            count = [0]

            def grow(answers: tuple) -> int:
                count[0] += 1
                if count[0] > budget:
                    raise BudgetExceeded("verifier path exploration", budget, 1 << (self.ell + 1))
                act = self.next_action(answers)
                j = len(nodes)
                nodes.append(None)
                if isinstance(act, Verdict):
                    if act.bit not in (0, 1):
                        raise VerifierContractError(f"{self.label}: non-bit verdict")
                    nodes[j] = ("leaf", act.bit)
                    return j
                probes = [q for q, _ in answers]
                self._check(act.index, probes)
                c0 = grow(answers + ((act.index, 0),))
                c1 = grow(answers + ((act.index, 1),))
                nodes[j] = ("node", act.index, c0, c1)
                return j

            grow(())
            self._tree = DecisionTree(self.space.total, tuple(nodes))
        return self._tree

    def max_probes(self) -> int:
        return self.tree().depth


@dataclass
class DebateSystem:
    n: int
    k: int
    strategy0: Strategy
    strategy1: Strategy
    verifier: Verifier
    ell_bound: int
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verifier.space != IndexSpace(self.n, self.k):
            raise PreconditionError("verifier index space does not match (n, k)")
        if self.verifier.ell > self.ell_bound:
            raise PreconditionError("verifier bound exceeds the declared ell")

    @property
    def space(self) -> IndexSpace:
        return IndexSpace(self.n, self.k)


# -- interaction ----------------------------------------------------------------

class _Unset(Exception):
    """An unassigned adversary bit was read; carries its transcript offset."""

    def __init__(self, pos: int):
        self.pos = pos


class History(Sequence):
    """Read-only view of the first ``limit`` transcript bits.

    Reading an adversary bit that has not been fixed yet raises ``_Unset``,
    which is how the exhaustive search learns what to branch on.
    """

    __slots__ = ("bits", "limit")

    def __init__(self, bits: list, limit: int):
        self.bits = bits
        self.limit = limit

    def __len__(self):
        return self.limit

    def __getitem__(self, j):
        if isinstance(j, slice):
            return tuple(self[i] for i in range(*j.indices(self.limit)))
        if j < 0:
            j += self.limit
        if not 0 <= j < self.limit:
            raise IndexError(j)
        b = self.bits[j]
        if b is None:
            raise _Unset(j)
        return b


def _bit(v) -> int:
    if v not in (0, 1):
        raise PreconditionError(f"strategy produced non-bit {v!r}")
    return int(v)


def _play(sys: DebateSystem, x: tuple, honest: Optional[int], choose) -> list:
    """Fill a transcript; ``choose(pos, view)`` supplies adversary bits."""
    t: list = [None] * (2 * sys.k)
    strategies = (sys.strategy0, sys.strategy1)
    for pos in range(2 * sys.k):
        role = pos & 1
        if honest is None or role == honest:
            t[pos] = _bit(strategies[role](x, History(t, pos)))
        else:
            t[pos] = choose(pos, History(t, pos))
    return t


def _reader(x: tuple, t: list, n: int) -> Callable[[int], int]:
    def read(p):
        if p < n:
            return x[p]
        b = t[p - n]
        if b is None:
            raise _Unset(p - n)
        return b
    return read


@dataclass
class DebateRun:
    transcript: tuple[int, ...]
    verdict: int
    probes: list[int]


def run_debate(sys: DebateSystem, x, adversary_role: Optional[int] = None,
               adversary_bits=None) -> DebateRun:
    """Play honest strategies against an adversary.

    ``adversary_bits`` is a sequence (one bit per adversary round) or a
    callable ``(x, history) -> bit``.  With ``adversary_role=None`` both sides
    play honestly.
    """
    x = to_bits(x)
    if len(x) != sys.n:
        raise InputShapeError(f"expected {sys.n} input bits, got {len(x)}")
    if adversary_role is None:
        choose = None
    elif callable(adversary_bits):
        def choose(pos, view):
            return _bit(adversary_bits(x, view))
    else:
        seq = list(adversary_bits or ())

        def choose(pos, view):
            j = pos // 2
            if j >= len(seq):
                raise PreconditionError(f"adversary ran out of bits at round {j + 1}")
            return _bit(seq[j])
    t = _play(sys, x, adversary_role if adversary_role is None else 1 - adversary_role, choose)
    verdict, probes = sys.verifier.run(_reader(x, t, sys.n))
    return DebateRun(tuple(t), verdict, probes)


class Budget:
    def __init__(self, limit: int, what: str, required: Optional[int] = None):
        self.limit = limit
        self.used = 0
        self.what = what
        self.required = required

    def tick(self):
        self.used += 1
        if self.used > self.limit:
            raise BudgetExceeded(self.what, self.limit, self.required)


@dataclass
class Outcome:
    """One equivalence class of adversary behaviour on one input.

    ``assignment`` fixes only the adversary bits somebody actually read;
    every completion of the others yields the same honest moves and result.
    """

    x: tuple
    honest: int
    assignment: dict
    transcript: tuple          # unread adversary bits filled with 0
    result: Any

    def adversary_bits(self) -> list[int]:
        adv = 1 - self.honest
        return [self.assignment.get(2 * j + adv, 0) for j in range(len(self.transcript) // 2)]

    def read(self, n: int) -> Callable[[int], int]:
        x, t = self.x, self.transcript
        return lambda p: x[p] if p < n else t[p - n]


def explore(sys: DebateSystem, x: tuple, honest: int,
            leaf: Callable[[Callable[[int], int]], Any], budget: Budget) -> Iterator[Outcome]:
    """Every adaptive adversary against the honest prover ``honest`` on ``x``.

    Adversary bits start unassigned and are branched on only when a strategy
    or ``leaf`` reads them, so each yielded outcome covers every adversary
    whose read bits match its assignment.  This is exhaustive: the nested
    quantifiers range over all 2^k adversary choices, and unread bits cannot
    change anything that was computed.
    """
    stack: list[dict] = [{}]
    while stack:
        assign = stack.pop()
        budget.tick()
        try:
            t = _play(sys, x, honest, lambda pos, view: assign.get(pos))
            result = leaf(_reader(x, t, sys.n))
        except _Unset as need:
            if need.pos in assign or (need.pos & 1) == honest:
                raise
            stack.append({**assign, need.pos: 1})
            stack.append({**assign, need.pos: 0})
            continue
        full = tuple(0 if b is None else b for b in t)
        yield Outcome(x, honest, assign, full, result)


def explore_valid(sys: DebateSystem, f: BoolFn, leaf, budget: Budget) -> Iterator[Outcome]:
    """``explore`` over every x with the truthful prover (Prover f(x)) honest."""
    if f.n != sys.n:
        raise PreconditionError(f"function has {f.n} variables, system has {sys.n}")
    for v in range(1 << sys.n):
        x = int_to_bits(v, sys.n)
        yield from explore(sys, x, f.table[v], leaf, budget)


@dataclass
class Counterexample:
    x: tuple
    adversary_role: int
    adversary_bits: list
    transcript: tuple
    verdict: int

    def to_dict(self):
        return {"x": "".join(map(str, self.x)), "adversary_role": self.adversary_role,
                "adversary_bits": "".join(map(str, self.adversary_bits)),
                "transcript": "".join(map(str, self.transcript)), "verdict": self.verdict}


@dataclass
class ValidityReport:
    valid: bool
    max_probes_observed: int
    counterexample: Optional[Counterexample] = None
    runs: int = 0


def check_validity(sys: DebateSystem, f: BoolFn, budget: int = DEFAULT_BUDGET) -> ValidityReport:
    """Exhaustively check both quantified conditions for every input."""
    b = Budget(budget, "check_validity", (1 << sys.n) << sys.k)
    max_probes = 0
    runs = 0
    for out in explore_valid(sys, f, sys.verifier.run, b):
        runs += 1
        verdict, probes = out.result
        max_probes = max(max_probes, len(probes))
        if verdict != out.honest:
            cex = Counterexample(out.x, 1 - out.honest, out.adversary_bits(),
                                 out.transcript, verdict)
            return ValidityReport(False, max_probes, cex, runs)
    if max_probes > sys.ell_bound:
        raise VerifierContractError(f"observed {max_probes} probes > ell {sys.ell_bound}")
    return ValidityReport(True, max_probes, None, runs)


def queried_variable_set(v: Verifier, budget: int = 1 << PATH_BUDGET_ELL) -> set[int]:
    if v.ell > PATH_BUDGET_ELL:
        raise BudgetExceeded("queried_variable_set", 1 << PATH_BUDGET_ELL, 1 << v.ell)
    s = v.tree(budget).queried_indices()
    assert len(s) <= 1 << v.ell
    return s


@dataclass
class GameValueReport:
    agrees: bool
    values: tuple[int, ...]
    mismatches: list


def game_value(v: Verifier, f_claim: BoolFn, budget: int = DEFAULT_BUDGET) -> GameValueReport:
    """Evaluate forall a1 exists b1 ... V(x, a, b) per x by minimax.

    Transcript positions the verifier never queries are dropped from the
    quantifier prefix: quantifying a variable V ignores is vacuous.
    """
    n, k = v.space
    if f_claim.n != n:
        raise PreconditionError("function arity does not match verifier space")
    relevant = sorted(p - n for p in queried_variable_set(v) if p >= n)
    b = Budget(budget, "game_value", (1 << n) << (2 * k))
    values = []
    for xv in range(1 << n):
        x = int_to_bits(xv, n)
        t = [0] * (2 * k)
        z = list(x) + t

        def val(i: int) -> int:
            if i == len(relevant):
                b.tick()
                return v.run(z.__getitem__)[0]
            p = relevant[i]
            forall = p % 2 == 0      # alpha bits are universally quantified
            for bit in (0, 1):
                z[n + p] = bit
                r = val(i + 1)
                if forall and r == 0:
                    z[n + p] = 0
                    return 0
                if not forall and r == 1:
                    z[n + p] = 0
                    return 1
            z[n + p] = 0
            return 1 if forall else 0

        values.append(val(0))
    mism = [int_to_bits(i, n) for i, (a, c) in enumerate(zip(values, f_claim.table)) if a != c]
    return GameValueReport(not mism, tuple(values), mism)


def honest_transcript(sys: DebateSystem, x) -> tuple[int, ...]:
    return run_debate(sys, x).transcript
