"""Debate-to-debate transformations.

* ``pad_rounds`` / ``compress_rounds``: insert or remove never-queried rounds.
* ``crossexam_compile``: replace a verifier by a cross-examination of a
  circuit computing it.
* ``extract_advice`` / ``simulate_with_advice``: flatten a verifier into a
  lookup table and replay it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .boolfn import BoolFn
from .circuit import Circuit
from .debate import (DEFAULT_BUDGET, Budget, DebateSystem, IndexSpace, Verifier,
                     check_validity, explore_valid, queried_variable_set,
                     run_debate)
from .errors import (CompileError, CorruptTableError, InternalConsistencyError,
                     ParseError, PreconditionError)
from .protocols import crossexam_layer


def remap_verifier(v: Verifier, space: IndexSpace, pos_map: dict, label: str) -> Verifier:
    """Same decisions, queries renamed through ``pos_map`` (old -> new position)."""

    def program():
        inner = v.program()
        try:
            idx = next(inner)
            while True:
                if idx not in pos_map:
                    raise InternalConsistencyError(f"{label}: query {idx} has no new position")
                ans = yield pos_map[idx]
                idx = inner.send(ans)
        except StopIteration as stop:
            return stop.value

    return Verifier(space, v.ell, program, label)


class _PaddedView(Sequence):
    """Old-system history read through a padded transcript."""

    __slots__ = ("h", "kept", "limit")

    def __init__(self, h, kept, limit):
        self.h, self.kept, self.limit = h, kept, limit

    def __len__(self):
        return self.limit

    def __getitem__(self, q):
        if isinstance(q, slice):
            return tuple(self[i] for i in range(*q.indices(self.limit)))
        if q < 0:
            q += self.limit
        if not 0 <= q < self.limit:
            raise IndexError(q)
        return self.h[2 * self.kept[q // 2] + (q & 1)]


def pad_rounds(sys: DebateSystem, rounds: Sequence[int]) -> DebateSystem:
    """Insert dummy rounds at the given 0-based round numbers of the result.

    Both honest provers write 0 in a dummy round and never read it; the
    verifier never queries it.
    """
    k2 = sys.k + len(rounds)
    dummies = set(rounds)
    if len(dummies) != len(rounds) or any(not 0 <= r < k2 for r in dummies):
        raise PreconditionError("dummy rounds must be distinct and within the new length")
    kept = [r for r in range(k2) if r not in dummies]
    new_of_old = {j: r for j, r in enumerate(kept)}
    n = sys.n

    def wrap(strategy, role):
        def s(x, h):
            r = len(h) // 2
            if r in dummies:
                return 0
            j = kept.index(r)
            return strategy(x, _PaddedView(h, kept, 2 * j + role))
        return s

    pos_map = {p: p for p in range(n)}
    for q in range(2 * sys.k):
        pos_map[n + q] = n + 2 * new_of_old[q // 2] + (q & 1)
    space = IndexSpace(n, k2)
    label = f"{sys.label}+pad{len(rounds)}"
    meta = dict(sys.meta, padded_rounds=sorted(dummies), reindex=pos_map)
    return DebateSystem(n, k2, wrap(sys.strategy0, 0), wrap(sys.strategy1, 1),
                        remap_verifier(sys.verifier, space, pos_map, label),
                        sys.ell_bound, label, meta)


class _CompressedView(Sequence):
    """Old-system history reconstructed from a compressed transcript.

    Removed rounds are filled in by the prover ``role`` itself: its own bit
    from its old strategy, the opponent's bit assumed to be 0.
    """

    __slots__ = ("h", "x", "role", "strategy", "new_of_old", "limit", "memo")

    def __init__(self, h, x, role, strategy, new_of_old, limit, memo=None):
        self.h, self.x, self.role, self.strategy = h, x, role, strategy
        self.new_of_old, self.limit = new_of_old, limit
        self.memo = {} if memo is None else memo

    def __len__(self):
        return self.limit

    def __getitem__(self, q):
        if isinstance(q, slice):
            return tuple(self[i] for i in range(*q.indices(self.limit)))
        if q < 0:
            q += self.limit
        if not 0 <= q < self.limit:
            raise IndexError(q)
        j = q // 2
        if j in self.new_of_old:
            return self.h[2 * self.new_of_old[j] + (q & 1)]
        if (q & 1) != self.role:
            return 0
        if q not in self.memo:
            sub = _CompressedView(self.h, self.x, self.role, self.strategy,
                                  self.new_of_old, q, self.memo)
            self.memo[q] = self.strategy(self.x, sub)
        return self.memo[q]


def removable_rounds(sys: DebateSystem, budget: int = DEFAULT_BUDGET) -> list[int]:
    s = queried_variable_set(sys.verifier, budget)
    n = sys.n
    return [j for j in range(sys.k) if n + 2 * j not in s and n + 2 * j + 1 not in s]


def compress_rounds(sys: DebateSystem, f: Optional[BoolFn] = None,
                    budget: int = DEFAULT_BUDGET) -> DebateSystem:
    """Delete every round whose two positions the verifier never queries.

    Rounds go smallest-first, exactly as repeated single deletions would; the
    honest prover of each side simulates its own move in a deleted round and
    assumes the opponent wrote 0.  With ``f`` the result is re-checked.
    """
    removed = removable_rounds(sys, budget)
    if not removed:
        return sys
    gone = set(removed)
    kept = [j for j in range(sys.k) if j not in gone]
    new_of_old = {j: r for r, j in enumerate(kept)}
    n = sys.n

    def wrap(strategy, role):
        def s(x, h):
            r = len(h) // 2
            old_round = kept[r]
            return strategy(x, _CompressedView(h, x, role, strategy, new_of_old,
                                               2 * old_round + role))
        return s

    pos_map = {p: p for p in range(n)}
    for j in kept:
        for r in (0, 1):
            pos_map[n + 2 * j + r] = n + 2 * new_of_old[j] + r
    space = IndexSpace(n, len(kept))
    label = f"{sys.label}+compress"
    meta = dict(sys.meta, removed_rounds=removed, reindex=pos_map)
    out = DebateSystem(n, len(kept), wrap(sys.strategy0, 0), wrap(sys.strategy1, 1),
                       remap_verifier(sys.verifier, space, pos_map, label),
                       sys.ell_bound, label, meta)
    if f is not None:
        rep = check_validity(out, f, budget)
        if not rep.valid:
            raise InternalConsistencyError(
                f"compressed system invalid: {rep.counterexample}")
    return out


def check_circuit_matches_verifier(sys: DebateSystem, f: BoolFn, c: Circuit,
                                   budget: int = DEFAULT_BUDGET) -> int:
    """Compare ``c`` with the verifier on every valid (x, transcript).

    The circuit's own input support is read so that each explored class of
    adversaries fixes every bit the circuit can see.  Returns the number of
    classes checked.
    """
    support = c.input_support()

    def leaf(read):
        v = sys.verifier.run(read)[0]
        z = [0] * c.n_inputs
        for i in support:
            z[i] = read(i)
        return v, c.evaluate(z)

    checked = 0
    for out in explore_valid(sys, f, leaf, Budget(budget, "compile precondition")):
        checked += 1
        v, cv = out.result
        if v != cv:
            raise CompileError(
                f"circuit gives {cv}, verifier gives {v} on x={''.join(map(str, out.x))} "
                f"transcript={''.join(map(str, out.transcript))}",
                witness=(out.x, out.transcript))
    return checked


def decided_function(sys: DebateSystem) -> BoolFn:
    """What a valid system decides: the verdict of the all-honest interaction."""
    return BoolFn.from_callable(sys.n, lambda x: run_debate(sys, x).verdict, sys.label)


def crossexam_compile(sys: DebateSystem, c: Circuit, f: Optional[BoolFn] = None,
                      budget: int = DEFAULT_BUDGET) -> DebateSystem:
    """Cross-examine a circuit for the verifier after the original rounds.

    ``c`` must agree with the verifier on every valid transcript, which needs
    the decided function ``f`` (default: read off the all-honest runs).
    """
    if f is None:
        f = decided_function(sys)
    if c.n_inputs != sys.n + 2 * sys.k:
        raise PreconditionError(
            f"verifier circuit needs {sys.n + 2 * sys.k} inputs, has {c.n_inputs}")
    checked = check_circuit_matches_verifier(sys, f, c, budget)
    return crossexam_layer(sys.n, sys.k, sys.strategy0, sys.strategy1, c,
                           f"{sys.label}+compile",
                           {"source_k": sys.k, "source_ell": sys.ell_bound,
                            "precondition_classes": checked})


# -- advice tables ----------------------------------------------------------------

@dataclass
class AdviceTable:
    n: int
    k: int
    next: dict = field(default_factory=dict)        # answer prefix -> position
    verdicts: dict = field(default_factory=dict)    # answer string -> bit
    redacted: list = field(default_factory=list)    # (original position, new position)

    @property
    def rows(self) -> int:
        return len(self.next) + len(self.verdicts)

    def to_text(self) -> str:
        lines = [f"space {self.n} {self.k}"]
        for u, idx in self.next.items():
            lines.append(f"next {u or '-'} {idx}")
        for u, bit in self.verdicts.items():
            lines.append(f"verdict {u or '-'} {bit}")
        for orig, new in self.redacted:
            lines.append(f"redacted {orig} {new}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "AdviceTable":
        t = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            tok = raw.split("#", 1)[0].split()
            if not tok:
                continue
            try:
                if tok[0] == "space" and t is None:
                    t = cls(int(tok[1]), int(tok[2]))
                    continue
                if t is None:
                    raise ParseError("missing 'space <n> <k>' header", lineno)
                if tok[0] == "redacted":
                    t.redacted.append((int(tok[1]), int(tok[2])))
                    continue
                if tok[0] not in ("next", "verdict") or len(tok) != 3:
                    raise ParseError(f"unknown record {tok[0]!r}", lineno)
                u = "" if tok[1] == "-" else tok[1]
                if u.strip("01"):
                    raise ParseError(f"bad answer string {tok[1]!r}", lineno)
                if tok[0] == "next":
                    t.next[u] = int(tok[2])
                else:
                    t.verdicts[u] = int(tok[2])
            except (IndexError, ValueError):
                raise ParseError(f"malformed record {raw.strip()!r}", lineno) from None
        if t is None:
            raise ParseError("empty advice table")
        return t


def extract_advice(v: Verifier, budget: int = 1 << 24) -> AdviceTable:
    """Flatten ``v`` by full path exploration into prefix-keyed rows."""
    tree = v.tree(budget)
    n, k = v.space
    table = AdviceTable(n, k)

    def walk(j, u):
        node = tree.nodes[j]
        if node[0] == "leaf":
            table.verdicts[u] = node[1]
        else:
            table.next[u] = node[1]
            walk(node[2], u + "0")
            walk(node[3], u + "1")

    walk(0, "")
    kept = sorted(p for p in tree.queried_indices() if p >= n)
    table.redacted = [(p, n + r) for r, p in enumerate(kept)]
    return table


def simulate_with_advice(t: AdviceTable, x: Sequence[int],
                         transcript: Sequence[int]) -> tuple[int, list[int]]:
    """Replay the verifier from table lookups alone."""
    if len(x) != t.n or len(transcript) != 2 * t.k:
        raise PreconditionError("input/transcript shape does not match the table")
    u = ""
    probes = []
    while True:
        if u in t.verdicts:
            return t.verdicts[u], probes
        if u not in t.next:
            raise CorruptTableError(f"no row for answer prefix {u!r}")
        idx = t.next[u]
        if not 0 <= idx < t.n + 2 * t.k:
            raise CorruptTableError(f"row {u!r} points outside the index space")
        probes.append(idx)
        u += str(x[idx] if idx < t.n else transcript[idx - t.n])
