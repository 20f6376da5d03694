"""Fixed-width toy machines and the bisection debate over their run.

A configuration is ``w`` bits.  The machine starts from a template over x,
applies its step circuits exactly 2^T times, and accepts by a predicate on
the final configuration.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

from .boolfn import BoolFn, int_to_bits
from .circuit import (ONE, ZERO, Circuit, CircuitBuilder, const_circuit, load_netlist,
                      to_netlist)
from .debate import (DEFAULT_BUDGET, DebateSystem, IndexSpace, Verifier, check_validity)
from .errors import InternalConsistencyError, ParseError, PreconditionError
from .protocols import ceil_log2
from .transforms import crossexam_compile

MAX_WIDTH = 12
MAX_HORIZON = 16
_TOKEN = re.compile(r"^(0|1|~?x([1-9][0-9]*))$")


@dataclass(frozen=True)
class ToyMachine:
    w: int
    n: int
    T: int
    step: tuple           # w circuits over (config, x)
    init: tuple           # template tokens: "0", "1", "x3", "~x3"
    accept: Circuit       # over the configuration
    name: str = "machine"

    def __post_init__(self):
        if not 1 <= self.w <= MAX_WIDTH:
            raise PreconditionError(f"width {self.w} outside 1..{MAX_WIDTH}")
        if not 0 <= self.T <= MAX_HORIZON:
            raise PreconditionError(f"horizon {self.T} outside 0..{MAX_HORIZON}")
        if self.n < 1:
            raise PreconditionError("machine needs at least one input bit")
        if len(self.step) != self.w or len(self.init) != self.w:
            raise PreconditionError("step and init must have one entry per configuration bit")
        for c in self.step:
            if c.n_inputs != self.w + self.n:
                raise PreconditionError(f"step circuit has {c.n_inputs} inputs, need {self.w + self.n}")
        if self.accept.n_inputs != self.w:
            raise PreconditionError("accept circuit must read exactly the configuration")
        for tok in self.init:
            m = _TOKEN.match(tok)
            if not m or (m.group(2) and int(m.group(2)) > self.n):
                raise PreconditionError(f"bad init token {tok!r}")

    def start(self, x: Sequence[int]) -> tuple:
        out = []
        for tok in self.init:
            if tok in ("0", "1"):
                out.append(int(tok))
            else:
                v = x[int(tok.lstrip("~x")) - 1]
                out.append(1 - v if tok[0] == "~" else v)
        return tuple(out)

    def next(self, cfg: Sequence[int], x: Sequence[int]) -> tuple:
        z = list(cfg) + list(x)
        return tuple(c.evaluate(z) for c in self.step)

    def accepts(self, cfg: Sequence[int]) -> int:
        return self.accept.evaluate(cfg)

    def trajectory(self, x: Sequence[int]) -> list[tuple]:
        """All 2^T + 1 configurations of the run on x."""
        cfg = self.start(x)
        out = [cfg]
        for _ in range(1 << self.T):
            cfg = self.next(cfg, x)
            out.append(cfg)
        return out

    def decided_function(self) -> BoolFn:
        return BoolFn.from_callable(self.n, lambda x: machine_run(self, x)[1], self.name)


def machine_run(m: ToyMachine, x: Sequence[int]) -> tuple[tuple, int]:
    """Naive iteration of the step 2^T times."""
    x = tuple(x)
    if len(x) != m.n:
        raise PreconditionError(f"expected {m.n} input bits, got {len(x)}")
    cfg = m.start(x)
    for _ in range(1 << m.T):
        cfg = m.next(cfg, x)
    return cfg, m.accepts(cfg)


def machine_run_jump(m: ToyMachine, x: Sequence[int]) -> tuple[tuple, int]:
    """Same result by squaring the successor map of the configuration graph T times."""
    x = tuple(x)
    if len(x) != m.n:
        raise PreconditionError(f"expected {m.n} input bits, got {len(x)}")
    size = 1 << m.w
    configs = [int_to_bits(v, m.w) for v in range(size)]
    index = {c: v for v, c in enumerate(configs)}
    succ = [index[m.next(c, x)] for c in configs]
    for _ in range(m.T):
        succ = [succ[succ[v]] for v in range(size)]
    final = configs[succ[index[m.start(x)]]]
    return final, m.accepts(final)


# -- builtin machines ---------------------------------------------------------------

def _bit_circuit(w: int, n: int, build) -> Circuit:
    b = CircuitBuilder(w + n)
    return b.finish(build(b))


def _increment(b: CircuitBuilder, bits: Sequence[int]) -> list[int]:
    out, carry = [], ONE
    for c in bits:
        s, carry = b.xor(c, carry) if carry != ONE else (b.NOT(c), c)
        out.append(s)
    return out


def parity_machine(n: int, T: Optional[int] = None) -> ToyMachine:
    """Counter of T bits and a parity bit; step i xors x_{i+1} in while i < n.

    Configuration bits: counter (LSB first), then parity.  Needs 2^T >= n.
    """
    if T is None:
        T = ceil_log2(n)
    if (1 << T) < n:
        raise PreconditionError(f"horizon 2^{T} is shorter than the input length {n}")
    w = T + 1

    def counter_bit(j):
        def build(b):
            return _increment(b, list(range(T)))[j] if T else ZERO
        return build

    def parity_bit(b):
        hit = ZERO
        for i in range(n):
            lits = [c if (i >> c) & 1 else b.NOT(c) for c in range(T)]
            hit = b.OR(hit, b.AND(b.all_of(lits), w + i))
        return b.xor(T, hit)[0]

    step = tuple(_bit_circuit(w, n, counter_bit(j)) for j in range(T))
    step += (_bit_circuit(w, n, parity_bit),)
    acc = CircuitBuilder(w)
    return ToyMachine(w, n, T, step, ("0",) * w, acc.finish(T), f"parity_machine_{n}")


def counter_machine(w: int, n: int = 1, T: int = 3) -> ToyMachine:
    """Configuration increments mod 2^w; x ignored; accepts when the top bit is set."""
    step = tuple(_bit_circuit(w, n, lambda b, j=j: _increment(b, list(range(w)))[j])
                 for j in range(w))
    return ToyMachine(w, n, T, step, ("0",) * w, CircuitBuilder(w).finish(w - 1),
                      f"counter_machine_{w}")


def identity_machine(n: int, T: int = 2, accept_bit: Optional[int] = None) -> ToyMachine:
    """Step is the identity on a copy of x; accepts x_1, or a constant when given."""
    w = n
    step = tuple(_bit_circuit(w, n, lambda b, j=j: j) for j in range(w))
    init = tuple(f"x{i + 1}" for i in range(n))
    acc = const_circuit(w, accept_bit) if accept_bit is not None else CircuitBuilder(w).finish(0)
    return ToyMachine(w, n, T, step, init, acc, "identity_machine")


BUILTIN_MACHINES = {"parity": parity_machine, "counter": counter_machine,
                    "identity": identity_machine}


# -- machine files -----------------------------------------------------------------

def parse_machine(text: str, base: Path = Path(".")) -> ToyMachine:
    """Read ``width/inputs/horizon/init/step <i> <netlist>/accept <netlist>`` records."""
    fields: dict = {}
    steps: dict[int, Circuit] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        tok = raw.split("#", 1)[0].split()
        if not tok:
            continue
        key = tok[0]
        try:
            if key in ("width", "inputs", "horizon") and len(tok) == 2:
                fields[key] = int(tok[1])
            elif key == "init":
                fields["init"] = tuple(tok[1:])
            elif key == "step" and len(tok) == 3:
                steps[int(tok[1])] = load_netlist(base / tok[2])
            elif key == "accept" and len(tok) == 2:
                fields["accept"] = load_netlist(base / tok[1])
            elif key == "name" and len(tok) == 2:
                fields["name"] = tok[1]
            else:
                raise ParseError(f"malformed record {raw.strip()!r}", lineno)
        except ValueError as e:
            if isinstance(e, ParseError):
                raise
            raise ParseError(f"malformed record {raw.strip()!r}", lineno) from None
    for key in ("width", "inputs", "horizon", "init", "accept"):
        if key not in fields:
            raise ParseError(f"missing {key!r} record")
    w = fields["width"]
    if sorted(steps) != list(range(w)):
        raise ParseError(f"need step records 0..{w - 1}")
    try:
        return ToyMachine(w, fields["inputs"], fields["horizon"],
                          tuple(steps[i] for i in range(w)), fields["init"],
                          fields["accept"], fields.get("name", "machine"))
    except PreconditionError as e:
        raise ParseError(str(e)) from None


def load_machine(path) -> ToyMachine:
    path = Path(path)
    return parse_machine(path.read_text(), path.parent)


def save_machine(m: ToyMachine, path) -> None:
    """Write the machine file plus one netlist per circuit next to it."""
    path = Path(path)
    stem = path.stem
    lines = [f"name {m.name}", f"width {m.w}", f"inputs {m.n}", f"horizon {m.T}",
             "init " + " ".join(m.init)]
    for i, c in enumerate(m.step):
        nl = f"{stem}.step{i}.nl"
        (path.parent / nl).write_text(to_netlist(c))
        lines.append(f"step {i} {nl}")
    (path.parent / f"{stem}.accept.nl").write_text(to_netlist(m.accept))
    lines.append(f"accept {stem}.accept.nl")
    path.write_text("\n".join(lines) + "\n")


# -- bisection debate ------------------------------------------------------------------

@dataclass(frozen=True)
class BisectionLayout:
    """Where each claim lives.

    Rounds 0..w-1 carry the claimed final configuration in their beta bits.
    Phase p then takes w + 1 rounds: the midpoint claim in the beta bits of
    the first w, the half selection in the alpha bit of the last.
    """

    n: int
    w: int
    T: int

    @property
    def k(self) -> int:
        return self.w + self.T * (self.w + 1)

    def final_pos(self, b: int) -> int:
        return self.n + 2 * b + 1

    def mid_pos(self, p: int, b: int) -> int:
        return self.n + 2 * (self.w + p * (self.w + 1) + b) + 1

    def select_pos(self, p: int) -> int:
        return self.n + 2 * (self.w + p * (self.w + 1) + self.w)

    def interval(self, selections: Sequence[int]) -> tuple[int, int]:
        lo, hi = 0, 1 << self.T
        for s in selections:
            mid = (lo + hi) // 2
            lo, hi = (mid, hi) if s else (lo, mid)
        return lo, hi


def build_bisection_debate(m: ToyMachine) -> DebateSystem:
    """Prover 1 claims the final configuration and every midpoint; Prover 0 picks halves.

    The verifier reads the T selections, locates the final unit interval,
    and checks one step between its endpoints plus acceptance of the
    claimed final configuration.
    """
    lay = BisectionLayout(m.n, m.w, m.T)
    n, w, T, k = m.n, m.w, m.T, lay.k

    @lru_cache(maxsize=None)
    def truth(x):
        return m.trajectory(x)

    def selections(h, phases):
        return [h[lay.select_pos(p) - n] for p in range(phases)]

    def s1(x, h):
        r = len(h) // 2
        if r < w:
            return truth(x)[-1][r]
        p, b = divmod(r - w, w + 1)
        if b == w:
            return 0
        lo, hi = lay.interval(selections(h, p))
        return truth(x)[(lo + hi) // 2][b]

    def s0(x, h):
        r = len(h) // 2
        if r < w:
            return 0
        p, b = divmod(r - w, w + 1)
        if b != w:
            return 0
        lo, hi = lay.interval(selections(h, p))
        true_mid = truth(x)[(lo + hi) // 2]
        for j in range(w):
            if h[lay.mid_pos(p, j) - n] != true_mid[j]:
                return 0         # bad midpoint: the lie is in the left half
        return 1

    def program():
        seen: dict[int, int] = {}

        def probe(pos):
            if pos not in seen:
                seen[pos] = yield pos
            return seen[pos]

        sel = []
        for p in range(T):
            sel.append((yield from probe(lay.select_pos(p))))
        right = [p for p in range(T) if sel[p] == 1]
        left = [p for p in range(T) if sel[p] == 0]
        xs = {}

        def xbit(i):
            if i not in xs:
                xs[i] = yield from probe(i)
            return xs[i]

        lo_cfg = []
        if right:
            for b in range(w):
                lo_cfg.append((yield from probe(lay.mid_pos(right[-1], b))))
        else:
            for tok in m.init:
                if tok in ("0", "1"):
                    lo_cfg.append(int(tok))
                else:
                    v = yield from xbit(int(tok.lstrip("~x")) - 1)
                    lo_cfg.append(1 - v if tok[0] == "~" else v)
        hi_src = [lay.mid_pos(left[-1], b) if left else lay.final_pos(b) for b in range(w)]
        hi_cfg, final = [], []
        for pos in hi_src:
            hi_cfg.append((yield from probe(pos)))
        for b in range(w):
            final.append((yield from probe(lay.final_pos(b))))
        x = [0] * n
        for i in _step_support(m):
            x[i] = yield from xbit(i)
        if list(m.next(lo_cfg, x)) != hi_cfg:
            return 0
        return m.accepts(final)

    ell = T + 3 * w + n
    space = IndexSpace(n, k)
    verifier = Verifier(space, ell, program, "bisection")
    return DebateSystem(n, k, s0, s1, verifier, ell, "bisection",
                        {"machine": m, "layout": lay, "truth": truth})


def _step_support(m: ToyMachine) -> list[int]:
    """Input bits (0-based into x) any step circuit reads."""
    return sorted({i - m.w for c in m.step for i in c.input_support() if i >= m.w})


def honest_midpoints_match(sys: DebateSystem, x, transcript: Sequence[int]) -> bool:
    """Every midpoint the claimant wrote equals the true configuration at that time."""
    m, lay = sys.meta["machine"], sys.meta["layout"]
    traj = m.trajectory(tuple(x))
    sel = [transcript[lay.select_pos(p) - lay.n] for p in range(lay.T)]
    for p in range(lay.T):
        lo, hi = lay.interval(sel[:p])
        got = tuple(transcript[lay.mid_pos(p, b) - lay.n] for b in range(lay.w))
        if got != traj[(lo + hi) // 2]:
            return False
    final = tuple(transcript[lay.final_pos(b) - lay.n] for b in range(lay.w))
    return final == traj[-1]


def build_bisection_verifier_circuit(sys: DebateSystem) -> Circuit:
    """The bisection verifier as a circuit over x and the transcript."""
    m, lay = sys.meta["machine"], sys.meta["layout"]
    n, w, T = m.n, m.w, m.T
    b = CircuitBuilder(n + 2 * lay.k)
    lo = []
    for tok in m.init:
        if tok in ("0", "1"):
            lo.append(ONE if tok == "1" else ZERO)
        else:
            i = int(tok.lstrip("~x")) - 1
            lo.append(b.NOT(i) if tok[0] == "~" else i)
    hi = [lay.final_pos(j) for j in range(w)]
    for p in range(T):
        s = lay.select_pos(p)
        mid = [lay.mid_pos(p, j) for j in range(w)]
        lo = [b.mux(s, lo[j], mid[j]) for j in range(w)]
        hi = [b.mux(s, mid[j], hi[j]) for j in range(w)]
    nxt = [b.inline(c, lo + list(range(n))) for c in m.step]
    same = b.all_of([b.xnor(nxt[j], hi[j]) for j in range(w)])
    acc = b.inline(m.accept, [lay.final_pos(j) for j in range(w)])
    return b.finish(b.AND(same, acc))


@dataclass
class PipelineReport:
    machine: str
    n: int
    w: int
    T: int
    k: int
    ell_bound: int
    max_probes_observed: int
    valid: bool
    validity_runs: int
    m: int
    compiled_k: int
    compiled_bound: int
    compiled_probes: int
    compiled_valid: Optional[bool] = None
    extra: dict = field(default_factory=dict)


def pspace_pipeline(m: ToyMachine, budget: int = DEFAULT_BUDGET,
                    verify_compiled: bool = False) -> tuple[DebateSystem, PipelineReport]:
    """Machine -> bisection debate -> verifier circuit -> cross-examination.

    The bisection debate is checked exhaustively, the verifier circuit is
    checked against the verifier on every valid transcript, and the compiled
    probe count is measured on the full query tree.  ``verify_compiled``
    also runs the exhaustive validity check on the compiled system, which is
    only affordable for tiny machines.
    """
    f = m.decided_function()
    sys = build_bisection_debate(m)
    rep = check_validity(sys, f, budget)
    if not rep.valid:
        raise InternalConsistencyError(f"bisection debate invalid: {rep.counterexample}")
    cv = build_bisection_verifier_circuit(sys)
    compiled = crossexam_compile(sys, cv, f, budget)
    probes = compiled.verifier.max_probes()
    bound = ceil_log2(cv.size) + 3
    if probes > bound:
        raise InternalConsistencyError(f"compiled verifier uses {probes} > {bound} probes")
    report = PipelineReport(m.name, m.n, m.w, m.T, sys.k, sys.ell_bound,
                            rep.max_probes_observed, rep.valid, rep.runs, cv.size,
                            compiled.k, bound, probes)
    if verify_compiled:
        crep = check_validity(compiled, f, budget)
        report.compiled_valid = crep.valid
        report.extra["compiled_runs"] = crep.runs
    return compiled, report
