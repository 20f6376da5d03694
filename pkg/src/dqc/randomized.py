"""Randomized verifiers: error measurement, the hard distribution, derandomization."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .boolfn import BoolFn, depends_on_all, witness_pair
from .circuit import Circuit, CircuitBuilder, majority_circuit
from .debate import (DEFAULT_BUDGET, Budget, DebateSystem, explore_valid)
from .dtree import DecisionTree, build_tree, decision_tree_to_circuit, tree_records
from .errors import (ConstructionFailure, InternalConsistencyError, ParseError,
                     PreconditionError)
from .protocols import ceil_log2
from .transforms import crossexam_compile

ERROR_BOUND = Fraction(1, 3)


@dataclass
class RandomizedVerifier:
    """A distribution over decision trees sharing one index space."""

    trees: list[tuple[DecisionTree, Fraction]]

    def __post_init__(self):
        if not self.trees:
            raise PreconditionError("randomized verifier needs at least one tree")
        self.trees = [(t, Fraction(w)) for t, w in self.trees]
        if any(w <= 0 for _, w in self.trees):
            raise PreconditionError("tree weights must be positive")
        if sum(w for _, w in self.trees) != 1:
            raise PreconditionError("tree weights must sum to 1")
        if len({t.space for t, _ in self.trees}) != 1:
            raise PreconditionError("trees disagree on the index space")

    @property
    def space(self) -> int:
        return self.trees[0][0].space

    @property
    def q(self) -> int:
        return max(t.depth for t, _ in self.trees)

    def to_text(self) -> str:
        lines = [f"space {self.space}"]
        for t, w in self.trees:
            lines.append(f"tree {w}")
            lines += tree_records(t)
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "RandomizedVerifier":
        space = None
        groups: list[tuple[Fraction, list]] = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            tok = raw.split("#", 1)[0].split()
            if not tok:
                continue
            if tok[0] == "space" and space is None:
                space = int(tok[1])
            elif tok[0] == "tree":
                try:
                    groups.append((Fraction(tok[1]), []))
                except (IndexError, ValueError):
                    raise ParseError("tree needs a rational weight", lineno) from None
            elif tok[0] in ("node", "leaf") and groups:
                groups[-1][1].append((lineno, tok))
            else:
                raise ParseError(f"unexpected {tok[0]!r}", lineno)
        if space is None:
            raise ParseError("missing 'space <N>' header")
        try:
            return cls([(build_tree(space, recs), w) for w, recs in groups])
        except PreconditionError as e:
            raise ParseError(str(e)) from None


def rv_error(rv: RandomizedVerifier, sys: DebateSystem, f: BoolFn,
             budget: int = DEFAULT_BUDGET) -> Fraction:
    """Largest weight of trees disagreeing with V over all valid (x, T)."""
    if rv.space != sys.space.total:
        raise PreconditionError("randomized verifier index space does not match")

    def leaf(read):
        v = sys.verifier.run(read)[0]
        return sum((w for t, w in rv.trees if t.evaluate(read)[0] != v), Fraction(0))

    worst = Fraction(0)
    for out in explore_valid(sys, f, leaf, Budget(budget, "rv_error")):
        worst = max(worst, out.result)
    return worst


# -- hard distribution --------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    x: tuple
    transcript: tuple
    truth: int
    weight: Fraction
    pair: int          # witness position i (1-based)


@dataclass
class HardDistribution:
    n: int
    k: int
    atoms: list[Atom]

    @property
    def space(self) -> int:
        return self.n + 2 * self.k

    def pairs(self) -> dict[int, tuple[Atom, Atom]]:
        out: dict[int, list] = {}
        for a in self.atoms:
            out.setdefault(a.pair, []).append(a)
        return {i: (p[0], p[1]) for i, p in out.items()}


def interleaved_transcript(sys: DebateSystem, w: tuple, w_tilde: tuple) -> tuple:
    """Prover 0 answers as on ``w``, Prover 1 as on ``w_tilde``, each seeing the shared prefix."""
    t: list[int] = []
    for _ in range(sys.k):
        t.append(int(sys.strategy0(w, tuple(t))))
        t.append(int(sys.strategy1(w_tilde, tuple(t))))
    return tuple(t)


def build_yao_distribution(sys: DebateSystem, f: BoolFn) -> HardDistribution:
    if not depends_on_all(f):
        raise PreconditionError("hard distribution needs f to depend on every variable")
    weight = Fraction(1, 2 * f.n)
    atoms = []
    for i in range(1, f.n + 1):
        wp = witness_pair(f, i)
        t = interleaved_transcript(sys, wp.w, wp.w_tilde)
        for x, truth in ((wp.w, 0), (wp.w_tilde, 1)):
            got = sys.verifier.evaluate(list(x) + list(t))
            if got != truth:
                raise InternalConsistencyError(
                    f"pair {i}: V gives {got} on x={''.join(map(str, x))}, expected {truth}")
            atoms.append(Atom(x, t, truth, weight, i))
    return HardDistribution(sys.n, sys.k, atoms)


@dataclass
class PairingResult:
    measured_error: Fraction
    certified_lower_bound: Fraction
    forced_pairs: list[int]
    distinct_x_queried: int


def pairing_error_bound(tree: DecisionTree, d: HardDistribution) -> PairingResult:
    """Error of ``tree`` on ``d`` and the lower bound forced by unqueried witness bits."""
    if tree.space != d.space:
        raise PreconditionError(f"tree space {tree.space} != distribution space {d.space}")
    measured = Fraction(0)
    for a in d.atoms:
        z = list(a.x) + list(a.transcript)
        if tree.evaluate(z.__getitem__)[0] != a.truth:
            measured += a.weight
    forced = []
    for i, (a0, a1) in sorted(d.pairs().items()):
        z0 = list(a0.x) + list(a0.transcript)
        bit0, probes0 = tree.evaluate(z0.__getitem__)
        if i - 1 in probes0:
            continue
        z1 = list(a1.x) + list(a1.transcript)
        bit1, probes1 = tree.evaluate(z1.__getitem__)
        if probes0 != probes1 or tree.leaf_of(z0.__getitem__) != tree.leaf_of(z1.__getitem__):
            raise InternalConsistencyError(f"pair {i}: unqueried witness bit changed the path")
        forced.append(i)
    certified = Fraction(len(forced), 2 * d.n)
    if measured < certified:
        raise InternalConsistencyError(f"measured error {measured} below certified {certified}")
    xs = {j for j in tree.queried_indices() if j < d.n}
    return PairingResult(measured, certified, forced, len(xs))


# -- derandomization ------------------------------------------------------------------

@dataclass
class NewmanResult:
    circuit: Circuit
    system: DebateSystem
    stats: dict = field(default_factory=dict)


def sample_size(sys: DebateSystem) -> int:
    return 12 * (2 * sys.k + sys.n)


def newman_derandomize(rv: RandomizedVerifier, sys: DebateSystem, f: BoolFn, seed: int,
                       retries: int = 10, budget: int = DEFAULT_BUDGET,
                       threshold: Fraction = ERROR_BOUND) -> NewmanResult:
    """Majority of sampled trees, checked on every valid (x, T), then cross-examined."""
    err = rv_error(rv, sys, f, budget)
    if err > threshold:
        raise PreconditionError(f"randomized verifier error {err} exceeds {threshold}")
    t = sample_size(sys)
    t_odd = t | 1
    rng = random.Random(seed)
    trees = [tr for tr, _ in rv.trees]
    weights = [float(w) for _, w in rv.trees]
    history = []
    chosen = None
    for attempt in range(1, retries + 1):
        picks = rng.choices(range(len(trees)), weights=weights, k=t_odd)
        sample = [trees[j] for j in picks]

        def leaf(read):
            v = sys.verifier.run(read)[0]
            ones = sum(tr.evaluate(read)[0] for tr in sample)
            return v, int(2 * ones > t_odd)

        bad = 0
        for out in explore_valid(sys, f, leaf, Budget(budget, "newman majority check")):
            v, maj = out.result
            bad += v != maj
        history.append({"attempt": attempt, "wrong_classes": bad})
        if bad == 0:
            chosen = sample
            break
    if chosen is None:
        raise ConstructionFailure(f"no good sample in {retries} attempts",
                                  {"attempts": history, "t": t_odd, "rv_error": str(err)})

    n_space = sys.space.total
    b = CircuitBuilder(n_space)
    inputs = list(range(n_space))
    tree_sizes = []
    outs = []
    for tr in chosen:
        tc = decision_tree_to_circuit(tr)
        tree_sizes.append(tc.size)
        outs.append(b.inline(tc, inputs))
    before_majority = b.size
    maj = majority_circuit(t_odd)
    out_wire = b.inline(maj, outs)
    cv = b.finish(out_wire)
    final = crossexam_compile(sys, cv, f, budget)
    q = rv.q
    log_term = ceil_log2(2 * sys.k + sys.n)
    ell = final.ell_bound
    c_impl = ell - q - log_term
    stats = {
        "rv_error": err, "t": t, "t_odd": t_odd, "attempts": len(history),
        "q": q, "tree_size_max": max(tree_sizes), "tree_size_bound": 3 * (2 ** q),
        "majority_size": maj.size, "majority_constant": Fraction(maj.size, t_odd),
        "trees_gates": before_majority, "m": cv.size, "final_ell": ell,
        "log2_2k_plus_n": log_term, "c_impl": c_impl, "c_impl_flag": c_impl > 10,
    }
    return NewmanResult(cv, final, stats)


def noisy_verifier(sys: DebateSystem, rng: random.Random, corrupt: int = 2,
                   flips: int = 1) -> RandomizedVerifier:
    """Exact verifier tree with weight 2/3 plus ``corrupt`` leaf-flipped copies sharing 1/3."""
    exact = sys.verifier.tree()
    leaves = exact.leaf_ids()
    trees = [(exact, Fraction(2, 3))]
    for _ in range(corrupt):
        bad = exact.with_leaves_flipped(rng.sample(leaves, min(flips, len(leaves))))
        trees.append((bad, Fraction(1, 3 * corrupt)))
    return RandomizedVerifier(trees)
