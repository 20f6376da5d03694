import random
from fractions import Fraction

import pytest

from dqc.boolfn import named
from dqc.circuit import named_circuit
from dqc.debate import check_validity
from dqc.dtree import DecisionTree, constant_tree, random_tree
from dqc.errors import ConstructionFailure, ParseError, PreconditionError
from dqc.normalize import normalize_alternating
from dqc.protocols import build_kw_debate, ceil_log2
from dqc.randomized import (RandomizedVerifier, build_yao_distribution, newman_derandomize,
                            noisy_verifier, pairing_error_bound, rv_error, sample_size)


def kw(name, n):
    return build_kw_debate(normalize_alternating(named_circuit(name, n))), named(name, n)


def honest_pairs(sys, f):
    """Recompute every atom straight from the definition of the interleaved run."""
    out = []
    for i in range(1, f.n + 1):
        zero = [v for v in range(1 << f.n) if f.table[v] == 0 and f.table[v ^ (1 << (i - 1))]]
        w = tuple((zero[0] >> j) & 1 for j in range(f.n))
        wt = tuple(b ^ (j == i - 1) for j, b in enumerate(w))
        t = []
        for _ in range(sys.k):
            t.append(sys.strategy0(w, tuple(t)))
            t.append(sys.strategy1(wt, tuple(t)))
        out.append((i, w, wt, tuple(t)))
    return out


def reference_errors(tree, sys, f):
    """Measured error and forced-pair bound recomputed without the library routine."""
    pairs = honest_pairs(sys, f)
    wrong = forced = 0
    for i, w, wt, t in pairs:
        r0 = tree.evaluate((list(w) + list(t)).__getitem__)
        r1 = tree.evaluate((list(wt) + list(t)).__getitem__)
        wrong += (r0[0] != 0) + (r1[0] != 1)
        if i - 1 not in r0[1]:
            forced += 1
    return Fraction(wrong, 2 * f.n), Fraction(forced, 2 * f.n)


# -- error of a randomized verifier --------------------------------------------------------

def test_rv_error_examples():
    sys, f = kw("and", 2)
    t = sys.verifier.tree()
    assert rv_error(RandomizedVerifier([(t, 1)]), sys, f) == 0
    half = RandomizedVerifier([(t, Fraction(1, 2)), (t.complement(), Fraction(1, 2))])
    assert rv_error(half, sys, f) == Fraction(1, 2)
    third = Fraction(1, 3)
    mixed = RandomizedVerifier([(t, third), (t, third), (constant_tree(t.space, 0), third)])
    assert rv_error(mixed, sys, f) == third


def test_rv_validation():
    t = constant_tree(4, 0)
    with pytest.raises(PreconditionError):
        RandomizedVerifier([(t, Fraction(1, 2))])
    with pytest.raises(PreconditionError):
        RandomizedVerifier([(t, Fraction(3, 2)), (t, Fraction(-1, 2))])
    with pytest.raises(PreconditionError):
        RandomizedVerifier([(t, Fraction(1, 2)), (constant_tree(5, 0), Fraction(1, 2))])


def test_rv_text_round_trip():
    sys, f = kw("and", 4)
    rv = noisy_verifier(sys, random.Random(2))
    again = RandomizedVerifier.parse(rv.to_text())
    assert [(t.nodes, w) for t, w in again.trees] == [(t.nodes, w) for t, w in rv.trees]
    with pytest.raises(ParseError):
        RandomizedVerifier.parse("space 4\ntree x\nleaf 0 0\n")


# -- hard distribution -----------------------------------------------------------------------

def test_yao_parity2():
    sys, f = kw("parity", 2)
    d = build_yao_distribution(sys, f)
    assert len(d.atoms) == 4
    assert len({a.transcript for a in d.atoms}) == 2


def test_yao_and2_transcripts_are_valid():
    sys, f = kw("and", 2)
    d = build_yao_distribution(sys, f)
    assert len(d.atoms) == 4
    for i, (a0, a1) in d.pairs().items():
        assert a0.transcript == a1.transcript
        assert (a0.truth, a1.truth) == (0, 1)
        # the transcript is what honest Prover 0 plays on w against Prover 1 playing
        # as on w~, so it is a valid transcript for both inputs
        assert sys.verifier.evaluate(list(a0.x) + list(a0.transcript)) == 0
        assert sys.verifier.evaluate(list(a1.x) + list(a1.transcript)) == 1


def test_yao_matches_reference_construction():
    for name, n in (("parity", 4), ("majority", 3), ("or", 3)):
        sys, f = kw(name, n)
        d = build_yao_distribution(sys, f)
        ref = honest_pairs(sys, f)
        for i, w, wt, t in ref:
            a0, a1 = d.pairs()[i]
            assert (a0.x, a1.x, a0.transcript) == (w, wt, t)


def test_yao_requires_full_dependence():
    c = named_circuit("and", 2)
    sys = build_kw_debate(normalize_alternating(c))
    from dqc.boolfn import BoolFn
    with pytest.raises(PreconditionError):
        build_yao_distribution(sys, BoolFn(2, (0, 1, 0, 1)))


def test_pairing_probe_x1_only():
    sys, f = kw("parity", 4)
    d = build_yao_distribution(sys, f)
    tree = DecisionTree(d.space, (("node", 0, 1, 2), ("leaf", 0), ("leaf", 1)))
    res = pairing_error_bound(tree, d)
    assert res.certified_lower_bound >= Fraction(3, 8)
    assert res.forced_pairs == [2, 3, 4]
    assert res.measured_error >= res.certified_lower_bound


def test_pairing_full_probe_can_certify_nothing():
    sys, f = kw("parity", 4)
    d = build_yao_distribution(sys, f)
    exact = sys.verifier.tree()
    res = pairing_error_bound(exact, d)
    assert res.measured_error == 0
    nodes, leaves = [], []

    def grow(i):
        j = len(nodes)
        nodes.append(None)
        if i == 4:
            nodes[j] = ("leaf", 0)
            leaves.append(j)
            return j
        nodes[j] = ("node", i, grow(i + 1), grow(i + 1))
        return j

    grow(0)
    res = pairing_error_bound(DecisionTree(d.space, tuple(nodes)), d)
    assert res.certified_lower_bound == 0


def test_pairing_space_mismatch():
    sys, f = kw("parity", 4)
    d = build_yao_distribution(sys, f)
    with pytest.raises(PreconditionError):
        pairing_error_bound(constant_tree(d.space + 1, 0), d)


@pytest.mark.parametrize("n", [4, 8])
def test_pairing_matches_reference(n):
    sys, f = kw("parity", n)
    d = build_yao_distribution(sys, f)
    rng = random.Random(n)
    for _ in range(60):
        t = random_tree(rng, d.space, rng.randrange(0, 7))
        res = pairing_error_bound(t, d)
        assert (res.measured_error, res.certified_lower_bound) == reference_errors(t, sys, f)


@pytest.mark.parametrize("n", [4, 8])
def test_trees_blind_to_x_err_heavily(n):
    sys, f = kw("parity", n)
    d = build_yao_distribution(sys, f)
    rng = random.Random(100 + n)
    transcript = list(range(n, d.space))
    for _ in range(50):
        t = random_tree(rng, d.space, rng.randrange(0, 6), indices=transcript)
        res = pairing_error_bound(t, d)
        assert res.distinct_x_queried == 0
        assert res.measured_error >= Fraction(7, 16)


# -- derandomization ------------------------------------------------------------------------

def test_sample_size():
    sys, _ = kw("and", 4)
    assert sample_size(sys) == 12 * (2 * sys.k + sys.n)
    from types import SimpleNamespace
    assert sample_size(SimpleNamespace(k=4, n=4)) == 144


def test_newman_single_tree():
    sys, f = kw("and", 2)
    rv = RandomizedVerifier([(sys.verifier.tree(), 1)])
    res = newman_derandomize(rv, sys, f, seed=0)
    assert res.stats["attempts"] == 1
    assert check_validity(res.system, f).valid


def test_newman_noisy_and4():
    sys, f = kw("and", 4)
    rv = noisy_verifier(sys, random.Random(0))
    assert rv_error(rv, sys, f) <= Fraction(1, 3)
    res = newman_derandomize(rv, sys, f, seed=1)
    st = res.stats
    assert st["t_odd"] % 2 == 1 and st["t_odd"] >= sample_size(sys)
    assert st["tree_size_max"] <= st["tree_size_bound"] == 3 * 2 ** st["q"]
    probes = res.system.verifier.max_probes()
    assert probes <= ceil_log2(st["m"]) + 3
    assert probes <= st["q"] + st["log2_2k_plus_n"] + st["c_impl"]
    # the majority circuit agrees with V on every valid (x, T): checked inside the
    # compile precondition, recomputed here for the sampled circuit directly
    from dqc.transforms import check_circuit_matches_verifier
    assert check_circuit_matches_verifier(sys, f, res.circuit) > 0


def test_newman_rejects_high_error():
    sys, f = kw("and", 2)
    t = sys.verifier.tree()
    rv = RandomizedVerifier([(t, Fraction(1, 2)), (t.complement(), Fraction(1, 2))])
    with pytest.raises(PreconditionError):
        newman_derandomize(rv, sys, f, seed=0)


def test_newman_gives_up_with_diagnostics():
    sys, f = kw("and", 2)
    t = sys.verifier.tree()
    # mostly wrong sampler let through by a lax threshold: every sample fails
    rv = RandomizedVerifier([(t, Fraction(1, 3)), (t.complement(), Fraction(2, 3))])
    with pytest.raises(ConstructionFailure) as e:
        newman_derandomize(rv, sys, f, seed=0, retries=3, threshold=Fraction(1))
    attempts = e.value.diagnostics["attempts"]
    assert len(attempts) == 3 and all(a["wrong_classes"] > 0 for a in attempts)
