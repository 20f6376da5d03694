import random

import pytest
from hypothesis import given, settings, strategies as st

from dqc.boolfn import named
from dqc.circuit import (AND, NOT, OR, Circuit, CircuitBuilder, Gate, circuit_from_function,
                         circuit_metrics, eval_circuit, equivalent, majority_circuit,
                         named_circuit, parse_netlist, parity_circuit, random_circuit,
                         to_netlist, load_netlist)
from dqc.dtree import (DecisionTree, decision_tree_to_circuit, format_tree, parse_tree,
                       random_tree)
from dqc.errors import InputShapeError, ParseError, PreconditionError
from dqc.normalize import Literal, normalize_alternating

from oracles import bits, popcount_majority, table_of


def brute_eval(c, x):
    """Recursive evaluation from the output, independent of the forward pass."""
    def wire(w):
        if w < c.n_inputs:
            return x[w]
        g = c.gates[w - c.n_inputs]
        v = [wire(o) for o in g.ops]
        return v[0] & v[1] if g.kind == AND else v[0] | v[1] if g.kind == OR else 1 - v[0]
    return wire(c.output_wire)


def test_parse_single_gates():
    c = parse_netlist("inputs 2\ngate g1 AND x1 x2\noutput g1\n")
    assert circuit_metrics(c) == (1, 1)
    c = parse_netlist("inputs 1\ngate g1 NOT x1\noutput g1")
    assert (c.size, c.depth) == (1, 1)
    assert eval_circuit(c, "1") == 0


@pytest.mark.parametrize("text, line", [
    ("inputs 2\ngate g1 AND x1 g2\ngate g2 OR x1 x2\noutput g1", 2),
    ("inputs 2\ngate g1 AND x1\noutput g1", 2),
    ("inputs 2\ngate g1 AND x1 x3\noutput g1", 2),
    ("inputs 2\ngate g1 AND x1 x2\n", None),
    ("gate g1 AND x1 x2\noutput g1", 1),
    ("inputs 2\ngate g1 XOR x1 x2\noutput g1", 2),
    ("inputs 2\ngate g1 AND x1 x2\ngate g1 OR x1 x2\noutput g1", 3),
    ("inputs 2\ngate g1 AND x1 x2\noutput g1\ngate g2 OR x1 x2", 4),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as e:
        parse_netlist(text)
    assert e.value.line == line


def test_eval_examples():
    assert eval_circuit(named_circuit("and", 2), "11") == 1
    assert eval_circuit(parity_circuit(4), "1110") == 1
    with pytest.raises(InputShapeError):
        eval_circuit(named_circuit("and", 2), "1")


def test_parity_sizes():
    # four gates per XOR gadget: (a|b) & ~(a&b)
    assert circuit_metrics(parity_circuit(4)) == (12, 6)
    assert parity_circuit(3).size == 8
    assert parity_circuit(4).to_boolfn().table == named("parity", 4).table


def test_invalid_circuits():
    with pytest.raises(PreconditionError):
        Circuit(2, (Gate(AND, (0, 2)),), 0)          # self reference
    with pytest.raises(PreconditionError):
        Circuit(2, (Gate(NOT, (0, 1)),), 0)
    with pytest.raises(PreconditionError):
        Circuit(2, (), 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 30), st.integers(0, 10 ** 6))
def test_random_circuits_consistent(n, m, seed):
    c = random_circuit(random.Random(seed), n, m)
    tt = c.to_boolfn().table
    for v in range(1 << n):
        assert tt[v] == brute_eval(c, bits(v, n)) == c.evaluate(bits(v, n))
    assert circuit_metrics(c) == (c.size, c.depth)
    again = parse_netlist(to_netlist(c))
    assert again.gates == c.gates and again.output == c.output


def test_netlist_file(tmp_path):
    p = tmp_path / "p.nl"
    p.write_text(to_netlist(parity_circuit(3)))
    assert equivalent(load_netlist(p), parity_circuit(3))


def test_circuit_from_function_all_n2():
    for v in range(16):
        t = bits(v, 4)
        f = named("const0", 2).__class__(2, t)
        assert circuit_from_function(f).to_boolfn().table == t


# -- builder and majority ------------------------------------------------------------

def test_builder_folds_constants():
    b = CircuitBuilder(2)
    assert b.mux(0, -1, -2) == 0              # mux(v, 0, 1) is v itself
    assert b.size == 0
    c = b.finish(b.mux(0, -2, -1))
    assert c.size == 1 and c.gates[0].kind == NOT


def test_majority_small():
    assert majority_circuit(1).size <= 1
    assert majority_circuit(1).to_boolfn().table == (0, 1)
    assert majority_circuit(3).to_boolfn().table == named("majority", 3).table
    with pytest.raises(PreconditionError):
        majority_circuit(4)


def test_majority_9_against_popcount():
    c = majority_circuit(9)
    rng = random.Random(9)
    samples = [tuple(rng.randrange(2) for _ in range(9)) for _ in range(200)]
    for x in samples + [(0,) * 9, (1,) * 9]:
        assert c.evaluate(x) == popcount_majority(x)


@pytest.mark.parametrize("t", [5, 7, 11, 13])
def test_majority_exhaustive(t):
    tt = majority_circuit(t).truth_table()
    assert tuple(tt) == table_of(popcount_majority, t)


def test_majority_is_linear_size():
    sizes = {t: majority_circuit(t).size for t in (31, 63, 127, 255)}
    for t, s in sizes.items():
        assert s <= 10 * t


# -- normalization ---------------------------------------------------------------------

def test_normalize_and2():
    nc = normalize_alternating(named_circuit("and", 2))
    assert nc.depth == 1
    assert nc.nodes[-1] == (AND, Literal(1, True), Literal(2, True))


def test_normalize_or_wrapped():
    c = parse_netlist("inputs 2\ngate g OR x1 x2\noutput g")
    nc = normalize_alternating(c)
    assert nc.depth == 2 and nc.nodes[-1][0] == AND and nc.check_alternation()
    assert circuit_metrics(nc.to_circuit())[1] == 2


def test_normalize_de_morgan():
    c = parse_netlist("inputs 2\ngate a AND x1 x2\ngate g NOT a\noutput g")
    nc = normalize_alternating(c)
    assert nc.leaves == {Literal(1, False), Literal(2, False)}
    for v in range(4):
        assert nc.evaluate(bits(v, 2)) == c.evaluate(bits(v, 2))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 32), st.integers(0, 10 ** 6))
def test_normalize_preserves_function(n, m, seed):
    c = random_circuit(random.Random(seed), n, m)
    nc = normalize_alternating(c)
    assert nc.check_alternation()
    assert all(nc.evaluate(bits(v, n)) == c.evaluate(bits(v, n)) for v in range(1 << n))
    assert equivalent(nc.to_circuit(), c)


# -- decision trees --------------------------------------------------------------------

def test_tree_to_circuit_examples():
    ident = DecisionTree(3, (("node", 1, 1, 2), ("leaf", 0), ("leaf", 1)))
    c = decision_tree_to_circuit(ident)
    assert all(c.evaluate(bits(v, 3)) == bits(v, 3)[1] for v in range(8))
    neg = ident.complement()
    c = decision_tree_to_circuit(neg)
    assert c.size == 1 and c.gates[0].kind == NOT
    and_tree = DecisionTree(2, (("node", 0, 1, 2), ("leaf", 0),
                                ("node", 1, 3, 4), ("leaf", 0), ("leaf", 1)))
    assert decision_tree_to_circuit(and_tree).to_boolfn().table == (0, 0, 0, 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 5), st.integers(0, 10 ** 6))
def test_tree_circuit_equivalence(space, depth, seed):
    t = random_tree(random.Random(seed), space, depth)
    c = decision_tree_to_circuit(t)
    assert c.size <= 3 * t.internal_count() + space + 1
    for v in range(1 << space):
        z = bits(v, space)
        assert c.evaluate(z) == t.evaluate(z.__getitem__)[0]
    assert parse_tree(format_tree(t)) == t


def test_tree_rejects_bad_refs():
    with pytest.raises(PreconditionError):
        DecisionTree(2, (("node", 0, 1, 1), ("leaf", 0)))
    with pytest.raises(PreconditionError):
        DecisionTree(2, (("node", 5, 1, 2), ("leaf", 0), ("leaf", 1)))
    with pytest.raises(ParseError):
        parse_tree("node 0 0 1 2\n")
