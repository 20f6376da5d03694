import itertools

import pytest

from dqc.debate import check_validity, run_debate
from dqc.errors import ParseError, PreconditionError
from dqc.pspace import (build_bisection_debate, build_bisection_verifier_circuit,
                        counter_machine, honest_midpoints_match, identity_machine,
                        load_machine, machine_run, machine_run_jump, parity_machine,
                        pspace_pipeline, save_machine)
from dqc.protocols import ceil_log2
from dqc.transforms import check_circuit_matches_verifier

from oracles import valid_by_enumeration


def all_x(n):
    return list(itertools.product((0, 1), repeat=n))


def test_counter_machine():
    m = counter_machine(4, 1, 3)
    for x in all_x(1):
        final, _ = machine_run(m, x)
        assert sum(b << i for i, b in enumerate(final)) == 8


def test_identity_machine_fixed_point():
    m = identity_machine(3, T=3)
    for x in all_x(3):
        assert machine_run(m, x)[0] == x


@pytest.mark.parametrize("n, T", [(4, 4), (4, 2), (3, 2), (2, 1)])
def test_parity_machine_direct_simulation(n, T):
    m = parity_machine(n, T)
    for x in all_x(n):
        # reference: plain Python loop over the same counter semantics
        c, p = 0, 0
        for _ in range(2 ** T):
            if c < n:
                p ^= x[c]
            c = (c + 1) % 2 ** T
        assert machine_run(m, x)[1] == p == sum(x) % 2


@pytest.mark.parametrize("m", [parity_machine(4, 4), counter_machine(5, 2, 6),
                               identity_machine(2, 3)])
def test_jump_equals_naive(m):
    for x in all_x(m.n):
        assert machine_run(m, x) == machine_run_jump(m, x)


def test_guards():
    with pytest.raises(PreconditionError):
        counter_machine(13)
    with pytest.raises(PreconditionError):
        counter_machine(2, 1, 17)
    with pytest.raises(PreconditionError):
        parity_machine(8, 2)


def test_machine_file_round_trip(tmp_path):
    m = parity_machine(3, 2)
    save_machine(m, tmp_path / "par.tm")
    again = load_machine(tmp_path / "par.tm")
    assert (again.w, again.n, again.T, again.init) == (m.w, m.n, m.T, m.init)
    for x in all_x(3):
        assert machine_run(again, x) == machine_run(m, x)
    (tmp_path / "bad.tm").write_text("width 2\ninputs 1\nhorizon 1\ninit 0 x7\n")
    with pytest.raises(ParseError):
        load_machine(tmp_path / "bad.tm")


def test_bisection_small_parity_valid():
    m = parity_machine(2, 1)
    sys = build_bisection_debate(m)
    f = m.decided_function()
    rep = check_validity(sys, f)
    assert rep.valid
    assert valid_by_enumeration(sys, f.table)[0]


def test_bisection_parity_n2_T2():
    m = parity_machine(2, 2)
    sys = build_bisection_debate(m)
    rep = check_validity(sys, m.decided_function())
    assert rep.valid
    assert rep.max_probes_observed <= m.T + 3 * m.w + m.n == sys.ell_bound


def test_bisection_constant_machine():
    m = identity_machine(2, T=2, accept_bit=1)
    sys = build_bisection_debate(m)
    f = m.decided_function()
    assert set(f.table) == {1}
    assert check_validity(sys, f).valid


def test_honest_midpoints_are_true_configurations():
    m = parity_machine(4, 2)
    sys = build_bisection_debate(m)
    for x in all_x(4):
        for sel in itertools.product((0, 1), repeat=m.T):
            # Prover 0 plays arbitrary halves; the claimant still writes the truth
            bits = [0] * sys.k
            for p, s in enumerate(sel):
                bits[(sys.meta["layout"].select_pos(p) - m.n) // 2] = s
            run = run_debate(sys, x, adversary_role=0, adversary_bits=bits)
            assert honest_midpoints_match(sys, x, run.transcript)
            assert run.verdict == machine_run(m, x)[1]


def test_verifier_circuit_matches_verifier():
    m = parity_machine(2, 2)
    sys = build_bisection_debate(m)
    cv = build_bisection_verifier_circuit(sys)
    assert check_circuit_matches_verifier(sys, m.decided_function(), cv) > 0


def test_verifier_circuit_equals_verifier_everywhere():
    m = parity_machine(2, 1)
    sys = build_bisection_debate(m)
    cv = build_bisection_verifier_circuit(sys)
    for z in itertools.product((0, 1), repeat=sys.space.total):
        assert cv.evaluate(z) == sys.verifier.evaluate(z)


def test_pipeline_tiny_closes_the_loop():
    compiled, rep = pspace_pipeline(parity_machine(2, 1), verify_compiled=True)
    assert rep.valid and rep.compiled_valid
    assert rep.compiled_probes <= ceil_log2(rep.m) + 3


def test_pipeline_constant_machine():
    m = identity_machine(1, T=1, accept_bit=0)
    compiled, rep = pspace_pipeline(m, verify_compiled=True)
    assert rep.compiled_valid


def test_pipeline_parity4_probe_report():
    compiled, rep = pspace_pipeline(parity_machine(4, 2))
    assert rep.compiled_probes == ceil_log2(rep.m) + 3 == rep.compiled_bound
    assert rep.compiled_probes < rep.max_probes_observed
    assert rep.m < 2 ** (rep.T + 3 * rep.w)
