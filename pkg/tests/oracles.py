"""Brute-force reference implementations used only by the tests.

Each one recomputes a quantity from first principles without calling the
package routine it is compared against.
"""

import itertools

from dqc.debate import run_debate


def bits(v, n):
    return tuple((v >> i) & 1 for i in range(n))


def table_of(fn, n):
    return tuple(int(fn(bits(v, n))) for v in range(1 << n))


def popcount_majority(x):
    return int(2 * sum(x) > len(x))


def valid_by_enumeration(sys, truth):
    """Validity by trying every adversary bit string.

    The honest opponent is deterministic, so each adaptive adversary
    produces the same transcript as some fixed string of k bits; 2^k strings
    therefore cover every adversary.  Returns (valid, max probes, first bad x).
    """
    max_probes = 0
    for v in range(1 << sys.n):
        x = bits(v, sys.n)
        fx = truth[v]
        for adv in itertools.product((0, 1), repeat=sys.k):
            run = run_debate(sys, x, adversary_role=1 - fx, adversary_bits=adv)
            max_probes = max(max_probes, len(run.probes))
            if run.verdict != fx:
                return False, max_probes, x
    return True, max_probes, None


def probed_positions_by_enumeration(verifier):
    """Union of the probes over every assignment of the whole index space."""
    total = verifier.space.total
    seen = set()
    for z in itertools.product((0, 1), repeat=total):
        seen.update(verifier.run(z.__getitem__)[1])
    return seen


def minimax_value(verifier, x):
    """forall a1 exists b1 ... V = 1, over every transcript bit."""
    n, k = verifier.space

    def go(t):
        if len(t) == 2 * k:
            return verifier.evaluate(list(x) + t)
        vals = [go(t + [b]) for b in (0, 1)]
        return min(vals) if len(t) % 2 == 0 else max(vals)

    return go([])
