"""Command line front end.

    dqc [--budget N] [--seed S] [--format structured|text] [--timing] COMMAND ...

Every command prints one report.  Exit status: 0 when the report says
valid/pass, 1 when it says otherwise, 2 for usage, file, and resource errors.
"""

from __future__ import annotations

import argparse
import itertools
import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from .boolfn import BoolFn
from .circuit import Circuit, load_netlist, named_circuit
from .debate import (DEFAULT_BUDGET, DebateSystem, check_validity, queried_variable_set)
from .dtree import decision_tree_to_circuit, load_tree, random_tree
from .errors import (BudgetExceeded, CompileError, ConstructionFailure, DQCError,
                     InternalConsistencyError, ParseError, PreconditionError)
from .normalize import normalize_alternating
from .protocols import build_crossexam_debate, build_kw_debate, ceil_log2, size_bound_note
from .pspace import BUILTIN_MACHINES, load_machine, pspace_pipeline
from .randomized import (RandomizedVerifier, build_yao_distribution, newman_derandomize,
                         noisy_verifier, pairing_error_bound)
from .transforms import (AdviceTable, compress_rounds, crossexam_compile, extract_advice,
                         pad_rounds, simulate_with_advice)

REPORT_FIELDS = ("function", "n", "chain", "k", "ell_bound", "max_probes_observed", "valid",
                 "counterexample", "circuit_size", "circuit_depth", "implied_size_note",
                 "seed", "wall_time")
ADVICE_CHECK_LIMIT = 22


class UsageProblem(DQCError):
    pass


# -- reports ---------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(e) for e in v)
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True, separators=(",", ":"), default=str)
    return str(v)


class RunReport:
    """Ordered key/value report; known fields first, command extras after."""

    def __init__(self, **fields):
        self.fields: dict = {}
        self.update(**fields)

    def update(self, **fields):
        for key, v in fields.items():
            if v is not None:
                self.fields[key] = v

    @property
    def ok(self) -> bool:
        return bool(self.fields.get("valid", False))

    def items(self):
        known = [(f, self.fields[f]) for f in REPORT_FIELDS if f in self.fields]
        extra = sorted((f, v) for f, v in self.fields.items() if f not in REPORT_FIELDS)
        return known + extra

    def render(self, fmt: str) -> str:
        rows = [(key, _fmt(v)) for key, v in self.items()]
        if fmt == "structured":
            return "".join(f"{key}={v}\n" for key, v in rows)
        width = max(len(key) for key, _ in rows)
        return "".join(f"{key.ljust(width)}  {v}\n" for key, v in rows)


def _check_report(r: RunReport):
    f = r.fields
    if f.get("valid") and "counterexample" in f:
        raise InternalConsistencyError("report marked valid carries a counterexample")
    if "max_probes_observed" in f and "ell_bound" in f and f["max_probes_observed"] > f["ell_bound"]:
        raise InternalConsistencyError("observed probes exceed the declared bound")


# -- inputs ------------------------------------------------------------------------

def _source(args) -> tuple[str, Circuit]:
    if getattr(args, "circuit", None):
        path = Path(args.circuit)
        return path.stem, load_netlist(path)
    if getattr(args, "builtin", None):
        if args.n is None:
            raise UsageProblem("--builtin needs --n")
        return f"{args.builtin}_{args.n}", named_circuit(args.builtin, args.n)
    raise UsageProblem("give --circuit FILE or --builtin NAME --n N")


def _build(protocol: str, c: Circuit) -> DebateSystem:
    if protocol == "kw":
        return build_kw_debate(normalize_alternating(c))
    if protocol == "crossexam":
        return build_crossexam_debate(c)
    raise UsageProblem(f"unknown protocol {protocol!r}")


def _compile_tree(sys_: DebateSystem, f: BoolFn, budget: int) -> DebateSystem:
    cv = decision_tree_to_circuit(sys_.verifier.tree())
    return crossexam_compile(sys_, cv, f, budget)


class SystemFile:
    """Descriptor: a protocol on a circuit followed by transform records.

        protocol kw
        circuit and2.nl          (or: builtin parity 4)
        pad 0,2
        compress
        compile
    """

    def __init__(self, protocol: str, source: tuple, transforms: list):
        self.protocol, self.source, self.transforms = protocol, source, transforms

    @classmethod
    def load(cls, path) -> "SystemFile":
        path = Path(path)
        protocol, source, transforms = None, None, []
        for lineno, raw in enumerate(path.read_text().splitlines(), 1):
            tok = raw.split("#", 1)[0].split()
            if not tok:
                continue
            if tok[0] == "protocol" and len(tok) == 2:
                protocol = tok[1]
            elif tok[0] == "circuit" and len(tok) == 2:
                source = ("circuit", str(path.parent / tok[1]))
            elif tok[0] == "builtin" and len(tok) == 3 and tok[2].isdigit():
                source = ("builtin", tok[1], int(tok[2]))
            elif tok[0] == "pad" and len(tok) == 2:
                try:
                    transforms.append(("pad", [int(r) for r in tok[1].split(",")]))
                except ValueError:
                    raise ParseError("pad needs comma-separated round numbers", lineno) from None
            elif tok[0] in ("compress", "compile") and len(tok) == 1:
                transforms.append((tok[0],))
            else:
                raise ParseError(f"malformed record {raw.strip()!r}", lineno)
        if protocol is None or source is None:
            raise ParseError("system file needs 'protocol' and a circuit or builtin record")
        return cls(protocol, source, transforms)

    def text(self) -> str:
        lines = [f"protocol {self.protocol}"]
        if self.source[0] == "circuit":
            lines.append(f"circuit {self.source[1]}")
        else:
            lines.append(f"builtin {self.source[1]} {self.source[2]}")
        for t in self.transforms:
            lines.append(t[0] if len(t) == 1 else f"pad {','.join(map(str, t[1]))}")
        return "\n".join(lines) + "\n"

    def circuit(self) -> tuple[str, Circuit]:
        if self.source[0] == "circuit":
            return Path(self.source[1]).stem, load_netlist(self.source[1])
        _, name, n = self.source
        return f"{name}_{n}", named_circuit(name, n)

    def realize(self, budget: int) -> tuple[str, Circuit, BoolFn, DebateSystem, list[str]]:
        name, c = self.circuit()
        f = c.to_boolfn(name)
        s = _build(self.protocol, c)
        chain = [self.protocol]
        for t in self.transforms:
            s, step = _apply(t, s, f, budget)
            chain.append(step)
        return name, c, f, s, chain


def _apply(t: tuple, s: DebateSystem, f: BoolFn, budget: int):
    if t[0] == "pad":
        return pad_rounds(s, t[1]), f"pad[{','.join(map(str, t[1]))}]"
    if t[0] == "compress":
        return compress_rounds(s, None, budget), "compress"
    return _compile_tree(s, f, budget), "compile"


def _debate_report(name, c, f, s, chain, args, verify=True) -> RunReport:
    r = RunReport(function=name, n=s.n, chain=">".join(chain), k=s.k, ell_bound=s.ell_bound,
                  circuit_size=c.size, circuit_depth=c.depth, seed=args.seed)
    if not verify:
        r.update(valid=True, verified=False)
        return r
    rep = check_validity(s, f, args.budget)
    r.update(max_probes_observed=rep.max_probes_observed, valid=rep.valid, runs=rep.runs,
             verified=True)
    if rep.counterexample is not None:
        r.update(counterexample=rep.counterexample.to_dict())
    if "m" in s.meta:
        r.update(implied_size_note=size_bound_note(rep.max_probes_observed, s.meta["m"]),
                 m=s.meta["m"], log_bound=ceil_log2(s.meta["m"]) + 3)
    return r


# -- commands ----------------------------------------------------------------------

def cmd_circuit_info(args) -> RunReport:
    name, c = _source(args)
    nc = normalize_alternating(c)
    return RunReport(function=name, n=c.n_inputs, circuit_size=c.size, circuit_depth=c.depth,
                     normalized_depth=nc.depth, seed=args.seed, valid=True)


def cmd_debate_build(args) -> RunReport:
    name, c = _source(args)
    f = c.to_boolfn(name)
    s = _build(args.protocol, c)
    chain = [args.protocol]
    if args.pad:
        s, step = _apply(("pad", [int(r) for r in args.pad.split(",")]), s, f, args.budget)
        chain.append(step)
    r = _debate_report(name, c, f, s, chain, args, verify=args.verify)
    if args.protocol == "kw":
        r.update(normalized_depth=s.meta["depth"])
    if args.save:
        source = ("circuit", str(Path(args.circuit).resolve())) if args.circuit \
            else ("builtin", args.builtin, args.n)
        transforms = [("pad", [int(v) for v in args.pad.split(",")])] if args.pad else []
        Path(args.save).write_text(SystemFile(args.protocol, source, transforms).text())
    return r


def cmd_debate_verify(args) -> RunReport:
    return _debate_report(*SystemFile.load(args.system).realize(args.budget), args)


def cmd_debate_compress(args) -> RunReport:
    name, c, f, s, chain = SystemFile.load(args.system).realize(args.budget)
    before = s.k
    s2, step = _apply(("compress",), s, f, args.budget)
    r = _debate_report(name, c, f, s2, chain + [step], args)
    support = sorted(queried_variable_set(s2.verifier, args.budget))
    transcript_support = [p for p in support if p >= s2.n]
    r.update(k_before=before, removed_rounds=s2.meta.get("removed_rounds", []),
             queried_transcript_positions=len(transcript_support))
    return r


def cmd_debate_compile(args) -> RunReport:
    name, c, f, s, chain = SystemFile.load(args.system).realize(args.budget)
    try:
        s2, step = _apply(("compile",), s, f, args.budget)
    except CompileError as e:
        return RunReport(function=name, n=s.n, chain=">".join(chain + ["compile"]), valid=False,
                         counterexample={"error": str(e)}, seed=args.seed)
    r = _debate_report(name, c, f, s2, chain + [step], args, verify=not args.no_verify)
    r.update(source_k=s.k, source_ell=s.ell_bound, compiled_probes=s2.verifier.max_probes())
    return r


def cmd_advice_extract(args) -> RunReport:
    name, c, f, s, chain = SystemFile.load(args.system).realize(args.budget)
    table = extract_advice(s.verifier, args.budget)
    Path(args.out).write_text(table.to_text())
    return RunReport(function=name, n=s.n, chain=">".join(chain + ["advice"]), k=s.k,
                     ell_bound=s.ell_bound, seed=args.seed, valid=True, rows=table.rows,
                     row_bound=(1 << (s.verifier.ell + 1)) - 1, redacted=len(table.redacted))


def cmd_advice_check(args) -> RunReport:
    name, c, f, s, chain = SystemFile.load(args.system).realize(args.budget)
    table = AdviceTable.parse(Path(args.table).read_text())
    if (table.n, table.k) != (s.n, s.k):
        raise UsageProblem(f"table is for n={table.n}, k={table.k}; system has n={s.n}, k={s.k}")
    total = s.n + 2 * s.k
    if total > ADVICE_CHECK_LIMIT or (1 << total) > args.budget:
        raise BudgetExceeded("advice check", min(args.budget, 1 << ADVICE_CHECK_LIMIT), 1 << total)
    mismatches = 0
    first = None
    for z in itertools.product((0, 1), repeat=total):
        want = s.verifier.run(z.__getitem__)
        got = simulate_with_advice(table, z[:s.n], z[s.n:])
        if want[0] != got[0] or list(want[1]) != got[1]:
            mismatches += 1
            if first is None:
                first = {"z": "".join(map(str, z)), "expected": want[0], "table": got[0]}
    r = RunReport(function=name, n=s.n, chain=">".join(chain + ["advice"]), k=s.k,
                  ell_bound=s.ell_bound, seed=args.seed, valid=mismatches == 0,
                  pairs_checked=1 << total, mismatches=mismatches, rows=table.rows,
                  row_bound=(1 << (s.verifier.ell + 1)) - 1)
    r.update(counterexample=first)
    return r


def cmd_yao_run(args) -> RunReport:
    name, c = _source(args)
    f = c.to_boolfn(name)
    s = _build(args.protocol, c)
    d = build_yao_distribution(s, f)
    if args.tree:
        trees = [load_tree(args.tree)]
    else:
        rng = random.Random(args.seed)
        trees = [random_tree(rng, d.space, args.depth) for _ in range(args.random_trees)]
    results = [pairing_error_bound(t, d) for t in trees]
    ok = all(p.measured_error >= p.certified_lower_bound for p in results)
    r = RunReport(function=name, n=s.n, chain=f"{args.protocol}>yao", k=s.k,
                  ell_bound=s.ell_bound, circuit_size=c.size, circuit_depth=c.depth,
                  seed=args.seed, valid=ok, trees=len(trees), atoms=len(d.atoms))
    if len(results) == 1:
        p = results[0]
        r.update(measured_error=p.measured_error, certified_lower_bound=p.certified_lower_bound,
                 forced_pairs=p.forced_pairs or "-", distinct_x_queried=p.distinct_x_queried)
    else:
        r.update(min_measured_error=min(p.measured_error for p in results),
                 max_certified_lower_bound=max(p.certified_lower_bound for p in results),
                 min_slack=min(p.measured_error - p.certified_lower_bound for p in results))
    return r


def cmd_newman_run(args) -> RunReport:
    name, c = _source(args)
    f = c.to_boolfn(name)
    s = _build(args.protocol, c)
    if args.rv:
        rv = RandomizedVerifier.parse(Path(args.rv).read_text())
    else:
        rv = noisy_verifier(s, random.Random(args.seed))
    try:
        res = newman_derandomize(rv, s, f, args.seed, args.retries, args.budget)
    except ConstructionFailure as e:
        return RunReport(function=name, n=s.n, chain=f"{args.protocol}>newman", seed=args.seed,
                         valid=False, counterexample=e.diagnostics)
    st = res.stats
    final = res.system
    probes = final.verifier.max_probes()
    bound = st["q"] + st["log2_2k_plus_n"] + st["c_impl"]
    r = RunReport(function=name, n=s.n, chain=f"{args.protocol}>newman>compile", k=final.k,
                  ell_bound=final.ell_bound, circuit_size=st["m"],
                  circuit_depth=res.circuit.depth, seed=args.seed, valid=probes <= bound,
                  compiled_probes=probes, probe_bound=bound)
    r.update(**{key: v for key, v in st.items() if key not in ("m",)})
    return r


def cmd_pspace_demo(args) -> RunReport:
    if args.machine:
        m = load_machine(args.machine)
    else:
        if args.builtin == "parity":
            m = BUILTIN_MACHINES["parity"](args.n, args.horizon)
        elif args.builtin == "counter":
            m = BUILTIN_MACHINES["counter"](args.width, args.n, args.horizon)
        else:
            m = BUILTIN_MACHINES["identity"](args.n, args.horizon)
    compiled, rep = pspace_pipeline(m, args.budget, args.verify_compiled)
    ok = rep.valid and rep.compiled_probes <= rep.compiled_bound and rep.compiled_valid is not False
    return RunReport(function=m.name, n=m.n, chain="bisection>compile", k=rep.k,
                     ell_bound=rep.ell_bound, max_probes_observed=rep.max_probes_observed,
                     valid=ok, circuit_size=rep.m, seed=args.seed, width=m.w, horizon=m.T,
                     validity_runs=rep.validity_runs, compiled_k=rep.compiled_k,
                     compiled_bound=rep.compiled_bound, compiled_probes=rep.compiled_probes,
                     compiled_valid=rep.compiled_valid,
                     implied_size_note=size_bound_note(rep.compiled_probes, rep.m))


# -- argument parsing ------------------------------------------------------------------

def _globals(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--budget", type=int, default=d(DEFAULT_BUDGET),
                   help="cap on explored runs / evaluations")
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--format", choices=("structured", "text"), default=d("structured"))
    p.add_argument("--timing", action="store_true", default=d(False),
                   help="add wall_time (breaks byte-identical output)")


def _function_args(p):
    p.add_argument("--circuit", help="netlist file")
    p.add_argument("--builtin", choices=("and", "or", "parity", "majority", "const0", "const1"))
    p.add_argument("--n", type=int)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="dqc", description=__doc__.split("\n\n")[0])
    _globals(top, suppress=False)
    groups = top.add_subparsers(dest="group", required=True)

    def leaf(sub, name, fn, **kw):
        p = sub.add_parser(name, **kw)
        _globals(p, suppress=True)
        p.set_defaults(fn=fn)
        return p

    g = groups.add_parser("circuit").add_subparsers(dest="cmd", required=True)
    _function_args(leaf(g, "info", cmd_circuit_info))

    g = groups.add_parser("debate").add_subparsers(dest="cmd", required=True)
    p = leaf(g, "build", cmd_debate_build)
    _function_args(p)
    p.add_argument("--protocol", choices=("kw", "crossexam"), default="kw")
    p.add_argument("--pad", help="comma-separated dummy round numbers to insert")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--save", help="write a system descriptor")
    for name, fn in (("verify", cmd_debate_verify), ("compress", cmd_debate_compress)):
        leaf(g, name, fn).add_argument("--system", required=True)
    p = leaf(g, "compile", cmd_debate_compile)
    p.add_argument("--system", required=True)
    p.add_argument("--no-verify", action="store_true",
                   help="skip the exhaustive check of the compiled system")

    g = groups.add_parser("advice").add_subparsers(dest="cmd", required=True)
    p = leaf(g, "extract", cmd_advice_extract)
    p.add_argument("--system", required=True)
    p.add_argument("--out", required=True)
    p = leaf(g, "check", cmd_advice_check)
    p.add_argument("--system", required=True)
    p.add_argument("--table", required=True)

    g = groups.add_parser("yao").add_subparsers(dest="cmd", required=True)
    p = leaf(g, "run", cmd_yao_run)
    _function_args(p)
    p.add_argument("--protocol", choices=("kw", "crossexam"), default="kw")
    p.add_argument("--tree", help="decision tree file")
    p.add_argument("--random-trees", type=int, default=100)
    p.add_argument("--depth", type=int, default=3)

    g = groups.add_parser("newman").add_subparsers(dest="cmd", required=True)
    p = leaf(g, "run", cmd_newman_run)
    _function_args(p)
    p.add_argument("--protocol", choices=("kw", "crossexam"), default="kw")
    p.add_argument("--rv", help="randomized verifier file (default: seeded noisy copy of V)")
    p.add_argument("--retries", type=int, default=10)

    g = groups.add_parser("pspace").add_subparsers(dest="cmd", required=True)
    p = leaf(g, "demo", cmd_pspace_demo)
    p.add_argument("--machine", help="machine file")
    p.add_argument("--builtin", choices=sorted(BUILTIN_MACHINES), default="parity")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--horizon", type=int, default=2)
    p.add_argument("--width", type=int, default=3)
    p.add_argument("--verify-compiled", action="store_true")
    return top


def run_command(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        report = args.fn(args)
    except (OSError, ParseError, BudgetExceeded, PreconditionError, UsageProblem) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    if args.timing:
        report.update(wall_time=f"{time.perf_counter() - t0:.3f}")
    _check_report(report)
    out.write(report.render(args.format))
    return 0 if report.ok else 1


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
