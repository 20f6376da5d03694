"""Debate query complexity: two-prover debates judged by a query-bounded verifier."""

from .boolfn import BoolFn, WitnessPair, depends_on, depends_on_all, named, witness_pair
from .circuit import Circuit, CircuitBuilder, Gate, eval_circuit, majority_circuit, parse_netlist
from .debate import (DebateSystem, IndexSpace, Verifier, check_validity, game_value,
                     queried_variable_set, run_debate)
from .dtree import DecisionTree, decision_tree_to_circuit
from .normalize import NormalizedCircuit, normalize_alternating
from .protocols import build_crossexam_debate, build_kw_debate
from .pspace import ToyMachine, build_bisection_debate, machine_run, pspace_pipeline
from .randomized import (RandomizedVerifier, build_yao_distribution, newman_derandomize,
                         pairing_error_bound, rv_error)
from .transforms import (AdviceTable, compress_rounds, crossexam_compile, extract_advice,
                         pad_rounds, simulate_with_advice)

__version__ = "0.1.0"
