"""Simulated quantum key recovery against the Even-Mansour cipher."""

__version__ = "0.1.0"

from .f2linalg import BitWord, EquationSet, dot, nullspace_basis, solve_period
from .galois import FieldSpec, AffineMap, PermTable, build_sbox, parse_lut, format_lut, invert_perm
from .cipher import EmKey, EmInstance, em_encrypt, em_decrypt, simon_f, f_table, epsilon, success_probability, recover_k2
from .synth import Gate, GateKind, Circuit, CostTable, synthesize, truth_table, depth, t_depth
from .qsim import Distribution, StateVector, simon_output_distribution, sample, simulate_circuit_unitary
from .noise import DepolModel, sigma_p, effective_p, noisy_sample, tv_distance
from .attack import AttackConfig, AttackResult, run_attack, streaming_recover_k1, top_half_recover_k1, verify_keys
