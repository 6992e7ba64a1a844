"""Exact Lipschitz-free space computations on finite and tower-shaped countable compacta."""

from .free_space import (FreeOperator, Molecule, SolverDisagreement, apply, attaining_function, kr_norm,
                         operator_norm, pair, push_to_quotient, quotient_distance)
from .kalton import ShellSystem, bap_experiment, kalton_S, kalton_T, net_retraction
from .lipschitz import LipFn, extend_infconv, lip_norm, little_lip_modulus, restrict
from .metric import FiniteSpace, MetricError, line_space, quotient, validate_metric
from .partition import ClopenPartition, clopen_lift
from .separator import SeparatorCertificate, StaircaseFn, separate, separation_constant, verify_certificate
from .towers import Tower, TowerSpace, cb_derivative, cb_rank, truncate

__version__ = "0.1.0"

__all__ = [
    "FiniteSpace", "MetricError", "line_space", "quotient", "validate_metric",
    "Tower", "TowerSpace", "cb_derivative", "cb_rank", "truncate",
    "ClopenPartition", "clopen_lift",
    "LipFn", "lip_norm", "little_lip_modulus", "restrict", "extend_infconv",
    "Molecule", "FreeOperator", "kr_norm", "attaining_function", "pair", "quotient_distance",
    "push_to_quotient", "operator_norm", "apply", "SolverDisagreement",
    "StaircaseFn", "SeparatorCertificate", "separate", "separation_constant", "verify_certificate",
    "ShellSystem", "kalton_T", "kalton_S", "net_retraction", "bap_experiment",
]
