"""Action language toolkit for appraisal-based emotion regulation theories."""
from .model import (
    ActionSymbol, CmtError, DomainDescription, EnvLiteral, ForbidsToCause, MentalFluent,
    PsychClass, State, ValidationError, enumerate_state_space, validate_domain,
)
from .dsl import (
    ActionTheory, ParseError, Query, parse_domain, parse_observations, parse_query,
    parse_rules, print_domain,
)
from .engine import Engine, InvalidTransition, SemanticsConfig, Trajectory
from .theories import CATALOG, TheorySpec, ae_domain, builtin_theory, check_transition
from .aspgen import emit_program
from .analysis import discrepancy_report, priority, reachability, run_experiment

__all__ = [
    "ActionSymbol", "ActionTheory", "CATALOG", "CmtError", "DomainDescription", "Engine",
    "EnvLiteral", "ForbidsToCause", "InvalidTransition", "MentalFluent", "ParseError",
    "PsychClass", "Query", "SemanticsConfig", "State", "TheorySpec", "Trajectory",
    "ValidationError", "ae_domain", "builtin_theory", "check_transition",
    "discrepancy_report", "emit_program", "enumerate_state_space", "parse_domain",
    "parse_observations", "parse_query", "parse_rules", "print_domain", "priority",
    "reachability", "run_experiment", "validate_domain",
]
