"""Exact expectation-transformer semantics for the probabilistic guarded
command language: wp/wlp evaluation, a forward resolution oracle,
refinement checking, healthiness checks and a verification-condition
generator."""
from .errors import (
    ParseError, PgclError, SemanticError, SpaceMismatch, SpecRejected, UnsupportedProgram, VCGError,
)
from .model import (
    Expectation, Predicate, StateSpace, bound_of, embed, entails, enumerate_states,
    first_violation, pconj, scale,
)
from .syntax import (
    DC, PC, Abort, Apply, Exec, If, Label, Loop, LoopAnnotation, NondetRelation, Seq, SetDC, Skip,
    pretty,
)
from .parser import parse, parse_bexpr, parse_expr, parse_program
from .engine import (
    DEFAULT_CONFIG, LIBERAL, STRICT, FixpointConfig, FixpointResult, backend, expectation_of,
    lift_exec, loop_fixpoint, predicate_of, transform, wlp, wp,
)
from .forward import (
    RefinementVerdict, SubDistribution, oracle_wp, oracle_wp_all, refines_exact, refines_falsify,
    resolutions,
)
from .health import (
    HealthReport, check_feasible, check_monotone, check_scaling, check_well_def,
)
from .vcg import Obligation, SpecDB, Triple, apply_scale, load_specs, loop_rule, prove_triple, report

__version__ = "0.1.0"
