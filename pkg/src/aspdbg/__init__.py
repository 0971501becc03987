"""Interactive fault localization for answer-set programs.

Pipeline: parse a program and a test case, instrument every untrusted
rule with marker atoms, ground without simplification, minimize a set of
marker facts whose presence keeps the program incoherent, and map those
facts back to source rules.  User answers about the expected answer set
narrow the suspects step by step.
"""

from .diagnosis import (
    Query,
    Reason,
    RuleFinding,
    SessionState,
    SourceFinding,
    TestCasePasses,
    UnsupportedAtomFinding,
    apply_answer,
    compute_queries,
    is_reason,
    map_to_source,
    minimize_reason,
    start_session,
    undo,
)
from .grounder import (
    DroppedRuleWarning,
    GroundProgram,
    GroundRule,
    GroundingBudgetExceeded,
    anti_simplification_closure,
    ground,
    herbrand_universe,
)
from .instrument import (
    DebugInstrumentation,
    GammaAssembly,
    UnknownAssertedAtom,
    assemble_gamma,
    build_debugging_program,
    default_background,
    extend_debugging_program,
    make_test_constraints,
)
from .parser import ParseError, TestCase, parse_program, parse_test_case
from .protocol import SessionEngine, SessionMessage, parse, serialize
from .solver import (
    SolveResult,
    brute_force_answer_sets,
    check_coherence,
    enumerate_answer_sets,
    is_answer_set,
    is_model,
    reduct,
)
from .syntax import (
    Atom,
    Comparison,
    Literal,
    Program,
    Rule,
    SafetyViolation,
    SourceSpan,
    Term,
    check_safety,
    complement,
    desugar_choice,
)

__version__ = "0.1.0"
