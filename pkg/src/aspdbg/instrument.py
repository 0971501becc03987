"""Debugging transformation: marker atoms, support rules, and assembly.

Every non-background rule gets a `_debug<id>` marker in its body; every
atom of the program's relevant ground base gets a rule deriving it when
its `_support_*` counterpart is absent.  Choice rules over all marker
atoms keep the grounder from simplifying them away.  The assembled
program minus the marker facts stays coherent exactly when the original
program satisfies the test assertions, so subsets of the facts act as
switchable suspects during diagnosis.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .grounder import DEFAULT_BUDGET, GroundProgram, ground
from .parser import TestCase
from .pretty import format_atom
from .syntax import (
    Atom,
    FreshAtoms,
    Literal,
    Program,
    Rule,
    Term,
    TermKind,
    desugar_choice,
)

DEBUG_PREFIX = "_debug"
SUPPORT_PREFIX = "_support_"


class UnknownAssertedAtom(Exception):
    """A test assertion names an atom outside the program's ground base."""


def support_atom(atom: Atom) -> Atom:
    """Marker whose absence lets `atom` be derived freely.

    The marked atom's predicate is folded into the marker name, so the
    marker stays a plain first-order atom (no function symbols needed).
    """
    return Atom(SUPPORT_PREFIX + atom.predicate, atom.args)


def support_target(atom: Atom) -> Atom:
    return Atom(atom.predicate[len(SUPPORT_PREFIX):], atom.args)


def is_support_atom(atom: Atom) -> bool:
    return atom.predicate.startswith(SUPPORT_PREFIX)


def is_debug_atom(atom: Atom) -> bool:
    rest = atom.predicate[len(DEBUG_PREFIX):]
    return atom.predicate.startswith(DEBUG_PREFIX) and rest.isdigit()


def debug_rule_number(atom: Atom) -> int:
    return int(atom.predicate[len(DEBUG_PREFIX):])


def marker_variables(rule: Rule) -> tuple[str, ...]:
    """Variable tuple of a rule's debug marker.

    First occurrence scanning comparisons, then body literals, then the
    head.  Comparisons come first so a constraint like
    `:- col(X,C1), col(Y,C2), edge(X,Y), X != Y, C1 != C2` yields the
    marker argument order (X, Y, C1, C2).
    """
    seen: set[str] = set()
    out: list[str] = []

    def visit(term: Term) -> None:
        if term.kind is TermKind.VARIABLE and term.name not in seen:
            seen.add(term.name)
            out.append(term.name)

    for cmp in rule.body_comparisons:
        visit(cmp.left)
        visit(cmp.right)
    for lit in rule.body_literals:
        for term in lit.atom.args:
            visit(term)
    for atom in rule.head:
        for term in atom.args:
            visit(term)
    return tuple(out)


def debug_atom_for(rule: Rule) -> Atom:
    args = tuple(Term.var(v) for v in marker_variables(rule))
    return Atom(f"{DEBUG_PREFIX}{rule.id}", args)


def make_test_constraints(test: TestCase, next_id: int = 1) -> tuple[Rule, ...]:
    """One constraint per assertion forbidding its violation."""
    rules = []
    for offset, lit in enumerate(test.asserted):
        rules.append(
            Rule(
                id=next_id + offset,
                head=(),
                body_literals=(Literal(lit.atom, not lit.negated),),
            )
        )
    return tuple(rules)


def default_background(program: Program) -> frozenset[int]:
    return frozenset(r.id for r in program.rules if r.is_fact)


def relevant_base(program: Program, *, budget: int = DEFAULT_BUDGET) -> tuple[Atom, ...]:
    """Ground atoms of original predicates, in deterministic order."""
    g = ground(program, "no-simplify", budget=budget)
    return tuple(sorted(g.herbrand_base, key=Atom.order_key))


def _support_rules(base: tuple[Atom, ...], next_id: int) -> tuple[Rule, ...]:
    rules = []
    for offset, atom in enumerate(base):
        rules.append(
            Rule(
                id=next_id + offset,
                head=(atom,),
                body_literals=(Literal(support_atom(atom), negated=True),),
            )
        )
    return tuple(rules)


def build_debugging_program(
    program: Program,
    background: frozenset[int] | None = None,
    *,
    budget: int = DEFAULT_BUDGET,
) -> Program:
    """Instrumented rules, then support rules, then background verbatim."""
    if background is None:
        background = default_background(program)
    unknown = background - {r.id for r in program.rules}
    if unknown:
        raise ValueError(f"unknown background rule id {min(unknown)}")
    base = relevant_base(program, budget=budget)
    return _assemble_debugging(program, background, base)


def _assemble_debugging(
    program: Program, background: frozenset[int], base: tuple[Atom, ...]
) -> Program:
    instrumented = []
    for rule in program.rules:
        if rule.id in background:
            continue
        marker = Literal(debug_atom_for(rule))
        instrumented.append(
            Rule(
                id=len(instrumented) + 1,
                head=rule.head,
                body_literals=rule.body_literals + (marker,),
                body_comparisons=rule.body_comparisons,
                source_span=rule.source_span,
            )
        )
    next_id = len(instrumented) + 1
    supports = _support_rules(base, next_id)
    next_id += len(supports)
    copied = []
    for rule in program.rules:
        if rule.id in background:
            copied.append(replace(rule, id=next_id + len(copied)))
    return Program(
        tuple(instrumented) + supports + tuple(copied),
        frozenset(r.id for r in copied),
    )


def _marker_atoms(d_ground: GroundProgram) -> tuple[tuple[Atom, ...], tuple[Atom, ...]]:
    """Ground debug and support atoms of a grounded debugging program.

    Debug atoms sort by rule number then argument order, support atoms by
    their target atom; this is the preference order used everywhere a
    subset of the marker facts is chosen deterministically.
    """
    debug = sorted(
        (a for a in d_ground.atom_table if is_debug_atom(a)),
        key=lambda a: (debug_rule_number(a), Atom.order_key(a)),
    )
    support = sorted(
        (a for a in d_ground.atom_table if is_support_atom(a)),
        key=lambda a: support_target(a).order_key(),
    )
    return tuple(debug), tuple(support)


def _choice_rules(atoms: tuple[Atom, ...], program: Program, next_id: int) -> tuple[Rule, ...]:
    fresh = FreshAtoms.for_program(program)
    return tuple(
        desugar_choice(atom, fresh, next_id + offset)
        for offset, atom in enumerate(atoms)
    )


def extend_debugging_program(d: Program, *, budget: int = DEFAULT_BUDGET) -> Program:
    """Add one choice rule per ground debug/support atom of d."""
    debug, support = _marker_atoms(ground(d, "no-simplify", budget=budget))
    choices = _choice_rules(debug + support, d, len(d.rules) + 1)
    return Program(d.rules + choices, d.background_ids)


@dataclass(frozen=True)
class DebugInstrumentation:
    debug_atoms: tuple[Atom, ...]
    support_atoms: tuple[Atom, ...]
    rule_index: dict[Atom, tuple[int, dict[str, Term]]]
    support_index: dict[Atom, Atom]

    @property
    def assumption_atoms(self) -> tuple[Atom, ...]:
        return self.debug_atoms + self.support_atoms


@dataclass(frozen=True)
class GammaAssembly:
    """Ground debugging program with the assumption facts held out.

    `gamma` has no rule deriving any marker atom unconditionally; the
    facts in `p_a` are supplied per-call as extra facts so diagnosis can
    test arbitrary subsets.
    """

    gamma: GroundProgram
    instrumentation: DebugInstrumentation
    p_a: tuple[Atom, ...]
    program: Program
    test: TestCase
    background: frozenset[int]
    combined: Program
    base: tuple[Atom, ...]
    instrumented_ids: frozenset[int]
    support_ids: frozenset[int]
    background_rule_ids: frozenset[int]
    choice_ids: frozenset[int]
    test_ids: frozenset[int]


def _instrumentation(
    program: Program, debug: tuple[Atom, ...], support: tuple[Atom, ...]
) -> DebugInstrumentation:
    rule_index = {}
    for atom in debug:
        rule = program.rule(debug_rule_number(atom))
        subst = dict(zip(marker_variables(rule), atom.args))
        rule_index[atom] = (rule.id, subst)
    support_index = {atom: support_target(atom) for atom in support}
    return DebugInstrumentation(debug, support, rule_index, support_index)


def assemble_gamma(
    program: Program,
    test: TestCase,
    background: frozenset[int] | None = None,
    *,
    budget: int = DEFAULT_BUDGET,
) -> GammaAssembly:
    if background is None:
        background = default_background(program)
    unknown = background - {r.id for r in program.rules}
    if unknown:
        raise ValueError(f"unknown background rule id {min(unknown)}")
    base = relevant_base(program, budget=budget)
    known = set(base)
    for atom in test.atoms:
        if atom not in known:
            raise UnknownAssertedAtom(
                f"asserted atom has no occurrence: {format_atom(atom)}"
            )

    d = _assemble_debugging(program, background, base)
    debug, support = _marker_atoms(ground(d, "no-simplify", budget=budget))
    choices = _choice_rules(debug + support, d, len(d.rules) + 1)
    d_star = tuple(d.rules) + choices
    p_t = make_test_constraints(test, len(d_star) + 1)
    combined = Program(d_star + p_t, d.background_ids)
    gamma = ground(combined, "no-simplify", budget=budget)

    n_instr = len(d.rules) - len(d.background_ids) - len(base)
    instrumented_ids = frozenset(range(1, n_instr + 1))
    support_ids = frozenset(range(n_instr + 1, n_instr + len(base) + 1))
    choice_start = len(d.rules) + 1
    test_start = len(d_star) + 1
    return GammaAssembly(
        gamma=gamma,
        instrumentation=_instrumentation(program, debug, support),
        p_a=debug + support,
        program=program,
        test=test,
        background=background,
        combined=combined,
        base=base,
        instrumented_ids=instrumented_ids,
        support_ids=support_ids,
        background_rule_ids=d.background_ids,
        choice_ids=frozenset(range(choice_start, test_start)),
        test_ids=frozenset(range(test_start, len(combined.rules) + 1)),
    )
