"""Reason minimization, query ranking, and interactive session stepping.

A session owns the ground debugging program with its assumption facts
held out.  Minimization runs a divide-and-conquer search against the
coherence oracle, always over the same fact ordering, so the reason
returned is deterministic even when several minimal reasons exist.
User answers become ground constraints appended to the program; undo
truncates the answer history and replays it from the initial state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .grounder import GroundProgram, GroundRule
from .instrument import DebugInstrumentation, GammaAssembly
from .pretty import format_atom, format_rule
from .solver import check_coherence, enumerate_answer_sets
from .syntax import Atom, Program, Term


class TestCasePasses(Exception):
    """The program already satisfies the test; there is nothing to debug."""


@dataclass(frozen=True)
class Reason:
    facts: tuple[Atom, ...]
    minimal: bool


@dataclass(frozen=True)
class Query:
    atom: Atom
    q_plus: int
    q_minus: int

    @property
    def score(self) -> int:
        return abs(self.q_plus - self.q_minus)


@dataclass(frozen=True)
class RuleFinding:
    """A source rule implicated by its marker atoms."""

    rule_id: int
    substitutions: tuple[dict[str, Term], ...]
    ground_instances: tuple[str, ...]


@dataclass(frozen=True)
class UnsupportedAtomFinding:
    """An atom the test expects but no rule can derive."""

    atom: Atom
    candidate_rule_ids: tuple[int, ...]


SourceFinding = RuleFinding | UnsupportedAtomFinding


@dataclass(frozen=True)
class SessionState:
    assembly: GammaAssembly
    sample_limit: int | None
    answered: tuple[tuple[Atom, bool], ...]
    gamma: GroundProgram
    current_reason: Reason
    pending_queries: tuple[Query, ...]

    @property
    def answers_inconsistent(self) -> bool:
        # empty reason: the program without any assumption fact is already
        # incoherent, so no single suspect can explain the failure
        return not self.current_reason.facts

    @property
    def findings(self) -> tuple[SourceFinding, ...]:
        return map_to_source(
            self.current_reason,
            self.assembly.instrumentation,
            self.assembly.program,
        )


def is_reason(state: SessionState, facts: Iterable[Atom]) -> bool:
    return not check_coherence(state.gamma, tuple(facts))


def _minimize(gamma: GroundProgram, ordered: tuple[Atom, ...]) -> tuple[Atom, ...]:
    cache: dict[frozenset[Atom], bool] = {}

    def incoherent(facts: tuple[Atom, ...]) -> bool:
        key = frozenset(facts)
        if key not in cache:
            cache[key] = not check_coherence(gamma, key)
        return cache[key]

    def qx(
        hard: tuple[Atom, ...], soft: tuple[Atom, ...], delta: tuple[Atom, ...]
    ) -> tuple[Atom, ...]:
        if delta and incoherent(hard):
            return ()
        if len(soft) == 1:
            return soft
        half = len(soft) // 2
        a1, a2 = soft[:half], soft[half:]
        d2 = qx(hard + a1, a2, a1)
        d1 = qx(hard + d2, a1, d2)
        return d1 + d2

    if incoherent(()):
        return ()
    if not incoherent(ordered):
        raise ValueError("full assumption set is not a reason")
    result = qx((), ordered, ())
    position = {atom: i for i, atom in enumerate(ordered)}
    result = tuple(sorted(result, key=position.__getitem__))
    for i, atom in enumerate(result):
        rest = result[:i] + result[i + 1:]
        if incoherent(rest):
            raise RuntimeError(f"reason not minimal at {format_atom(atom)}")
    return result


def minimize_reason(state: SessionState) -> Reason:
    facts = _minimize(state.gamma, state.assembly.p_a)
    return Reason(facts, minimal=True)


def compute_queries(state: SessionState) -> tuple[Query, ...]:
    reason = state.current_reason.facts
    if not reason:
        return ()
    table = state.gamma.atom_table
    models: set[frozenset[int]] = set()
    for removed in reason:
        extra = tuple(a for a in reason if a != removed)
        result = enumerate_answer_sets(
            state.gamma, limit=state.sample_limit, extra_facts=extra
        )
        models.update(result.models)
    excluded = set(state.assembly.test.atoms)
    excluded.update(atom for atom, _ in state.answered)
    queries = []
    for atom in state.assembly.base:
        if atom in excluded:
            continue
        idx = table.index_of(atom)
        q_plus = sum(1 for m in models if idx in m)
        q_minus = len(models) - q_plus
        if q_plus == 0 or q_minus == 0:
            continue
        queries.append(Query(atom, q_plus, q_minus))
    queries.sort(key=lambda q: (q.score, table.index_of(q.atom)))
    return tuple(queries)


def _gamma_with_answers(
    assembly: GammaAssembly, answered: Sequence[tuple[Atom, bool]]
) -> GroundProgram:
    base = assembly.gamma
    extra = []
    for atom, value in answered:
        idx = base.atom_table.index_of(atom)
        if value:
            extra.append(GroundRule(head=(), positive_body=(), negative_body=(idx,)))
        else:
            extra.append(GroundRule(head=(), positive_body=(idx,), negative_body=()))
    return GroundProgram(
        base.rules + tuple(extra),
        base.atom_table,
        base.herbrand_base,
        base.warnings,
    )


def _evaluate(
    assembly: GammaAssembly,
    sample_limit: int | None,
    answered: tuple[tuple[Atom, bool], ...],
) -> SessionState:
    gamma = _gamma_with_answers(assembly, answered)
    state = SessionState(
        assembly=assembly,
        sample_limit=sample_limit,
        answered=answered,
        gamma=gamma,
        current_reason=Reason((), minimal=False),
        pending_queries=(),
    )
    state = replace(state, current_reason=minimize_reason(state))
    return replace(state, pending_queries=compute_queries(state))


def start_session(assembly: GammaAssembly, sample_limit: int | None = 10) -> SessionState:
    if check_coherence(assembly.gamma, assembly.p_a):
        raise TestCasePasses("test passed: program coherent with assertions")
    return _evaluate(assembly, sample_limit, ())


def apply_answer(state: SessionState, atom: Atom, value: bool) -> SessionState:
    if atom not in set(state.assembly.base):
        raise ValueError(f"unknown atom: {format_atom(atom)}")
    answered_atoms = {a for a, _ in state.answered}
    if atom in state.assembly.test.atoms or atom in answered_atoms:
        raise ValueError("atom already constrained")
    return _evaluate(
        state.assembly, state.sample_limit, state.answered + ((atom, value),)
    )


def undo(state: SessionState, to_step: int) -> SessionState:
    if not 0 <= to_step <= len(state.answered):
        raise IndexError("undo step out of range")
    return _evaluate(state.assembly, state.sample_limit, state.answered[:to_step])


def map_to_source(
    reason: Reason, instr: DebugInstrumentation, program: Program
) -> tuple[SourceFinding, ...]:
    by_rule: dict[int, list[Atom]] = {}
    unsupported: list[Atom] = []
    for atom in reason.facts:
        if atom in instr.rule_index:
            rule_id, _ = instr.rule_index[atom]
            by_rule.setdefault(rule_id, []).append(atom)
        elif atom in instr.support_index:
            unsupported.append(instr.support_index[atom])
    findings: list[SourceFinding] = []
    for rule_id in sorted(by_rule):
        rule = program.rule(rule_id)
        substitutions = []
        instances = []
        for atom in by_rule[rule_id]:
            _, subst = instr.rule_index[atom]
            substitutions.append(dict(subst))
            instances.append(format_rule(rule.substitute(subst)))
        findings.append(RuleFinding(rule_id, tuple(substitutions), tuple(instances)))
    for atom in unsupported:
        candidates = tuple(
            r.id
            for r in program.rules
            if any(h.predicate == atom.predicate for h in r.head)
        )
        findings.append(UnsupportedAtomFinding(atom, candidates))
    return tuple(findings)
