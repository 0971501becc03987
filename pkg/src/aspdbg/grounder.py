"""Bottom-up instantiation with a no-simplification mode.

Variable domains come from a least fixpoint over predicate extents that
ignores negation and treats every head atom of a matched rule as
derivable.  `no-simplify` keeps every instance verbatim, which preserves
body occurrences of instrumentation atoms; `simplify` behaves like a
conventional grounder: it drops instances whose positive body can never
be derived, evaluates negative literals over underivable atoms, and
propagates facts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from .syntax import (
    Atom,
    FreshAtoms,
    Program,
    Rule,
    Term,
    desugar_choice,
    is_reserved_name,
    make_program,
)

GROUND_MODES = ("simplify", "no-simplify")

DEFAULT_BUDGET = 1_000_000


class GroundingBudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class DroppedRuleWarning:
    rule_id: int


class AtomTable:
    """Append-only bijection between ground atoms and dense indices."""

    def __init__(self) -> None:
        self._atoms: list[Atom] = []
        self._index: dict[Atom, int] = {}

    def add(self, atom: Atom) -> int:
        idx = self._index.get(atom)
        if idx is None:
            idx = len(self._atoms)
            self._atoms.append(atom)
            self._index[atom] = idx
        return idx

    def index_of(self, atom: Atom) -> int:
        return self._index[atom]

    def atom(self, index: int) -> Atom:
        return self._atoms[index]

    def __contains__(self, atom: Atom) -> bool:
        return atom in self._index

    def __len__(self) -> int:
        return len(self._atoms)

    def __iter__(self) -> Iterator[Atom]:
        return iter(self._atoms)


@dataclass(frozen=True)
class GroundRule:
    """One instance; body atoms are atom-table indices, sorted ascending."""

    head: tuple[int, ...]
    positive_body: tuple[int, ...]
    negative_body: tuple[int, ...]
    origin_rule_id: int | None = None
    substitution: tuple[tuple[str, Term], ...] = ()

    def substitution_map(self) -> dict[str, Term]:
        return dict(self.substitution)


@dataclass(eq=False)
class GroundProgram:
    rules: tuple[GroundRule, ...]
    atom_table: AtomTable
    herbrand_base: frozenset[Atom]
    warnings: tuple[DroppedRuleWarning, ...] = ()

    def resolve(self, rule: GroundRule):
        """Content view of a ground rule, comparable across atom tables."""
        t = self.atom_table
        return (
            rule.origin_rule_id,
            rule.substitution,
            frozenset(t.atom(i) for i in rule.head),
            frozenset(t.atom(i) for i in rule.positive_body),
            frozenset(t.atom(i) for i in rule.negative_body),
        )

    def resolved_rules(self) -> frozenset:
        return frozenset(self.resolve(r) for r in self.rules)


def herbrand_universe(program: Program) -> frozenset[Term]:
    return frozenset(t for t in program.terms() if t.is_ground)


# -- instantiation ---------------------------------------------------------


def _subst_key(rule: Rule, subst: Mapping[str, Term]):
    return tuple(subst[v].order_key() for v in rule.variables())


def _match_extents(rule: Rule, extents: Mapping[str, set[tuple[Term, ...]]]) -> Iterator[dict[str, Term]]:
    """Substitutions matching every positive literal against the extents."""
    literals = rule.positive_body

    def extend(i: int, subst: dict[str, Term]) -> Iterator[dict[str, Term]]:
        if i == len(literals):
            if all(c.substitute(subst).holds() for c in rule.body_comparisons):
                yield dict(subst)
            return
        atom = literals[i].atom
        for args in extents.get(atom.predicate, ()):
            bound = dict(subst)
            ok = True
            for term, value in zip(atom.args, args):
                if term.is_ground:
                    if term != value:
                        ok = False
                        break
                elif bound.get(term.name, value) != value:
                    ok = False
                    break
                else:
                    bound[term.name] = value
            if ok:
                yield from extend(i + 1, bound)

    yield from extend(0, {})


def _fixpoint_extents(program: Program, budget_left: list[int]) -> dict[str, set[tuple[Term, ...]]]:
    extents: dict[str, set[tuple[Term, ...]]] = {}
    changed = True
    while changed:
        changed = False
        for rule in program.rules:
            for subst in _match_extents(rule, extents):
                for atom in rule.head:
                    ground = atom.substitute(subst)
                    bucket = extents.setdefault(ground.predicate, set())
                    if ground.args not in bucket:
                        budget_left[0] -= 1
                        if budget_left[0] < 0:
                            raise GroundingBudgetExceeded("grounding budget exceeded")
                        bucket.add(ground.args)
                        changed = True
    return extents


@dataclass
class _Instance:
    rule: Rule
    subst: dict[str, Term]
    head: tuple[Atom, ...]
    positive: tuple[Atom, ...]
    negative: tuple[Atom, ...]


def _rule_instances(
    rule: Rule,
    extents: Mapping[str, set[tuple[Term, ...]]],
    budget_left: list[int],
) -> list[_Instance]:
    """All instances of one rule; positive literals over predicates with an
    empty extent are carried verbatim instead of joined."""
    binders = tuple(l for l in rule.positive_body if extents.get(l.atom.predicate))
    passengers = tuple(l for l in rule.positive_body if not extents.get(l.atom.predicate))
    binder_vars: set[str] = set()
    for lit in binders:
        binder_vars.update(lit.variables())
    for lit in passengers:
        if any(v not in binder_vars for v in lit.variables()):
            return []

    joined = Rule(
        id=rule.id,
        head=rule.head,
        body_literals=binders,
        body_comparisons=rule.body_comparisons,
    )
    out: list[_Instance] = []
    for subst in _match_extents(joined, extents):
        budget_left[0] -= 1
        if budget_left[0] < 0:
            raise GroundingBudgetExceeded("grounding budget exceeded")
        out.append(
            _Instance(
                rule=rule,
                subst=subst,
                head=tuple(a.substitute(subst) for a in rule.head),
                positive=tuple(l.atom.substitute(subst) for l in rule.positive_body),
                negative=tuple(l.atom.substitute(subst) for l in rule.negative_body),
            )
        )
    out.sort(key=lambda inst: _subst_key(rule, inst.subst))
    return out


# -- simplification --------------------------------------------------------


def _simplify(
    instances: list[_Instance],
    extents: Mapping[str, set[tuple[Term, ...]]],
) -> tuple[list[_Instance], tuple[DroppedRuleWarning, ...]]:
    def derivable(atom: Atom) -> bool:
        return atom.args in extents.get(atom.predicate, ())

    kept: list[_Instance] = []
    dropped_rules: set[int] = set()
    for inst in instances:
        if all(derivable(a) for a in inst.positive):
            inst.negative = tuple(a for a in inst.negative if derivable(a))
            kept.append(inst)
        else:
            dropped_rules.add(inst.rule.id)

    # Fact propagation.  An atom is certain when every instance deriving it
    # is a plain fact; certain atoms vanish from positive bodies, kill
    # rules that negate them, and subsume other rules deriving them.
    while True:
        head_instances: dict[Atom, list[_Instance]] = {}
        for inst in kept:
            for atom in inst.head:
                head_instances.setdefault(atom, []).append(inst)

        def is_fact(inst: _Instance) -> bool:
            return len(inst.head) == 1 and not inst.positive and not inst.negative

        certain = {
            atom
            for atom, insts in head_instances.items()
            if any(is_fact(i) for i in insts) and all(is_fact(i) for i in insts)
        }
        if not certain:
            break
        changed = False
        next_kept: list[_Instance] = []
        for inst in kept:
            if any(a in certain for a in inst.negative):
                changed = True
                continue
            if not is_fact(inst) and any(a in certain for a in inst.head):
                changed = True
                continue
            if any(a in certain for a in inst.positive):
                inst.positive = tuple(a for a in inst.positive if a not in certain)
                changed = True
            next_kept.append(inst)
        kept = next_kept
        if not changed:
            break

    warnings = tuple(DroppedRuleWarning(rid) for rid in sorted(dropped_rules))
    return kept, warnings


# -- entry points ----------------------------------------------------------


def ground(program: Program, mode: str = "no-simplify", *, budget: int = DEFAULT_BUDGET) -> GroundProgram:
    if mode not in GROUND_MODES:
        raise ValueError(f"unknown grounding mode: {mode!r}")
    budget_left = [budget]
    extents = _fixpoint_extents(program, budget_left)
    instances: list[_Instance] = []
    for rule in program.rules:
        instances.extend(_rule_instances(rule, extents, budget_left))

    warnings: tuple[DroppedRuleWarning, ...] = ()
    if mode == "simplify":
        instances, warnings = _simplify(instances, extents)

    table = AtomTable()
    rules: list[GroundRule] = []
    base: set[Atom] = set()
    for inst in instances:
        for atom in itertools.chain(inst.head, inst.positive, inst.negative):
            table.add(atom)
            if not is_reserved_name(atom.predicate):
                base.add(atom)
        rules.append(
            GroundRule(
                head=tuple(sorted(table.index_of(a) for a in inst.head)),
                positive_body=tuple(sorted(table.index_of(a) for a in inst.positive)),
                negative_body=tuple(sorted(table.index_of(a) for a in inst.negative)),
                origin_rule_id=inst.rule.id,
                substitution=tuple(sorted(inst.subst.items())),
            )
        )
    return GroundProgram(tuple(rules), table, frozenset(base), warnings)


def anti_simplification_closure(g: GroundProgram, program: Program) -> Program:
    """Add one choice rule per atom-table atom so that a simplifying
    grounder cannot drop or collapse any rule of `program`."""
    fresh = FreshAtoms.for_program(program)
    next_id = len(program.rules)
    choices: list[Rule] = []
    for atom in g.atom_table:
        if atom.predicate.startswith("_f_"):
            continue
        next_id += 1
        choices.append(desugar_choice(atom, fresh, next_id))
    return make_program(
        tuple(program.rules) + tuple(choices),
        program.background_ids,
    )
