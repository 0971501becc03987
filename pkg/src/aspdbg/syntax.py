"""Core representation of disjunctive logic programs.

Terms are flat: variables, symbolic constants, and integer constants.
Rules keep their head atoms, body literals, and body comparisons in
source order, which the pretty printer and the grounder rely on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Mapping

VARIABLE_RE = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")
SYMBOL_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")

# Identifiers starting with an underscore are reserved for instrumentation
# and for desugared choice rules; user programs must not mention them.
RESERVED_MARKER = "_"

RELATIONS = ("=", "!=", "<", "<=", ">", ">=")


class TermKind(Enum):
    VARIABLE = "variable"
    SYMBOL = "symbol"
    INTEGER = "integer"


@dataclass(frozen=True)
class Term:
    """A variable, symbolic constant, or integer constant."""

    kind: TermKind
    name: str
    value: int | None = None

    @staticmethod
    def var(name: str) -> "Term":
        if not VARIABLE_RE.match(name):
            raise ValueError(f"invalid variable name: {name!r}")
        return Term(TermKind.VARIABLE, name)

    @staticmethod
    def sym(name: str) -> "Term":
        return Term(TermKind.SYMBOL, name)

    @staticmethod
    def num(value: int) -> "Term":
        return Term(TermKind.INTEGER, str(value), value)

    @property
    def is_ground(self) -> bool:
        return self.kind is not TermKind.VARIABLE

    def order_key(self) -> tuple[int, int, str]:
        # Integers come before symbolic constants; variables sort last so
        # mixed keys stay total.
        if self.kind is TermKind.INTEGER:
            return (0, self.value or 0, "")
        if self.kind is TermKind.SYMBOL:
            return (1, 0, self.name)
        return (2, 0, self.name)


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def is_ground(self) -> bool:
        return all(t.is_ground for t in self.args)

    def substitute(self, subst: Mapping[str, Term]) -> "Atom":
        if not self.args:
            return self
        return Atom(
            self.predicate,
            tuple(subst.get(t.name, t) if t.kind is TermKind.VARIABLE else t for t in self.args),
        )

    def variables(self) -> Iterator[str]:
        for t in self.args:
            if t.kind is TermKind.VARIABLE:
                yield t.name

    def order_key(self):
        return (self.predicate, tuple(t.order_key() for t in self.args))


# Ground atoms are atoms whose arguments are all constants; no separate type
# is needed, the alias just marks intent in signatures.
GroundAtom = Atom


@dataclass(frozen=True)
class Literal:
    atom: Atom
    negated: bool = False

    def substitute(self, subst: Mapping[str, Term]) -> "Literal":
        return Literal(self.atom.substitute(subst), self.negated)

    def variables(self) -> Iterator[str]:
        return self.atom.variables()


def complement(literal: Literal) -> Literal:
    return Literal(literal.atom, not literal.negated)


@dataclass(frozen=True)
class Comparison:
    left: Term
    relation: str
    right: Term

    def __post_init__(self) -> None:
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation: {self.relation!r}")

    def substitute(self, subst: Mapping[str, Term]) -> "Comparison":
        left = subst.get(self.left.name, self.left) if self.left.kind is TermKind.VARIABLE else self.left
        right = subst.get(self.right.name, self.right) if self.right.kind is TermKind.VARIABLE else self.right
        return Comparison(left, self.relation, right)

    def variables(self) -> Iterator[str]:
        for t in (self.left, self.right):
            if t.kind is TermKind.VARIABLE:
                yield t.name

    def holds(self) -> bool:
        """Evaluate a ground comparison; integers order before symbols."""
        if not (self.left.is_ground and self.right.is_ground):
            raise ValueError("comparison on non-ground terms")
        a, b = self.left.order_key(), self.right.order_key()
        if self.relation == "=":
            return a == b
        if self.relation == "!=":
            return a != b
        if self.relation == "<":
            return a < b
        if self.relation == "<=":
            return a <= b
        if self.relation == ">":
            return a > b
        return a >= b


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    column: int
    file: str | None = None


@dataclass(frozen=True)
class Rule:
    """One rule; a fact has a single head atom and an empty body."""

    id: int
    head: tuple[Atom, ...] = ()
    body_literals: tuple[Literal, ...] = ()
    body_comparisons: tuple[Comparison, ...] = ()
    is_choice: bool = False
    source_span: SourceSpan | None = field(default=None, compare=False)

    @property
    def is_fact(self) -> bool:
        return (
            len(self.head) == 1
            and not self.body_literals
            and not self.body_comparisons
            and not self.is_choice
        )

    @property
    def is_constraint(self) -> bool:
        return not self.head

    @property
    def positive_body(self) -> tuple[Literal, ...]:
        return tuple(l for l in self.body_literals if not l.negated)

    @property
    def negative_body(self) -> tuple[Literal, ...]:
        return tuple(l for l in self.body_literals if l.negated)

    @property
    def is_ground(self) -> bool:
        return next(self.variables(), None) is None

    def variables(self) -> Iterator[str]:
        """Variable names in first-occurrence order: head, literals, comparisons."""
        seen: set[str] = set()
        for atom in self.head:
            for v in atom.variables():
                if v not in seen:
                    seen.add(v)
                    yield v
        for lit in self.body_literals:
            for v in lit.variables():
                if v not in seen:
                    seen.add(v)
                    yield v
        for cmp in self.body_comparisons:
            for v in cmp.variables():
                if v not in seen:
                    seen.add(v)
                    yield v

    def substitute(self, subst: Mapping[str, Term]) -> "Rule":
        return replace(
            self,
            head=tuple(a.substitute(subst) for a in self.head),
            body_literals=tuple(l.substitute(subst) for l in self.body_literals),
            body_comparisons=tuple(c.substitute(subst) for c in self.body_comparisons),
        )

    def atoms(self) -> Iterator[Atom]:
        yield from self.head
        for lit in self.body_literals:
            yield lit.atom


@dataclass(frozen=True)
class SafetyViolation:
    variable: str


def check_safety(rule: Rule) -> SafetyViolation | None:
    """Every variable must occur in a positive body literal.

    Returns the first offending variable in source order, or None.
    """
    positive: set[str] = set()
    for lit in rule.positive_body:
        positive.update(lit.variables())
    for v in rule.variables():
        if v not in positive:
            return SafetyViolation(v)
    return None


class FreshAtoms:
    """Supply of `_f_<n>` atoms, unique within one program."""

    def __init__(self, start: int = 0) -> None:
        self._next = start

    @classmethod
    def for_program(cls, program: "Program") -> "FreshAtoms":
        start = 0
        for rule in program.rules:
            for atom in rule.atoms():
                m = re.match(r"_f_(\d+)\Z", atom.predicate)
                if m:
                    start = max(start, int(m.group(1)) + 1)
        return cls(start)

    def next_atom(self) -> Atom:
        atom = Atom(f"_f_{self._next}")
        self._next += 1
        return atom


def desugar_choice(atom: Atom, fresh: FreshAtoms, rule_id: int = 0) -> Rule:
    """Turn a choice `{a}` into the disjunctive rule `a | _f_<n>.`"""
    if not atom.is_ground:
        raise ValueError("choice over non-ground atom")
    return Rule(id=rule_id, head=(atom, fresh.next_atom()), is_choice=True)


def is_reserved_name(name: str) -> bool:
    return name.startswith(RESERVED_MARKER)


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...] = ()
    background_ids: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        ids = [r.id for r in self.rules]
        if ids != list(range(1, len(ids) + 1)):
            raise ValueError("rule ids must be dense and ordered from 1")
        if not self.background_ids <= set(ids):
            raise ValueError("background ids outside the program")

    def rule(self, rule_id: int) -> Rule:
        rule = self.rules[rule_id - 1]
        assert rule.id == rule_id
        return rule

    @property
    def facts(self) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if r.is_fact)

    def atoms(self) -> Iterator[Atom]:
        for rule in self.rules:
            yield from rule.atoms()

    def terms(self) -> Iterator[Term]:
        for rule in self.rules:
            for atom in rule.atoms():
                yield from atom.args
            for cmp in rule.body_comparisons:
                yield cmp.left
                yield cmp.right


def make_program(rules: Iterable[Rule], background_ids: Iterable[int] = ()) -> Program:
    """Renumber rules densely from 1, preserving order.

    `background_ids` refers to the incoming rules' current ids; it is
    translated to the new numbering.
    """
    rules = list(rules)
    background = set(background_ids)
    renumbered = []
    new_background = set()
    for i, rule in enumerate(rules, start=1):
        if rule.id in background:
            new_background.add(i)
        renumbered.append(replace(rule, id=i))
    return Program(tuple(renumbered), frozenset(new_background))
