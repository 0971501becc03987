"""Textual rendering of rules, programs, and ground programs.

The output of `format_rule` parses back to an equal rule, which the
round-trip tests rely on.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from .grounder import AtomTable, GroundRule
from .syntax import Atom, Comparison, Literal, Program, Rule, Term


def format_term(term: Term) -> str:
    return term.name


def format_atom(atom: Atom) -> str:
    if not atom.args:
        return atom.predicate
    return f"{atom.predicate}({','.join(format_term(t) for t in atom.args)})"


def format_literal(literal: Literal) -> str:
    text = format_atom(literal.atom)
    return f"not {text}" if literal.negated else text


def format_comparison(cmp: Comparison) -> str:
    return f"{format_term(cmp.left)} {cmp.relation} {format_term(cmp.right)}"


def format_body(rule: Rule) -> str:
    parts = [format_literal(l) for l in rule.body_literals]
    parts += [format_comparison(c) for c in rule.body_comparisons]
    return ", ".join(parts)


def format_rule(rule: Rule) -> str:
    if rule.is_choice:
        return "{" + format_atom(rule.head[0]) + "}."
    head = " | ".join(format_atom(a) for a in rule.head)
    body = format_body(rule)
    if not body:
        return f"{head}."
    if not head:
        return f":- {body}."
    return f"{head} :- {body}."


def format_program(program: Program) -> str:
    return "\n".join(format_rule(r) for r in program.rules)


def format_substitution(subst: Mapping[str, Term] | Iterable[tuple[str, Term]]) -> str:
    items = subst.items() if isinstance(subst, Mapping) else subst
    return ", ".join(f"{var}={format_term(term)}" for var, term in items)


def format_ground_rule(rule: GroundRule, table: AtomTable) -> str:
    head = tuple(table.atom(i) for i in rule.head)
    body = tuple(Literal(table.atom(i)) for i in rule.positive_body)
    body += tuple(Literal(table.atom(i), negated=True) for i in rule.negative_body)
    return format_rule(Rule(id=0, head=head, body_literals=body))
