"""Parser for logic programs and declarative test cases.

Programs are written one rule per statement, terminated by `.`:

    node(X) :- edge(X,Y).
    col(X,blue) | col(X,red) :- node(X).
    :- col(X,C1), col(Y,C2), edge(X,Y), X != Y.
    {guess}.

Test cases assert ground atoms:

    assertTrue(col(1,blue)).
    assertFalse(col(1,red)).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from .syntax import (
    Atom,
    Comparison,
    FreshAtoms,
    Literal,
    Program,
    Rule,
    SourceSpan,
    Term,
    check_safety,
    desugar_choice,
    is_reserved_name,
)

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<comment>%[^\n]*)
    | (?P<int>\d+)
    | (?P<ident>[_a-z][A-Za-z0-9_]*)
    | (?P<var>[A-Z][A-Za-z0-9_]*)
    | (?P<op>:-|!=|<=|>=|=|<|>|\.|,|\||\{|\}|\(|\))
    """,
    re.VERBOSE,
)

_RELATION_TOKENS = {"=", "!=", "<", "<=", ">", ">="}


class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int, file: str | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.file = file

    def __str__(self) -> str:
        where = f"{self.file}:" if self.file else ""
        return f"{where}{self.line}:{self.column}: {self.message}"


@dataclass(frozen=True)
class _Token:
    type: str
    text: str
    offset: int
    line: int
    column: int


def _tokenize(text: str, file: str | None) -> list[_Token]:
    tokens: list[_Token] = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, file)
        kind = m.lastgroup or ""
        value = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, value, pos, line, pos - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", len(text), line, len(text) - line_start + 1))
    return tokens


@dataclass(frozen=True)
class TestCase:
    """Ground truth assertions; positive literals from assertTrue."""

    asserted: tuple[Literal, ...]
    source: str | None = None

    @property
    def atoms(self) -> tuple[Atom, ...]:
        return tuple(l.atom for l in self.asserted)

    @property
    def true_atoms(self) -> tuple[Atom, ...]:
        return tuple(l.atom for l in self.asserted if not l.negated)

    @property
    def false_atoms(self) -> tuple[Atom, ...]:
        return tuple(l.atom for l in self.asserted if l.negated)


class _Parser:
    def __init__(self, text: str, file: str | None, allow_reserved: bool) -> None:
        self.text = text
        self.file = file
        self.allow_reserved = allow_reserved
        self.tokens = _tokenize(text, file)
        self.pos = 0
        self.arities: dict[str, tuple[int, _Token]] = {}

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            self.fail(f"expected {text!r}, found {tok.text!r}" if tok.type != "eof" else f"expected {text!r}, found end of input", tok)
        return tok

    def fail(self, message: str, tok: _Token) -> None:
        raise ParseError(message, tok.line, tok.column, self.file)

    # -- shared pieces -----------------------------------------------------

    def check_name(self, tok: _Token) -> None:
        if is_reserved_name(tok.text) and not self.allow_reserved:
            self.fail(f"reserved name {tok.text!r}", tok)

    def parse_term(self) -> Term:
        tok = self.next()
        if tok.type == "int":
            return Term.num(int(tok.text))
        if tok.type == "var":
            return Term.var(tok.text)
        if tok.type == "ident":
            self.check_name(tok)
            return Term.sym(tok.text)
        self.fail(f"expected a term, found {tok.text!r}", tok)
        raise AssertionError

    def note_arity(self, predicate: str, arity: int, tok: _Token) -> None:
        known = self.arities.get(predicate)
        if known is None:
            self.arities[predicate] = (arity, tok)
        elif known[0] != arity:
            self.fail(
                f"arity clash for predicate {predicate!r}: {arity} here, {known[0]} at line {known[1].line}",
                tok,
            )

    def parse_atom(self) -> Atom:
        tok = self.next()
        if tok.type != "ident":
            self.fail(f"expected a predicate, found {tok.text!r}", tok)
        self.check_name(tok)
        args: list[Term] = []
        if self.peek().text == "(":
            self.next()
            args.append(self.parse_term())
            while self.peek().text == ",":
                self.next()
                args.append(self.parse_term())
            self.expect(")")
        self.note_arity(tok.text, len(args), tok)
        return Atom(tok.text, tuple(args))

    # -- program grammar ---------------------------------------------------

    def parse_body_element(self) -> Literal | Comparison:
        tok = self.peek()
        if tok.type == "ident" and tok.text == "not":
            self.next()
            return Literal(self.parse_atom(), negated=True)
        if tok.type in ("var", "int"):
            left = self.parse_term()
            rel = self.next()
            if rel.text not in _RELATION_TOKENS:
                self.fail(f"expected a comparison operator, found {rel.text!r}", rel)
            return Comparison(left, rel.text, self.parse_term())
        ident = self.next()
        if ident.type != "ident":
            self.fail(f"expected a body literal, found {ident.text!r}", ident)
        self.check_name(ident)
        nxt = self.peek().text
        if nxt in _RELATION_TOKENS:
            # `a < b`: a bare lowercase identifier before an operator is a
            # symbolic constant, not a 0-ary atom
            rel = self.next()
            return Comparison(Term.sym(ident.text), rel.text, self.parse_term())
        args: list[Term] = []
        if nxt == "(":
            self.next()
            args.append(self.parse_term())
            while self.peek().text == ",":
                self.next()
                args.append(self.parse_term())
            self.expect(")")
            if self.peek().text in _RELATION_TOKENS:
                self.fail("comparison over a compound atom", self.peek())
        self.note_arity(ident.text, len(args), ident)
        return Literal(Atom(ident.text, tuple(args)))

    def parse_statement(self, rule_id: int, fresh: FreshAtoms) -> Rule:
        start = self.peek()
        if start.text == "{":
            self.next()
            atom = self.parse_atom()
            self.expect("}")
            end = self.expect(".")
            try:
                rule = desugar_choice(atom, fresh, rule_id)
            except ValueError as exc:
                self.fail(str(exc), start)
                raise AssertionError from exc
            return self._with_span(rule, start, end)

        head: list[Atom] = []
        if self.peek().text != ":-":
            head.append(self.parse_atom())
            while self.peek().text == "|":
                self.next()
                head.append(self.parse_atom())
        literals: list[Literal] = []
        comparisons: list[Comparison] = []
        if self.peek().text == ":-":
            self.next()
            while True:
                element = self.parse_body_element()
                if isinstance(element, Literal):
                    literals.append(element)
                else:
                    comparisons.append(element)
                if self.peek().text != ",":
                    break
                self.next()
        end = self.expect(".")
        rule = Rule(
            id=rule_id,
            head=tuple(head),
            body_literals=tuple(literals),
            body_comparisons=tuple(comparisons),
        )
        violation = check_safety(rule)
        if violation is not None:
            self.fail(f"unsafe rule {rule_id}: variable {violation.variable} not bound by a positive body literal", start)
        return self._with_span(rule, start, end)

    def _with_span(self, rule: Rule, start: _Token, end: _Token) -> Rule:
        span = SourceSpan(start.offset, end.offset + 1, start.line, start.column, self.file)
        return Rule(
            id=rule.id,
            head=rule.head,
            body_literals=rule.body_literals,
            body_comparisons=rule.body_comparisons,
            is_choice=rule.is_choice,
            source_span=span,
        )

    def parse_program(self) -> Program:
        rules: list[Rule] = []
        fresh = FreshAtoms()
        while self.peek().type != "eof":
            rules.append(self.parse_statement(len(rules) + 1, fresh))
        return Program(tuple(rules))

    # -- test case grammar -------------------------------------------------

    def parse_test_case(self) -> TestCase:
        asserted: dict[Atom, tuple[bool, _Token]] = {}
        order: list[Atom] = []
        while self.peek().type != "eof":
            tok = self.next()
            if tok.type != "ident" or tok.text not in ("assertTrue", "assertFalse"):
                self.fail(f"expected assertTrue or assertFalse, found {tok.text!r}", tok)
            negated = tok.text == "assertFalse"
            self.expect("(")
            atom = self.parse_atom()
            self.expect(")")
            self.expect(".")
            if not atom.is_ground:
                self.fail("asserted atom must be ground", tok)
            known = asserted.get(atom)
            if known is None:
                asserted[atom] = (negated, tok)
                order.append(atom)
            elif known[0] != negated:
                self.fail(f"contradictory assertions for atom {atom.predicate}", tok)
        return TestCase(tuple(Literal(a, asserted[a][0]) for a in order), source=self.file)


def parse_program(text: str, file: str | None = None, *, allow_reserved: bool = False) -> Program:
    return _Parser(text, file, allow_reserved).parse_program()


def parse_test_case(text: str, file: str | None = None) -> TestCase:
    return _Parser(text, file, allow_reserved=False).parse_test_case()
