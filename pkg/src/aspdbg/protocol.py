"""Newline-delimited session protocol between the engine and clients.

One JSON object per line.  Outbound messages carry a monotonically
increasing `seq`; inbound messages bring their own, which error replies
echo in `ref`.  Every inbound answer/undo is acknowledged by exactly one
diagnosis+queries pair; a supplementary `finding` message follows when
the session has nothing further to ask.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .diagnosis import (
    RuleFinding,
    SessionState,
    UnsupportedAtomFinding,
    apply_answer,
    start_session,
    undo,
)
from .instrument import assemble_gamma
from .parser import TestCase, parse_program
from .pretty import format_atom, format_rule, format_substitution
from .syntax import Atom, Program, Rule

KINDS = (
    "hello",
    "ground_report",
    "diagnosis",
    "queries",
    "answer",
    "undo",
    "stop",
    "finding",
    "error",
    "bye",
)


class ProtocolError(Exception):
    pass


@dataclass(frozen=True)
class SessionMessage:
    kind: str
    seq: int
    payload: dict[str, Any] = field(default_factory=dict)


def serialize(message: SessionMessage) -> str:
    body = {"kind": message.kind, "seq": message.seq}
    body.update(message.payload)
    return json.dumps(body, separators=(",", ":"))


def parse(line: str) -> SessionMessage:
    try:
        body = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed message: {exc}") from None
    if not isinstance(body, dict):
        raise ProtocolError("malformed message: not an object")
    kind = body.get("kind")
    if kind not in KINDS:
        raise ProtocolError(f"unknown message kind: {kind!r}")
    seq = body.get("seq")
    if not isinstance(seq, int) or seq < 0:
        raise ProtocolError("missing or invalid seq")
    payload = {k: v for k, v in body.items() if k not in ("kind", "seq")}
    return SessionMessage(kind, seq, payload)


def _salvage_seq(line: str) -> int | None:
    """Best-effort seq of a rejected inbound line, echoed as error ref."""
    try:
        body = json.loads(line)
    except json.JSONDecodeError:
        return None
    if isinstance(body, dict) and isinstance(body.get("seq"), int):
        return body["seq"]
    return None


def _parse_atom_text(text: str) -> Atom:
    try:
        program = parse_program(f"{text}.")
    except Exception:
        raise ProtocolError(f"not an atom: {text!r}") from None
    if len(program.rules) != 1 or not program.rules[0].is_fact:
        raise ProtocolError(f"not an atom: {text!r}")
    return program.rules[0].head[0]


def _span_payload(rule) -> dict[str, Any] | None:
    span = rule.source_span
    if span is None:
        return None
    return {"start": span.start, "end": span.end, "line": span.line, "column": span.column}


class SessionEngine:
    """Drives one debugging session and renders protocol batches.

    Construction performs the full assembly and the initial diagnosis;
    it raises TestCasePasses/UnknownAssertedAtom like the underlying
    pipeline does.
    """

    def __init__(
        self,
        program: Program | None = None,
        test: TestCase | None = None,
        program_text: str = "",
        test_text: str = "",
        background: frozenset[int] | None = None,
        sample_limit: int | None = 10,
        budget: int | None = None,
        assembly=None,
    ) -> None:
        if assembly is None:
            if program is None or test is None:
                raise ValueError("need either an assembly or a program and test")
            kwargs = {} if budget is None else {"budget": budget}
            assembly = assemble_gamma(program, test, background, **kwargs)
        self.assembly = assembly
        self.state: SessionState = start_session(self.assembly, sample_limit)
        self.program_text = program_text
        self.test_text = test_text
        self._seq = 0

    def _msg(self, kind: str, **payload: Any) -> SessionMessage:
        message = SessionMessage(kind, self._seq, payload)
        self._seq += 1
        return message

    # -- payload rendering -------------------------------------------------

    def _status(self, state: SessionState) -> str:
        if state.answers_inconsistent:
            return "answers_inconsistent"
        if not state.pending_queries or len(state.current_reason.facts) == 1:
            return "localized"
        return "open"

    def _findings_payload(self, state: SessionState) -> list[dict[str, Any]]:
        out: list[dict[str, Any]] = []
        for finding in state.findings:
            if isinstance(finding, RuleFinding):
                rule = state.assembly.program.rule(finding.rule_id)
                out.append(
                    {
                        "type": "rule",
                        "rule_id": finding.rule_id,
                        "span": _span_payload(rule),
                        "substitutions": [
                            format_substitution(s) for s in finding.substitutions
                        ],
                        "instances": list(finding.ground_instances),
                    }
                )
            else:
                out.append(
                    {
                        "type": "unsupported",
                        "atom": format_atom(finding.atom),
                        "candidate_rule_ids": list(finding.candidate_rule_ids),
                    }
                )
        return out

    def _diagnosis(self, state: SessionState) -> SessionMessage:
        return self._msg(
            "diagnosis",
            reason=[format_atom(a) for a in state.current_reason.facts],
            minimal=state.current_reason.minimal,
            status=self._status(state),
            findings=self._findings_payload(state),
            answers=[
                {"atom": format_atom(a), "value": v} for a, v in state.answered
            ],
        )

    def _queries(self, state: SessionState) -> SessionMessage:
        return self._msg(
            "queries",
            queries=[
                {
                    "atom": format_atom(q.atom),
                    "q_plus": q.q_plus,
                    "q_minus": q.q_minus,
                    "score": q.score,
                }
                for q in state.pending_queries
            ],
        )

    def _conclusion(self, state: SessionState) -> list[SessionMessage]:
        status = self._status(state)
        if status == "open":
            return []
        if status == "answers_inconsistent":
            if state.answered:
                message = (
                    "answers inconsistent with every candidate fix; "
                    "undo an answer to continue"
                )
            else:
                message = "assertions inconsistent with the background knowledge"
        else:
            parts = []
            rule_ids = [
                f.rule_id for f in state.findings if isinstance(f, RuleFinding)
            ]
            atoms = [
                format_atom(f.atom)
                for f in state.findings
                if isinstance(f, UnsupportedAtomFinding)
            ]
            if rule_ids:
                label = "rule" if len(rule_ids) == 1 else "rules"
                parts.append(f"{label} {', '.join(str(i) for i in rule_ids)}")
            if atoms:
                parts.append(f"unsupported: {', '.join(atoms)}")
            message = "fault localized: " + "; ".join(parts)
        return [
            self._msg(
                "finding",
                status=status,
                message=message,
                findings=self._findings_payload(state),
            )
        ]

    def _state_batch(self, state: SessionState) -> list[SessionMessage]:
        return [self._diagnosis(state), self._queries(state)] + self._conclusion(state)

    # -- session driving ---------------------------------------------------

    def start(self) -> list[SessionMessage]:
        program = self.assembly.program
        hello = self._msg(
            "hello",
            program=self.program_text,
            test=self.test_text,
            rules=[
                {
                    "id": r.id,
                    "text": self._rule_text(r),
                    "span": _span_payload(r),
                }
                for r in program.rules
            ],
            background=sorted(self.assembly.background),
        )
        gamma = self.assembly.gamma
        report = self._msg(
            "ground_report",
            rules=len(gamma.rules),
            atoms=len(gamma.atom_table),
            assumptions=len(self.assembly.p_a),
            warnings=[w.rule_id for w in gamma.warnings],
        )
        return [hello, report] + self._state_batch(self.state)

    def _rule_text(self, rule: Rule) -> str:
        span = rule.source_span
        if span is None:
            return format_rule(rule)
        return self.program_text[span.start:span.end]

    def handle_line(self, line: str) -> tuple[list[SessionMessage], bool]:
        try:
            message = parse(line)
        except ProtocolError as exc:
            return [self._msg("error", ref=_salvage_seq(line), message=str(exc))], False
        return self.handle(message)

    def handle(self, message: SessionMessage) -> tuple[list[SessionMessage], bool]:
        if message.kind == "stop":
            return [self._msg("bye")], True
        if message.kind == "answer":
            return self._handle_answer(message), False
        if message.kind == "undo":
            return self._handle_undo(message), False
        return (
            [
                self._msg(
                    "error",
                    ref=message.seq,
                    message=f"unexpected message kind: {message.kind}",
                )
            ],
            False,
        )

    def _handle_answer(self, message: SessionMessage) -> list[SessionMessage]:
        atom_text = message.payload.get("atom")
        value = message.payload.get("value")
        if not isinstance(atom_text, str) or not isinstance(value, bool):
            return [
                self._msg(
                    "error", ref=message.seq, message="answer needs atom and value"
                )
            ]
        try:
            atom = _parse_atom_text(atom_text)
            self.state = apply_answer(self.state, atom, value)
        except (ProtocolError, ValueError) as exc:
            return [self._msg("error", ref=message.seq, message=str(exc))]
        return self._state_batch(self.state)

    def _handle_undo(self, message: SessionMessage) -> list[SessionMessage]:
        to_step = message.payload.get("to_step")
        if not isinstance(to_step, int) or isinstance(to_step, bool):
            return [
                self._msg("error", ref=message.seq, message="undo needs to_step")
            ]
        try:
            self.state = undo(self.state, to_step)
        except IndexError as exc:
            return [self._msg("error", ref=message.seq, message=str(exc))]
        return self._state_batch(self.state)
