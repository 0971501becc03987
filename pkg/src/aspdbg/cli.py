"""Command line front end: ground, solve, instrument, and debug.

Exit codes: 0 on success, 1 on usage or input errors, 2 when the test
case already passes and there is nothing to debug.
"""

from __future__ import annotations

import argparse
import socketserver
import sys
from typing import Sequence

from .diagnosis import (
    RuleFinding,
    SessionState,
    TestCasePasses,
    UnsupportedAtomFinding,
    apply_answer,
    start_session,
)
from .grounder import (
    DEFAULT_BUDGET,
    GROUND_MODES,
    GroundingBudgetExceeded,
    ground,
)
from .instrument import UnknownAssertedAtom, assemble_gamma
from .parser import ParseError, parse_program, parse_test_case
from .pretty import (
    format_atom,
    format_ground_rule,
    format_program,
    format_rule,
    format_substitution,
)
from .protocol import SessionEngine, serialize
from .solver import enumerate_answer_sets


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is taken
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _parse_background(text: str | None, program) -> frozenset[int] | None:
    if text is None:
        return None
    if text.strip().lower() == "none":
        return frozenset()
    try:
        ids = frozenset(int(part) for part in text.split(","))
    except ValueError:
        raise ValueError(f"bad background list: {text!r}") from None
    known = {r.id for r in program.rules}
    unknown = ids - known
    if unknown:
        raise ValueError(f"unknown background rule id {min(unknown)}")
    return ids


def _cmd_ground(args: argparse.Namespace) -> int:
    program = parse_program(_read(args.file), file=args.file)
    g = ground(program, args.mode, budget=args.budget)
    for warning in g.warnings:
        print(f"% warning: rule {warning.rule_id} dropped", file=sys.stderr)
    for rule in g.rules:
        print(format_ground_rule(rule, g.atom_table))
    for index, atom in enumerate(g.atom_table):
        print(f"% atom {index} {format_atom(atom)}")
    return 0


def _cmd_solve(args: argparse.Namespace) -> int:
    program = parse_program(_read(args.file), file=args.file)
    g = ground(program, "no-simplify", budget=args.budget)
    result = enumerate_answer_sets(g, limit=args.models)
    table = g.atom_table
    for model in result.models:
        names = sorted(
            format_atom(table.atom(i))
            for i in model
            if not table.atom(i).predicate.startswith("_f_")
        )
        print(" ".join(names))
    coherent = bool(result.models) or result.model_limit_hit
    print("COHERENT" if coherent else "INCOHERENT")
    return 0


def _cmd_instrument(args: argparse.Namespace) -> int:
    program = parse_program(_read(args.file), file=args.file)
    test = parse_test_case(_read(args.test), file=args.test)
    background = _parse_background(args.background, program)
    assembly = assemble_gamma(program, test, background, budget=args.budget)
    print(format_program(assembly.combined))
    print("% P_A:")
    for atom in assembly.p_a:
        print(f"% {format_atom(atom)}.")
    return 0


def _print_state(state: SessionState) -> None:
    reason = state.current_reason
    if reason.facts:
        print("minimal reason: " + ", ".join(format_atom(a) for a in reason.facts))
    else:
        print("minimal reason: (empty)")
    program = state.assembly.program
    for finding in state.findings:
        if isinstance(finding, RuleFinding):
            rule = program.rule(finding.rule_id)
            where = f", line {rule.source_span.line}" if rule.source_span else ""
            print(f"rule {finding.rule_id}{where}: {format_rule(rule)}")
            for subst, instance in zip(
                finding.substitutions, finding.ground_instances
            ):
                if subst:
                    print(f"  substitution: {format_substitution(subst)}")
                print(f"  instance: {instance}")
        else:
            ids = ", ".join(str(i) for i in finding.candidate_rule_ids)
            print(
                f"unsupported atom {format_atom(finding.atom)};"
                f" candidate rules: {ids or '(none)'}"
            )


def _terminal_session(assembly, sample_limit: int) -> int:
    state = start_session(assembly, sample_limit)
    g = assembly.gamma
    print(f"grounded {len(g.rules)} rules over {len(g.atom_table)} atoms")
    while True:
        _print_state(state)
        if state.answers_inconsistent:
            if state.answered:
                print(
                    "answers inconsistent with every candidate fix;"
                    " restart to revisit them"
                )
            else:
                print("assertions inconsistent with the background knowledge")
            return 0
        if not state.pending_queries or len(state.current_reason.facts) == 1:
            print("fault localized; session complete")
            return 0
        answered = False
        for query in state.pending_queries:
            prompt = f"{format_atom(query.atom)}? [y/n/skip] "
            try:
                reply = input(prompt).strip().lower()
            except EOFError:
                print("session stopped")
                return 0
            if reply in ("y", "yes"):
                state = apply_answer(state, query.atom, True)
                answered = True
                break
            if reply in ("n", "no"):
                state = apply_answer(state, query.atom, False)
                answered = True
                break
            if reply in ("q", "quit", "stop"):
                print("session stopped")
                return 0
            # anything else skips to the next query
        if not answered:
            print("all queries skipped; session stopped")
            return 0


def _json_session(engine: SessionEngine) -> int:
    for message in engine.start():
        print(serialize(message), flush=True)
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        outbound, done = engine.handle_line(line)
        for message in outbound:
            print(serialize(message), flush=True)
        if done:
            return 0
    return 0


def _serve_session(args, program, test, program_text, test_text, background) -> int:
    assembly = assemble_gamma(program, test, background, budget=args.budget)
    start_session(assembly, args.max_models_per_query)  # raises TestCasePasses

    engine_kwargs = dict(
        program_text=program_text,
        test_text=test_text,
        sample_limit=args.max_models_per_query,
    )

    class Handler(socketserver.StreamRequestHandler):
        def handle(self) -> None:
            engine = SessionEngine(assembly=assembly, **engine_kwargs)
            try:
                for message in engine.start():
                    self.wfile.write(serialize(message).encode() + b"\n")
                self.wfile.flush()
                for raw in self.rfile:
                    line = raw.decode("utf-8", "replace").strip()
                    if not line:
                        continue
                    outbound, done = engine.handle_line(line)
                    for message in outbound:
                        self.wfile.write(serialize(message).encode() + b"\n")
                    self.wfile.flush()
                    if done:
                        break
            except (BrokenPipeError, ConnectionResetError):
                pass

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    with Server(("127.0.0.1", args.serve), Handler) as server:
        host, port = server.server_address
        print(f"serving on {host}:{port}", flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
    return 0


def _cmd_debug(args: argparse.Namespace) -> int:
    program_text = _read(args.file)
    test_text = _read(args.test)
    program = parse_program(program_text, file=args.file)
    test = parse_test_case(test_text, file=args.test)
    background = _parse_background(args.background, program)

    if args.serve is not None:
        return _serve_session(
            args, program, test, program_text, test_text, background
        )
    if args.json:
        engine = SessionEngine(
            program,
            test,
            program_text,
            test_text,
            background=background,
            sample_limit=args.max_models_per_query,
            budget=args.budget,
        )
        return _json_session(engine)
    assembly = assemble_gamma(program, test, background, budget=args.budget)
    return _terminal_session(assembly, args.max_models_per_query)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="aspdbg")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ground = sub.add_parser("ground", help="print the ground program")
    p_ground.add_argument("file")
    p_ground.add_argument("--mode", choices=GROUND_MODES, default="no-simplify")
    p_ground.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p_ground.set_defaults(func=_cmd_ground)

    p_solve = sub.add_parser("solve", help="enumerate answer sets")
    p_solve.add_argument("file")
    p_solve.add_argument("--models", type=int, default=None)
    p_solve.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p_solve.set_defaults(func=_cmd_solve)

    p_instr = sub.add_parser("instrument", help="print the debugging program")
    p_instr.add_argument("file")
    p_instr.add_argument("--test", required=True)
    p_instr.add_argument("--background", default=None)
    p_instr.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p_instr.set_defaults(func=_cmd_instrument)

    p_debug = sub.add_parser("debug", help="run an interactive session")
    p_debug.add_argument("file")
    p_debug.add_argument("--test", required=True)
    p_debug.add_argument("--background", default=None)
    p_debug.add_argument("--max-models-per-query", type=int, default=10)
    p_debug.add_argument("--json", action="store_true")
    p_debug.add_argument("--serve", type=int, default=None, metavar="PORT")
    p_debug.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p_debug.set_defaults(func=_cmd_debug)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TestCasePasses as exc:
        print(exc)
        return 2
    except ParseError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (
        OSError,
        GroundingBudgetExceeded,
        UnknownAssertedAtom,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
