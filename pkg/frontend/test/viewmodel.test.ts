import { expect, test, vi } from "vitest";

import {
  DiagnosisMessage,
  HelloMessage,
  ProtocolError,
  QueriesMessage,
  isClientMessage,
  isEngineMessage,
  parseEngineLine,
  parseLine,
  serializeClientMessage,
} from "../src/protocol.js";
import { SessionEvent, ViewModel } from "../src/viewmodel.js";

const COLORING_HELLO: HelloMessage = {
  kind: "hello",
  seq: 0,
  program:
    "node(X) :- edge(X,Y).\n" +
    "node(X) :- edge(Y,X).\n" +
    "col(X,blue) | col(X,red) | col(X,green) :- node(X).\n" +
    ":- col(X,C1), col(Y,C2), edge(X,Y), X != Y, C1 != C2.\n" +
    "edge(1,2).\n" +
    "edge(2,3).\n",
  test: "assertTrue(col(1,blue)).\n",
  rules: [
    { id: 1, text: "node(X) :- edge(X,Y).", span: { start: 0, end: 21, line: 1, column: 1 } },
    { id: 2, text: "node(X) :- edge(Y,X).", span: { start: 22, end: 43, line: 2, column: 1 } },
    {
      id: 3,
      text: "col(X,blue) | col(X,red) | col(X,green) :- node(X).",
      span: { start: 44, end: 96, line: 3, column: 1 },
    },
    {
      id: 4,
      text: ":- col(X,C1), col(Y,C2), edge(X,Y), X != Y, C1 != C2.",
      span: { start: 97, end: 151, line: 4, column: 1 },
    },
    { id: 5, text: "edge(1,2).", span: { start: 152, end: 162, line: 5, column: 1 } },
    { id: 6, text: "edge(2,3).", span: { start: 163, end: 173, line: 6, column: 1 } },
  ],
  background: [5, 6],
};

const CONSTRAINT_SUBSTITUTION = "X=1, Y=2, C1=blue, C2=red";
const CONSTRAINT_INSTANCE = ":- col(1,blue), col(2,red), edge(1,2), 1 != 2, blue != red.";

function diagnosisWith(findings: DiagnosisMessage["findings"]): DiagnosisMessage {
  return {
    kind: "diagnosis",
    seq: 2,
    reason: ["_debug4(1,2,blue,red)"],
    minimal: true,
    status: "localized",
    findings,
    answers: [],
  };
}

function freshViewModel(): ViewModel {
  const vm = new ViewModel();
  vm.apply({ dir: "recv", message: COLORING_HELLO });
  return vm;
}

test("parses engine lines and rejects junk", () => {
  const hello = parseLine('{"kind":"hello","seq":0,"program":"","test":"","rules":[],"background":[]}');
  expect(hello.kind).toBe("hello");
  expect(hello.seq).toBe(0);
  expect(isEngineMessage(hello)).toBe(true);
  expect(isClientMessage(hello)).toBe(false);
  const answer = parseLine('{"kind":"answer","seq":3,"atom":"b","value":true}');
  expect(isClientMessage(answer)).toBe(true);
  expect(isEngineMessage(answer)).toBe(false);

  expect(() => parseLine("not json")).toThrow(ProtocolError);
  expect(() => parseLine("not json")).toThrow(/malformed message/);
  expect(() => parseLine("[1]")).toThrow(/not an object/);
  expect(() => parseLine('{"kind":"nope","seq":0}')).toThrow(/unknown message kind/);
  expect(() => parseLine('{"kind":"hello"}')).toThrow(/missing or invalid seq/);
  expect(() => parseLine('{"kind":"hello","seq":-1}')).toThrow(/missing or invalid seq/);
  expect(() => parseLine('{"kind":"hello","seq":1.5}')).toThrow(/missing or invalid seq/);
  expect(() => parseEngineLine('{"kind":"answer","seq":0,"atom":"b","value":true}')).toThrow(
    /unexpected client message kind: answer/
  );
});

test("serializes client messages in wire order", () => {
  expect(serializeClientMessage({ kind: "answer", seq: 0, atom: "b", value: true })).toBe(
    '{"kind":"answer","seq":0,"atom":"b","value":true}'
  );
  expect(serializeClientMessage({ kind: "undo", seq: 2, to_step: 0 })).toBe(
    '{"kind":"undo","seq":2,"to_step":0}'
  );
  expect(serializeClientMessage({ kind: "stop", seq: 3 })).toBe('{"kind":"stop","seq":3}');
});

test("rule findings highlight the rule span with verbatim popups", () => {
  const vm = freshViewModel();
  vm.apply({
    dir: "recv",
    message: diagnosisWith([
      {
        type: "rule",
        rule_id: 4,
        span: { start: 97, end: 151, line: 4, column: 1 },
        substitutions: [CONSTRAINT_SUBSTITUTION],
        instances: [CONSTRAINT_INSTANCE],
      },
    ]),
  });
  const editor = vm.render_findings();
  expect(editor.warnings).toEqual([]);
  expect(editor.highlights).toHaveLength(1);
  const highlight = editor.highlights[0]!;
  expect(highlight.rule_id).toBe(4);
  expect(highlight.kind).toBe("rule");
  expect(highlight.text).toBe(":- col(X,C1), col(Y,C2), edge(X,Y), X != Y, C1 != C2.");
  expect(highlight.span).toEqual({ start: 97, end: 151, line: 4, column: 1 });
  expect(highlight.popups).toEqual([
    { substitution: CONSTRAINT_SUBSTITUTION, instance: CONSTRAINT_INSTANCE },
  ]);
  expect(highlight.unsupported_atoms).toEqual([]);
});

test("empty findings render no highlights", () => {
  const vm = freshViewModel();
  vm.apply({ dir: "recv", message: diagnosisWith([]) });
  expect(vm.render_findings()).toEqual({ highlights: [], warnings: [] });
  expect(vm.highlightedRuleIds()).toEqual([]);
});

test("two substitutions on one rule aggregate into a single highlight", () => {
  const vm = freshViewModel();
  vm.apply({
    dir: "recv",
    message: diagnosisWith([
      {
        type: "rule",
        rule_id: 4,
        span: { start: 97, end: 151, line: 4, column: 1 },
        substitutions: ["X=1, Y=2, C1=blue, C2=red", "X=2, Y=3, C1=red, C2=blue"],
        instances: [
          ":- col(1,blue), col(2,red), edge(1,2), 1 != 2, blue != red.",
          ":- col(2,red), col(3,blue), edge(2,3), 2 != 3, red != blue.",
        ],
      },
    ]),
  });
  const editor = vm.render_findings();
  expect(editor.highlights).toHaveLength(1);
  expect(editor.highlights[0]!.popups).toEqual([
    {
      substitution: "X=1, Y=2, C1=blue, C2=red",
      instance: ":- col(1,blue), col(2,red), edge(1,2), 1 != 2, blue != red.",
    },
    {
      substitution: "X=2, Y=3, C1=red, C2=blue",
      instance: ":- col(2,red), col(3,blue), edge(2,3), 2 != 3, red != blue.",
    },
  ]);
});

test("unsupported findings highlight candidate head rules", () => {
  const vm = freshViewModel();
  vm.apply({
    dir: "recv",
    message: diagnosisWith([
      { type: "unsupported", atom: "node(1)", candidate_rule_ids: [1, 2] },
    ]),
  });
  const editor = vm.render_findings();
  expect(editor.highlights.map((h) => h.rule_id)).toEqual([1, 2]);
  for (const highlight of editor.highlights) {
    expect(highlight.kind).toBe("candidate");
    expect(highlight.popups).toEqual([]);
    expect(highlight.unsupported_atoms).toEqual(["node(1)"]);
  }
  expect(editor.highlights[0]!.text).toBe("node(X) :- edge(X,Y).");
});

test("a rule named by a finding and a candidate renders once", () => {
  const vm = freshViewModel();
  vm.apply({
    dir: "recv",
    message: diagnosisWith([
      {
        type: "rule",
        rule_id: 1,
        span: { start: 0, end: 21, line: 1, column: 1 },
        substitutions: ["X=1, Y=2"],
        instances: ["node(1) :- edge(1,2)."],
      },
      { type: "unsupported", atom: "node(1)", candidate_rule_ids: [1] },
    ]),
  });
  const editor = vm.render_findings();
  expect(editor.highlights).toHaveLength(1);
  const highlight = editor.highlights[0]!;
  expect(highlight.kind).toBe("rule");
  expect(highlight.popups).toEqual([
    { substitution: "X=1, Y=2", instance: "node(1) :- edge(1,2)." },
  ]);
  expect(highlight.unsupported_atoms).toEqual(["node(1)"]);
});

test("unknown rule ids warn and the rest still render", () => {
  const spy = vi.spyOn(console, "error").mockImplementation(() => {});
  try {
    const vm = freshViewModel();
    vm.apply({
      dir: "recv",
      message: diagnosisWith([
        {
          type: "rule",
          rule_id: 99,
          span: null,
          substitutions: [""],
          instances: [":- nothing."],
        },
        { type: "unsupported", atom: "node(1)", candidate_rule_ids: [1, 77] },
      ]),
    });
    const editor = vm.render_findings();
    expect(editor.warnings).toEqual(["unknown rule id: 99", "unknown rule id: 77"]);
    expect(editor.highlights.map((h) => h.rule_id)).toEqual([1]);
    expect(vm.toasts).toEqual(["unknown rule id: 99", "unknown rule id: 77"]);
    expect(spy).toHaveBeenCalledTimes(2);
  } finally {
    spy.mockRestore();
  }
});

test("answer_queries batches selections in click order", () => {
  const vm = freshViewModel();
  const messages = vm.answer_queries([
    { atom: "col(2,red)", value: false },
    { atom: "col(1,blue)", value: true },
  ]);
  expect(messages.map((m) => [m.seq, m.atom, m.value])).toEqual([
    [0, "col(2,red)", false],
    [1, "col(1,blue)", true],
  ]);
  expect(messages.every((m) => m.kind === "answer")).toBe(true);
  const undoMessage = vm.undo_to(0);
  expect(undoMessage).toEqual({ kind: "undo", seq: 2, to_step: 0 });
  const stopMessage = vm.stop();
  expect(stopMessage).toEqual({ kind: "stop", seq: 3 });
  expect(vm.events.filter((e) => e.dir === "send")).toHaveLength(4);
  expect(vm.answer_queries([])).toEqual([]);
});

test("answered and in-flight atoms are disabled in the query panel", () => {
  const vm = freshViewModel();
  const diagnosis: DiagnosisMessage = {
    kind: "diagnosis",
    seq: 2,
    reason: ["_support_col(1,blue)"],
    minimal: true,
    status: "open",
    findings: [],
    answers: [{ atom: "col(3,blue)", value: true }],
  };
  const queries: QueriesMessage = {
    kind: "queries",
    seq: 3,
    queries: [
      { atom: "col(3,blue)", q_plus: 4, q_minus: 4, score: 0 },
      { atom: "col(2,red)", q_plus: 6, q_minus: 2, score: 4 },
    ],
  };
  vm.apply({ dir: "recv", message: diagnosis });
  vm.apply({ dir: "recv", message: queries });
  expect(vm.render_queries().map((q) => [q.atom, q.disabled])).toEqual([
    ["col(3,blue)", true],
    ["col(2,red)", false],
  ]);
  expect(vm.history()).toEqual([{ atom: "col(3,blue)", value: true }]);

  vm.answer_queries([{ atom: "col(2,red)", value: false }]);
  expect(vm.render_queries().map((q) => [q.atom, q.disabled])).toEqual([
    ["col(3,blue)", true],
    ["col(2,red)", true],
  ]);

  const acknowledged: DiagnosisMessage = {
    ...diagnosis,
    seq: 4,
    answers: [
      { atom: "col(3,blue)", value: true },
      { atom: "col(2,red)", value: false },
    ],
  };
  vm.apply({ dir: "recv", message: acknowledged });
  vm.apply({ dir: "recv", message: { ...queries, seq: 5 } });
  expect(vm.render_queries().map((q) => [q.atom, q.disabled])).toEqual([
    ["col(3,blue)", true],
    ["col(2,red)", true],
  ]);
  expect(vm.history()).toHaveLength(2);
});

test("undo truncates the history when the acknowledgement arrives", () => {
  const vm = freshViewModel();
  vm.apply({
    dir: "recv",
    message: {
      kind: "diagnosis",
      seq: 2,
      reason: [],
      minimal: true,
      status: "open",
      findings: [],
      answers: [
        { atom: "col(3,blue)", value: true },
        { atom: "col(2,red)", value: false },
      ],
    },
  });
  expect(vm.history()).toHaveLength(2);
  const message = vm.undo_to(1);
  expect(message.to_step).toBe(1);
  expect(vm.history()).toHaveLength(2);
  vm.apply({
    dir: "recv",
    message: {
      kind: "diagnosis",
      seq: 6,
      reason: [],
      minimal: true,
      status: "open",
      findings: [],
      answers: [{ atom: "col(3,blue)", value: true }],
    },
  });
  expect(vm.history()).toEqual([{ atom: "col(3,blue)", value: true }]);
});

test("replaying the event log reproduces the view at every prefix", () => {
  const vm = freshViewModel();
  vm.apply({
    dir: "recv",
    message: {
      kind: "ground_report",
      seq: 1,
      rules: 71,
      atoms: 33,
      assumptions: 33,
      warnings: [],
    },
  });
  vm.apply({
    dir: "recv",
    message: diagnosisWith([
      {
        type: "rule",
        rule_id: 4,
        span: { start: 97, end: 151, line: 4, column: 1 },
        substitutions: [CONSTRAINT_SUBSTITUTION],
        instances: [CONSTRAINT_INSTANCE],
      },
    ]),
  });
  vm.apply({ dir: "recv", message: { kind: "queries", seq: 3, queries: [] } });
  vm.answer_queries([{ atom: "col(2,red)", value: true }]);
  vm.apply({
    dir: "recv",
    message: { kind: "error", seq: 4, ref: 0, message: "atom already constrained" },
  });
  vm.stop();
  vm.apply({ dir: "recv", message: { kind: "bye", seq: 5 } });

  const events: SessionEvent[] = [...vm.events];
  const replayed = ViewModel.replay(events);
  expect(replayed.snapshot()).toEqual(vm.snapshot());
  for (let k = 0; k <= events.length; k += 1) {
    const prefix = ViewModel.replay(events.slice(0, k));
    const resumed = ViewModel.replay(prefix.events);
    expect(resumed.snapshot()).toEqual(prefix.snapshot());
  }
  expect(replayed.done).toBe(true);
  expect(replayed.errors).toEqual([{ ref: 0, message: "atom already constrained" }]);
});
