// Event-sourced view model for a debugging session.
//
// The rendered state is a pure function of the message log: every inbound
// engine message and every outbound client message is an event, and
// replaying a recorded log reproduces the view exactly.  No user action
// mutates diagnosis data locally; answers and undo round-trip through the
// protocol and take effect when the next state batch arrives.

import {
  AnswerEntry,
  AnswerMessage,
  ClientMessage,
  DiagnosisMessage,
  EngineMessage,
  ErrorMessage,
  FindingPayload,
  GroundReportMessage,
  QueryEntry,
  RuleEntry,
  SessionStatus,
  Span,
  StopMessage,
  UndoMessage,
} from "./protocol.js";

export type SessionEvent =
  | { dir: "recv"; message: EngineMessage }
  | { dir: "send"; message: ClientMessage };

export interface InstancePopup {
  substitution: string;
  instance: string;
}

export interface Highlight {
  rule_id: number;
  span: Span | null;
  text: string;
  kind: "rule" | "candidate";
  popups: InstancePopup[];
  unsupported_atoms: string[];
}

export interface EditorState {
  highlights: Highlight[];
  warnings: string[];
}

export interface QueryView extends QueryEntry {
  disabled: boolean;
}

export class ViewModel {
  programText = "";
  testText = "";
  rules: RuleEntry[] = [];
  background: number[] = [];
  groundReport: GroundReportMessage | null = null;
  diagnosis: DiagnosisMessage | null = null;
  queries: QueryEntry[] = [];
  conclusion: string | null = null;
  errors: { ref: number | null; message: string }[] = [];
  toasts: string[] = [];
  done = false;
  readonly events: SessionEvent[] = [];

  private outSeq = 0;
  private pending = new Set<string>();

  static replay(events: Iterable<SessionEvent>): ViewModel {
    const vm = new ViewModel();
    for (const event of events) {
      vm.apply(event);
    }
    return vm;
  }

  apply(event: SessionEvent): void {
    this.events.push(event);
    if (event.dir === "recv") {
      this.applyEngine(event.message);
    } else {
      this.applyClient(event.message);
    }
  }

  private applyEngine(message: EngineMessage): void {
    switch (message.kind) {
      case "hello":
        this.programText = message.program;
        this.testText = message.test;
        this.rules = message.rules;
        this.background = message.background;
        break;
      case "ground_report":
        this.groundReport = message;
        break;
      case "diagnosis":
        // A diagnosis begins a new state batch: stale queries, conclusion,
        // and in-flight answers are cleared before the batch repopulates.
        this.diagnosis = message;
        this.queries = [];
        this.conclusion = null;
        this.pending.clear();
        for (const warning of findingWarnings(message.findings, this.rules)) {
          this.toast(warning);
        }
        break;
      case "queries":
        this.queries = message.queries;
        break;
      case "finding":
        this.conclusion = message.message;
        break;
      case "error":
        this.errors.push({ ref: message.ref, message: message.message });
        break;
      case "bye":
        this.done = true;
        break;
    }
  }

  private applyClient(message: ClientMessage): void {
    this.outSeq = Math.max(this.outSeq, message.seq + 1);
    if (message.kind === "answer") {
      this.pending.add(message.atom);
    }
  }

  private toast(text: string): void {
    this.toasts.push(text);
    console.error(text);
  }

  // -- rendering ---------------------------------------------------------

  status(): SessionStatus | "connecting" {
    return this.diagnosis === null ? "connecting" : this.diagnosis.status;
  }

  history(): AnswerEntry[] {
    return this.diagnosis === null ? [] : this.diagnosis.answers;
  }

  /**
   * Turn a findings payload into highlighted editor state.  Rule findings
   * highlight that rule's span, with one popup per substitution carrying
   * the substitution and ground instance text verbatim.  Unsupported-atom
   * findings highlight every candidate head rule.  Findings that name an
   * unknown rule id are reported as warnings; the rest still render.
   * Defaults to the latest diagnosis.
   */
  render_findings(payload?: { findings: FindingPayload[] }): EditorState {
    const findings = payload?.findings ?? this.diagnosis?.findings ?? [];
    const byRule = new Map<number, Highlight>();
    const warnings: string[] = [];
    const lookup = new Map(this.rules.map((rule) => [rule.id, rule]));
    const ensure = (rule: RuleEntry): Highlight => {
      let highlight = byRule.get(rule.id);
      if (highlight === undefined) {
        highlight = {
          rule_id: rule.id,
          span: rule.span,
          text: rule.text,
          kind: "candidate",
          popups: [],
          unsupported_atoms: [],
        };
        byRule.set(rule.id, highlight);
      }
      return highlight;
    };
    for (const finding of findings) {
      if (finding.type === "rule") {
        const rule = lookup.get(finding.rule_id);
        if (rule === undefined) {
          warnings.push(`unknown rule id: ${finding.rule_id}`);
          continue;
        }
        const highlight = ensure(rule);
        highlight.kind = "rule";
        finding.substitutions.forEach((substitution, i) => {
          highlight.popups.push({
            substitution,
            instance: finding.instances[i] ?? "",
          });
        });
      } else {
        for (const candidate of finding.candidate_rule_ids) {
          const rule = lookup.get(candidate);
          if (rule === undefined) {
            warnings.push(`unknown rule id: ${candidate}`);
            continue;
          }
          ensure(rule).unsupported_atoms.push(finding.atom);
        }
      }
    }
    return { highlights: [...byRule.values()], warnings };
  }

  highlightedRuleIds(): number[] {
    return this.render_findings().highlights.map((h) => h.rule_id);
  }

  /** Query panel: ranked queries with answered or in-flight atoms disabled. */
  render_queries(): QueryView[] {
    const answered = new Set(this.history().map((entry) => entry.atom));
    return this.queries.map((query) => ({
      ...query,
      disabled: answered.has(query.atom) || this.pending.has(query.atom),
    }));
  }

  // -- user actions (build, record, and return outbound messages) -------

  /**
   * Batch the user's accept/reject selections into answer messages, one
   * per selection in click order.  An empty selection sends nothing
   * (skipping is client-side only).
   */
  answer_queries(selections: AnswerEntry[]): AnswerMessage[] {
    return selections.map((selection) => {
      const message: AnswerMessage = {
        kind: "answer",
        seq: this.outSeq,
        atom: selection.atom,
        value: selection.value,
      };
      this.apply({ dir: "send", message });
      return message;
    });
  }

  /** Unroll the answer history to `step` answers (0 = none). */
  undo_to(step: number): UndoMessage {
    const message: UndoMessage = { kind: "undo", seq: this.outSeq, to_step: step };
    this.apply({ dir: "send", message });
    return message;
  }

  stop(): StopMessage {
    const message: StopMessage = { kind: "stop", seq: this.outSeq };
    this.apply({ dir: "send", message });
    return message;
  }

  // -- replay support ----------------------------------------------------

  /** Full rendered state as plain data, for equality checks in replays. */
  snapshot(): unknown {
    return structuredClone({
      program: this.programText,
      test: this.testText,
      rules: this.rules,
      background: this.background,
      ground:
        this.groundReport === null
          ? null
          : {
              rules: this.groundReport.rules,
              atoms: this.groundReport.atoms,
              assumptions: this.groundReport.assumptions,
              warnings: this.groundReport.warnings,
            },
      status: this.status(),
      reason: this.diagnosis === null ? null : this.diagnosis.reason,
      minimal: this.diagnosis === null ? null : this.diagnosis.minimal,
      editor: this.render_findings(),
      queries: this.render_queries(),
      history: this.history(),
      conclusion: this.conclusion,
      errors: this.errors,
      toasts: this.toasts,
      done: this.done,
    });
  }
}

function findingWarnings(findings: FindingPayload[], rules: RuleEntry[]): string[] {
  const known = new Set(rules.map((rule) => rule.id));
  const out: string[] = [];
  for (const finding of findings) {
    if (finding.type === "rule") {
      if (!known.has(finding.rule_id)) {
        out.push(`unknown rule id: ${finding.rule_id}`);
      }
    } else {
      for (const candidate of finding.candidate_rule_ids) {
        if (!known.has(candidate)) {
          out.push(`unknown rule id: ${candidate}`);
        }
      }
    }
  }
  return out;
}
