// Terminal companion for a running `aspdbg debug --serve PORT` engine.
//
// Usage: node dist/main.js HOST:PORT
//
// Shows the program with faulty rules highlighted in red (hover payloads
// printed inline), the ranked query panel, and the answer history.
// Commands: `y ATOM` / `n ATOM` answer queries (several per line, applied
// in order), `undo K` unrolls the history to K answers, `stop` ends the
// session, an empty line re-renders.

import * as readline from "node:readline";

import { SessionClient } from "./client.js";
import { AnswerEntry } from "./protocol.js";
import { Highlight, ViewModel } from "./viewmodel.js";

const RED = "\x1b[31m";
const DIM = "\x1b[2m";
const RESET = "\x1b[0m";

function render(vm: ViewModel): void {
  const editor = vm.render_findings();
  const byId = new Map(editor.highlights.map((h) => [h.rule_id, h]));
  console.log("");
  for (const rule of vm.rules) {
    const highlight = byId.get(rule.id);
    const text = highlight ? `${RED}${rule.text}${RESET}` : rule.text;
    console.log(`${String(rule.id).padStart(3)}  ${text}`);
    if (highlight) {
      for (const line of popupLines(highlight)) {
        console.log(`     ${DIM}${line}${RESET}`);
      }
    }
  }
  for (const warning of editor.warnings) {
    console.log(`! ${warning}`);
  }
  const ground = vm.groundReport;
  if (ground !== null) {
    console.log(
      `${DIM}grounded ${ground.rules} rules over ${ground.atoms} atoms, ` +
        `${ground.assumptions} assumptions${RESET}`
    );
  }
  const diagnosis = vm.diagnosis;
  if (diagnosis !== null) {
    console.log(`reason: ${diagnosis.reason.join(", ") || "(empty)"}`);
  }
  const history = vm.history();
  if (history.length > 0) {
    const entries = history.map(
      (entry, i) => `${i + 1}. ${entry.atom}=${entry.value}`
    );
    console.log(`history: ${entries.join("  ")} (undo K to unroll)`);
  }
  const queries = vm.render_queries();
  if (queries.length > 0) {
    console.log("queries:");
    for (const query of queries) {
      const state = query.disabled ? " (answered)" : "";
      console.log(
        `  ${query.atom}? score ${query.score} ` +
          `(Q+ ${query.q_plus}, Q- ${query.q_minus})${state}`
      );
    }
  }
  if (vm.conclusion !== null) {
    console.log(vm.conclusion);
  } else {
    console.log(`status: ${vm.status()}`);
  }
}

function popupLines(highlight: Highlight): string[] {
  const lines: string[] = [];
  for (const popup of highlight.popups) {
    lines.push(
      popup.substitution === ""
        ? popup.instance
        : `${popup.substitution}  ${popup.instance}`
    );
  }
  if (highlight.unsupported_atoms.length > 0) {
    lines.push(`no support for: ${highlight.unsupported_atoms.join(", ")}`);
  }
  return lines;
}

function parseCommand(line: string): AnswerEntry[] | { undo: number } | "stop" | null {
  const words = line.trim().split(/\s+/).filter((w) => w.length > 0);
  if (words.length === 0) {
    return null;
  }
  if (words[0] === "stop" || words[0] === "quit") {
    return "stop";
  }
  if (words[0] === "undo" && words.length === 2) {
    const step = Number(words[1]);
    if (Number.isInteger(step) && step >= 0) {
      return { undo: step };
    }
    return null;
  }
  const selections: AnswerEntry[] = [];
  for (let i = 0; i + 1 < words.length; i += 2) {
    const value = words[i] === "y" ? true : words[i] === "n" ? false : null;
    const atom = words[i + 1];
    if (value === null || atom === undefined) {
      return null;
    }
    selections.push({ atom, value });
  }
  return selections.length > 0 ? selections : null;
}

async function run(): Promise<void> {
  const target = process.argv[2] ?? "";
  const match = /^(.*):(\d+)$/.exec(target);
  if (match === null) {
    console.error("usage: node dist/main.js HOST:PORT");
    process.exitCode = 1;
    return;
  }
  const client = await SessionClient.connect(match[1]!, Number(match[2]));
  const vm = new ViewModel();
  for (const message of await client.readStart()) {
    vm.apply({ dir: "recv", message });
  }
  render(vm);

  const rl = readline.createInterface({ input: process.stdin, output: process.stdout });
  rl.setPrompt("> ");
  rl.prompt();
  for await (const line of rl) {
    const command = parseCommand(line);
    if (command === "stop") {
      break;
    }
    try {
      if (command === null) {
        render(vm);
      } else if (Array.isArray(command)) {
        for (const message of vm.answer_queries(command)) {
          for (const reply of await client.send(message)) {
            vm.apply({ dir: "recv", message: reply });
          }
        }
        render(vm);
      } else {
        for (const reply of await client.send(vm.undo_to(command.undo))) {
          vm.apply({ dir: "recv", message: reply });
        }
        render(vm);
      }
    } catch (exc) {
      console.error(String(exc));
      break;
    }
    rl.prompt();
  }
  rl.close();
  try {
    for (const reply of await client.send(vm.stop())) {
      vm.apply({ dir: "recv", message: reply });
    }
  } catch {
    // connection already gone; nothing to clean up
  }
  client.close();
}

run().catch((exc) => {
  console.error(String(exc));
  process.exitCode = 1;
});
