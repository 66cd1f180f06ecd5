/** Scripted session against a real fixture-backed service.
 *
 * Builds a small corpus with the backend CLI, starts the HTTP service with
 * the echo mock, and drives the DOM end to end: disclaimer, query with
 * citation chips, a like that must land in the server's feedback log, and
 * an expert request id. This is the UI acceptance check.
 */

import { execFileSync, spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync, existsSync, readdirSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { createApp } from "../src/app.js";

const PYTHON = process.env.SPECSYNTH_PYTHON ?? "python3";
const PORT = 8720 + Math.floor(Math.random() * 200);
const BASE_URL = `http://127.0.0.1:${PORT}`;

let workdir: string;
let server: ChildProcess | null = null;

const DOC = `## Registration management
Registration management is used to register or deregister a device with the network.

The initial request carries the device identity and the requested slice selection information.

## Reference signals
Sounding reference signals are transmitted by the device so the network can estimate the uplink channel.
`;

function cli(...args: string[]): void {
  execFileSync(PYTHON, ["-m", "specsynth.cli", ...args], {
    stdio: "pipe",
    cwd: workdir,
  });
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "specsynth-ui-"));
  const docs = join(workdir, "docs");
  execFileSync("mkdir", ["-p", docs]);
  writeFileSync(join(docs, "TS 90.101.txt"), DOC, "utf-8");

  cli("ingest", "--input-dir", docs, "--out", join(workdir, "corpus.jsonl"));
  cli(
    "index",
    "--corpus", join(workdir, "corpus.jsonl"),
    "--out", join(workdir, "specs.ssix"),
  );
  writeFileSync(
    join(workdir, "service.toml"),
    [
      `corpus_path = "${join(workdir, "corpus.jsonl")}"`,
      `index_path = "${join(workdir, "specs.ssix")}"`,
      `port = ${PORT}`,
      'llm_backend = "mock_echo_context"',
      `feedback_log_path = "${join(workdir, "feedback.log")}"`,
      `request_queue_dir = "${join(workdir, "requests")}"`,
    ].join("\n"),
    "utf-8",
  );

  server = spawn(PYTHON, ["-m", "specsynth.cli", "serve", "--config", join(workdir, "service.toml")], {
    stdio: "pipe",
    cwd: workdir,
  });

  const client = new ApiClient(BASE_URL, (input, init) => fetch(input, init));
  const deadline = Date.now() + 45_000;
  for (;;) {
    try {
      const health = await client.health();
      if (health.status === "ready") break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("service did not become ready");
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
});

afterAll(() => {
  server?.kill("SIGTERM");
});

describe("scripted browser session against the live service", () => {
  it("runs the full loop: disclaimer, citations, like, expert request", async () => {
    document.body.innerHTML = '<main id="app"></main>';
    const root = document.getElementById("app")!;
    const client = new ApiClient(BASE_URL, (input, init) => fetch(input, init));
    const app = createApp(root, client);
    await app.ready;

    // disclaimer shown before any input
    const disclaimer = root.querySelector(".disclaimer")!;
    expect(disclaimer.classList.contains("hidden")).toBe(false);
    expect(disclaimer.textContent).toContain(
      "humans are still in the loop to correct any mistakes",
    );

    // send a query through the message bar
    const input = root.querySelector<HTMLInputElement>(".message-input")!;
    input.value = "how does registration work";
    input.dispatchEvent(new Event("input"));
    root
      .querySelector<HTMLFormElement>(".message-bar")!
      .dispatchEvent(new Event("submit", { cancelable: true }));

    await vi.waitFor(
      () => {
        expect(root.querySelectorAll(".turn-response").length).toBe(1);
      },
      { timeout: 20_000 },
    );

    // at least one citation chip, fed from the citations array
    const chips = [...root.querySelectorAll(".citation-chip")];
    expect(chips.length).toBeGreaterThanOrEqual(1);
    expect(chips[0].textContent).toMatch(/^TS 90\.101 /);

    // record a like; the server's feedback log must show it
    const like = root.querySelector<HTMLButtonElement>(".verdict-like")!;
    like.click();
    await vi.waitFor(
      () => expect(like.classList.contains("selected")).toBe(true),
      { timeout: 10_000 },
    );
    const logPath = join(workdir, "feedback.log");
    await vi.waitFor(() => expect(existsSync(logPath)).toBe(true));
    expect(readFileSync(logPath, "utf-8")).toContain('"verdict": "like"');

    // obtain an expert request id
    const expert = root.querySelector<HTMLButtonElement>(".expert-button")!;
    expert.click();
    await vi.waitFor(
      () => {
        const reference = root.querySelector(".request-id");
        expect(reference?.textContent).toMatch(/expert request \S+/);
      },
      { timeout: 10_000 },
    );
    const requestId = root
      .querySelector(".request-id")!
      .textContent!.replace("expert request ", "");
    const queued = readdirSync(join(workdir, "requests"));
    expect(queued).toContain(`${requestId}.json`);
  });
});
