/** Chat application: message bar, cited answers, feedback, ask-an-expert.
 *
 * Citations come exclusively from the server's citations array; nothing is
 * parsed out of the response text. The transcript lives in the DOM and
 * survives individual request failures. One query is in flight at a time:
 * the input is disabled until the answer (or its error) lands.
 */

import { ApiClient, AnswerRecord, Verdict } from "./api.js";

export interface App {
  ready: Promise<void>;
  root: HTMLElement;
}

export function createApp(root: HTMLElement, client: ApiClient): App {
  const doc = root.ownerDocument;
  root.innerHTML = "";
  root.classList.add("specsynth-app");

  const errorBanner = el(doc, "div", "error-banner hidden");
  const disclaimer = el(doc, "div", "disclaimer hidden");
  const transcript = el(doc, "div", "transcript");

  const form = el(doc, "form", "message-bar") as HTMLFormElement;
  const input = el(doc, "input", "message-input") as HTMLInputElement;
  input.type = "text";
  input.placeholder = "Ask about the specifications…";
  input.disabled = true;
  const send = el(doc, "button", "send-button") as HTMLButtonElement;
  send.type = "submit";
  send.textContent = "Send";
  send.disabled = true;
  form.append(input, send);

  root.append(errorBanner, disclaimer, transcript, form);

  let sessionId: string | null = null;
  let inFlight = false;

  function refreshControls(): void {
    const idle = sessionId !== null && !inFlight;
    input.disabled = !idle;
    send.disabled = !idle || input.value.trim() === "";
  }

  input.addEventListener("input", refreshControls);

  const ready = client
    .createSession()
    .then((session) => {
      sessionId = session.session_id;
      disclaimer.textContent = session.disclaimer;
      disclaimer.classList.remove("hidden");
      refreshControls();
    })
    .catch((err: unknown) => {
      errorBanner.textContent = `Could not reach the service: ${message(err)}`;
      errorBanner.classList.remove("hidden");
      // input stays disabled: no session, no queries
    });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void sendQuery();
  });

  async function sendQuery(): Promise<void> {
    const text = input.value.trim();
    if (!text || !sessionId || inFlight) return;
    inFlight = true;
    refreshControls();

    const turn = el(doc, "div", "turn");
    const queryLine = el(doc, "div", "turn-query");
    queryLine.textContent = text;
    turn.append(queryLine);
    transcript.append(turn);

    try {
      const record = await client.query(sessionId, text);
      renderAnswer(turn, record);
      input.value = "";
    } catch (err) {
      const failure = el(doc, "div", "turn-error");
      failure.textContent = `Request failed: ${message(err)}`;
      turn.append(failure);
    } finally {
      inFlight = false;
      refreshControls();
    }
  }

  function renderAnswer(turn: HTMLElement, record: AnswerRecord): void {
    const answer = el(doc, "div", "turn-response");
    answer.textContent = record.response_text;

    const citations = el(doc, "div", "citations");
    for (const source of record.citations) {
      const chip = el(doc, "span", "citation-chip");
      chip.textContent = source;
      citations.append(chip);
    }

    const actions = el(doc, "div", "turn-actions");
    const like = verdictButton(turn, record, "like", "👍");
    const dislike = verdictButton(turn, record, "dislike", "👎");
    const expert = expertButton(record);
    actions.append(like, dislike, expert);

    turn.append(answer, citations, actions);
  }

  function verdictButton(
    turn: HTMLElement,
    record: AnswerRecord,
    verdict: Verdict,
    label: string,
  ): HTMLButtonElement {
    const button = el(doc, "button", `verdict-button verdict-${verdict}`) as HTMLButtonElement;
    button.type = "button";
    button.textContent = label;
    button.addEventListener("click", () => {
      if (!sessionId) return;
      void client
        .feedback(sessionId, record.turn_index, verdict)
        .then(() => {
          for (const other of turn.querySelectorAll(".verdict-button")) {
            other.classList.remove("selected");
          }
          button.classList.add("selected");
        })
        .catch((err: unknown) => showTransient(`Feedback failed: ${message(err)}`));
    });
    return button;
  }

  function expertButton(record: AnswerRecord): HTMLButtonElement {
    const button = el(doc, "button", "expert-button") as HTMLButtonElement;
    button.type = "button";
    button.textContent = "Ask an expert";
    button.addEventListener("click", () => {
      if (!sessionId || button.disabled) return;
      button.disabled = true; // no double-submission while pending
      void client
        .expertRequest(sessionId, record.turn_index)
        .then((requestId) => {
          const reference = el(doc, "span", "request-id");
          reference.textContent = `expert request ${requestId}`;
          button.replaceWith(reference);
        })
        .catch((err: unknown) => {
          button.disabled = false;
          showTransient(`Expert request failed: ${message(err)}`);
        });
    });
    return button;
  }

  function showTransient(text: string): void {
    errorBanner.textContent = text;
    errorBanner.classList.remove("hidden");
  }

  return { ready, root };
}

function el(doc: Document, tag: string, className: string): HTMLElement {
  const node = doc.createElement(tag);
  node.className = className;
  return node;
}

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}
