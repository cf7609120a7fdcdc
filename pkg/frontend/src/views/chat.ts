/** Site-wide chat with cursor-based polling every three seconds. */

import type { ApiClient, ChatMessage } from "../api.js";
import { el } from "../dom.js";

export const CHAT_POLL_MS = 3000;

export interface ChatHandle {
  stop: () => void;
}

export function renderChat(container: HTMLElement, api: ApiClient): ChatHandle {
  const log = el("ul", { className: "chat-log" });
  const input = el("input", { type: "text", name: "body", placeholder: "say something" });
  const status = el("p", { className: "status" });
  const form = el("form", { className: "chat-form" },
    input, el("button", { type: "submit" }, "Send"), status);
  container.replaceChildren(el("h2", {}, "Chat"), log, form);

  let cursor = 0;
  const append = (messages: ChatMessage[]) => {
    for (const message of messages) {
      cursor = Math.max(cursor, message.id);
      log.append(el("li", {},
        el("strong", {}, message.sender_name), `: ${message.body}`));
    }
    if (messages.length) log.lastElementChild?.scrollIntoView();
  };

  const poll = async () => {
    try {
      append(await api.chat(cursor));
    } catch {
      // transient polling errors are retried on the next tick
    }
  };

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const body = input.value.trim();
    if (!body) return;
    try {
      input.value = "";
      await api.postChat(body);
      await poll();
    } catch (error) {
      status.textContent = error instanceof Error ? error.message : "send failed";
    }
  });

  void poll();
  const timer = setInterval(() => void poll(), CHAT_POLL_MS);
  return { stop: () => clearInterval(timer) };
}
