import type { ApiClient } from "../api.js";
import { el } from "../dom.js";
import { navigate } from "../router.js";
import { saveSession } from "../session.js";

export function renderLogin(container: HTMLElement, api: ApiClient): void {
  const username = el("input", { type: "text", name: "username", autocomplete: "username" });
  const password = el("input", {
    type: "password", name: "password", autocomplete: "current-password",
  });
  const status = el("p", { className: "status" });
  const form = el("form", { className: "login-form" },
    el("label", {}, "Username ", username),
    el("label", {}, "Password ", password),
    el("button", { type: "submit" }, "Log in"),
    status,
  );
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    status.textContent = "";
    try {
      const session = await api.login(username.value, password.value);
      saveSession(session.token, session.kind);
      navigate("home");
      window.location.reload();
    } catch (error) {
      status.textContent = error instanceof Error ? error.message : "login failed";
    }
  });
  container.replaceChildren(
    el("h2", {}, "Log in"),
    form,
    el("p", {}, "No account yet? ", el("a", { href: "#/register" }, "Register")),
  );
}
