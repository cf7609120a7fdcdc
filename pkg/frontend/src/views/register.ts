import type { ApiClient } from "../api.js";
import { el } from "../dom.js";

const FIELDS = [
  ["am", "Register number"],
  ["name", "Name"],
  ["surname", "Surname"],
  ["username", "Username"],
  ["password", "Password"],
  ["email", "Email"],
  ["department", "Department"],
] as const;

export function renderRegister(container: HTMLElement, api: ApiClient): void {
  const inputs = new Map<string, HTMLInputElement>();
  const form = el("form", { className: "register-form" });
  for (const [name, label] of FIELDS) {
    const input = el("input", {
      type: name === "password" ? "password" : "text",
      name,
    });
    inputs.set(name, input);
    form.append(el("label", {}, `${label} `, input));
  }

  const captchaPrompt = el("span", { className: "captcha-prompt" }, "...");
  const captchaAnswer = el("input", { type: "text", name: "captcha_answer" });
  let captchaToken = "";
  const loadCaptcha = async () => {
    const challenge = await api.captcha();
    captchaToken = challenge.token;
    captchaPrompt.textContent = challenge.prompt;
    captchaAnswer.value = "";
  };
  const refresh = el("button", { type: "button" }, "new challenge");
  refresh.addEventListener("click", () => void loadCaptcha());
  form.append(el("label", {}, captchaPrompt, " ", captchaAnswer, " ", refresh));

  const status = el("p", { className: "status" });
  form.append(el("button", { type: "submit" }, "Register"), status);

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    status.textContent = "";
    try {
      await api.post("/api/register", {
        am: Number(inputs.get("am")!.value),
        name: inputs.get("name")!.value,
        surname: inputs.get("surname")!.value,
        username: inputs.get("username")!.value,
        password: inputs.get("password")!.value,
        email: inputs.get("email")!.value,
        department: inputs.get("department")!.value,
        captcha_token: captchaToken,
        captcha_answer: captchaAnswer.value,
      });
      status.textContent =
        "Registration submitted. You can log in once an administrator approves it.";
      form.reset();
    } catch (error) {
      status.textContent = error instanceof Error ? error.message : "registration failed";
      void loadCaptcha(); // challenges burn on first use
    }
  });

  container.replaceChildren(el("h2", {}, "Register"), form);
  void loadCaptcha();
}
