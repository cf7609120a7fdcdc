/** Administration panel: pending registrations, lectures and material,
 * question authoring, exam scheduling, results, mass email.
 */

import type { ApiClient, Lecture, Page, Registration, ResultRow } from "../api.js";
import { el } from "../dom.js";
import { renderQuestionForm } from "./questionForm.js";

function section(title: string): HTMLElement {
  return el("section", { className: "admin-section" }, el("h3", {}, title));
}

function renderRegistrations(host: HTMLElement, api: ApiClient): void {
  const box = section("Pending registrations");
  const list = el("div", {}, "Loading...");
  box.append(list);
  host.append(box);

  const reload = async () => {
    const pending = await api.get<Registration[]>("/api/registrations");
    if (pending.length === 0) {
      list.replaceChildren(el("p", {}, "Nothing pending."));
      return;
    }
    list.replaceChildren(...pending.map((registration) => {
      const row = el("p", { className: "registration" },
        `${registration.am} ${registration.name} ${registration.surname} `
        + `<${registration.email}> ${registration.department} `);
      for (const decision of ["approve", "reject"] as const) {
        const button = el("button", { type: "button" }, decision);
        button.addEventListener("click", async () => {
          await api.post(`/api/registrations/${registration.am}/decision`, { decision });
          await reload();
        });
        row.append(button, " ");
      }
      return row;
    }));
  };
  void reload();
}

function renderLectureAdmin(host: HTMLElement, api: ApiClient, lectures: Lecture[]): void {
  const box = section("Lectures and material");
  const title = el("input", { type: "text", placeholder: "new lecture title" });
  const createButton = el("button", { type: "button" }, "Create lecture");
  createButton.addEventListener("click", async () => {
    await api.post("/api/lectures", { title: title.value });
    window.location.reload();
  });
  box.append(el("p", {}, title, " ", createButton));

  const lectureSelect = el("select", {});
  for (const lecture of lectures) {
    lectureSelect.append(el("option", { value: String(lecture.id) }, lecture.title));
  }
  const fileInput = el("input", { type: "file" });
  const uploadButton = el("button", { type: "button" }, "Upload");
  const uploadStatus = el("span", { className: "status" });
  uploadButton.addEventListener("click", async () => {
    const file = fileInput.files?.[0];
    if (!file) {
      uploadStatus.textContent = "choose a file first";
      return;
    }
    try {
      const meta = await api.uploadFile(
        Number(lectureSelect.value), file, file.type || "application/octet-stream");
      uploadStatus.textContent = `uploaded ${meta.name} (${meta.size} bytes)`;
    } catch (error) {
      uploadStatus.textContent = error instanceof Error ? error.message : "upload failed";
    }
  });
  box.append(el("p", {}, lectureSelect, " ", fileInput, " ", uploadButton, " ", uploadStatus));
  host.append(box);
}

function renderQuestionAdmin(host: HTMLElement, api: ApiClient, lectures: Lecture[]): void {
  const box = section("Add a question");
  const formHost = el("div", {});
  const status = el("p", { className: "status" });
  box.append(formHost, status);
  renderQuestionForm(formHost, {
    lectures,
    onSubmit: async (draft) => {
      status.textContent = "";
      try {
        const { kind, ...payload } = draft;
        await api.post(`/api/questions/${kind}`, payload);
        status.textContent = "question saved";
      } catch (error) {
        status.textContent = error instanceof Error ? error.message : "save failed";
      }
    },
  });
  host.append(box);
}

function renderScheduleAdmin(host: HTMLElement, api: ApiClient, lectures: Lecture[]): void {
  const box = section("Schedule an exam");
  const kind = el("select", {}, el("option", { value: "final_exam" }, "Final exam"));
  for (const lecture of lectures) {
    kind.append(el("option", { value: `lecture:${lecture.id}` }, `Test: ${lecture.title}`));
  }
  const date = el("input", { type: "text", placeholder: "YYYY-MM-DD" });
  const time = el("input", { type: "text", placeholder: "HH:MM" });
  const duration = el("input", { type: "number", value: "60", min: "1" });
  const status = el("span", { className: "status" });
  const button = el("button", { type: "button" }, "Schedule");
  button.addEventListener("click", async () => {
    status.textContent = "";
    try {
      await api.request("PUT", `/api/schedule/${kind.value}`, {
        date: date.value,
        time: time.value,
        duration_minutes: Number(duration.value),
      });
      status.textContent = "scheduled; every trainee is being notified by email";
    } catch (error) {
      status.textContent = error instanceof Error ? error.message : "scheduling failed";
    }
  });
  box.append(el("p", {}, kind, " ", date, " ", time, " ", duration, " min ", button, " ", status));
  host.append(box);
}

function renderResultsAdmin(host: HTMLElement, api: ApiClient): void {
  const box = section("Results");
  const amFilter = el("input", { type: "text", placeholder: "register number" });
  const table = el("div", {});
  const load = async () => {
    const query = amFilter.value ? `?am=${encodeURIComponent(amFilter.value)}` : "";
    const page = await api.get<Page<ResultRow>>(`/api/results${query}`);
    table.replaceChildren(
      el("p", {}, `${page.total} result(s)`),
      el("ul", {}, ...page.items.map((row) =>
        el("li", {}, `${row.am ?? ""} ${row.kind} ${row.date}: ${row.percent.toFixed(1)}%`))),
    );
  };
  const button = el("button", { type: "button" }, "Load");
  button.addEventListener("click", () => void load());
  box.append(el("p", {}, amFilter, " ", button), table);
  host.append(box);
  void load();
}

function renderMassEmail(host: HTMLElement, api: ApiClient): void {
  const box = section("Mass email");
  const subject = el("input", { type: "text", placeholder: "subject" });
  const body = el("textarea", { rows: 3, placeholder: "body" });
  const status = el("span", { className: "status" });
  const button = el("button", { type: "button" }, "Queue for delivery");
  button.addEventListener("click", async () => {
    try {
      const out = await api.post<{ recipients: number }>("/api/mass-email", {
        subject: subject.value, body: body.value,
      });
      status.textContent = `queued for ${out.recipients} recipient(s)`;
    } catch (error) {
      status.textContent = error instanceof Error ? error.message : "failed";
    }
  });
  box.append(el("p", {}, subject), el("p", {}, body), el("p", {}, button, " ", status));
  host.append(box);
}

export function renderAdmin(container: HTMLElement, api: ApiClient): void {
  container.replaceChildren(el("h2", {}, "Administration"));
  void api.lectures().then((lectures) => {
    renderRegistrations(container, api);
    renderLectureAdmin(container, api, lectures);
    renderQuestionAdmin(container, api, lectures);
    renderScheduleAdmin(container, api, lectures);
    renderResultsAdmin(container, api);
    renderMassEmail(container, api);
  });
}
