/** Trainee home: lecture material, practice tests, open sittings, schedule. */

import type { ApiClient, Sitting } from "../api.js";
import { el } from "../dom.js";
import { renderExamRunner } from "./examRunner.js";

function triggerDownload(blob: Blob, filename: string): void {
  const url = URL.createObjectURL(blob);
  const anchor = el("a", { href: url, download: filename });
  document.body.append(anchor);
  anchor.click();
  anchor.remove();
  URL.revokeObjectURL(url);
}

export function renderLectures(container: HTMLElement, api: ApiClient): void {
  const list = el("div", { className: "lecture-list" }, "Loading...");
  const examHost = el("div", { className: "exam-host" });
  const scheduleBox = el("div", { className: "schedule-box" });
  container.replaceChildren(el("h2", {}, "Lectures"), scheduleBox, list, examHost);

  const startSitting = (sitting: Sitting) => {
    renderExamRunner(examHost, sitting, {
      submit: (instanceId, answers) => api.submitTest(instanceId, answers),
    });
    examHost.scrollIntoView();
  };

  const startButton = (kind: string, label: string) => {
    const button = el("button", { type: "button" }, label);
    button.addEventListener("click", async () => {
      try {
        startSitting(await api.startTest(kind));
      } catch (error) {
        examHost.replaceChildren(
          el("p", { className: "status" },
            error instanceof Error ? error.message : "could not start"),
        );
      }
    });
    return button;
  };

  void (async () => {
    const [lectures, schedule, open] = await Promise.all([
      api.lectures(), api.schedule(), api.openTests(),
    ]);

    scheduleBox.replaceChildren(
      el("h3", {}, "Scheduled exams"),
      schedule.length === 0
        ? el("p", {}, "Nothing scheduled.")
        : el("ul", {}, ...schedule.map((entry) =>
            el("li", {}, `${entry.kind}: ${entry.date} ${entry.time} `
              + `(${entry.duration_minutes} min)`))),
      startButton("final_exam", "Sit the final exam"),
    );

    list.replaceChildren(...await Promise.all(lectures.map(async (lecture) => {
      const files = await api.lectureFiles(lecture.id);
      const fileList = el("ul", { className: "file-list" });
      for (const file of files) {
        const link = el("a", { href: "#" }, `${file.name} (${file.size} bytes)`);
        link.addEventListener("click", async (event) => {
          event.preventDefault();
          const { blob, filename } = await api.downloadFile(file.id);
          triggerDownload(blob, filename);
        });
        fileList.append(el("li", {}, link));
      }
      return el("section", { className: "lecture" },
        el("h3", {}, lecture.title),
        files.length ? fileList : el("p", {}, "No material yet."),
        startButton(`lecture:${lecture.id}`, "Take the practice test"),
      );
    })));

    const resumable = open[0];
    if (resumable) startSitting(resumable);
  })();
}
