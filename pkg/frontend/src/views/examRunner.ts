/** Exam runner: renders a sitting, counts down to the server deadline, and
 * submits exactly once, whether the trainee clicks or the timer runs out.
 */

import type { GradeReport, PresentedQuestion, Sitting, SubmittedAnswer } from "../api.js";
import { formatRemaining, startCountdown } from "../countdown.js";
import { el } from "../dom.js";

export interface ExamRunnerDeps {
  submit: (instanceId: string, answers: SubmittedAnswer[]) => Promise<GradeReport>;
  onFinished?: (report: GradeReport) => void;
  nowMs?: () => number;
  tickMs?: number;
}

function questionBlock(question: PresentedQuestion, index: number): HTMLElement {
  const block = el("fieldset", { className: "question" });
  block.append(el("legend", {}, `${index + 1}. ${question.question}`));
  if (question.kind === "multiple_choice") {
    (question.options ?? []).forEach((option, optionIndex) => {
      const input = el("input", {
        type: "radio",
        name: `q-${question.kind}-${question.id}`,
        value: option,
        // an untouched form submits the first displayed option
        checked: optionIndex === 0,
      });
      block.append(el("label", { className: "option" }, input, ` ${option}`));
    });
  } else {
    block.append(
      el("input", {
        type: "text",
        name: `q-${question.kind}-${question.id}`,
        placeholder: "your answer",
      }),
    );
  }
  return block;
}

export function collectAnswers(form: HTMLFormElement, questions: PresentedQuestion[]): SubmittedAnswer[] {
  return questions.map((question) => {
    const field = `q-${question.kind}-${question.id}`;
    let response = "";
    if (question.kind === "multiple_choice") {
      const checked = form.querySelector<HTMLInputElement>(`input[name="${field}"]:checked`);
      response = checked ? checked.value : "";
    } else {
      const input = form.querySelector<HTMLInputElement>(`input[name="${field}"]`);
      response = input ? input.value : "";
    }
    return { question_id: question.id, kind: question.kind, response };
  });
}

export function renderExamRunner(container: HTMLElement, sitting: Sitting, deps: ExamRunnerDeps): void {
  const nowMs = deps.nowMs ?? Date.now;
  const timerLabel = el("span", { className: "countdown", id: "countdown" });
  const status = el("p", { className: "status", id: "exam-status" });
  const form = el("form", { className: "exam-form" });
  sitting.questions.forEach((question, index) => form.append(questionBlock(question, index)));
  const submitButton = el("button", { type: "submit" }, "Submit answers");
  form.append(submitButton);

  container.replaceChildren(
    el("h2", {}, `Test: ${sitting.kind}`),
    el("p", {}, "Time remaining: ", timerLabel),
    status,
    form,
  );

  // server deadline, corrected for local clock skew measured at render time
  const skewMs = nowMs() - Date.parse(sitting.opened_at);
  const deadlineMs = Date.parse(sitting.deadline) + skewMs;

  let submitted = false;
  const doSubmit = async (reason: "manual" | "expired") => {
    if (submitted) return; // exactly one submission per sitting
    submitted = true;
    countdown.stop();
    submitButton.disabled = true;
    status.textContent = reason === "expired" ? "Time is up; submitting..." : "Submitting...";
    try {
      const report = await deps.submit(sitting.instance_id, collectAnswers(form, sitting.questions));
      status.textContent =
        `Scored ${report.percent.toFixed(1)}% (${report.correct}/${report.total})`;
      deps.onFinished?.(report);
    } catch (error) {
      status.textContent = error instanceof Error ? error.message : "submission failed";
    }
  };

  const countdown = startCountdown({
    deadlineMs,
    nowMs,
    tickMs: deps.tickMs,
    onTick: (remaining) => {
      timerLabel.textContent = formatRemaining(remaining);
      timerLabel.classList.toggle("urgent", remaining < 60);
    },
    onExpired: () => void doSubmit("expired"),
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void doSubmit("manual");
  });
}
