/** Question authoring form. The kind selector swaps the field set between
 * multiple-choice (right answer + up to three wrong ones) and gap-fill
 * (single canonical answer); validation runs client-side before submit.
 */

import type { Lecture } from "../api.js";
import { el } from "../dom.js";

export type QuestionKind = "multiple_choice" | "gap_fill";

export interface MultipleChoiceDraft {
  kind: "multiple_choice";
  lecture_id: number;
  question: string;
  right_answer: string;
  wrong_answers: string[];
}

export interface GapFillDraft {
  kind: "gap_fill";
  lecture_id: number;
  question: string;
  answer: string;
}

export type QuestionDraft = MultipleChoiceDraft | GapFillDraft;

export interface QuestionFormDeps {
  lectures: Lecture[];
  onSubmit: (draft: QuestionDraft) => void | Promise<void>;
}

export function validateDraft(draft: QuestionDraft): string[] {
  const problems: string[] = [];
  if (!draft.question.trim()) problems.push("question text must not be empty");
  if (!Number.isInteger(draft.lecture_id) || draft.lecture_id <= 0) {
    problems.push("pick a lecture");
  }
  if (draft.kind === "multiple_choice") {
    if (!draft.right_answer.trim()) problems.push("the right answer must not be empty");
    if (draft.wrong_answers.length === 0) {
      problems.push("a multiple-choice question needs at least one wrong answer");
    }
  } else if (!draft.answer.trim()) {
    problems.push("the answer must not be empty");
  }
  return problems;
}

export function renderQuestionForm(container: HTMLElement, deps: QuestionFormDeps): void {
  const kindSelect = el("select", { name: "kind" },
    el("option", { value: "multiple_choice" }, "Multiple choice"),
    el("option", { value: "gap_fill" }, "Gap fill"),
  );
  const lectureSelect = el("select", { name: "lecture" });
  for (const lecture of deps.lectures) {
    lectureSelect.append(el("option", { value: String(lecture.id) }, lecture.title));
  }
  const questionInput = el("textarea", { name: "question", rows: 3 });

  const rightAnswer = el("input", { type: "text", name: "right_answer" });
  const wrongInputs = [1, 2, 3].map((n) =>
    el("input", { type: "text", name: `wrong_answer_${n}` }),
  );
  const mcFields = el("fieldset", { className: "mc-fields" },
    el("legend", {}, "Multiple choice"),
    el("label", {}, "Right answer ", rightAnswer),
    ...wrongInputs.map((input, i) => el("label", {}, `Wrong answer ${i + 1} `, input)),
  );

  const gfAnswer = el("input", { type: "text", name: "answer" });
  const gfFields = el("fieldset", { className: "gf-fields", hidden: true },
    el("legend", {}, "Gap fill"),
    el("label", {}, "Answer ", gfAnswer),
  );

  const errorList = el("ul", { className: "form-errors" });
  const form = el("form", { className: "question-form" },
    el("label", {}, "Kind ", kindSelect),
    el("label", {}, "Lecture ", lectureSelect),
    el("label", {}, "Question ", questionInput),
    mcFields,
    gfFields,
    errorList,
    el("button", { type: "submit" }, "Save question"),
  );

  kindSelect.addEventListener("change", () => {
    const isMc = kindSelect.value === "multiple_choice";
    mcFields.hidden = !isMc;
    gfFields.hidden = isMc;
  });

  const buildDraft = (): QuestionDraft => {
    const common = {
      lecture_id: Number(lectureSelect.value),
      question: questionInput.value,
    };
    if (kindSelect.value === "multiple_choice") {
      return {
        kind: "multiple_choice",
        ...common,
        right_answer: rightAnswer.value,
        wrong_answers: wrongInputs.map((i) => i.value.trim()).filter((v) => v !== ""),
      };
    }
    return { kind: "gap_fill", ...common, answer: gfAnswer.value };
  };

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const draft = buildDraft();
    const problems = validateDraft(draft);
    errorList.replaceChildren(...problems.map((p) => el("li", {}, p)));
    if (problems.length === 0) void deps.onSubmit(draft);
  });

  container.replaceChildren(form);
}
