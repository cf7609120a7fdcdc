import { beforeEach, describe, expect, it, vi } from "vitest";

import {
  renderQuestionForm,
  validateDraft,
  type QuestionDraft,
} from "../src/views/questionForm.js";

const lectures = [
  { id: 1, title: "Unit 1: HTML" },
  { id: 2, title: "Unit 2: CSS" },
];

function setup(onSubmit = vi.fn()) {
  const container = document.createElement("div");
  document.body.append(container);
  renderQuestionForm(container, { lectures, onSubmit });
  const form = container.querySelector("form")!;
  return {
    container,
    onSubmit,
    form,
    kind: form.querySelector<HTMLSelectElement>('select[name="kind"]')!,
    mcFields: form.querySelector<HTMLFieldSetElement>(".mc-fields")!,
    gfFields: form.querySelector<HTMLFieldSetElement>(".gf-fields")!,
    set(name: string, value: string) {
      const field = form.querySelector<HTMLInputElement | HTMLTextAreaElement>(
        `[name="${name}"]`,
      )!;
      field.value = value;
    },
    submit() {
      form.dispatchEvent(new Event("submit", { cancelable: true }));
    },
    errors() {
      return [...form.querySelectorAll(".form-errors li")].map((li) => li.textContent);
    },
  };
}

describe("question form", () => {
  beforeEach(() => {
    document.body.replaceChildren();
  });

  it("starts on multiple choice with gap-fill fields hidden", () => {
    const t = setup();
    expect(t.kind.value).toBe("multiple_choice");
    expect(t.mcFields.hidden).toBe(false);
    expect(t.gfFields.hidden).toBe(true);
  });

  it("switching the kind toggles the visible field set both ways", () => {
    const t = setup();
    t.kind.value = "gap_fill";
    t.kind.dispatchEvent(new Event("change"));
    expect(t.mcFields.hidden).toBe(true);
    expect(t.gfFields.hidden).toBe(false);

    t.kind.value = "multiple_choice";
    t.kind.dispatchEvent(new Event("change"));
    expect(t.mcFields.hidden).toBe(false);
    expect(t.gfFields.hidden).toBe(true);
  });

  it("blocks a multiple-choice question with zero wrong answers", () => {
    const t = setup();
    t.set("question", "What is HTML?");
    t.set("right_answer", "a markup language");
    // wrong answers intentionally left blank
    t.submit();
    expect(t.onSubmit).not.toHaveBeenCalled();
    expect(t.errors()).toContain("a multiple-choice question needs at least one wrong answer");
  });

  it("whitespace-only wrong answers do not count", () => {
    const t = setup();
    t.set("question", "What is HTML?");
    t.set("right_answer", "a markup language");
    t.set("wrong_answer_1", "   ");
    t.submit();
    expect(t.onSubmit).not.toHaveBeenCalled();
  });

  it("submits a valid multiple-choice draft with blanks dropped", () => {
    const t = setup();
    t.set("question", "What is HTML?");
    t.set("right_answer", "a markup language");
    t.set("wrong_answer_1", "a database");
    t.set("wrong_answer_3", "a protocol");
    t.submit();
    expect(t.onSubmit).toHaveBeenCalledWith({
      kind: "multiple_choice",
      lecture_id: 1,
      question: "What is HTML?",
      right_answer: "a markup language",
      wrong_answers: ["a database", "a protocol"],
    });
    expect(t.errors()).toEqual([]);
  });

  it("submits a valid gap-fill draft", () => {
    const t = setup();
    t.kind.value = "gap_fill";
    t.kind.dispatchEvent(new Event("change"));
    t.set("question", "HTTP stands for ____.");
    t.set("answer", "hypertext transfer protocol");
    t.submit();
    expect(t.onSubmit).toHaveBeenCalledWith({
      kind: "gap_fill",
      lecture_id: 1,
      question: "HTTP stands for ____.",
      answer: "hypertext transfer protocol",
    });
  });

  it("gap-fill validation requires question and answer", () => {
    const t = setup();
    t.kind.value = "gap_fill";
    t.kind.dispatchEvent(new Event("change"));
    t.submit();
    expect(t.onSubmit).not.toHaveBeenCalled();
    expect(t.errors().length).toBeGreaterThan(0);
  });

  it("clears stale errors once the draft becomes valid", () => {
    const t = setup();
    t.submit();
    expect(t.errors().length).toBeGreaterThan(0);
    t.set("question", "What is HTML?");
    t.set("right_answer", "a markup language");
    t.set("wrong_answer_1", "a database");
    t.submit();
    expect(t.errors()).toEqual([]);
  });
});

describe("validateDraft", () => {
  const valid: QuestionDraft = {
    kind: "multiple_choice",
    lecture_id: 2,
    question: "q?",
    right_answer: "r",
    wrong_answers: ["w"],
  };

  it("accepts a complete multiple-choice draft", () => {
    expect(validateDraft(valid)).toEqual([]);
  });

  it("rejects empty wrong-answer lists and empty right answers", () => {
    expect(validateDraft({ ...valid, wrong_answers: [] })).toContain(
      "a multiple-choice question needs at least one wrong answer",
    );
    expect(validateDraft({ ...valid, right_answer: " " })).toContain(
      "the right answer must not be empty",
    );
  });

  it("rejects a missing lecture id", () => {
    expect(validateDraft({ ...valid, lecture_id: Number.NaN })).toContain("pick a lecture");
  });
});
