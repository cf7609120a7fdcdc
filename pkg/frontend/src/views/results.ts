import type { ApiClient } from "../api.js";
import { el } from "../dom.js";

export function renderResults(container: HTMLElement, api: ApiClient): void {
  container.replaceChildren(el("h2", {}, "My results"), el("p", {}, "Loading..."));
  void api.myResults().then((rows) => {
    if (rows.length === 0) {
      container.replaceChildren(el("h2", {}, "My results"), el("p", {}, "No results yet."));
      return;
    }
    const table = el("table", { className: "results" },
      el("thead", {}, el("tr", {},
        el("th", {}, "Test"), el("th", {}, "Date"), el("th", {}, "Score"))),
      el("tbody", {}, ...rows.map((row) => el("tr", {},
        el("td", {}, row.kind),
        el("td", {}, row.date),
        el("td", {}, `${row.percent.toFixed(1)}%`),
      ))),
    );
    container.replaceChildren(el("h2", {}, "My results"), table);
  });
}
