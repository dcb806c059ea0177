// Browser shell: binds the store to the static page in index.html.
// All logic lives in state.ts/render.ts; this file only moves strings
// into containers and DOM events into store calls.

import { ApiClient } from "./api.js";
import { API_BASE } from "./config.js";
import {
  renderCoverage,
  renderDslPanel,
  renderHistory,
  renderSession,
} from "./render.js";
import { Store } from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const api = new ApiClient(API_BASE);
const store = new Store(api, render);

const queryInput = el<HTMLInputElement>("query-text");
const configSelect = el<HTMLSelectElement>("config");
const sessionPanel = el<HTMLDivElement>("session");
const dslPanel = el<HTMLDivElement>("dsl-panel");
const coveragePanel = el<HTMLDivElement>("coverage");
const historyPanel = el<HTMLDivElement>("history");
const caseLabel = el<HTMLSpanElement>("case-label");

function render(): void {
  caseLabel.textContent = store.state.caseId
    ? `${store.state.caseId} ${store.state.caseName}`
    : "no case";
  sessionPanel.innerHTML = renderSession(store.state);
  dslPanel.innerHTML = renderDslPanel(store.state);
  coveragePanel.innerHTML = renderCoverage(store.state.coverage);
  historyPanel.innerHTML = renderHistory(store.state);

  const buffer = dslPanel.querySelector<HTMLTextAreaElement>(".dsl-buffer");
  buffer?.addEventListener("input", () => store.setDslBuffer(buffer.value));

  sessionPanel.querySelectorAll<HTMLInputElement>(".review-toggle").forEach((box) => {
    box.addEventListener("change", () => {
      void store.toggleReview(box.dataset["doc"] ?? "");
    });
  });
  sessionPanel.querySelector<HTMLButtonElement>(".retry")?.addEventListener("click", () => {
    void store.retry();
  });
  historyPanel.querySelectorAll<HTMLLIElement>("[data-session]").forEach((item) => {
    item.addEventListener("click", () => {
      void store.openSession(item.dataset["session"] ?? "");
    });
  });
}

el<HTMLFormElement>("query-form").addEventListener("submit", (event) => {
  event.preventDefault();
  store.setQueryText(queryInput.value);
  store.setConfig(configSelect.value as never);
  void store.submitQuery();
});

el<HTMLButtonElement>("execute-dsl").addEventListener("click", () => {
  const buffer = dslPanel.querySelector<HTMLTextAreaElement>(".dsl-buffer");
  if (buffer !== null) {
    store.setDslBuffer(buffer.value);
  }
  void store.executeDsl();
});

el<HTMLFormElement>("case-form").addEventListener("submit", (event) => {
  event.preventDefault();
  const name = el<HTMLInputElement>("case-name").value.trim();
  if (name !== "") {
    void store.openCase(name);
  }
});

render();
