/** Browser bootstrap: wires the controller to three regions of index.html. */

import { ApiClient } from "./api.js";
import { Host, ReviewController } from "./controller.js";

function region(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id} in index.html`);
  return el;
}

export function mount(baseUrl = ""): ReviewController {
  const queueEl = region("queue");
  const documentEl = region("document");
  const bannerEl = region("banner");
  const host: Host = {
    setQueue: (html) => (queueEl.innerHTML = html),
    setDocument: (html) => (documentEl.innerHTML = html),
    setBanner: (html) => (bannerEl.innerHTML = html),
  };
  const controller = new ReviewController(new ApiClient(baseUrl), host);

  queueEl.addEventListener("click", (event) => {
    const row = (event.target as HTMLElement).closest<HTMLElement>(".queue-row");
    if (row?.dataset.docId) void controller.open(row.dataset.docId);
  });
  documentEl.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.matches("button.correct")) {
      const field = target.dataset.field ?? "";
      const editor = documentEl.querySelector<HTMLInputElement | HTMLSelectElement>(
        `.field-editor[data-field="${CSS.escape(field)}"]`,
      );
      if (editor) void controller.correct(field, editor.value);
    } else if (target.matches("button.confirm")) {
      void controller.confirm();
    }
  });

  void controller.refreshQueue();
  return controller;
}

if (typeof document !== "undefined" && document.getElementById("queue")) {
  mount();
}
