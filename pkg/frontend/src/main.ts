/** App shell: tab navigation over the four views, driven by the store. */

import { Api } from "./api.js";
import { clear, el } from "./dom.js";
import { Store, type ViewName } from "./state.js";
import { AnnotationsView } from "./views/annotations.js";
import { InspectionView } from "./views/inspection.js";
import { SummaryView } from "./views/summary.js";
import { UploadView } from "./views/upload.js";

const TABS: { name: ViewName; label: string }[] = [
  { name: "upload", label: "Upload" },
  { name: "summary", label: "Summary" },
  { name: "annotations", label: "Annotations" },
  { name: "inspection", label: "Inspection" },
];

export function boot(root: HTMLElement, baseUrl = ""): Store {
  const api = new Api(baseUrl);
  const store = new Store();
  const views = {
    upload: new UploadView(api, store),
    summary: new SummaryView(api, store),
    annotations: new AnnotationsView(api, store),
    inspection: new InspectionView(api, store),
  };

  const nav = el("nav", { class: "tabs-nav" });
  const docBadge = el("span", { class: "doc-badge" });
  const content = el("main", { class: "view-root" });
  root.append(
    el("header", { class: "app-header" },
      el("h1", {}, "layerlab"), nav, docBadge),
    content,
  );

  let mountedView: ViewName | null = null;

  const render = () => {
    const state = store.get();
    clear(nav);
    for (const tab of TABS) {
      const needsDoc = tab.name !== "upload";
      const button = el("button", {
        class: tab.name === state.view ? "tab active" : "tab",
        onclick: () => { store.setView(tab.name); },
      }, tab.label) as HTMLButtonElement;
      button.disabled = needsDoc && state.docId === null;
      nav.append(button);
    }
    docBadge.textContent = state.docId ? `doc ${state.docId.slice(0, 12)}` : "no document";
    if (mountedView !== state.view) {
      mountedView = state.view;
      void views[state.view].mount(content);
    }
  };

  store.subscribe(() => render());
  // re-mount on document/section/selection changes that affect the open view
  let lastKey = "";
  store.subscribe((state) => {
    const key = [state.view, state.docId, state.section].join("|");
    if (key !== lastKey) {
      lastKey = key;
      mountedView = state.view;
      void views[state.view].mount(content);
    }
  });
  render();
  void views.upload.mount(content);
  return store;
}

declare global {
  interface Window {
    layerlabBoot?: typeof boot;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot(document.getElementById("app")!);
}
window.layerlabBoot = boot;
