// Browser entry point: wires the API client, view state, and renderers into
// the three-panel layout (tree | idea board | report drawer).

import { ApiClient, ServiceError } from "./api.js";
import {
  initialState,
  manualPair,
  mergeIdeas,
  selectTopic,
  type ViewState,
} from "./state.js";
import {
  renderBanner,
  renderBoard,
  renderJobs,
  renderPairControls,
  renderProcedure,
  renderReview,
  renderToast,
  renderTree,
} from "./render.js";

declare global {
  interface Window {
    API_BASE?: string;
  }
}

// service origin: ?api=http://host:port beats the inline default
const apiBase =
  new URLSearchParams(window.location.search).get("api") ??
  window.API_BASE ??
  "";
const api = new ApiClient(apiBase);
let state: ViewState = initialState();

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function paint(): void {
  el("tree-panel").innerHTML =
    renderTree(state.tree, state) + renderPairControls(state);
  el("board-panel").innerHTML = renderBoard(state.ideas);
  el("jobs-panel").innerHTML = renderJobs(state.activeJobs);
  el("banner-slot").innerHTML = state.banner ?? "";
  el("toast-slot").innerHTML = state.toast ?? "";
}

function showError(err: unknown): void {
  if (err instanceof ServiceError) {
    state = { ...state, toast: renderToast(`${err.category}: ${err.message}`) };
  } else {
    state = { ...state, toast: renderToast(String(err)) };
  }
  paint();
}

async function refresh(): Promise<void> {
  try {
    const tree = await api.topics();
    state = { ...state, tree, banner: null };
  } catch (err) {
    if (err instanceof ServiceError && err.category === "store-uninitialized") {
      state = { ...state, tree: null, banner: null };
    } else if (err instanceof ServiceError) {
      state = { ...state, banner: renderBanner(err.category, err.message) };
    } else {
      state = { ...state, banner: renderBanner("network", String(err)) };
    }
  }
  try {
    state = mergeIdeas({ ...state, toast: null }, await api.ideas());
  } catch {
    // board stays as-is when the listing is unavailable
  }
  paint();
}

async function run<T>(work: Promise<T>, after: (result: T) => void): Promise<void> {
  try {
    after(await work);
    paint();
  } catch (err) {
    showError(err);
  }
}

function openDrawer(html: string): void {
  el("drawer-panel").innerHTML = html;
}

document.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest("[data-action]");
  if (!(target instanceof HTMLElement)) return;
  const action = target.dataset.action;
  const ideaId = target.dataset.idea ?? "";
  switch (action) {
    case "build-tree":
      void run(api.buildTree(), (tree) => {
        state = { ...state, tree };
      });
      break;
    case "select-topic":
      state = selectTopic(state, Number(target.dataset.index));
      paint();
      break;
    case "ideate-manual": {
      const pair = manualPair(state);
      if (pair) {
        void run(api.ideate("manual", pair), (ideas) => {
          state = mergeIdeas(state, ideas);
        });
      }
      break;
    }
    case "ideate-distant":
      void run(api.ideate("distant"), (ideas) => {
        state = mergeIdeas(state, ideas);
      });
      break;
    case "ideate-random":
      void run(api.ideate("random"), (ideas) => {
        state = mergeIdeas(state, ideas);
      });
      break;
    case "combine":
      void run(api.combine(10), (ideas) => {
        state = mergeIdeas(state, ideas);
      });
      break;
    case "polish":
      void run(api.polish(ideaId), (result) => {
        state = mergeIdeas(state, [result.idea]);
      });
      break;
    case "review":
      void run(api.review(ideaId), (report) => {
        state = {
          ...state,
          reviews: { ...state.reviews, [report.idea_id]: report },
        };
        openDrawer(renderReview(report));
      });
      break;
    case "procedure":
      void run(api.procedure(ideaId), (plan) => {
        state = {
          ...state,
          procedures: { ...state.procedures, [plan.idea_id]: plan },
        };
        openDrawer(renderProcedure(plan));
      });
      break;
  }
});

void refresh();
