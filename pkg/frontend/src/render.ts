// Pure HTML-string renderers. Keeping these DOM-free means the contract
// tests can assert on markup produced from recorded API fixtures without a
// browser environment.

import type { IdeaRecord, ProcedurePlan, ReviewReport, TopicTree } from "./types.js";
import type { ViewState } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderBanner(category: string, message: string): string {
  return `<div class="banner error" role="alert">` +
    `<strong>${escapeHtml(category)}</strong>: ${escapeHtml(message)}</div>`;
}

export function renderToast(message: string): string {
  return `<div class="toast" role="status">${escapeHtml(message)}</div>`;
}

export function renderTree(tree: TopicTree | null, state: ViewState): string {
  if (tree === null || tree.topics.length === 0) {
    return `<div class="tree-empty">` +
      `<p>No topic tree yet.</p>` +
      `<button class="cta" data-action="build-tree">Build tree</button></div>`;
  }
  const nodes = tree.topics.map((topic) => {
    const selected =
      topic.index === state.selectedFirst || topic.index === state.selectedSecond;
    const rows = topic.source_links
      .map((link, i) =>
        `<li class="source-row"><span class="source-rank">${i + 1}.</span> ` +
        `${escapeHtml(link)}</li>`)
      .join("");
    return (
      `<details class="topic-node${selected ? " selected" : ""}" ` +
      `data-topic-index="${topic.index}">` +
      `<summary><span class="topic-label">${escapeHtml(topic.label)}</span>` +
      `<button class="pick" data-action="select-topic" ` +
      `data-index="${topic.index}">${selected ? "deselect" : "select"}</button>` +
      `</summary>` +
      `<p class="topic-description">${escapeHtml(topic.description)}</p>` +
      `<ol class="source-list">${rows}</ol>` +
      `</details>`
    );
  });
  return `<div class="tree" data-count="${tree.topics.length}">${nodes.join("")}</div>`;
}

export function renderPairControls(state: ViewState): string {
  const first = state.selectedFirst;
  const second = state.selectedSecond;
  const manualReady = first !== null && second !== null;
  const badge = manualReady
    ? `<span class="pair-badge">${first}×${second}</span>`
    : `<span class="pair-hint">pick two topics for a manual pair</span>`;
  return (
    `<div class="pair-controls">${badge}` +
    `<button data-action="ideate-manual"${manualReady ? "" : " disabled"}>` +
    `Generate for pair</button>` +
    `<button data-action="ideate-distant">Distant pair</button>` +
    `<button data-action="ideate-random">Random pair</button>` +
    `<button data-action="combine">Combine top 10</button></div>`
  );
}

function stageBadge(stage: IdeaRecord["stage"]): string {
  return `<span class="stage-badge stage-${stage}">${stage}</span>`;
}

export function renderIdeaCard(idea: IdeaRecord): string {
  const pair = `${idea.pair.first}×${idea.pair.second}`;
  const title = idea.title
    ? `<h3 class="idea-title">${escapeHtml(idea.title)}</h3>`
    : "";
  const parents = idea.parent_ids.length
    ? `<span class="parents">parents: ${idea.parent_ids.map(escapeHtml).join(", ")}</span>`
    : "";
  return (
    `<article class="idea-card" data-idea-id="${escapeHtml(idea.id)}">` +
    `<header><span class="pair-badge">${pair}</span>` +
    `${stageBadge(idea.stage)}` +
    `<span class="lineage-count" title="lineage entries">${idea.lineage.length}</span>` +
    `</header>` +
    title +
    `<p class="abstract">${escapeHtml(idea.abstract)}</p>` +
    `<footer>${parents}` +
    `<button data-action="polish" data-idea="${escapeHtml(idea.id)}">polish</button>` +
    `<button data-action="review" data-idea="${escapeHtml(idea.id)}">review</button>` +
    `<button data-action="procedure" data-idea="${escapeHtml(idea.id)}">procedure</button>` +
    `</footer></article>`
  );
}

export function renderBoard(ideas: IdeaRecord[]): string {
  if (ideas.length === 0) {
    return `<p class="board-empty">No ideas yet. Steer a pair to generate one.</p>`;
  }
  return `<div class="board" data-count="${ideas.length}">` +
    ideas.map(renderIdeaCard).join("") + `</div>`;
}

export function renderReview(report: ReviewReport): string {
  const section = (name: string, body: string) =>
    `<section class="review-${name.toLowerCase()}"><h4>${name}</h4>` +
    `<p>${escapeHtml(body)}</p></section>`;
  return (
    `<div class="review-panel" data-idea-id="${escapeHtml(report.idea_id)}">` +
    section("Summary", report.summary) +
    section("Strengths", report.strengths) +
    section("Weaknesses", report.weaknesses) +
    section("Conclusion", report.conclusion) +
    `</div>`
  );
}

export function renderProcedure(plan: ProcedurePlan): string {
  const steps = plan.steps
    .map((step) => `<li class="step">${escapeHtml(step)}</li>`)
    .join("");
  return `<div class="procedure-panel" data-idea-id="${escapeHtml(plan.idea_id)}">` +
    `<ol class="steps">${steps}</ol></div>`;
}

export function renderJobs(jobIds: string[]): string {
  if (jobIds.length === 0) return "";
  const chips = jobIds
    .map((id) => `<span class="job-chip">${escapeHtml(id.slice(0, 8))}…</span>`)
    .join("");
  return `<div class="jobs">running: ${chips}</div>`;
}
