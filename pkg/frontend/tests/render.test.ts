import { describe, expect, it } from "vitest";

import {
  renderBanner,
  renderBoard,
  renderIdeaCard,
  renderPairControls,
  renderProcedure,
  renderReview,
  renderTree,
} from "../src/render.js";
import { initialState, selectTopic } from "../src/state.js";
import {
  MANUAL_IDEA,
  POLISHED_IDEA,
  PROCEDURE_FIXTURE,
  REVIEW_FIXTURE,
  TREE_FIXTURE,
  combinedIdeas,
} from "./fixtures.js";

const count = (haystack: string, needle: string) =>
  haystack.split(needle).length - 1;

describe("tree view", () => {
  it("renders one expandable node per topic in the payload", () => {
    const html = renderTree(TREE_FIXTURE, initialState());
    expect(count(html, '<details class="topic-node"')).toBe(5);
    expect(html).toContain('data-count="5"');
    for (const topic of TREE_FIXTURE.topics) {
      expect(html).toContain(topic.label);
    }
  });

  it("renders six source rows for the six-link topic", () => {
    const html = renderTree(TREE_FIXTURE, initialState());
    const optimization = html.split("<details")[1];
    expect(count(optimization, 'class="source-row"')).toBe(6);
    expect(optimization).toContain("https://proceedings.example/v235/sohrabi24a.pdf");
  });

  it("shows a build-tree call to action when there is no tree", () => {
    const html = renderTree(null, initialState());
    expect(html).toContain('data-action="build-tree"');
    expect(html).not.toContain("topic-node");
  });

  it("marks selected topics", () => {
    const state = selectTopic(initialState(), 2);
    const html = renderTree(TREE_FIXTURE, state);
    expect(count(html, "topic-node selected")).toBe(1);
  });
});

describe("pair controls", () => {
  it("shows the manual pair badge once two topics are picked", () => {
    let state = initialState();
    state = selectTopic(state, 2);
    state = selectTopic(state, 0);
    const html = renderPairControls(state);
    expect(html).toContain("0×2");
    expect(html).not.toContain("disabled");
  });

  it("disables manual generation without a full pair", () => {
    const html = renderPairControls(selectTopic(initialState(), 1));
    expect(html).toContain("disabled");
  });
});

describe("idea board", () => {
  it("renders a manual pair card with badge and stage", () => {
    const html = renderIdeaCard(MANUAL_IDEA);
    expect(html).toContain("0×2");
    expect(html).toContain("stage-initial");
    expect(html).toContain('data-idea-id="idea-manual-02"');
    expect(html).toContain('data-action="polish"');
    expect(html).toContain('data-action="review"');
    expect(html).toContain('data-action="procedure"');
  });

  it("polished cards show the new stage and one more lineage entry", () => {
    const before = renderIdeaCard(MANUAL_IDEA);
    const after = renderIdeaCard(POLISHED_IDEA);
    expect(before).toContain('title="lineage entries">1<');
    expect(after).toContain('title="lineage entries">2<');
    expect(after).toContain("stage-polished");
    expect(after).toContain("A Grounded Recombination Framework");
  });

  it("renders 45 cards for a combine response", () => {
    const combined = combinedIdeas(10);
    expect(combined).toHaveLength(45);
    const html = renderBoard(combined);
    expect(count(html, '<article class="idea-card"')).toBe(45);
    expect(count(html, "stage-combined")).toBe(45);
    expect(html).toContain('data-count="45"');
  });

  it("escapes markup in abstracts", () => {
    const hostile = { ...MANUAL_IDEA, abstract: '<script>alert("x")</script>' };
    const html = renderIdeaCard(hostile);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("report panels", () => {
  it("renders the four review sections", () => {
    const html = renderReview(REVIEW_FIXTURE);
    for (const section of ["Summary", "Strengths", "Weaknesses", "Conclusion"]) {
      expect(html).toContain(`<h4>${section}</h4>`);
    }
    expect(html).toContain("Grounded in retrieved sources.");
  });

  it("renders numbered procedure steps", () => {
    const html = renderProcedure(PROCEDURE_FIXTURE);
    expect(count(html, '<li class="step">')).toBe(5);
  });

  it("banner carries the machine category", () => {
    const html = renderBanner("store-uninitialized", "run ingest first");
    expect(html).toContain("store-uninitialized");
    expect(html).toContain("run ingest first");
  });
});
