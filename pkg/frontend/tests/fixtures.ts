// Recorded API payloads (shapes captured from the live service) plus a
// builder for the 45-card combine response.

import type { IdeaRecord, ProcedurePlan, ReviewReport, TopicTree } from "../src/types.js";

export const TREE_FIXTURE: TopicTree = {
  built_from: "main",
  topic_count: 5,
  topics: [
    {
      index: 0,
      label: "Optimization",
      description: "Training dynamics, schedules, and convergence analyses.",
      source_links: [
        "https://proceedings.example/v235/sohrabi24a.pdf",
        "https://openreview.example/pdf?id=iKarSI2a73",
        "https://aclanthology.example/2024.emnlp-main.57.pdf",
        "https://aclanthology.example/2024.emnlp-main.27.pdf",
        "https://openreview.example/pdf?id=VNjJAWjuEU",
        "https://proceedings.example/v235/garcin24a.pdf",
      ],
    },
    {
      index: 1,
      label: "Language models",
      description: "Scaling, instruction tuning, and factual calibration.",
      source_links: [
        "https://aclanthology.example/2024.emnlp-main.90.pdf",
        "https://aclanthology.example/2024.acl-long.20.pdf",
      ],
    },
    {
      index: 2,
      label: "Prompt engineering",
      description: "Template design and demonstration selection.",
      source_links: ["https://aclanthology.example/2024.acl-long.51.pdf"],
    },
    {
      index: 3,
      label: "Adversarial attacks",
      description: "Threat models and certified defenses.",
      source_links: [
        "https://openreview.example/pdf?id=OQQoD8Vc3B",
        "https://proceedings.example/v235/wang24cn.pdf",
      ],
    },
    {
      index: 4,
      label: "Benchmarking",
      description: "Protocols, contamination checks, and leaderboards.",
      source_links: [
        "https://aclanthology.example/2024.emnlp-main.19.pdf",
        "https://aclanthology.example/2024.acl-long.83.pdf",
        "https://openreview.example/pdf?id=jze2r6RDFz",
      ],
    },
  ],
};

export const MANUAL_IDEA: IdeaRecord = {
  id: "idea-manual-02",
  pair: { first: 0, second: 2, selection_mode: "manual" },
  abstract:
    "We propose a framework that recombines optimization schedules with " +
    "prompt search, yielding a tunable curriculum over instructions.",
  title: null,
  stage: "initial",
  lineage: [{ op: "generate", fingerprint: "a".repeat(64), at: 0 }],
  parent_ids: [],
};

export const POLISHED_IDEA: IdeaRecord = {
  ...MANUAL_IDEA,
  id: "idea-polished-02",
  title: "A Grounded Recombination Framework",
  stage: "polished",
  lineage: [
    { op: "generate", fingerprint: "a".repeat(64), at: 0 },
    { op: "polish", fingerprint: "b".repeat(64), at: 1 },
  ],
  parent_ids: [MANUAL_IDEA.id],
};

export function combinedIdeas(count = 10): IdeaRecord[] {
  const parents = Array.from({ length: count }, (_, i) => `top-${i}`);
  const out: IdeaRecord[] = [];
  for (let i = 0; i < parents.length; i++) {
    for (let j = i + 1; j < parents.length; j++) {
      out.push({
        id: `combined-${i}-${j}`,
        pair: { first: 0, second: 1, selection_mode: "exhaustive" },
        abstract: `merged idea of ${parents[i]} and ${parents[j]}`,
        title: null,
        stage: "combined",
        lineage: [{ op: "combine", fingerprint: "c".repeat(64), at: i }],
        parent_ids: [parents[i], parents[j]],
      });
    }
  }
  return out;
}

export const REVIEW_FIXTURE: ReviewReport = {
  type: "review",
  idea_id: "idea-polished-02",
  summary: "A plausible recombination with a concrete plan.",
  strengths: "Grounded in retrieved sources.",
  weaknesses: "Feasibility depends on dataset access.",
  conclusion: "Worth prototyping.",
};

export const PROCEDURE_FIXTURE: ProcedurePlan = {
  type: "procedure",
  idea_id: "idea-polished-02",
  steps: [
    "Gather background context from the cited corpora.",
    "Retrieve related methods and baselines.",
    "Implement the combined system end to end.",
    "Run ablations isolating each thread's contribution.",
    "Evaluate with held-out benchmarks and expert review.",
  ],
};
