// Payload shapes of the ideaforge HTTP API. The UI renders these verbatim;
// it never fabricates values of its own.

export interface Topic {
  index: number;
  label: string;
  description: string;
  source_links: string[];
}

export interface TopicTree {
  built_from: string;
  topic_count: number;
  topics: Topic[];
}

export interface TopicPair {
  first: number;
  second: number;
  selection_mode: string;
  witness?: [string, string, number];
}

export interface LineageEntry {
  op: string;
  fingerprint: string;
  at: number;
}

export interface IdeaRecord {
  id: string;
  pair: TopicPair;
  abstract: string;
  title: string | null;
  stage: "initial" | "polished" | "combined";
  lineage: LineageEntry[];
  parent_ids: string[];
}

export interface ReviewReport {
  type: "review";
  idea_id: string;
  summary: string;
  strengths: string;
  weaknesses: string;
  conclusion: string;
}

export interface ProcedurePlan {
  type: "procedure";
  idea_id: string;
  steps: string[];
}

export interface PolishResult {
  idea: IdeaRecord;
  empty_harvest: boolean;
  references: number;
}

export interface ApiError {
  category: string;
  message: string;
}

export interface JobStatus {
  job_id: string;
  status: "running" | "done" | "failed";
  result?: unknown;
  error?: ApiError;
}

export type IdeationMode = "distant" | "random" | "manual" | "all";
