// View state and its transitions. Every field holds data returned by the
// service API; the UI never synthesizes records of its own.

import type {
  IdeaRecord,
  ProcedurePlan,
  ReviewReport,
  TopicTree,
} from "./types.js";

export interface ViewState {
  tree: TopicTree | null;
  ideas: IdeaRecord[];
  selectedFirst: number | null;
  selectedSecond: number | null;
  activeJobs: string[];
  reviews: Record<string, ReviewReport>;
  procedures: Record<string, ProcedurePlan>;
  banner: string | null;
  toast: string | null;
}

export function initialState(): ViewState {
  return {
    tree: null,
    ideas: [],
    selectedFirst: null,
    selectedSecond: null,
    activeJobs: [],
    reviews: {},
    procedures: {},
    banner: null,
    toast: null,
  };
}

/** Merge fetched or freshly generated ideas; refresh is idempotent on id. */
export function mergeIdeas(state: ViewState, incoming: IdeaRecord[]): ViewState {
  const byId = new Map(state.ideas.map((idea) => [idea.id, idea]));
  for (const idea of incoming) byId.set(idea.id, idea);
  return { ...state, ideas: [...byId.values()] };
}

/** Toggle a topic into the manual pair selection; keeps first < second. */
export function selectTopic(state: ViewState, index: number): ViewState {
  let { selectedFirst: first, selectedSecond: second } = state;
  if (first === index) {
    first = second;
    second = null;
  } else if (second === index) {
    second = null;
  } else if (first === null) {
    first = index;
  } else if (second === null) {
    second = index;
  } else {
    first = index;
    second = null;
  }
  if (first !== null && second !== null && first > second) {
    [first, second] = [second, first];
  }
  return { ...state, selectedFirst: first, selectedSecond: second };
}

export function manualPair(state: ViewState): [number, number] | null {
  if (state.selectedFirst === null || state.selectedSecond === null) return null;
  return [state.selectedFirst, state.selectedSecond];
}
