// Thin typed client for the ideaforge service. Long-running POSTs follow the
// job contract: a 202 response carries {job_id}; the client polls
// GET /api/jobs/{id} until the job settles and resolves with its result.

import type {
  ApiError,
  IdeaRecord,
  IdeationMode,
  JobStatus,
  PolishResult,
  ProcedurePlan,
  ReviewReport,
  TopicTree,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  readonly category: string;

  constructor(err: ApiError) {
    super(err.message);
    this.category = err.category;
  }
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (u, i) => fetch(u, i),
    private readonly pollIntervalMs: number = 250,
  ) {}

  private async parseError(response: Response): Promise<ServiceError> {
    let payload: ApiError;
    try {
      payload = (await response.json()) as ApiError;
    } catch {
      payload = { category: "internal", message: `HTTP ${response.status}` };
    }
    return new ServiceError(payload);
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path);
    if (!response.ok) throw await this.parseError(response);
    return (await response.json()) as T;
  }

  /** POST that transparently follows the 202 + job-poll contract. */
  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (response.status === 202) {
      const { job_id } = (await response.json()) as { job_id: string };
      return this.awaitJob<T>(job_id);
    }
    if (!response.ok) throw await this.parseError(response);
    return (await response.json()) as T;
  }

  async awaitJob<T>(jobId: string): Promise<T> {
    for (;;) {
      const job = await this.get<JobStatus>(`/api/jobs/${jobId}`);
      if (job.status === "done") return job.result as T;
      if (job.status === "failed") {
        throw new ServiceError(
          job.error ?? { category: "internal", message: "job failed" },
        );
      }
      await sleep(this.pollIntervalMs);
    }
  }

  topics(): Promise<TopicTree> {
    return this.get<TopicTree>("/api/topics");
  }

  ideas(): Promise<IdeaRecord[]> {
    return this.get<IdeaRecord[]>("/api/ideas");
  }

  buildTree(topics?: number): Promise<TopicTree> {
    return this.post<TopicTree>("/api/tree", topics ? { topics } : {});
  }

  ideate(
    mode: IdeationMode,
    topics?: [number, number],
    seed?: number,
  ): Promise<IdeaRecord[]> {
    return this.post<IdeaRecord[]>("/api/ideas", { mode, topics, seed });
  }

  polish(ideaId: string): Promise<PolishResult> {
    return this.post<PolishResult>(`/api/ideas/${ideaId}/polish`, {});
  }

  review(ideaId: string): Promise<ReviewReport> {
    return this.post<ReviewReport>(`/api/ideas/${ideaId}/review`, {});
  }

  procedure(ideaId: string): Promise<ProcedurePlan> {
    return this.post<ProcedurePlan>(`/api/ideas/${ideaId}/procedure`, {});
  }

  combine(topK: number): Promise<IdeaRecord[]> {
    return this.post<IdeaRecord[]>("/api/ideas/combine", { top_k: topK });
  }

  qa(question: string): Promise<{ question: string; text: string; source_ids: string[] }> {
    return this.post("/api/qa", { question });
  }
}
