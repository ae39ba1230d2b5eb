import { describe, expect, it } from "vitest";

import { ApiClient, ServiceError, type FetchLike } from "../src/api.js";
import { MANUAL_IDEA, TREE_FIXTURE, combinedIdeas } from "./fixtures.js";

type Route = (init?: RequestInit) => { status: number; body: unknown };

function fakeFetch(routes: Record<string, Route>, log: string[] = []): FetchLike {
  return async (url, init) => {
    const key = `${init?.method ?? "GET"} ${url}`;
    log.push(key);
    const route = routes[key];
    if (!route) {
      return new Response(JSON.stringify({ category: "not-found", message: key }),
        { status: 404, headers: { "Content-Type": "application/json" } });
    }
    const { status, body } = route(init);
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
}

describe("ApiClient", () => {
  it("fetches the topic tree", async () => {
    const client = new ApiClient("", fakeFetch({
      "GET /api/topics": () => ({ status: 200, body: TREE_FIXTURE }),
    }));
    const tree = await client.topics();
    expect(tree.topics).toHaveLength(5);
    expect(tree.topics[0].source_links).toHaveLength(6);
  });

  it("posts the manual pair and returns the idea cards", async () => {
    let sent: unknown = null;
    const client = new ApiClient("", fakeFetch({
      "POST /api/ideas": (init) => {
        sent = JSON.parse(String(init?.body));
        return { status: 200, body: [MANUAL_IDEA] };
      },
    }));
    const ideas = await client.ideate("manual", [0, 2]);
    expect(sent).toEqual({ mode: "manual", topics: [0, 2] });
    expect(ideas[0].pair).toMatchObject({ first: 0, second: 2 });
  });

  it("returns 45 ideas from combine", async () => {
    const client = new ApiClient("", fakeFetch({
      "POST /api/ideas/combine": () => ({ status: 200, body: combinedIdeas(10) }),
    }));
    const combined = await client.combine(10);
    expect(combined).toHaveLength(45);
  });

  it("follows the 202 + job-poll contract", async () => {
    let polls = 0;
    const log: string[] = [];
    const client = new ApiClient("", fakeFetch({
      "POST /api/tree": () => ({ status: 202, body: { job_id: "j1" } }),
      "GET /api/jobs/j1": () => {
        polls += 1;
        return polls < 3
          ? { status: 200, body: { job_id: "j1", status: "running" } }
          : { status: 200, body: { job_id: "j1", status: "done", result: TREE_FIXTURE } };
      },
    }, log), 1);
    const tree = await client.buildTree();
    expect(tree.topic_count).toBe(5);
    expect(polls).toBe(3);
    expect(log[0]).toBe("POST /api/tree");
  });

  it("surfaces failed jobs as ServiceError with the category", async () => {
    const client = new ApiClient("", fakeFetch({
      "POST /api/ideas": () => ({ status: 202, body: { job_id: "j2" } }),
      "GET /api/jobs/j2": () => ({
        status: 200,
        body: {
          job_id: "j2",
          status: "failed",
          error: { category: "insufficient-topics", message: "need 2" },
        },
      }),
    }), 1);
    await expect(client.ideate("distant")).rejects.toMatchObject({
      category: "insufficient-topics",
    });
  });

  it("turns structured error responses into ServiceError", async () => {
    const client = new ApiClient("", fakeFetch({
      "GET /api/topics": () => ({
        status: 409,
        body: { category: "store-uninitialized", message: "no tree" },
      }),
    }));
    const failure = await client.topics().catch((e) => e);
    expect(failure).toBeInstanceOf(ServiceError);
    expect(failure.category).toBe("store-uninitialized");
    expect(failure.message).toBe("no tree");
  });

  it("polish resolves with the refined idea payload", async () => {
    const client = new ApiClient("", fakeFetch({
      "POST /api/ideas/idea-manual-02/polish": () => ({
        status: 200,
        body: { idea: { ...MANUAL_IDEA, stage: "polished" }, empty_harvest: false, references: 3 },
      }),
    }));
    const result = await client.polish("idea-manual-02");
    expect(result.idea.stage).toBe("polished");
    expect(result.references).toBe(3);
  });
});
