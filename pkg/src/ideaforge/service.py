"""HTTP service over the same application context the CLI uses.

Every request runs on a fresh AppContext so state always comes from the
persisted stores (exactly like a CLI invocation) and deterministic runs
produce byte-identical records on either surface.

Long-running generation follows a job contract: handlers wait up to 2 seconds
for completion and return 200 with the result, otherwise 202 with a job id to
poll at GET /api/jobs/{id}. Errors are structured {category, message}.
"""

from __future__ import annotations

import threading
import uuid
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .app import AppContext
from .errors import IdeaForgeError, NotFound, StoreUninitialized, UsageError
from .ideation import IdeaRecord

ContextFactory = Callable[[], AppContext]

JOB_WAIT_S = 2.0

_STATUS = {
    UsageError.category: 400,
    "validation-error": 400,
    NotFound.category: 404,
    StoreUninitialized.category: 409,
    "empty-collection": 409,
    "insufficient-topics": 400,
    "insufficient-ideas": 400,
    "no-review-corpus": 409,
}


class Job:
    def __init__(self, job_id: str):
        self.id = job_id
        self.status = "running"
        self.result = None
        self.error: dict | None = None
        self.done = threading.Event()


class JobManager:
    def __init__(self):
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()

    def submit(self, fn: Callable[[], object]) -> Job:
        job = Job(uuid.uuid4().hex)
        with self._lock:
            self._jobs[job.id] = job

        def run():
            try:
                job.result = fn()
                job.status = "done"
            except IdeaForgeError as exc:
                job.status = "failed"
                job.error = {"category": exc.category, "message": exc.message}
            except ValueError as exc:
                job.status = "failed"
                job.error = {"category": "validation-error", "message": str(exc)}
            except Exception as exc:  # noqa: BLE001
                job.status = "failed"
                job.error = {"category": "internal", "message": str(exc)}
            finally:
                job.done.set()

        threading.Thread(target=run, daemon=True).start()
        return job

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)


def _idea_payload(record: IdeaRecord) -> dict:
    return record.to_dict()


class IngestBody(BaseModel):
    local_dir: str | None = None
    source: str | None = None
    limit: int | None = None


class TreeBody(BaseModel):
    topics: int | None = None


class IdeasBody(BaseModel):
    mode: str
    topics: list[int] | None = None
    seed: int | None = None


class CombineBody(BaseModel):
    top_k: int = 10


class QaBody(BaseModel):
    question: str


class EvalBody(BaseModel):
    idea_ids: list[str]
    exemplars: str
    corpus: str | None = None


def build_app(make_ctx: ContextFactory) -> FastAPI:
    app = FastAPI(title="ideaforge", docs_url=None, redoc_url=None)
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    jobs = JobManager()

    @app.exception_handler(IdeaForgeError)
    async def _domain_error(_request: Request, exc: IdeaForgeError):
        status = _STATUS.get(exc.category, 500)
        return JSONResponse(status_code=status,
                            content={"category": exc.category, "message": exc.message})

    @app.exception_handler(ValueError)
    async def _value_error(_request: Request, exc: ValueError):
        return JSONResponse(status_code=400,
                            content={"category": "validation-error",
                                     "message": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def _body_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"category": "validation-error",
                                     "message": str(exc.errors()[:3])})

    @app.exception_handler(Exception)
    async def _unexpected(_request: Request, exc: Exception):
        return JSONResponse(status_code=500,
                            content={"category": "internal",
                                     "message": str(exc)})

    def run_job(fn: Callable[[], object]):
        job = jobs.submit(fn)
        if job.done.wait(JOB_WAIT_S):
            if job.status == "failed":
                status = _STATUS.get(job.error["category"], 500)
                return JSONResponse(status_code=status, content=job.error)
            return job.result
        return JSONResponse(status_code=202, content={"job_id": job.id,
                                                      "status": job.status})

    @app.get("/api/topics")
    def get_topics():
        tree = make_ctx().load_tree()
        return tree.to_dict()

    @app.post("/api/ingest")
    def post_ingest(body: IngestBody):
        return run_job(lambda: make_ctx().op_ingest(local_dir=body.local_dir,
                                             source=body.source,
                                             limit=body.limit))

    @app.post("/api/tree")
    def post_tree(body: TreeBody):
        return run_job(lambda: make_ctx().op_tree_build(body.topics).to_dict())

    @app.post("/api/ideas/combine")
    def post_combine(body: CombineBody):
        return run_job(lambda: [_idea_payload(r)
                                for r in make_ctx().op_combine(body.top_k)])

    @app.post("/api/ideas")
    def post_ideas(body: IdeasBody):
        topics = tuple(body.topics) if body.topics else None
        if topics is not None and len(topics) != 2:
            raise UsageError("topics must be a pair of indices")
        return run_job(lambda: [_idea_payload(r)
                                for r in make_ctx().op_ideate(body.mode, topics=topics,
                                                       seed=body.seed)])

    @app.get("/api/ideas")
    def get_ideas():
        return [_idea_payload(r) for r in make_ctx().ideas.records()]

    @app.post("/api/ideas/{idea_id}/polish")
    def post_polish(idea_id: str):
        def work():
            result = make_ctx().op_refine(idea_id, rounds=1)
            return {"idea": _idea_payload(result["idea"]),
                    "empty_harvest": result["empty_harvest"],
                    "references": result["references"]}
        return run_job(work)

    @app.post("/api/ideas/{idea_id}/review")
    def post_review(idea_id: str):
        return run_job(lambda: make_ctx().op_review(idea_id).to_dict())

    @app.post("/api/ideas/{idea_id}/procedure")
    def post_procedure(idea_id: str):
        return run_job(lambda: make_ctx().op_procedure(idea_id).to_dict())

    @app.post("/api/qa")
    def post_qa(body: QaBody):
        answer = make_ctx().op_qa(body.question)
        return {"question": answer.question, "text": answer.text,
                "source_ids": answer.source_ids}

    @app.post("/api/eval")
    def post_eval(body: EvalBody):
        def work():
            result = make_ctx().op_eval(body.idea_ids, body.exemplars, corpus=body.corpus)
            return {
                "report": result["report"],
                "scores": [vars(s) for s in result["scores"]],
                "similarities": [vars(s) for s in result["similarities"]],
            }
        return run_job(work)

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise NotFound(f"no job {job_id!r}")
        payload = {"job_id": job.id, "status": job.status}
        if job.status == "done":
            payload["result"] = job.result
        if job.error is not None:
            payload["error"] = job.error
        return payload

    return app


def serve(make_ctx: ContextFactory, host: str = "127.0.0.1", port: int = 8700):
    import uvicorn

    uvicorn.run(build_app(make_ctx), host=host, port=port, log_level="warning")
