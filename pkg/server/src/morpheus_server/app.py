"""HTTP face of the adapters: POST /score in, scores out.

The request and response bodies follow the sentence-scoring wire schema
used by the attack tooling: flat JSON, task-dependent context fields,
order-aligned scores.  Malformed requests get 400 (not FastAPI's default
422); a missing model gets 503.
"""
from typing import Literal, Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from .adapters import Adapter


class ScoreRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    task: Literal["qa", "mt", "generic"]
    candidates: list[str] = Field(min_length=1)
    passage: Optional[str] = None
    gold_answers: Optional[list[str]] = None
    reference: Optional[str] = None


class ScoreResponse(BaseModel):
    scores: list[float]
    lower_is_worse: bool


def build_app(adapter: Optional[Adapter], max_batch: int = 256) -> FastAPI:
    """The service; `adapter=None` models "not ready yet" and yields 503."""
    app = FastAPI(title="sentence scoring server")

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"detail": exc.errors()})

    @app.post("/score", response_model=ScoreResponse)
    def score(req: ScoreRequest) -> ScoreResponse:
        if adapter is None:
            raise HTTPException(status_code=503, detail="model not ready")
        if len(req.candidates) > max_batch:
            raise HTTPException(
                status_code=400,
                detail=f"batch of {len(req.candidates)} exceeds "
                       f"max_batch={max_batch}")
        if req.task == "qa" and (req.passage is None
                                 or req.gold_answers is None):
            raise HTTPException(status_code=400,
                                detail="qa needs passage and gold_answers")
        if req.task == "mt" and req.reference is None:
            raise HTTPException(status_code=400,
                                detail="mt needs a reference")
        accepted = adapter.accepted_tasks
        if accepted is not None and req.task not in accepted:
            raise HTTPException(
                status_code=400,
                detail=f"adapter serves {sorted(accepted)}, got "
                       f"{req.task!r}")
        scores, lower_is_worse = adapter.score(
            req.task, req.candidates, req.passage, req.gold_answers,
            req.reference)
        return ScoreResponse(scores=scores, lower_is_worse=lower_is_worse)

    return app
