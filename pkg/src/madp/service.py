"""Review HTTP service: queue, corrections, confirmation, prompt lineage,
pipeline statistics, and sustainability reports over a shared runtime.

All responses are JSON; errors use {"code": <http status>, "message": <text>}.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .prompts import version_to_json
from .runtime import (NoopCorrectionError, Runtime, TaskStateError,
                      UnknownDocumentError, UnknownFieldError)
from .sustainability import full_report, scenario_report


class CorrectionRequest(BaseModel):
    field: str
    value: str
    reviewer_id: str = "reviewer"


class ConfirmRequest(BaseModel):
    review_seconds: Optional[float] = None


def create_app(runtime: Runtime) -> FastAPI:
    app = FastAPI(title="document review service")
    app.state.runtime = runtime

    @app.exception_handler(HTTPException)
    async def _http_error(request: Request, exc: HTTPException):
        return JSONResponse(status_code=exc.status_code,
                            content={"code": exc.status_code, "message": str(exc.detail)})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422,
                            content={"code": 422, "message": str(exc.errors())})

    @app.get("/queue")
    def get_queue(status: Optional[str] = None):
        try:
            return {"tasks": runtime.queue(status)}
        except ValueError as exc:
            raise HTTPException(400, str(exc))

    @app.get("/documents/{doc_id}")
    def get_document(doc_id: str):
        try:
            return runtime.document_view(doc_id)
        except UnknownDocumentError:
            raise HTTPException(404, f"unknown document {doc_id!r}")

    @app.post("/documents/{doc_id}/corrections")
    def post_correction(doc_id: str, body: CorrectionRequest):
        try:
            result = runtime.apply_correction(doc_id, body.field, body.value,
                                              reviewer_id=body.reviewer_id)
        except UnknownDocumentError:
            raise HTTPException(404, f"unknown document {doc_id!r}")
        except TaskStateError as exc:
            raise HTTPException(409, str(exc))
        except UnknownFieldError as exc:
            raise HTTPException(422, f"unknown field {exc}")
        except NoopCorrectionError as exc:
            raise HTTPException(422, str(exc))
        result["document"] = runtime.document_view(doc_id)
        return result

    @app.post("/documents/{doc_id}/confirm")
    def post_confirm(doc_id: str, body: Optional[ConfirmRequest] = None):
        seconds = body.review_seconds if body is not None else None
        try:
            return runtime.confirm(doc_id, review_seconds=seconds)
        except UnknownDocumentError:
            raise HTTPException(404, f"unknown document {doc_id!r}")
        except TaskStateError as exc:
            raise HTTPException(409, str(exc))

    @app.get("/stats")
    def get_stats():
        s = runtime.stats()
        return {
            "total_docs": s.total_docs,
            "ai_completed": s.ai_completed,
            "fallback_docs": s.fallback_docs,
            "review_rate": s.review_rate,
            "automation_rate": s.automation_rate,
            "avg_review_seconds": s.avg_review_seconds,
        }

    @app.get("/prompts/{supplier}/{doc_type}/versions")
    def get_prompt_versions(supplier: str, doc_type: str):
        lineage = runtime.prompts.lineage((supplier, doc_type))
        return {"category": [supplier, doc_type],
                "head": lineage[-1].version_id if lineage else None,
                "versions": [version_to_json(v) for v in lineage]}

    @app.get("/sustainability/report")
    def get_sustainability(scenario: Optional[str] = None):
        if scenario is None:
            return full_report()
        try:
            return scenario_report(scenario).to_json()
        except ValueError as exc:
            raise HTTPException(400, str(exc))

    return app
