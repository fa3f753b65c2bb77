"""Model backend adapters: a deterministic scripted backend for tests and
fixtures, and a JSON-over-HTTP chat-completion adapter for real models."""

from __future__ import annotations

import json
from typing import Any, Optional


class Backend:
    backend_id: str

    def complete(self, prompt: str, meta: dict[str, Any]) -> str:
        raise NotImplementedError


class ScriptedBackend(Backend):
    """Replays canned answers keyed by (doc_id, prompt_version).

    Answer entries:
      {"fields": {...}}                        plain response
      {"raw": "..."}                           literal response text (e.g. non-JSON)
      {"requires": "<substring>",
       "fields": {...}, "degraded_fields": {}} degraded answer when the prompt
                                               lacks the substring (layout-
                                               sensitive fixtures)
    Version key "*" matches any prompt version.
    """

    def __init__(self, backend_id: str, answers: Optional[dict[str, dict[str, dict]]] = None):
        self.backend_id = backend_id
        self.answers: dict[str, dict[str, dict]] = answers or {}

    def add(self, doc_id: str, version: str, entry: dict) -> None:
        self.answers.setdefault(doc_id, {})[version] = entry

    def complete(self, prompt: str, meta: dict[str, Any]) -> str:
        doc_id = meta.get("doc_id", "")
        version = meta.get("prompt_version", "*")
        per_doc = self.answers.get(doc_id, {})
        entry = per_doc.get(version, per_doc.get("*"))
        if entry is None:
            return json.dumps({"fields": {}})
        if "raw" in entry:
            return entry["raw"]
        fields = entry.get("fields", {})
        marker = entry.get("requires")
        if marker is not None and marker not in prompt:
            fields = entry.get("degraded_fields", {})
        return json.dumps({"fields": fields})


class HttpBackend(Backend):
    """Chat-completion-style endpoint: POST {prompt, max_tokens, temperature} -> {text}."""

    def __init__(self, backend_id: str, endpoint: str, timeout_ms: int = 30000,
                 max_tokens: int = 2048, client=None):
        import httpx
        self.backend_id = backend_id
        self.endpoint = endpoint
        self.timeout_s = timeout_ms / 1000.0
        self.max_tokens = max_tokens
        self._client = client or httpx.Client(timeout=self.timeout_s)

    def complete(self, prompt: str, meta: dict[str, Any]) -> str:
        response = self._client.post(self.endpoint, json={
            "prompt": prompt,
            "max_tokens": self.max_tokens,
            "temperature": 0,
        })
        response.raise_for_status()
        return response.json()["text"]


def backend_from_config(entry: dict, scripted_answers: Optional[dict] = None) -> Backend:
    """Registry entry: {backend_id, kind: scripted|http, endpoint?, timeout_ms?}."""
    kind = entry.get("kind", "scripted")
    if kind == "scripted":
        answers = (scripted_answers or {}).get(entry["backend_id"], {})
        return ScriptedBackend(entry["backend_id"], answers)
    if kind == "http":
        return HttpBackend(entry["backend_id"], entry["endpoint"],
                           timeout_ms=entry.get("timeout_ms", 30000))
    raise ValueError(f"unknown backend kind {kind!r}")
