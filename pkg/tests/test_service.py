import json

import pytest
from fastapi.testclient import TestClient

from conftest import learning_docs, learning_runtime, runtime_snapshot
from madp.runtime import Runtime
from madp.service import create_app


@pytest.fixture()
def rt(tmp_path):
    runtime = learning_runtime(tmp_path / "work")
    runtime.run_all()
    return runtime


@pytest.fixture()
def client(rt):
    return TestClient(create_app(rt))


def _doc_ids():
    a, b, c = learning_docs()
    return a["doc_id"], b["doc_id"], c["doc_id"]


class TestQueue:
    def test_lists_pending_oldest_first(self, client):
        tasks = client.get("/queue").json()["tasks"]
        assert [t["status"] for t in tasks] == ["pending"] * 3
        assert [t["opened_at"] for t in tasks] == sorted(t["opened_at"] for t in tasks)

    def test_status_filter(self, client):
        assert client.get("/queue", params={"status": "resolved"}).json()["tasks"] == []

    def test_invalid_status_400(self, client):
        resp = client.get("/queue", params={"status": "bogus"})
        assert resp.status_code == 400
        body = resp.json()
        assert body["code"] == 400 and "bogus" in body["message"]


class TestDocuments:
    def test_view_contains_everything_the_ui_needs(self, client):
        ida, _, _ = _doc_ids()
        doc = client.get(f"/documents/{ida}").json()
        assert doc["stage"] == "in_review"
        assert doc["markdown"].startswith("#")
        assert {f["field"] for f in doc["fields"]} >= {"invoice_date", "total_amount"}
        assert doc["thresholds"]["total_amount"] == 0.85
        assert doc["task"]["status"] == "pending"
        assert any(s["name"] == "invoice_number" and s["required"]
                   for s in doc["schema"])

    def test_unknown_doc_404(self, client):
        resp = client.get("/documents/nope")
        assert resp.status_code == 404
        assert resp.json() == {"code": 404, "message": "unknown document 'nope'"}


class TestCorrections:
    def test_correction_applies_and_inherits(self, client):
        a, b, _ = learning_docs()
        resp = client.post(f"/documents/{a['doc_id']}/corrections", json={
            "field": "invoice_number",
            "value": a["fields"]["invoice_number"]["value"]})
        assert resp.status_code == 200
        body = resp.json()
        assert body["inherited"] == 1
        assert body["task"]["status"] == "in_progress"
        corrected = next(f for f in body["document"]["fields"]
                         if f["field"] == "invoice_number")
        assert corrected["chosen"]["backend_id"] == "human"
        # inherited sibling resolved without human action
        sibling = client.get(f"/documents/{b['doc_id']}").json()
        assert sibling["task"]["resolution"] == "auto_after_inheritance"

    def test_unknown_field_422(self, client):
        ida, _, _ = _doc_ids()
        resp = client.post(f"/documents/{ida}/corrections",
                           json={"field": "frobnicator", "value": "x"})
        assert resp.status_code == 422

    def test_missing_body_field_422(self, client):
        ida, _, _ = _doc_ids()
        resp = client.post(f"/documents/{ida}/corrections", json={"value": "x"})
        assert resp.status_code == 422

    def test_unknown_doc_404(self, client):
        resp = client.post("/documents/nope/corrections",
                           json={"field": "notes", "value": "x"})
        assert resp.status_code == 404

    def test_resolved_task_409(self, client):
        ida, _, _ = _doc_ids()
        assert client.post(f"/documents/{ida}/confirm").status_code == 200
        resp = client.post(f"/documents/{ida}/corrections",
                           json={"field": "notes", "value": "changed"})
        assert resp.status_code == 409
        assert resp.json()["code"] == 409


class TestConfirm:
    def test_confirm_resolves_and_sets_full_confidence(self, client, rt):
        ida, _, _ = _doc_ids()
        resp = client.post(f"/documents/{ida}/confirm",
                           json={"review_seconds": 12.5})
        assert resp.status_code == 200
        assert resp.json()["status"] == "resolved"
        assert resp.json()["resolution"] == "confirmed"
        doc = client.get(f"/documents/{ida}").json()
        assert doc["stage"] == "accepted"
        assert all(f["chosen"]["confidence"] == 1.0 for f in doc["fields"])
        assert rt.stats().avg_review_seconds == 12.5

    def test_double_confirm_409(self, client):
        ida, _, _ = _doc_ids()
        client.post(f"/documents/{ida}/confirm")
        assert client.post(f"/documents/{ida}/confirm").status_code == 409


class TestStats:
    def test_counts(self, client):
        stats = client.get("/stats").json()
        assert stats["total_docs"] == 3
        assert stats["ai_completed"] == 3
        assert stats["fallback_docs"] == 0
        assert stats["review_rate"] == 1.0


class TestPrompts:
    def test_lineage_endpoint(self, client):
        a, _, _ = learning_docs()
        supplier, doc_type = a["category"]
        client.post(f"/documents/{a['doc_id']}/corrections", json={
            "field": "invoice_number",
            "value": a["fields"]["invoice_number"]["value"]})
        body = client.get(f"/prompts/{supplier}/{doc_type}/versions").json()
        assert body["head"] == "v2"
        assert [v["version_id"] for v in body["versions"]] == ["v1", "v2"]


class TestSustainabilityEndpoint:
    def test_scenario(self, client):
        body = client.get("/sustainability/report", params={"scenario": "pure_ai"}).json()
        assert body["annual"]["co2_tons"] == 3.1
        assert any(d["metric"] == "water_m3" for d in body["discrepancies"])

    def test_full_report(self, client):
        body = client.get("/sustainability/report").json()
        assert set(body["scenarios"]) == {"manual", "pure_ai", "ai_hitl"}

    def test_unknown_scenario_400(self, client):
        assert client.get("/sustainability/report",
                          params={"scenario": "warp"}).status_code == 400


class TestKillAndReplay:
    """Replaying any prefix of the event log reproduces the live state at that
    boundary; the full log reproduces /queue, /stats, and prompt heads."""

    def test_every_event_boundary(self, tmp_path):
        workdir = tmp_path / "live"
        workdir.mkdir()

        snapshots = []

        rt = learning_runtime(workdir, ingest=False)
        original_emit = rt._emit

        def snapshotting_emit(kind, doc_id, payload):
            event = original_emit(kind, doc_id, payload)
            snapshots.append(runtime_snapshot(rt))
            return event

        rt._emit = snapshotting_emit
        for doc in learning_docs():
            rt.ingest(doc["bundle"])
        rt.run_all()
        a, _, _ = learning_docs()
        rt.apply_correction(a["doc_id"], "invoice_number",
                            a["fields"]["invoice_number"]["value"])
        rt.confirm(a["doc_id"], review_seconds=30)

        lines = (workdir / "events.jsonl").read_text().splitlines()
        assert len(lines) == len(snapshots) > 20
        for k in range(1, len(lines) + 1):
            prefix_dir = tmp_path / f"replay{k}"
            prefix_dir.mkdir()
            (prefix_dir / "events.jsonl").write_text("\n".join(lines[:k]) + "\n")
            replayed = Runtime(workdir=prefix_dir)
            assert runtime_snapshot(replayed) == snapshots[k - 1], f"event {k}"

    def test_replayed_service_responses_identical(self, tmp_path):
        workdir = tmp_path / "live"
        workdir.mkdir()
        rt = learning_runtime(workdir)
        rt.run_all()
        a, _, _ = learning_docs()
        rt.apply_correction(a["doc_id"], "invoice_number",
                            a["fields"]["invoice_number"]["value"])
        live = TestClient(create_app(rt))
        replayed = TestClient(create_app(Runtime(workdir=workdir)))
        for path in ("/queue", "/stats",
                     f"/prompts/{a['category'][0]}/{a['category'][1]}/versions",
                     f"/documents/{a['doc_id']}"):
            assert live.get(path).json() == replayed.get(path).json(), path
