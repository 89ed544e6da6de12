from __future__ import annotations

import time

import pytest
from fastapi.testclient import TestClient

from vlcomplexity.service import create_app


@pytest.fixture()
def client():
    return TestClient(create_app())


@pytest.fixture()
def empty_scene_dict(empty_doc):
    return empty_doc.to_dict()


def make_session(client, doc_dict, path="main"):
    r = client.post("/api/sessions", json={"scene": doc_dict, "path": path})
    assert r.status_code == 201, r.text
    return r.json()


class TestSessionLifecycle:
    def test_create_returns_report(self, client, empty_scene_dict):
        body = make_session(client, empty_scene_dict)
        assert body["report"]["overall_class"] == 1
        assert body["scene_hash"]
        assert body["path_name"] == "main"

    def test_fresh_report_equals_creation_report(self, client, empty_scene_dict):
        body = make_session(client, empty_scene_dict)
        r = client.get(f"/api/sessions/{body['session']}/report")
        assert r.status_code == 200
        assert r.json()["report"] == body["report"]
        assert r.json()["scene_hash"] == body["scene_hash"]

    def test_scene_round_trips(self, client, empty_scene_dict):
        body = make_session(client, empty_scene_dict)
        r = client.get(f"/api/sessions/{body['session']}/scene")
        assert r.status_code == 200
        assert r.json()["scene"] == empty_scene_dict

    def test_unknown_session_404(self, client):
        assert client.get("/api/sessions/nope/report").status_code == 404
        assert client.get("/api/sessions/nope/scene").status_code == 404
        assert client.post("/api/sessions/nope/undo").status_code == 404

    def test_malformed_json_400(self, client):
        r = client.post(
            "/api/sessions", content=b"{broken", headers={"content-type": "application/json"}
        )
        assert r.status_code == 400

    def test_schema_error_400_with_pointer(self, client, empty_scene_dict):
        bad = dict(empty_scene_dict)
        del bad["units"]
        r = client.post("/api/sessions", json={"scene": bad})
        assert r.status_code == 400
        assert r.json()["pointer"] == "/units"

    def test_unknown_path_422(self, client, empty_scene_dict):
        r = client.post("/api/sessions", json={"scene": empty_scene_dict, "path": "nope"})
        assert r.status_code == 422

    def test_geometry_invariant_422(self, client, empty_scene_dict):
        bad = dict(empty_scene_dict)
        bad["walls"] = [{"ring": [[0, 0], [2, 2], [2, 0], [0, 2]]}]
        r = client.post("/api/sessions", json={"scene": bad})
        assert r.status_code == 422


class TestManipulateEndpoint:
    def test_manipulate_updates_report_and_scene(self, client, l_doc):
        body = make_session(client, l_doc.to_dict())
        sid = body["session"]
        r = client.post(
            f"/api/sessions/{sid}/manipulate",
            json={"target_class": 3.0, "seed": 42, "budget": 400},
        )
        assert r.status_code == 200, r.text
        payload = r.json()
        assert payload["scene_hash"] != body["scene_hash"] or payload["result"]["converged"]
        # No-stale-report invariant: GET report equals the embedded one.
        r2 = client.get(f"/api/sessions/{sid}/report")
        assert r2.json()["report"] == payload["report"]
        r3 = client.get(f"/api/sessions/{sid}/scene")
        assert r3.json()["scene_hash"] == payload["scene_hash"]

    def test_conflict_when_busy(self, client, empty_scene_dict):
        body = make_session(client, empty_scene_dict)
        sid = body["session"]
        app = client.app
        session = app.state.store.get(sid)
        assert session.lock.acquire(blocking=False)
        try:
            r = client.post(f"/api/sessions/{sid}/manipulate", json={"target_class": 2.0})
            assert r.status_code == 409
            r2 = client.post(f"/api/sessions/{sid}/undo")
            assert r2.status_code == 409
        finally:
            session.lock.release()

    def test_infeasible_422(self, client, empty_scene_dict):
        body = make_session(client, empty_scene_dict)
        r = client.post(
            f"/api/sessions/{body['session']}/manipulate",
            json={"segment": 0, "attribute": "clutter", "segment_target": 5, "overall_target": 1.0},
        )
        assert r.status_code == 422

    def test_segment_manipulation(self, client, new_doc):
        body = make_session(client, new_doc.to_dict())
        r = client.post(
            f"/api/sessions/{body['session']}/manipulate",
            json={
                "segment": 0,
                "attribute": "clutter",
                "segment_target": 4,
                "overall_target": 3.0,
                "seed": 42,
                "budget": 5000,
            },
        )
        assert r.status_code == 200, r.text
        payload = r.json()
        seg0 = payload["report"]["segments"][0]
        assert seg0["attributes"]["clutter"]["class"] == 4
        assert 2.75 <= payload["report"]["aggregate_mean"] <= 3.25

    def test_async_job_flow(self, client, empty_scene_dict):
        body = make_session(client, empty_scene_dict)
        sid = body["session"]
        r = client.post(
            f"/api/sessions/{sid}/manipulate",
            json={"target_class": 1.0, "seed": 0, "budget": 25000},
        )
        assert r.status_code == 202
        poll = r.json()["poll"]
        deadline = time.time() + 30
        status = None
        while time.time() < deadline:
            jr = client.get(poll)
            assert jr.status_code == 200
            status = jr.json()["status"]
            if status != "running":
                break
            time.sleep(0.05)
        assert status == "done"
        jr = client.get(poll)
        assert jr.json()["report"]["overall_class"] == 1

    def test_job_unknown_404(self, client, empty_scene_dict):
        body = make_session(client, empty_scene_dict)
        r = client.get(f"/api/sessions/{body['session']}/jobs/nope")
        assert r.status_code == 404


class TestUndo:
    def test_manipulate_then_undo_restores_hash(self, client, l_doc):
        body = make_session(client, l_doc.to_dict())
        sid = body["session"]
        client.post(f"/api/sessions/{sid}/manipulate", json={"target_class": 3.0, "seed": 1, "budget": 300})
        r = client.post(f"/api/sessions/{sid}/undo")
        assert r.status_code == 200
        assert r.json()["scene_hash"] == body["scene_hash"]

    def test_undo_at_initial_state_conflicts(self, client, empty_scene_dict):
        body = make_session(client, empty_scene_dict)
        r = client.post(f"/api/sessions/{body['session']}/undo")
        assert r.status_code == 409

    def test_two_manipulations_two_undos(self, client, l_doc):
        body = make_session(client, l_doc.to_dict())
        sid = body["session"]
        client.post(f"/api/sessions/{sid}/manipulate", json={"target_class": 3.0, "seed": 1, "budget": 200})
        client.post(f"/api/sessions/{sid}/manipulate", json={"target_class": 2.0, "seed": 2, "budget": 200})
        client.post(f"/api/sessions/{sid}/undo")
        r = client.post(f"/api/sessions/{sid}/undo")
        assert r.status_code == 200
        assert r.json()["scene_hash"] == body["scene_hash"]


class TestIsolationAndExpiry:
    def test_sessions_are_isolated(self, client, empty_scene_dict, l_doc):
        a = make_session(client, empty_scene_dict)
        b = make_session(client, l_doc.to_dict())
        client.post(f"/api/sessions/{b['session']}/manipulate", json={"target_class": 3.0, "seed": 5, "budget": 200})
        r = client.get(f"/api/sessions/{a['session']}/report")
        assert r.json()["report"] == a["report"]

    def test_ttl_eviction(self, empty_scene_dict):
        client = TestClient(create_app(ttl_seconds=0.0))
        body = make_session(client, empty_scene_dict)
        time.sleep(0.01)
        r = client.get(f"/api/sessions/{body['session']}/report")
        assert r.status_code == 404

    def test_snapshot_persistence(self, tmp_path, empty_scene_dict):
        app = create_app(snapshot_dir=str(tmp_path))
        with TestClient(app) as client:
            body = make_session(client, empty_scene_dict)
            sid = body["session"]
        # Shutdown wrote snapshots; a new app loads them back.
        app2 = create_app(snapshot_dir=str(tmp_path))
        with TestClient(app2) as client2:
            r = client2.get(f"/api/sessions/{sid}/report")
            assert r.status_code == 200
            assert r.json()["report"] == body["report"]


class TestConfigOverride:
    def test_session_config_changes_classification(self, client, l_doc):
        doc = l_doc.to_dict()
        base = make_session(client, doc)
        # Saturating rotation at a tiny cap pushes the rotation class to 5.
        r = client.post(
            "/api/sessions",
            json={"scene": doc, "path": "main", "config": {"rotation_degrees_cap": 1.0}},
        )
        assert r.status_code == 201
        tuned = r.json()
        assert tuned["config_hash"] != base["config_hash"]
        assert tuned["report"]["attributes"]["rotation"]["class"] == 5

    def test_bad_config_rejected(self, client, empty_scene_dict):
        r = client.post(
            "/api/sessions",
            json={"scene": empty_scene_dict, "config": {"bin_edges": [0.9, 0.1, 0.5, 0.7]}},
        )
        assert r.status_code == 400
