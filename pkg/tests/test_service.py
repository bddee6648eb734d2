"""HTTP service contract: chat sessions, inspection endpoints, usage log."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from graphchat.build import load_assignments, load_engine
from graphchat.engine import EngineConfig
from graphchat.errors import ProviderError
from graphchat.kg.artifacts import load_manifest
from graphchat.service import EngineState, ServiceState, TokenBucket, create_app
from graphchat.sessions import SessionStore
from graphchat.usagelog import UsageEvent, UsageLog, utc_now

from .conftest import make_pipeline_provider


@pytest.fixture
def service(tmp_path, built_dir, pipeline_provider):
    engine, manifest = load_engine(
        built_dir,
        pipeline_provider,
        EngineConfig(entity_threshold=0.05, chunk_threshold=0.05),
    )
    state = ServiceState(
        engine_state=EngineState(
            engine=engine,
            manifest=manifest,
            assignments=load_assignments(built_dir),
            provider_kind="mock",
        ),
        sessions=SessionStore(tmp_path / "sessions.db"),
        usage=UsageLog(tmp_path / "usage.jsonl"),
        debug=True,
    )
    client = TestClient(create_app(state))
    return client, state, built_dir


class TestHealth:
    def test_before_build(self, tmp_path):
        state = ServiceState(
            engine_state=None,
            sessions=SessionStore(tmp_path / "s.db"),
            usage=UsageLog(tmp_path / "u.jsonl"),
        )
        client = TestClient(create_app(state))
        assert client.get("/health").json() == {"built": False}

    def test_after_build(self, service):
        client, _, _ = service
        body = client.get("/health").json()
        assert body["built"] is True
        assert body["provider"]["reachable"] is True


class TestChat:
    def test_round_trip_creates_session(self, service):
        client, state, _ = service
        resp = client.post("/chat", json={"question": "what is a pipeline in streamlib?"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["session_id"]
        assert body["answer"]
        assert body["latency_ms"] >= 0
        session = state.sessions.get(body["session_id"])
        assert [t.role for t in session.turns] == ["user", "assistant"]

    def test_empty_question_400(self, service):
        client, _, _ = service
        resp = client.post("/chat", json={"question": "   "})
        assert resp.status_code == 400
        assert resp.json()["error"]["type"] == "empty_question"

    def test_unbuilt_503(self, tmp_path):
        state = ServiceState(
            engine_state=None,
            sessions=SessionStore(tmp_path / "s.db"),
            usage=UsageLog(tmp_path / "u.jsonl"),
        )
        client = TestClient(create_app(state))
        resp = client.post("/chat", json={"question": "hello"})
        assert resp.status_code == 503

    def test_history_included_in_second_prompt(self, service):
        client, state, _ = service
        first = client.post(
            "/chat", json={"question": "what is the streamlib window feature?"}
        ).json()
        sid = first["session_id"]
        client.post("/chat", json={"session_id": sid, "question": "and how does it relate to pipelines?"})
        provider = state.engine_state.engine.provider
        prompts = provider.chat_prompts()
        assert "what is the streamlib window feature?" in prompts[-1]
        assert first["answer"] in prompts[-1]

    def test_debug_endpoint_exposes_prompts(self, service):
        client, _, _ = service
        client.post("/chat", json={"question": "streamlib pipelines?"})
        prompts = client.get("/debug/prompts").json()["prompts"]
        assert any("streamlib pipelines?" in p for p in prompts)

    def test_session_isolation(self, service):
        client, state, _ = service
        a = client.post("/chat", json={"question": "first session question about windows"}).json()
        b = client.post("/chat", json={"question": "second session question about pipelines"}).json()
        assert a["session_id"] != b["session_id"]
        sa = state.sessions.get(a["session_id"])
        sb = state.sessions.get(b["session_id"])
        assert all("second session" not in t.content for t in sa.turns)
        assert all("first session" not in t.content for t in sb.turns)

    def test_provider_failure_502_session_untouched(self, service, built_dir, tmp_path):
        class Exploding:
            def __init__(self, inner):
                self.inner = inner

            def embed_texts(self, texts):
                return self.inner.embed_texts(texts)

            def complete_chat(self, req):
                raise ProviderError(500, "backend down")

            def ping(self):
                return False

        provider = Exploding(make_pipeline_provider())
        engine, manifest = load_engine(built_dir, provider)
        state = ServiceState(
            engine_state=EngineState(engine=engine, manifest=manifest),
            sessions=SessionStore(tmp_path / "s2.db"),
            usage=UsageLog(tmp_path / "u2.jsonl"),
        )
        client = TestClient(create_app(state))
        resp = client.post("/chat", json={"session_id": "sx", "question": "boom?"})
        assert resp.status_code == 502
        assert resp.json()["error"]["type"] == "provider_failure"
        assert state.sessions.get("sx") is None
        assert state.usage.events() == []

    def test_usage_event_per_assistant_turn(self, service):
        client, state, _ = service
        client.post("/chat", json={"question": "log me a streamlib question"})
        events = state.usage.events()
        assert len(events) == 1
        assert events[0].question == "log me a streamlib question"
        assert events[0].mode == "local"

    def test_mode_validated(self, service):
        client, _, _ = service
        resp = client.post("/chat", json={"question": "q", "mode": "psychic"})
        assert resp.status_code == 400

    def test_unknown_session_id_is_adopted(self, service):
        client, state, _ = service
        resp = client.post(
            "/chat", json={"session_id": "client-chosen", "question": "streamlib?"}
        )
        assert resp.status_code == 200
        assert resp.json()["session_id"] == "client-chosen"
        assert state.sessions.get("client-chosen") is not None

    def test_faq_without_store_yields_typed_outcome(self, service):
        client, state, _ = service
        resp = client.post("/chat", json={"question": "streamlib?", "mode": "faq"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["outcome"] == "no_match"
        assert body["answer"]  # human-readable text, never silently empty
        session = state.sessions.get(body["session_id"])
        assert [t.role for t in session.turns] == ["user", "assistant"]


class TestInspection:
    def test_graph_summary(self, service):
        client, _, built = service
        manifest = load_manifest(built)
        body = client.get("/graph/summary").json()
        assert body["entities"] == manifest["graph"]["entities"]
        assert body["relationships"] == manifest["graph"]["relationships"]

    def test_communities_level_zero(self, service):
        client, _, built = service
        rows = client.get("/graph/communities", params={"level": 0}).json()
        assignments = [a for a in load_assignments(built) if a.level == 0]
        assert len(rows) == len(assignments)

    def test_unknown_level_404(self, service):
        client, _, _ = service
        assert client.get("/graph/communities", params={"level": 99}).status_code == 404

    def test_report_lookup_and_404(self, service):
        client, state, _ = service
        reports = state.engine_state.engine.reports
        assert reports
        ok = client.get(f"/reports/{reports[0].community_id}")
        assert ok.status_code == 200
        assert ok.json()["summary"]
        assert client.get("/reports/unknown").status_code == 404


class TestRateLimit:
    def test_bucket_blocks_after_capacity(self):
        bucket = TokenBucket(capacity=2, refill_per_s=0.0)
        assert bucket.allow("ip")
        assert bucket.allow("ip")
        assert not bucket.allow("ip")
        assert bucket.allow("other-ip")


class TestReloadAndStatic:
    def test_admin_reload_swaps_snapshot(self, tmp_path, built_dir, pipeline_provider):
        engine, manifest = load_engine(built_dir, pipeline_provider)
        fresh = EngineState(engine=engine, manifest=manifest)

        state = ServiceState(
            engine_state=None,
            sessions=SessionStore(tmp_path / "s.db"),
            usage=UsageLog(tmp_path / "u.jsonl"),
        )
        client = TestClient(create_app(state, reloader=lambda: fresh))
        assert client.get("/health").json() == {"built": False}
        assert client.post("/admin/reload").json() == {"built": True}
        assert client.get("/health").json()["built"] is True

    def test_admin_reload_failure_kept_alive(self, tmp_path):
        def broken():
            raise RuntimeError("no artifacts")

        state = ServiceState(
            engine_state=None,
            sessions=SessionStore(tmp_path / "s.db"),
            usage=UsageLog(tmp_path / "u.jsonl"),
        )
        client = TestClient(create_app(state, reloader=broken))
        resp = client.post("/admin/reload")
        assert resp.status_code == 500
        assert client.get("/health").json() == {"built": False}

    def test_static_frontend_served(self, tmp_path):
        ui = tmp_path / "dist"
        ui.mkdir()
        (ui / "index.html").write_text("<!doctype html><title>graphchat</title>")
        state = ServiceState(
            engine_state=None,
            sessions=SessionStore(tmp_path / "s.db"),
            usage=UsageLog(tmp_path / "u.jsonl"),
        )
        client = TestClient(create_app(state, frontend_dir=ui))
        resp = client.get("/ui/")
        assert resp.status_code == 200
        assert "graphchat" in resp.text


class TestUsageLogRecovery:
    def event(self, i):
        return UsageEvent(
            timestamp=utc_now(),
            session_id=f"s{i}",
            mode="local",
            question=f"q{i}",
            answer=f"a{i}",
            latency_ms=1.0,
        )

    def test_append_only(self, tmp_path):
        logf = UsageLog(tmp_path / "u.jsonl")
        logf.append(self.event(1))
        logf.append(self.event(2))
        lines = (tmp_path / "u.jsonl").read_text().splitlines()
        assert len(lines) == 2
        assert json.loads(lines[0])["question"] == "q1"

    def test_truncated_final_line_quarantined(self, tmp_path):
        path = tmp_path / "u.jsonl"
        logf = UsageLog(path)
        logf.append(self.event(1))
        logf.append(self.event(2))
        with open(path, "a", encoding="utf-8") as fh:
            fh.write('{"timestamp": "2024-01-01T00:00:00Z", "session_id": "s3", "mo')
        # restart
        recovered = UsageLog(path)
        assert recovered.quarantined == 1
        events = recovered.events()
        assert [e.question for e in events] == ["q1", "q2"]
        quarantine = path.with_suffix(".jsonl.quarantine")
        assert quarantine.exists()
        assert '"s3"' in quarantine.read_text()
        # appends still work after recovery
        recovered.append(self.event(4))
        assert [e.question for e in recovered.events()] == ["q1", "q2", "q4"]
