import json
from concurrent.futures import ThreadPoolExecutor

import pytest
from fastapi.testclient import TestClient

from facetlens.service import create_app


@pytest.fixture()
def client(workspace):
    return TestClient(create_app(workspace))


def _create_session(client, session_id="walk", dims=("gender", "ses")):
    r = client.post("/sessions", json={
        "dimension_ids": list(dims),
        "use_case_id": "checkout",
        "id": session_id,
        "author": "amy",
    })
    assert r.status_code == 201, r.text
    return r.json()["payload"]


def _judgment_body(version, code="seen-it", state="payment",
                   facet="attitude-toward-risk", side="MIN"):
    return {
        "expected_version": version,
        "state_id": state,
        "facet_id": facet,
        "side": side,
        "author": "amy",
        "issues": [{"code": code, "message": "Observed in the flow.", "severity": "high"}],
    }


def test_healthz(client):
    r = client.get("/healthz")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_envelope_shape_everywhere(client):
    ok = client.get("/dimensions").json()
    assert set(ok) == {"status", "payload"} and ok["status"] == "ok"
    err = client.get("/results/nope").json()
    assert err["status"] == "error"
    assert set(err["error"]) == {"code", "message"}


def test_dimension_catalog_and_join(client):
    r = client.get("/dimensions")
    ids = [d["id"] for d in r.json()["payload"]]
    assert ids == ["age", "gender", "ses"]
    r = client.post("/dimensions/join", json={"ids": ["gender", "ses"]})
    assert r.status_code == 201
    doc = r.json()["payload"]
    assert doc["id"] == "gender+ses"
    assert len(doc["facets"]) == 8
    # the joined dimension is persisted and shows up in the catalog
    r = client.get("/dimensions")
    assert "gender+ses" in [d["id"] for d in r.json()["payload"]]


def test_post_dimension_validates(client):
    r = client.post("/dimensions", json={"kind": "dimension", "format_version": 1})
    assert r.status_code == 400
    body = r.json()
    assert body["error"]["code"] == "schema_error"


def test_ruleset_upload_round_trip(client):
    text = 'rule extra : facet motivations MIN when has(steps_remaining) => "Needs a map."\n'
    r = client.post("/rulesets", json={"id": "extra", "text": text})
    assert r.status_code == 201
    r = client.get("/rulesets")
    by_id = {x["id"]: x["text"] for x in r.json()["payload"]}
    assert by_id["extra"] == text  # stored verbatim, comments and all
    r = client.post("/rulesets", json={"id": "bad", "text": "rule nope"})
    assert r.status_code == 422
    assert r.json()["error"]["code"] == "parse_error"


def test_session_lifecycle(client):
    sess = _create_session(client)
    assert sess["version"] == 1 and sess["status"] == "OPEN"

    r = client.post("/sessions/walk/judgments", json=_judgment_body(1))
    assert r.status_code == 200
    assert r.json()["payload"]["version"] == 2

    stale = client.post("/sessions/walk/judgments", json=_judgment_body(1, code="again"))
    assert stale.status_code == 409
    body = stale.json()
    assert body["error"]["code"] == "version_conflict"
    assert body["version"] == 2  # current version rides along for retry

    r = client.post("/sessions/walk/close", json={"expected_version": 2})
    assert r.status_code == 200
    assert r.json()["payload"]["status"] == "CLOSED"

    r = client.get("/sessions/walk/result", params={"save": "true"})
    assert r.status_code == 200
    doc = r.json()["payload"]
    assert [i["code"] for i in doc["issues"]] == ["seen-it"]

    r = client.get("/results/walk")
    assert r.status_code == 200
    assert r.json()["payload"] == doc


def test_session_get_is_enriched(client):
    _create_session(client, session_id="rich")
    r = client.get("/sessions/rich")
    assert r.status_code == 200
    payload = r.json()["payload"]
    assert payload["session"]["id"] == "rich"
    assert {d["id"] for d in payload["dimensions"]} == {"gender", "ses"}
    assert payload["use_case"]["id"] == "checkout"
    assert len(payload["use_case"]["states"]) == 4


def test_session_survives_restart(client, workspace):
    _create_session(client, session_id="durable")
    client.post("/sessions/durable/judgments", json=_judgment_body(1))
    fresh = TestClient(create_app(workspace))
    r = fresh.get("/sessions/durable")
    assert r.status_code == 200
    assert r.json()["payload"]["session"]["version"] == 2


def test_judgment_error_codes(client):
    _create_session(client, session_id="errs")
    r = client.post("/sessions/errs/judgments", json=_judgment_body(1, facet="fine-motor-control"))
    assert r.status_code == 422
    assert r.json()["error"]["code"] == "out_of_scope"
    r = client.post("/sessions/errs/judgments", json={"expected_version": 1})
    assert r.status_code == 400
    r = client.post("/sessions/nope/judgments", json=_judgment_body(1))
    assert r.status_code == 404
    r = client.post(
        "/sessions/errs/judgments",
        content=b"{not json",
        headers={"content-type": "application/json"},
    )
    assert r.status_code == 400


def test_concurrent_submits_yield_one_winner(client):
    _create_session(client, session_id="race")

    def submit(i):
        return client.post(
            "/sessions/race/judgments",
            json=_judgment_body(1, code=f"race-{i}"),
        ).status_code

    with ThreadPoolExecutor(max_workers=8) as pool:
        codes = list(pool.map(submit, range(8)))
    assert codes.count(200) == 1
    assert codes.count(409) == 7


def test_results_merge_and_verify(client, workspace):
    # two single-dimension sessions, merged server-side
    for sid, dim, facet in (
        ("left", "gender", "motivations"),
        ("right", "ses", "access-to-reliable-technology"),
    ):
        _create_session(client, session_id=sid, dims=(dim,))
        r = client.post(
            f"/sessions/{sid}/judgments",
            json=_judgment_body(1, code=f"{sid}-issue", facet=facet),
        )
        assert r.status_code == 200
        client.get(f"/sessions/{sid}/result", params={"save": "true"})

    r = client.post("/results/merge", json={"result_ids": ["left", "right"], "save_as": "both"})
    assert r.status_code == 200
    codes = {i["code"] for i in r.json()["payload"]["issues"]}
    assert codes == {"left-issue", "right-issue"}
    assert (workspace / "both.result.json").exists()

    r = client.post("/results/verify-merge", json={"result_ids": ["left", "right"]})
    assert r.status_code == 200
    assert r.json()["payload"]["equal"] is True

    r = client.get("/results/both/coverage")
    assert r.status_code == 200
    cells = r.json()["payload"]["cells"]
    assert len(cells) == 2 * 8 * 4


def test_verify_endpoint(client):
    r = client.post("/verify", json={
        "dimension_ids": ["gender", "ses"],
        "use_case_id": "checkout",
        "rule_set_id": "base",
    })
    assert r.status_code == 200
    payload = r.json()["payload"]
    assert payload["equal"] is True
    assert payload["joined_issues"] == 31
    r = client.post("/verify", json={
        "dimension_ids": ["gender"], "use_case_id": "checkout", "rule_set_id": "base",
    })
    assert r.status_code == 400


def test_api_result_matches_direct_engine_bytes(client, workspace):
    """Saving through the API and writing via the library agree byte for byte."""
    from facetlens.store import load_dimension, load_rules, load_use_case, save_result
    from facetlens.evaluate import merge_results
    from facetlens.session import (
        Judgment,
        ReportedIssue,
        create_session,
        record_judgment,
        session_result,
    )
    from facetlens.core import Extreme

    _create_session(client, session_id="twin")
    body = _judgment_body(1, code="twin-issue")
    r = client.post("/sessions/twin/judgments", json=body)
    ts = None
    for j in r.json()["payload"]["judgments"]:
        ts = j["timestamp"]
    client.get("/sessions/twin/result", params={"save": "true"})

    gender = load_dimension(workspace / "gender.dim.json")
    ses = load_dimension(workspace / "ses.dim.json")
    checkout = load_use_case(workspace / "checkout.usecase.json")
    twin = create_session([gender, ses], checkout, id="twin")
    twin = record_judgment(
        twin,
        Judgment(
            state_id="payment", facet_id="attitude-toward-risk", side=Extreme.MIN,
            issues=(ReportedIssue("twin-issue", "Observed in the flow.", "high"),),
            author="amy", timestamp=ts,
        ),
        expected_version=1,
    )
    save_result(session_result(twin), workspace / "direct.result.json")
    api_bytes = (workspace / "twin.result.json").read_bytes()
    direct_bytes = (workspace / "direct.result.json").read_bytes()
    assert api_bytes == direct_bytes
