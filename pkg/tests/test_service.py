"""The HTTP sessions: evidence workflow, parity with the library, persistence."""

from concurrent.futures import ThreadPoolExecutor

import pytest
from fastapi.testclient import TestClient

from mast import model_io
from mast.inference import posterior
from mast.model import build_model, infer_training
from mast.service import create_app

TABLE1_IMPACTS = [6, 9, 2, 4]
TABLE1_EVIDENCE = {
    "software": "Possible",
    "new_staff": "Remote",
    "quality": "Possible",
    "environment": "Probable",
}


@pytest.fixture()
def client():
    return TestClient(create_app())


def make_session(client, impacts=TABLE1_IMPACTS, base_cost=None):
    body = {"impacts": impacts}
    if base_cost is not None:
        body["base_cost"] = base_cost
    response = client.post("/api/models", json=body)
    assert response.status_code == 201, response.text
    return response.json()


def set_table1_evidence(client, model_id):
    for factor, state in TABLE1_EVIDENCE.items():
        response = client.put(f"/api/models/{model_id}/evidence/{factor}",
                              json={"state": state})
        assert response.status_code == 200, response.text


class TestHealthAndCreate:
    def test_health(self, client):
        assert client.get("/api/health").json() == {"status": "ok"}

    def test_create_echoes_factors(self, client):
        created = make_session(client)
        assert created["revision"] == 0
        labels = {f["id"]: f["label"] for f in created["factors"]}
        assert labels["software"] == "Lack of experience with project software"
        assert labels["new_staff"] == "Newly Appointed Staff"
        impacts = {f["id"]: f["impact"] for f in created["factors"]}
        assert impacts == {"software": 6, "new_staff": 9, "quality": 2, "environment": 4}

    def test_out_of_range_impact_names_index(self, client):
        response = client.post("/api/models", json={"impacts": [6, 9, 4, 11]})
        assert response.status_code == 422
        locs = [error["loc"] for error in response.json()["detail"]]
        assert any(loc[-1] == 3 for loc in locs)

    def test_wrong_arity_rejected(self, client):
        assert client.post("/api/models", json={"impacts": [6, 9, 4]}).status_code == 422

    def test_zero_impacts_infer_zero(self, client):
        created = make_session(client, impacts=[0, 0, 0, 0])
        result = client.post(f"/api/models/{created['model_id']}/infer").json()
        assert result["probability"] == 0.0


class TestEvidence:
    def test_put_and_clear(self, client):
        model_id = make_session(client)["model_id"]
        put = client.put(f"/api/models/{model_id}/evidence/software",
                         json={"state": "Possible"})
        assert put.status_code == 200 and put.json()["revision"] == 1
        cleared = client.delete(f"/api/models/{model_id}/evidence/software")
        assert cleared.status_code == 200 and cleared.json()["revision"] == 2
        snapshot = client.get(f"/api/models/{model_id}").json()
        assert snapshot["evidence"] == {}

    def test_clear_reverts_to_prior(self, client):
        model_id = make_session(client)["model_id"]
        set_table1_evidence(client, model_id)
        client.delete(f"/api/models/{model_id}/evidence/new_staff")
        result = client.post(f"/api/models/{model_id}/infer").json()
        model = build_model(TABLE1_IMPACTS)
        partial = {k: v for k, v in TABLE1_EVIDENCE.items() if k != "new_staff"}
        assert result["probability"] == infer_training(model, partial).probability

    def test_unknown_state_lists_options(self, client):
        model_id = make_session(client)["model_id"]
        response = client.put(f"/api/models/{model_id}/evidence/software",
                              json={"state": "Maybe"})
        assert response.status_code == 422
        assert "Probable, Possible, Remote" in response.json()["detail"]

    def test_unknown_factor_404(self, client):
        model_id = make_session(client)["model_id"]
        assert client.put(f"/api/models/{model_id}/evidence/ghost",
                          json={"state": "Remote"}).status_code == 404

    def test_unknown_model_404(self, client):
        assert client.put("/api/models/nope/evidence/software",
                          json={"state": "Remote"}).status_code == 404
        assert client.post("/api/models/nope/infer").status_code == 404

    def test_repeated_put_is_idempotent_but_bumps_revision(self, client):
        model_id = make_session(client)["model_id"]
        first = client.put(f"/api/models/{model_id}/evidence/software",
                           json={"state": "Possible"}).json()
        second = client.put(f"/api/models/{model_id}/evidence/software",
                            json={"state": "Possible"}).json()
        assert second["revision"] == first["revision"] + 1
        snapshot = client.get(f"/api/models/{model_id}").json()
        assert snapshot["evidence"] == {"software": "Possible"}


class TestInfer:
    def test_table1_scenario(self, client):
        model_id = make_session(client)["model_id"]
        set_table1_evidence(client, model_id)
        before = client.get(f"/api/models/{model_id}").json()["revision"]
        result = client.post(f"/api/models/{model_id}/infer").json()
        assert result["probability"] == pytest.approx(0.3, abs=1e-12)
        assert result["percentage"] == pytest.approx(30.0, abs=1e-10)
        assert result["cost"] == pytest.approx(30000.0, abs=1e-9)
        assert result["revision"] == before  # read-only
        assert client.get(f"/api/models/{model_id}").json()["revision"] == before

    def test_parity_with_library_bit_for_bit(self, client):
        model_id = make_session(client)["model_id"]
        set_table1_evidence(client, model_id)
        result = client.post(f"/api/models/{model_id}/infer").json()
        model = build_model(TABLE1_IMPACTS)
        estimate = infer_training(model, TABLE1_EVIDENCE)
        post = posterior(model.diagram, TABLE1_EVIDENCE, "training")
        assert result["probability"] == estimate.probability
        assert result["percentage"] == estimate.percentage
        assert result["cost"] == estimate.cost
        assert result["posterior"] == dict(post.probabilities)

    def test_fresh_session_marginalizes(self, client):
        model_id = make_session(client)["model_id"]
        result = client.post(f"/api/models/{model_id}/infer").json()
        model = build_model(TABLE1_IMPACTS)
        assert result["probability"] == infer_training(model, {}).probability

    def test_all_remote(self, client):
        model_id = make_session(client)["model_id"]
        for factor in TABLE1_EVIDENCE:
            client.put(f"/api/models/{model_id}/evidence/{factor}",
                       json={"state": "Remote"})
        result = client.post(f"/api/models/{model_id}/infer").json()
        assert result["probability"] == 0.0 and result["cost"] == 0.0


class TestPatchImpactsAndExport:
    def test_patch_rebuilds_and_preserves_evidence(self, client):
        model_id = make_session(client)["model_id"]
        set_table1_evidence(client, model_id)
        patched = client.patch(f"/api/models/{model_id}/impacts",
                               json={"impacts": [10, 10, 10, 10]})
        assert patched.status_code == 200
        assert patched.json()["evidence"] == TABLE1_EVIDENCE
        result = client.post(f"/api/models/{model_id}/infer").json()
        fresh = infer_training(build_model([10, 10, 10, 10]), TABLE1_EVIDENCE)
        assert result["probability"] == fresh.probability

    def test_export_xdsl_round_trips(self, client):
        model_id = make_session(client)["model_id"]
        response = client.get(f"/api/models/{model_id}/export", params={"format": "xdsl"})
        assert response.status_code == 200
        assert "xdsl" in response.headers["content-disposition"]
        diagram = model_io.import_xdsl(response.content)
        expected = build_model(TABLE1_IMPACTS).diagram
        assert diagram.chance_node("training").cpt.columns == \
            expected.chance_node("training").cpt.columns

    def test_export_native_includes_evidence(self, client):
        model_id = make_session(client)["model_id"]
        set_table1_evidence(client, model_id)
        response = client.get(f"/api/models/{model_id}/export", params={"format": "native"})
        document = model_io.load_document(response.content)
        assert document.evidence == TABLE1_EVIDENCE

    def test_unknown_format_rejected(self, client):
        model_id = make_session(client)["model_id"]
        assert client.get(f"/api/models/{model_id}/export",
                          params={"format": "pdf"}).status_code == 422


class TestSensitivity:
    def test_rows_match_infer_calls(self, client):
        model_id = make_session(client)["model_id"]
        set_table1_evidence(client, model_id)
        result = client.post(f"/api/models/{model_id}/sensitivity",
                             json={"vary": "new_staff"}).json()
        assert result["target_state"] == "Yes"
        for row in result["rows"]:
            client.put(f"/api/models/{model_id}/evidence/new_staff",
                       json={"state": row["state"]})
            inferred = client.post(f"/api/models/{model_id}/infer").json()
            assert row["posterior"] == inferred["posterior"]
            assert row["expected_utility"] == inferred["cost"]

    def test_unknown_vary_rejected(self, client):
        model_id = make_session(client)["model_id"]
        response = client.post(f"/api/models/{model_id}/sensitivity",
                               json={"vary": "ghost"})
        assert response.status_code == 422
        assert "software" in response.json()["detail"]


class TestConcurrencyAndPersistence:
    def test_mutations_serialize(self, client):
        model_id = make_session(client)["model_id"]
        states = ["Probable", "Possible", "Remote"]

        def hammer(i):
            response = client.put(
                f"/api/models/{model_id}/evidence/software",
                json={"state": states[i % 3]})
            return response.status_code

        with ThreadPoolExecutor(max_workers=8) as pool:
            codes = list(pool.map(hammer, range(40)))
        assert codes == [200] * 40
        snapshot = client.get(f"/api/models/{model_id}").json()
        assert snapshot["revision"] == 40

    def test_infer_sees_consistent_snapshots_under_writes(self, client):
        # Each infer response must be internally consistent: its probability
        # must equal a fresh library run on the evidence it reports, and both
        # must belong to the revision it is tagged with.
        model_id = make_session(client)["model_id"]
        states = ["Probable", "Possible", "Remote"]
        model = build_model(TABLE1_IMPACTS)

        def write(i):
            factor = ["software", "new_staff", "quality", "environment"][i % 4]
            return client.put(f"/api/models/{model_id}/evidence/{factor}",
                              json={"state": states[i % 3]}).status_code

        def read(_):
            payload = client.post(f"/api/models/{model_id}/infer").json()
            expected = infer_training(model, payload["evidence"])
            assert payload["probability"] == expected.probability
            return 200

        with ThreadPoolExecutor(max_workers=8) as pool:
            writes = pool.map(write, range(24))
            reads = pool.map(read, range(24))
            assert all(code == 200 for code in list(writes) + list(reads))
        assert client.get(f"/api/models/{model_id}").json()["revision"] == 24

    def test_snapshot_restore(self, tmp_path):
        first = TestClient(create_app(snapshot_dir=str(tmp_path)))
        model_id = make_session(first)["model_id"]
        set_table1_evidence(first, model_id)

        second = TestClient(create_app(snapshot_dir=str(tmp_path)))
        snapshot = second.get(f"/api/models/{model_id}")
        assert snapshot.status_code == 200
        assert snapshot.json()["evidence"] == TABLE1_EVIDENCE
        result = second.post(f"/api/models/{model_id}/infer").json()
        assert result["probability"] == pytest.approx(0.3, abs=1e-12)
