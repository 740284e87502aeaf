import io
import json
import zipfile

import numpy as np
import pytest
from fastapi.testclient import TestClient

from plateforge import build_index, load_stl
from plateforge.catalog import catalog, model_by_id
from plateforge.pipeline import run_plan
from plateforge.service import create_app

import meshes


@pytest.fixture
def client(plane_mesh):
    return TestClient(create_app(mesh=plane_mesh))


@pytest.fixture
def seeded(client):
    r = client.post(
        "/seed",
        json={"point": [0.0, 0.0, 5.0], "angle_deg": 0.0, "model_id": "M-4138"},
    )
    assert r.status_code == 200
    return client


class TestMesh:
    def test_mesh_payload(self, client, plane_mesh):
        r = client.get("/mesh")
        assert r.status_code == 200
        assert len(r.content) == 84 + 50 * plane_mesh.n_faces
        assert int(r.headers["X-Face-Count"]) == plane_mesh.n_faces
        bbox = json.loads(r.headers["X-Bbox"])
        assert bbox["min"][0] == -30.0

    def test_mesh_repeatable(self, client):
        assert client.get("/mesh").content == client.get("/mesh").content

    def test_no_mesh_503(self):
        bare = TestClient(create_app(mesh=None))
        assert bare.get("/mesh").status_code == 503

    def test_catalog(self, client):
        doc = client.get("/catalog").json()
        lengths = {m["id"]: m["overall_length_mm"] for m in doc["models"]}
        assert lengths == {"M-4138": 23.0, "M-4320": 29.0, "M-4322": 35.0}


class TestSeed:
    def test_valid_seed(self, client):
        r = client.post(
            "/seed",
            json={"point": [0, 0, 5.0], "angle_deg": 0.0, "model_id": "M-4138", "step_mm": 0.5},
        )
        doc = r.json()
        assert len(doc["points"]) == 47
        assert doc["model_id"] == "M-4138"
        assert doc["step_mm"] == 0.5
        assert doc["truncated"] == [False, False]
        assert set(doc["seed"]) == {"anchor", "N", "D"}

    def test_unknown_model_400(self, client):
        r = client.post("/seed", json={"point": [0, 0, 5.0], "model_id": "M-9999"})
        assert r.status_code == 400
        assert "M-4138" in json.dumps(r.json())

    def test_full_turn_equals_zero(self, client):
        a = client.post(
            "/seed", json={"point": [0, 0, 5.0], "angle_deg": 0.0, "model_id": "M-4138"}
        ).json()
        b = client.post(
            "/seed", json={"point": [0, 0, 5.0], "angle_deg": 360.0, "model_id": "M-4138"}
        ).json()
        pa = np.array([p["p"] for p in a["points"]])
        pb = np.array([p["p"] for p in b["points"]])
        np.testing.assert_allclose(pa, pb, atol=1e-9)

    def test_reseed_replaces_frame(self, seeded):
        r = seeded.post(
            "/seed", json={"point": [5.0, 0, 5.0], "angle_deg": 0.0, "model_id": "M-4138"}
        )
        anchor = r.json()["seed"]["anchor"]
        np.testing.assert_allclose(anchor, [5, 0, 0], atol=1e-9)


class TestRotate:
    def test_rotate_before_seed_409(self, client):
        assert client.post("/rotate", json={"delta_ticks": 1}).status_code == 409

    def test_one_tick_is_wheel_step(self, seeded):
        doc = seeded.post("/rotate", json={"delta_ticks": 1}).json()
        d = np.array(doc["seed"]["D"])
        want = [np.cos(np.radians(5)), np.sin(np.radians(5)), 0.0]
        np.testing.assert_allclose(d, want, atol=1e-12)

    def test_full_turn_restores(self, seeded):
        before = seeded.post("/rotate", json={"delta_ticks": 0}).json()
        after = seeded.post("/rotate", json={"delta_ticks": 72}).json()
        pa = np.array([p["p"] for p in before["points"]])
        pb = np.array([p["p"] for p in after["points"]])
        np.testing.assert_allclose(pa, pb, atol=1e-9)

    def test_wheel_step_changes_granularity(self, seeded):
        seeded.post("/wheel_step", json={"degrees": 1.0})
        doc = seeded.post("/rotate", json={"delta_ticks": 1}).json()
        d = np.array(doc["seed"]["D"])
        angle = np.degrees(np.arctan2(d[1], d[0]))
        assert angle == pytest.approx(1.0, abs=1e-9)

    def test_bad_wheel_step(self, client):
        assert client.post("/wheel_step", json={"degrees": 0}).status_code == 400


class TestAdjust:
    def test_adjust_before_seed_409(self, client):
        assert client.post("/adjust_marker", json={"index": 0, "point": [0, 0, 0]}).status_code == 409

    def test_adjust_delegates(self, seeded):
        doc = seeded.post(
            "/adjust_marker", json={"index": 5, "point": [-10.25, 0.0, 2.0]}
        ).json()
        np.testing.assert_allclose(doc["points"][5]["p"], [-10.25, 0, 0], atol=1e-9)
        np.testing.assert_allclose(doc["points"][5]["n"], [0, 0, 1], atol=1e-12)

    def test_adjust_bad_index_400(self, seeded):
        r = seeded.post("/adjust_marker", json={"index": 99, "point": [0, 0, 0]})
        assert r.status_code == 400


class TestGenerate:
    def test_generate_before_seed_409(self, client):
        assert client.post("/generate").status_code == 409

    def test_generate_report_and_mesh(self, seeded):
        r = seeded.post("/generate")
        assert r.status_code == 200
        report = json.loads(r.headers["X-Report"])
        assert report["ring_count"] == 4
        assert report["span_mm"] == pytest.approx(23.0, abs=1e-6)
        mesh = load_stl(r.content)
        assert mesh.n_faces == report["triangle_count"]

    def test_generate_deterministic(self, seeded):
        a = seeded.post("/generate").content
        b = seeded.post("/generate").content
        assert a == b

    def test_too_short_422(self):
        patch = meshes.plane_mesh(half=8.0, step=1.0)
        c = TestClient(create_app(mesh=patch))
        c.post("/seed", json={"point": [0, 0, 3.0], "model_id": "M-4322"})
        r = c.post("/generate")
        assert r.status_code == 422
        detail = r.json()["detail"]
        assert detail["required_mm"] == pytest.approx(30.0)
        assert detail["available_mm"] < 30.0

    def test_matches_library_pipeline(self, seeded, plane_mesh):
        service_bytes = seeded.post("/generate").content
        index = build_index(plane_mesh)
        result = run_plan(index, catalog(), [0.0, 0.0, 5.0], 0.0, "M-4138", 0.5)
        assert service_bytes == result.stl_bytes


class TestSaveExport:
    def test_save_without_generate_409(self, seeded):
        assert seeded.post("/save").status_code == 409

    def test_save_then_export(self, seeded):
        seeded.post("/generate")
        assert seeded.post("/save").json() == {"saved_count": 1}
        r = seeded.post("/export", json={"mode": "combined"})
        assert r.status_code == 200
        load_stl(r.content)

    def test_export_includes_unsaved_current(self, seeded):
        gen = seeded.post("/generate")
        n_faces = json.loads(gen.headers["X-Report"])["triangle_count"]
        r = seeded.post("/export", json={"mode": "combined"})
        assert load_stl(r.content).n_faces == n_faces
        # export did not consume the current implant
        assert seeded.post("/save").status_code == 200

    def test_export_empty_409(self, client):
        assert client.post("/export", json={"mode": "combined"}).status_code == 409

    def test_export_zip(self, seeded):
        seeded.post("/generate")
        seeded.post("/save")
        seeded.post("/rotate", json={"delta_ticks": 3})
        seeded.post("/generate")
        r = seeded.post("/export", json={"mode": "per_implant"})
        assert r.headers["content-type"] == "application/zip"
        zf = zipfile.ZipFile(io.BytesIO(r.content))
        assert zf.namelist() == ["implant_0_M-4138.stl", "implant_1_M-4138.stl"]

    def test_export_zip_deterministic(self, seeded):
        seeded.post("/generate")
        a = seeded.post("/export", json={"mode": "per_implant"}).content
        b = seeded.post("/export", json={"mode": "per_implant"}).content
        assert a == b
