import json
import os
import signal
import socket
import subprocess
import sys
import time
import urllib.request

import pytest
from click.testing import CliRunner

from plateforge import save_stl
from plateforge.catalog import PlateModel, RingSpec, save_catalog
from plateforge.cli import main

import meshes
from conftest import cube_binary_stl


@pytest.fixture
def plane_stl(tmp_path):
    path = tmp_path / "plane.stl"
    path.write_bytes(save_stl(meshes.plane_mesh(), "binary"))
    return path


def run_cli(*args, env=None):
    return CliRunner().invoke(main, [str(a) for a in args], env=env)


class TestPlan:
    def test_plan_writes_stl_and_report(self, plane_stl, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        out = tmp_path / "out.stl"
        r = run_cli(
            "plan", "--mesh", plane_stl, "--seed", "0,0,5", "--angle", "0",
            "--model", "M-4138", "--out", out, "--report",
        )
        assert r.exit_code == 0, r.output + str(r.stderr_bytes)
        report = json.loads(r.output)
        assert report["ring_count"] == 4
        assert report["point_count"] == 47
        assert report["span_mm"] == pytest.approx(23.0, abs=1e-6)
        assert out.exists()

    def test_unknown_model_exit_3(self, plane_stl):
        r = run_cli("plan", "--mesh", plane_stl, "--seed", "0,0,5", "--model", "M-0000")
        assert r.exit_code == 3
        assert "M-4138" in r.stderr

    def test_seed_far_outside_bbox_still_plans(self, plane_stl, tmp_path):
        # projection snaps (0,-500,500) to the mesh edge point (0,-30,0)
        out = tmp_path / "far.stl"
        r = run_cli(
            "plan", "--mesh", plane_stl, "--seed", "0,-500,500",
            "--model", "M-4138", "--out", out, "--report",
        )
        assert r.exit_code == 0
        assert out.exists()
        assert json.loads(r.output)["ring_count"] == 4

    def test_short_baseline_exit_2(self, tmp_path):
        patch = tmp_path / "patch.stl"
        patch.write_bytes(save_stl(meshes.plane_mesh(half=8.0, step=1.0), "binary"))
        r = run_cli("plan", "--mesh", patch, "--seed", "0,0,3", "--model", "M-4322")
        assert r.exit_code == 2

    def test_malformed_mesh_exit_1(self, tmp_path):
        bad = tmp_path / "bad.stl"
        bad.write_bytes(cube_binary_stl()[:-7])
        r = run_cli("plan", "--mesh", bad, "--seed", "0,0,5", "--model", "M-4138")
        assert r.exit_code == 1

    def test_matches_service_bytes(self, plane_stl, tmp_path):
        from fastapi.testclient import TestClient

        from plateforge.service import create_app

        out = tmp_path / "cli.stl"
        r = run_cli(
            "plan", "--mesh", plane_stl, "--seed", "0,0,5", "--angle", "30",
            "--model", "M-4320", "--out", out,
        )
        assert r.exit_code == 0
        client = TestClient(create_app(mesh=meshes.plane_mesh()))
        client.post(
            "/seed", json={"point": [0, 0, 5.0], "angle_deg": 30.0, "model_id": "M-4320"}
        )
        assert out.read_bytes() == client.post("/generate").content


class TestInfo:
    def test_catalog_listing(self):
        r = run_cli("info", "--catalog")
        assert r.exit_code == 0
        doc = json.loads(r.output)
        assert {m["id"]: m["overall_length_mm"] for m in doc["models"]} == {
            "M-4138": 23.0, "M-4320": 29.0, "M-4322": 35.0,
        }

    def test_mesh_stats(self, tmp_path):
        cube = tmp_path / "cube.stl"
        cube.write_bytes(cube_binary_stl())
        r = run_cli("info", "--mesh", cube)
        assert r.exit_code == 0
        assert json.loads(r.output)["faces"] == 12

    def test_unreadable_mesh_exit_1(self, tmp_path):
        trunc = tmp_path / "trunc.stl"
        trunc.write_bytes(cube_binary_stl()[:100])
        r = run_cli("info", "--mesh", trunc)
        assert r.exit_code == 1

    def test_catalog_env_override(self, tmp_path):
        custom = [
            PlateModel(
                id="X-1",
                overall_length=17.0,
                rings=(RingSpec("end"), RingSpec("end")),
                bar_lengths=(12.0,),
            )
        ]
        path = tmp_path / "catalog.json"
        path.write_bytes(save_catalog(custom))
        r = run_cli("info", "--catalog", env={"PLATEFORGE_CATALOG": str(path)})
        doc = json.loads(r.output)
        assert [m["id"] for m in doc["models"]] == ["X-1"]


def free_port():
    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    return port


class TestServe:
    def test_serve_and_sigint(self, plane_stl):
        port = free_port()
        proc = subprocess.Popen(
            [sys.executable, "-m", "plateforge.cli", "serve",
             "--mesh", str(plane_stl), "--port", str(port)],
            stdout=subprocess.PIPE, stderr=subprocess.PIPE,
        )
        try:
            deadline = time.time() + 15
            doc = None
            while time.time() < deadline:
                try:
                    with urllib.request.urlopen(
                        f"http://127.0.0.1:{port}/catalog", timeout=1
                    ) as resp:
                        doc = json.loads(resp.read())
                    break
                except OSError:
                    if proc.poll() is not None:
                        raise AssertionError(proc.stderr.read().decode())
                    time.sleep(0.1)
            assert doc is not None and len(doc["models"]) == 3
            proc.send_signal(signal.SIGINT)
            assert proc.wait(timeout=10) == 0
        finally:
            if proc.poll() is None:
                proc.kill()

    def test_serve_bad_mesh_exits_before_binding(self, tmp_path):
        bad = tmp_path / "bad.stl"
        bad.write_bytes(b"not an stl at all")
        r = run_cli("serve", "--mesh", bad, "--port", str(free_port()))
        assert r.exit_code == 1

    def test_serve_port_in_use_exit_1(self, plane_stl):
        blocker = socket.socket()
        blocker.bind(("127.0.0.1", 0))
        blocker.listen(1)
        port = blocker.getsockname()[1]
        try:
            r = run_cli("serve", "--mesh", plane_stl, "--port", str(port))
            assert r.exit_code == 1
        finally:
            blocker.close()
