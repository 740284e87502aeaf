import struct

import numpy as np
import pytest

from plateforge import TriangleMesh, build_index

import meshes


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def cube_binary_stl(side=1.0):
    """Hand-rolled binary STL of a cube (independent of the package writer)."""
    facets = meshes.cube_facets(side)
    out = bytearray(b"test cube".ljust(80, b"\0"))
    out += struct.pack("<I", len(facets))
    for tri in facets:
        e1 = tri[1] - tri[0]
        e2 = tri[2] - tri[0]
        n = np.cross(e1, e2)
        n = n / np.linalg.norm(n)
        out += struct.pack("<3f", *n.astype(np.float32))
        for v in tri:
            out += struct.pack("<3f", *np.asarray(v, dtype=np.float32))
        out += struct.pack("<H", 0)
    return bytes(out)


@pytest.fixture
def cube_stl():
    return cube_binary_stl()


@pytest.fixture
def cube_mesh():
    facets = meshes.cube_facets()
    verts = facets.reshape(-1, 3)
    faces = np.arange(len(verts)).reshape(-1, 3)
    return TriangleMesh(verts, faces)


@pytest.fixture
def plane_mesh():
    return meshes.plane_mesh()


@pytest.fixture
def plane_index(plane_mesh):
    return build_index(plane_mesh)


@pytest.fixture
def wedge_mesh():
    return meshes.wedge_mesh()


@pytest.fixture
def wedge_index(wedge_mesh):
    return build_index(wedge_mesh)


@pytest.fixture
def sine_mesh():
    return meshes.sine_mesh()


@pytest.fixture(scope="session")
def terrain_mesh():
    return meshes.terrain_mesh()


@pytest.fixture(scope="session")
def terrain_index(terrain_mesh):
    return build_index(terrain_mesh)


# ---------------------------------------------------------------------------
# acceptance reporting: one pass/fail line per criterion at session end
# ---------------------------------------------------------------------------

_ACCEPTANCE_RESULTS = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    _ACCEPTANCE_RESULTS[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for name, outcome in sorted(_ACCEPTANCE_RESULTS.items()):
        mark = "PASS" if outcome == "passed" else outcome.upper()
        terminalreporter.write_line(f"  [{mark}] {name}")
