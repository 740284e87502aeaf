"""STL import/export, binary and ASCII.

Binary layout: 80-byte header (ignored on read), little-endian uint32
facet count, then 50-byte records of 12 float32 (normal + 3 vertices)
plus a uint16 attribute. File-stored normals are never trusted; normals
are recomputed from vertex winding after load. Facets under the area
floor are dropped and counted.
"""

import re
import struct

import numpy as np

from .errors import EmptyMesh, MalformedStl
from .mesh import AREA_EPS, TriangleMesh

_HEADER_BANNER = b"plateforge binary stl"

_RECORD = np.dtype(
    [("normal", "<f4", (3,)), ("verts", "<f4", (3, 3)), ("attr", "<u2")]
)

_ASCII_FLOAT = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"


def _mesh_from_facets(facets: np.ndarray) -> TriangleMesh:
    """Build a soup mesh from (F, 3, 3) facet corners, dropping degenerates."""
    facets = np.asarray(facets, dtype=np.float64)
    e1 = facets[:, 1] - facets[:, 0]
    e2 = facets[:, 2] - facets[:, 0]
    areas = 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)
    keep = areas >= AREA_EPS
    dropped = int(len(facets) - keep.sum())
    facets = facets[keep]
    if len(facets) == 0:
        raise EmptyMesh("no face survived degeneracy cleaning")
    vertices = facets.reshape(-1, 3)
    faces = np.arange(len(vertices), dtype=np.int64).reshape(-1, 3)
    return TriangleMesh(vertices, faces, degenerate_dropped=dropped)


def _parse_binary(data: bytes) -> np.ndarray:
    if len(data) < 84:
        raise MalformedStl(f"binary STL needs at least 84 bytes, got {len(data)}")
    (count,) = struct.unpack_from("<I", data, 80)
    expected = 84 + 50 * count
    if len(data) != expected:
        raise MalformedStl(
            f"face count {count} implies {expected} bytes, file has {len(data)}"
        )
    records = np.frombuffer(data, dtype=_RECORD, count=count, offset=84)
    return records["verts"].astype(np.float64)


_TOKEN_SPLIT = re.compile(rb"\s+")


def _parse_ascii(data: bytes) -> np.ndarray:
    tokens = [t for t in _TOKEN_SPLIT.split(data) if t]
    pos = 0

    def peek():
        return tokens[pos].lower() if pos < len(tokens) else None

    def expect(word: bytes):
        nonlocal pos
        if peek() != word:
            raise MalformedStl(
                f"expected '{word.decode()}' at token {pos}, "
                f"got {tokens[pos].decode(errors='replace') if pos < len(tokens) else 'EOF'!r}"
            )
        pos += 1

    def number():
        nonlocal pos
        if pos >= len(tokens):
            raise MalformedStl("unexpected end of ASCII STL")
        try:
            value = float(tokens[pos])
        except ValueError:
            raise MalformedStl(f"bad number {tokens[pos]!r} at token {pos}") from None
        pos += 1
        return value

    expect(b"solid")
    # optional solid name: consume tokens until the first 'facet'/'endsolid'
    while peek() not in (b"facet", b"endsolid", None):
        pos += 1

    facets = []
    while peek() == b"facet":
        pos += 1
        expect(b"normal")
        for _ in range(3):
            number()
        expect(b"outer")
        expect(b"loop")
        corners = []
        while peek() == b"vertex":
            pos += 1
            corners.append([number(), number(), number()])
        if len(corners) != 3:
            raise MalformedStl(f"facet has {len(corners)} vertices, expected 3")
        expect(b"endloop")
        expect(b"endfacet")
        facets.append(corners)
    expect(b"endsolid")
    return np.array(facets, dtype=np.float64).reshape(-1, 3, 3)


def load_stl(data: bytes) -> TriangleMesh:
    """Parse STL bytes (binary or ASCII) into a cleaned mesh.

    Raises MalformedStl for layout/grammar violations and EmptyMesh when
    nothing survives degeneracy cleaning.
    """
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise TypeError("load_stl wants bytes")
    data = bytes(data)
    if data[:5].lower() == b"solid":
        try:
            return _mesh_from_facets(_parse_ascii(data))
        except MalformedStl:
            # some binary exporters write 'solid' into the 80-byte header;
            # fall through only if the byte budget matches a binary layout
            if len(data) >= 84:
                (count,) = struct.unpack_from("<I", data, 80)
                if len(data) == 84 + 50 * count:
                    return _mesh_from_facets(_parse_binary(data))
            raise
    return _mesh_from_facets(_parse_binary(data))


def save_stl(mesh: TriangleMesh, format: str = "binary") -> bytes:
    """Serialize a mesh; facet normals are recomputed, never copied."""
    if mesh is None or mesh.n_faces == 0:
        raise EmptyMesh("cannot save an empty mesh")
    normals = mesh.face_normals
    corners = np.stack(mesh.triangle_corners(), axis=1)  # (F, 3, 3)
    if format == "binary":
        corners32 = corners.astype(np.float32)
        # normals recomputed from the quantized facets the file stores,
        # so stored normals and vertices stay mutually consistent and a
        # load/save cycle is byte-idempotent
        quant = corners32.astype(np.float64)
        cross = np.cross(quant[:, 1] - quant[:, 0], quant[:, 2] - quant[:, 0])
        lengths = np.linalg.norm(cross, axis=1)
        lengths[lengths == 0] = 1.0
        records = np.zeros(mesh.n_faces, dtype=_RECORD)
        records["normal"] = (cross / lengths[:, None]).astype(np.float32)
        records["verts"] = corners32
        header = _HEADER_BANNER.ljust(80, b"\0")
        return header + struct.pack("<I", mesh.n_faces) + records.tobytes()
    if format == "ascii":
        lines = ["solid plateforge"]
        for n, tri in zip(normals, corners):
            lines.append("  facet normal {:.17g} {:.17g} {:.17g}".format(*n))
            lines.append("    outer loop")
            for v in tri:
                lines.append("      vertex {:.17g} {:.17g} {:.17g}".format(*v))
            lines.append("    endloop")
            lines.append("  endfacet")
        lines.append("endsolid plateforge")
        return ("\n".join(lines) + "\n").encode("ascii")
    raise ValueError(f"unknown STL format {format!r}")
