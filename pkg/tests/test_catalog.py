import numpy as np
import pytest

from plateforge.catalog import (
    DEFAULT_BAR_THICKNESS,
    DEFAULT_BAR_WIDTH,
    PlateModel,
    RingSpec,
    analytic_ring_volume,
    catalog,
    load_catalog,
    model_by_id,
    ring_mesh,
    save_catalog,
)
from plateforge.errors import GeometryInfeasible, InvariantViolation, MalformedCatalog


def edge_incidence(mesh):
    """Count how many faces touch each undirected edge."""
    counts = {}
    for tri in mesh.faces:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(a, b), max(a, b))
            counts[key] = counts.get(key, 0) + 1
    return counts


def signed_volume(mesh):
    """Divergence-theorem volume of a closed, outward-wound mesh."""
    v0, v1, v2 = mesh.triangle_corners()
    return float(np.einsum("ij,ij->i", v0, np.cross(v1, v2)).sum() / 6.0)


class TestCatalog:
    def test_stock_models_ground_truth(self):
        models = {m.id: m for m in catalog()}
        assert set(models) >= {"M-4138", "M-4320", "M-4322"}
        assert models["M-4138"].overall_length == 23.0
        assert len(models["M-4138"].rings) == 4
        assert models["M-4320"].overall_length == 29.0
        assert len(models["M-4320"].rings) == 4
        assert models["M-4322"].overall_length == 35.0
        assert len(models["M-4322"].rings) == 6

    def test_extended_central_bar(self):
        m4138 = model_by_id(catalog(), "M-4138")
        m4320 = model_by_id(catalog(), "M-4320")
        assert m4320.bar_lengths[1] - m4138.bar_lengths[1] == pytest.approx(29.0 - 23.0)
        # outer gaps unchanged relative to the short model
        assert m4320.bar_lengths[0] == m4138.bar_lengths[0]

    def test_span_invariant_holds_for_all(self):
        for m in catalog():
            assert sum(m.bar_lengths) + 2 * m.end_ring_radius == pytest.approx(
                m.overall_length, abs=1e-12
            )

    def test_roundtrip(self):
        models = catalog()
        again = load_catalog(save_catalog(models))
        assert again == models

    def test_inconsistent_length_rejected(self):
        with pytest.raises(InvariantViolation) as err:
            PlateModel(
                id="bad",
                overall_length=20.0,
                rings=(RingSpec("end"), RingSpec("end")),
                bar_lengths=(6.0,),
            )
        assert err.value.model_id == "bad"

    def test_malformed_json(self):
        with pytest.raises(MalformedCatalog):
            load_catalog(b"{not json")
        with pytest.raises(MalformedCatalog):
            load_catalog(b'{"models": 3}')
        with pytest.raises(MalformedCatalog):
            load_catalog(b'{"models": [{"id": "x"}]}')

    def test_empty_catalog_is_valid(self):
        assert load_catalog(b'{"catalog_version": 1, "models": []}') == []


class TestRingMesh:
    def test_end_ring_has_four_tagged_corners(self):
        ring = ring_mesh(RingSpec("end"))
        assert set(ring.corner_tags) == {"front"}
        assert len(ring.corner_tags["front"]) == 4

    def test_middle_ring_has_two_parallel_rectangles(self):
        ring = ring_mesh(RingSpec("middle"))
        assert set(ring.corner_tags) == {"front", "back"}
        front = ring.mesh.vertices[list(ring.corner_tags["front"])]
        back = ring.mesh.vertices[list(ring.corner_tags["back"])]
        assert np.ptp(front[:, 0]) < 1e-12 and np.ptp(back[:, 0]) < 1e-12
        assert front[0, 0] == -back[0, 0]

    @pytest.mark.parametrize("kind", ["end", "middle"])
    def test_closed_solid(self, kind):
        ring = ring_mesh(RingSpec(kind))
        counts = edge_incidence(ring.mesh)
        assert set(counts.values()) == {2}

    @pytest.mark.parametrize("kind", ["end", "middle"])
    def test_volume_matches_analytic(self, kind):
        spec = RingSpec(kind)
        ring = ring_mesh(spec)
        vol = signed_volume(ring.mesh)
        target = analytic_ring_volume(spec, DEFAULT_BAR_WIDTH)
        assert vol > 0
        assert abs(vol - target) / target < 0.02

    def test_corner_rectangle_dimensions(self):
        ring = ring_mesh(RingSpec("middle"))
        for side in ("front", "back"):
            bl, br, tr, tl = ring.mesh.vertices[list(ring.corner_tags[side])]
            assert np.linalg.norm(br - bl) == pytest.approx(DEFAULT_BAR_WIDTH, abs=1e-9)
            assert np.linalg.norm(tr - br) == pytest.approx(DEFAULT_BAR_THICKNESS, abs=1e-9)
            assert np.linalg.norm(tl - tr) == pytest.approx(DEFAULT_BAR_WIDTH, abs=1e-9)
            assert np.linalg.norm(bl - tl) == pytest.approx(DEFAULT_BAR_THICKNESS, abs=1e-9)
            # planar: all four share the flat plane x = ±d
            corners = ring.mesh.vertices[list(ring.corner_tags[side])]
            assert np.ptp(corners[:, 0]) < 1e-12

    def test_thin_bar_keeps_tags_on_vertices(self):
        # bar thinner than the ring: tag row is a real vertex row
        spec = RingSpec("end", thickness=1.5)
        ring = ring_mesh(spec, bar_thickness=1.0)
        bl, br, tr, tl = ring.mesh.vertices[list(ring.corner_tags["front"])]
        assert tr[2] == pytest.approx(0.5, abs=1e-12)
        assert bl[2] == pytest.approx(-0.5, abs=1e-12)
        assert ring.mesh.vertices[:, 2].max() == pytest.approx(1.0, abs=1e-12)

    def test_flat_cutting_hole_rejected(self):
        with pytest.raises(GeometryInfeasible):
            ring_mesh(RingSpec("end", outer_radius=2.5, hole_radius=2.2), bar_width=2.4)

    def test_vertex_count_deterministic_in_segments(self):
        a = ring_mesh(RingSpec("end", segments=16))
        b = ring_mesh(RingSpec("end", segments=16))
        assert len(a.mesh.vertices) == len(b.mesh.vertices)
        c = ring_mesh(RingSpec("end", segments=32))
        assert len(c.mesh.vertices) > len(a.mesh.vertices)
