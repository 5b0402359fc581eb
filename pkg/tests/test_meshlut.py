import math

import pytest

from quadplane.core import FlightMode
from quadplane.exceptions import DomainError, EnvelopeError
from quadplane.meshlut import CoefficientInterpolator, TriMesh, build_mesh

# printed lookup-table planes for the verified hybrid-mode cell
PLANE_LIFT = (0.0923, 0.0860, -0.9920, -0.6863)
PLANE_DRAG = (0.0094, 0.1183, 0.9929, -1.6122)
PLANE_ROTOR_DRAG = (0.0108, 0.0292, 0.9995, -0.6728)


@pytest.fixture(scope="module")
def lift_mesh(model):
    return build_mesh(model, "hybrid", "lift")


def _barycentric_oracle(mesh: TriMesh, alpha: float, va: float) -> float:
    """Independent interpolation: solve barycentric weights of the triangle."""
    tri = mesh.triangles[mesh.locate(alpha, va)]
    (x1, y1, z1), (x2, y2, z2), (x3, y3, z3) = (mesh.vertex(v) for v in tri)
    det = (y2 - y3) * (x1 - x3) + (x3 - x2) * (y1 - y3)
    w1 = ((y2 - y3) * (alpha - x3) + (x3 - x2) * (va - y3)) / det
    w2 = ((y3 - y1) * (alpha - x3) + (x1 - x3) * (va - y3)) / det
    w3 = 1.0 - w1 - w2
    return w1 * z1 + w2 * z2 + w3 * z3


class TestBuild:
    def test_vertex_values_from_fits(self, lift_mesh, model):
        # hybrid lift at (-5 deg, 11 m/s): 0.2622 + 0.09302 * (-5)
        na = len(lift_mesh.alpha_grid)
        assert lift_mesh.values[1][0] == pytest.approx(-0.2029, abs=1e-4)
        assert lift_mesh.values[1][1] == pytest.approx(0.2622)

    def test_triangle_count_tiles_grid(self, lift_mesh):
        # 3x2 cells, two triangles each
        assert len(lift_mesh.triangles) == 12
        area = 0.0
        for tri in lift_mesh.triangles:
            (x1, y1, _), (x2, y2, _), (x3, y3, _) = (lift_mesh.vertex(v) for v in tri)
            area += abs((x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1)) / 2
        assert area == pytest.approx(15.0 * 10.0, rel=1e-9)

    def test_planes_pass_through_vertices(self, lift_mesh):
        for tri, (a, b, c, d) in zip(lift_mesh.triangles, lift_mesh.planes):
            assert math.hypot(a, math.hypot(b, c)) == pytest.approx(1.0, abs=1e-12)
            assert d <= 1e-12  # sign normalization
            assert c != 0
            for v in tri:
                x, y, z = lift_mesh.vertex(v)
                assert a * x + b * y + c * z + d == pytest.approx(0, abs=1e-9)

    def test_degenerate_grid_rejected(self, model):
        with pytest.raises(DomainError):
            build_mesh(model, "hybrid", "lift", va_grid=(11.0,))

    def test_unknown_kind_rejected(self, model):
        with pytest.raises(DomainError):
            build_mesh(model, "hybrid", "sideways")


class TestLocate:
    def test_worked_example_triangle(self, lift_mesh):
        tid = lift_mesh.locate(-4, 9)
        verts = {lift_mesh.vertex(v)[:2] for v in lift_mesh.triangles[tid]}
        assert verts == {(-5.0, 5.0), (-5.0, 11.0), (0.0, 11.0)}

    def test_vertex_query_interpolates_to_vertex_value(self, lift_mesh):
        assert lift_mesh.interp(0, 11) == pytest.approx(0.2622, abs=1e-12)

    def test_outside_hull_rejected(self, lift_mesh):
        for alpha, va in ((20, 9), (-4, 2), (0, 16), (-6, 9)):
            with pytest.raises(EnvelopeError):
                lift_mesh.locate(alpha, va)

    def test_boundary_resolves_to_lower_indexed_triangle(self, lift_mesh):
        # a point on the cell diagonal belongs to the even (lower) triangle
        tid = lift_mesh.locate(-2.5, 8.0)
        assert tid % 2 == 0


class TestInterp:
    def test_worked_example_lift(self, lift_mesh):
        assert lift_mesh.interp(-4, 9) == pytest.approx(-0.2838, abs=0.002)

    def test_worked_example_drag(self, model):
        mesh = build_mesh(model, "hybrid", "drag_plane")
        assert mesh.interp(-4, 9) == pytest.approx(0.5893, abs=0.002)

    def test_worked_example_rotor_drag(self, model):
        mesh = build_mesh(model, "hybrid", "drag_quad")
        assert mesh.interp(-4, 9) == pytest.approx(0.4534, abs=0.002)

    def test_printed_plane_coefficients(self, model):
        for kind, printed in (("lift", PLANE_LIFT), ("drag_plane", PLANE_DRAG),
                              ("drag_quad", PLANE_ROTOR_DRAG)):
            mesh = build_mesh(model, "hybrid", kind)
            got = mesh.plane_through(-4, 9)
            for g, p in zip(got, printed):
                assert g == pytest.approx(p, abs=0.002)

    def test_vertex_exactness_everywhere(self, model):
        for kind in ("lift", "drag_plane", "drag_quad", "form_drag",
                     "pitch_moment", "diff_thrust"):
            mesh = build_mesh(model, "hybrid", kind)
            for iv, va in enumerate(mesh.va_grid):
                for ia, alpha in enumerate(mesh.alpha_grid):
                    assert mesh.interp(alpha, va) == pytest.approx(
                        mesh.values[iv][ia], abs=1e-12)

    def test_edge_continuity(self, lift_mesh):
        eps = 1e-9
        probes = [(-2.5, 8.0), (0.0, 8.0), (2.5, 13.0), (5.0, 9.0)]
        for alpha, va in probes:
            for da, dv in ((eps, -eps), (-eps, eps)):
                a = lift_mesh.interp(alpha + da, va + dv)
                b = lift_mesh.interp(alpha - da, va - dv)
                assert a == pytest.approx(b, abs=1e-6)

    def test_matches_barycentric_oracle(self, lift_mesh):
        probes = [(-4, 9), (-1, 6), (3, 12.5), (8, 14), (-4.9, 5.1), (9.9, 14.9)]
        for alpha, va in probes:
            assert lift_mesh.interp(alpha, va) == pytest.approx(
                _barycentric_oracle(lift_mesh, alpha, va), abs=1e-12)

    def test_affine_within_triangle(self, lift_mesh):
        # midpoint of two points in one triangle carries the mean value
        p1, p2 = (-4.5, 6.0), (-4.0, 9.5)
        assert lift_mesh.locate(*p1) == lift_mesh.locate(*p2)
        mid = ((p1[0] + p2[0]) / 2, (p1[1] + p2[1]) / 2)
        assert lift_mesh.interp(*mid) == pytest.approx(
            0.5 * (lift_mesh.interp(*p1) + lift_mesh.interp(*p2)), abs=1e-12)


class TestExportAndInterpolator:
    def test_export_shape(self, lift_mesh):
        d = lift_mesh.to_dict()
        assert d["kind"] == "lift" and d["mode"] == "hybrid"
        assert len(d["triangles"]) == 12
        tri = d["triangles"][0]
        assert len(tri["vertices"]) == 3 and len(tri["plane"]) == 4

    def test_interpolator_consistency(self, model):
        interp = CoefficientInterpolator(model, FlightMode.HYBRID)
        assert interp.c_lift(-4, 9) == pytest.approx(-0.2838, abs=0.002)
        assert interp.c_drag_quad(-4, 9) == pytest.approx(0.4534, abs=0.002)
        # elevator slope blends linearly between buckets
        c5 = model.pitch_elevator[5].c_de
        c11 = model.pitch_elevator[11].c_de
        assert interp.c_elevator(8) == pytest.approx(0.5 * (c5 + c11))

    def test_plane_mode_rotor_drag_is_zero(self, model):
        interp = CoefficientInterpolator(model, FlightMode.PLANE)
        assert interp.c_drag_quad(0, 9) == 0.0
