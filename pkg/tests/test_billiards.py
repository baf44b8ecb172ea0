import numpy as np
import pytest

from ehzcap.billiards import extract_dual, verify_strong, verify_weak
from ehzcap.curves import (
    ClosedPolygonalCurve,
    canonicalize,
    discrete_action,
    minkowski_length,
    translation_margin,
)
from ehzcap.errors import NotABilliardError, PointOffBoundaryError
from ehzcap.geometry import ConvexPolytope, negate, support_function


def square():
    return ConvexPolytope.from_vertices([[1, 1], [1, -1], [-1, 1], [-1, -1]])


def cross():
    return ConvexPolytope.from_vertices([[1, 0], [-1, 0], [0, 1], [0, -1]])


def width_curve():
    return ClosedPolygonalCurve(np.array([[-1.0, 0.0], [1.0, 0.0]]))


def raw_length(body, points):
    pts = np.asarray(points, dtype=float)
    return float(sum(support_function(body, d)[0]
                     for d in np.roll(pts, -1, axis=0) - pts))


class TestVerifyStrong:
    def test_two_bounce_pair_on_square_passes(self):
        pair = verify_strong(square(), square(), width_curve(),
                             [[1, 0], [-1, 0]])
        assert pair.verified
        for record in pair.records:
            assert record.segment_residual <= 1e-8
            assert record.kick_residual <= 1e-8

    def test_interior_momentum_point_fails(self):
        pair = verify_strong(square(), square(), width_curve(),
                             [[0.9, 0], [-1, 0]])
        assert not pair.verified
        first = pair.records[0]
        assert not first.p_on_boundary
        assert not first.segment_in_momentum_cone
        assert "off-boundary" in first.note

    def test_swapped_momenta_fail_the_cone_check(self):
        pair = verify_strong(square(), square(), width_curve(),
                             [[-1, 0], [1, 0]])
        assert not pair.verified
        first = pair.records[0]
        assert first.p_on_boundary
        assert not first.segment_in_momentum_cone
        assert first.segment_residual > 1.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(PointOffBoundaryError):
            verify_strong(square(), square(), width_curve(), [[1, 0]])

    def test_momentum_outside_geometry_body(self):
        pair = verify_strong(square(), square(), width_curve(),
                             [[2, 0], [-1, 0]])
        assert not pair.verified
        assert "outside" in pair.records[0].note


class TestExtractDual:
    def test_horizontal_width_curve(self):
        p = extract_dual(square(), square(), width_curve())
        assert np.allclose(p, [[1, -1], [-1, -1]], atol=1e-9)
        assert verify_strong(square(), square(), width_curve(), p).verified

    def test_vertical_width_curve(self):
        q = ClosedPolygonalCurve(np.array([[0.0, -1.0], [0.0, 1.0]]))
        p = extract_dual(square(), square(), q)
        assert np.allclose(p[0, 1], 1.0, atol=1e-9)
        assert np.allclose(p[1, 1], -1.0, atol=1e-9)
        assert np.allclose(p[0, 0], p[1, 0], atol=1e-9)
        assert verify_strong(square(), square(), q, p).verified

    def test_single_facet_chord_is_not_a_billiard(self):
        q = ClosedPolygonalCurve(np.array([[-0.5, -1.0], [0.5, -1.0]]))
        with pytest.raises(NotABilliardError):
            extract_dual(square(), square(), q)

    def test_interior_vertex_rejected(self):
        q = ClosedPolygonalCurve(np.array([[-0.5, 0.0], [0.5, 0.0]]))
        with pytest.raises(PointOffBoundaryError):
            extract_dual(square(), square(), q)

    def test_cross_table_width_curve(self):
        p = extract_dual(cross(), square(), width_curve())
        assert verify_strong(cross(), square(), width_curve(), p).verified

    def test_deterministic_across_repeats(self):
        first = extract_dual(square(), square(), width_curve())
        second = extract_dual(square(), square(), width_curve())
        assert first.tobytes() == second.tobytes()


class TestVerifyWeak:
    def test_strong_pair_curve_passes_weak(self):
        report = verify_weak(square(), square(), width_curve())
        assert report.verified
        for record in report.records:
            assert record.hyperplane_minimum is not None
            assert record.hyperplane_minimum >= record.value_at_vertex - 1e-7

    def test_flat_detour_over_a_facet_passes(self):
        # the middle vertex slides along y = 1 without changing the length,
        # so it minimizes over its supporting line
        q = canonicalize([[-1, 0], [0.5, 1], [1, 0]])
        report = verify_weak(square(), square(), q)
        assert report.verified

    def test_spike_onto_a_facet_fails(self):
        # hand check at (0, 1): both exposed faces are single vertices of the
        # geometry body, their difference (2, 2) is no multiple of the facet
        # normal e2, and sliding toward (-1, 1) shortens both segments
        q = canonicalize([[-1, 0.5], [0, 1]])
        report = verify_weak(square(), square(), q)
        assert not report.verified
        assert not report.records[1].passed

    def test_interior_vertex_raises(self):
        q = ClosedPolygonalCurve(np.array([[-0.5, 0.0], [0.5, 0.0]]))
        with pytest.raises(PointOffBoundaryError):
            verify_weak(square(), square(), q)


class TestPairInvariants:
    def cases(self):
        sq = square()
        out = []
        for table, geometry, q in [
            (sq, sq, width_curve()),
            (sq, sq, ClosedPolygonalCurve(np.array([[0.0, -1.0], [0.0, 1.0]]))),
            (cross(), sq, width_curve()),
            (sq, cross(), width_curve()),
        ]:
            p = extract_dual(table, geometry, q)
            out.append((table, geometry, q, p))
        return out

    def test_round_trip_verifies(self):
        for table, geometry, q, p in self.cases():
            assert verify_strong(table, geometry, q, p).verified

    def test_strong_implies_weak(self):
        for table, geometry, q, p in self.cases():
            assert verify_weak(table, geometry, q).verified

    def test_action_matches_length(self):
        for table, geometry, q, p in self.cases():
            action = discrete_action(q, p)
            length = minkowski_length(geometry, q)
            assert abs(action - length) <= 1e-8 * (1 + abs(length))

    def test_length_duality_against_negated_table(self):
        for table, geometry, q, p in self.cases():
            length_q = minkowski_length(geometry, q)
            length_p = raw_length(negate(table), p)
            assert abs(length_q - length_p) <= 1e-8 * (1 + abs(length_q))

    def test_both_trajectories_are_pinned(self):
        for table, geometry, q, p in self.cases():
            assert translation_margin(table, q).pinned
            assert translation_margin(geometry, canonicalize(p)).pinned

    def test_swapped_factor_image_is_strong(self):
        # from a verified pair, momenta become the curve on the old geometry
        # body and negated shifted bounce points become the momenta
        for table, geometry, q, p in self.cases():
            image_q = canonicalize(p)
            if image_q.num_points != q.num_points:
                continue
            image_p = -np.roll(q.points, -1, axis=0)
            pair = verify_strong(geometry, negate(table), image_q, image_p)
            assert pair.verified
