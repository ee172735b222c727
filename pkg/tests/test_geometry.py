"""Unit tests for the moment-curve cap geometry."""

import math

import numpy as np
import pytest

from momentcurve import (
    CanonicalBlock,
    DecouplingParams,
    SmallCap,
    SpecValidationError,
    cap_index_of,
    check_cap_frame_comparability,
    check_cone_containment_geo2,
    check_cone_containment_geo3,
    check_overlap_geo1,
    check_partition,
    check_rescale,
    cone_angle,
    cone_map_T,
    cone_radius,
    curve_point,
    default_geo1_scales,
    default_geo2_scales,
    default_geo3_scales,
    defect2,
    defect3,
    frame_coordinates,
    frame_matrix,
    frenet_frame,
    gamma_tilde,
    neighborhood_membership,
    rescale_map_L,
    sample_block,
    sample_neighborhood,
)

SQRT2 = math.sqrt(2.0)


class TestFrame:
    def test_curve_point(self):
        np.testing.assert_allclose(curve_point(2.0), [2.0, 4.0, 8.0])

    def test_frame_vectors(self):
        d1, d2, d3 = frenet_frame(0.5)
        np.testing.assert_allclose(d1, [1.0, 1.0, 0.75])
        np.testing.assert_allclose(d2, [0.0, 2.0, 3.0])
        np.testing.assert_allclose(d3, [0.0, 0.0, 6.0])

    @pytest.mark.parametrize("t", [-1.0, 0.0, 0.3, 1.0, 7.0])
    def test_frame_determinant_is_12(self, t):
        assert np.linalg.det(frame_matrix(t)) == pytest.approx(12.0)

    def test_frame_coordinates_roundtrip(self):
        rng = np.random.default_rng(0)
        for t0 in (0.0, 0.3, 1.0):
            abc = rng.uniform(-1, 1, (50, 3))
            pts = abc @ frame_matrix(t0).T
            back = frame_coordinates(t0, pts)
            np.testing.assert_allclose(back, abc, atol=1e-12)

    def test_defects_vanish_on_curve(self):
        t = np.linspace(0, 1, 11)
        pts = curve_point(t)
        np.testing.assert_allclose(defect2(pts), 0.0, atol=1e-15)
        np.testing.assert_allclose(defect3(pts), 0.0, atol=1e-14)


class TestNeighborhood:
    def test_curve_points_are_members(self):
        params = DecouplingParams(1024.0, 0.5)
        pts = curve_point(np.linspace(0, 1, 33))
        assert neighborhood_membership(params, pts).all()

    def test_defect_boundary_point_is_member(self):
        params = DecouplingParams(1024.0, 0.5)
        xi = np.array([0.0, params.defect2_tol, 0.0])
        assert bool(neighborhood_membership(params, xi))

    def test_point_past_tolerance_is_not_member(self):
        params = DecouplingParams(1024.0, 0.5)
        xi = np.array([0.0, 1.5 * params.defect2_tol, 0.0])
        assert not bool(neighborhood_membership(params, xi))

    def test_param_fields(self):
        params = DecouplingParams(float(2**20), 0.75)
        assert params.cap_width == pytest.approx(2.0**-15)
        assert params.n_caps == 2**15
        assert params.defect2_tol == pytest.approx(2.0**-30)
        assert params.defect3_tol == pytest.approx(2.0**-20)
        assert params.cube_exponent == 1.5

    def test_param_validation(self):
        with pytest.raises(SpecValidationError):
            DecouplingParams(1.0, 0.5)
        with pytest.raises(SpecValidationError):
            DecouplingParams(16.0, 0.25)

    def test_sampled_members_are_members(self):
        params = DecouplingParams(4096.0, 1.0)
        rng = np.random.default_rng(2)
        xi = sample_neighborhood(params, rng, 500)
        assert neighborhood_membership(params, xi).all()


class TestCaps:
    def test_cap_index_basic(self):
        params = DecouplingParams(16.0, 0.5)  # 4 caps of width 1/4
        assert cap_index_of(params, np.array([0.1, 0.01, 0.001])) == 0
        assert cap_index_of(params, curve_point(0.6)) == 2

    def test_right_edge_clamps_into_last_cap(self):
        params = DecouplingParams(16.0, 0.5)
        assert cap_index_of(params, curve_point(1.0)) == 3
        assert cap_index_of(params, curve_point(1.0 - 1e-12)) == 3

    def test_non_member_returns_none(self):
        params = DecouplingParams(16.0, 0.5)
        assert cap_index_of(params, np.array([0.5, 0.9, 0.1])) is None

    def test_vectorized_index_marks_non_members(self):
        params = DecouplingParams(16.0, 0.5)
        pts = np.vstack([curve_point(0.3), [0.5, 0.9, 0.1]])
        idx = cap_index_of(params, pts)
        assert idx[0] == 1 and idx[1] == -1

    def test_cap_contains_its_curve_arc(self):
        params = DecouplingParams(256.0, 0.5)
        cap = SmallCap(params, 7)
        t = cap.t0 + params.cap_width * np.linspace(0.01, 0.99, 9)
        assert cap.contains(curve_point(t)).all()

    def test_cap_index_validation(self):
        params = DecouplingParams(16.0, 0.5)
        with pytest.raises(SpecValidationError):
            SmallCap(params, 4)


class TestConeMap:
    def test_pinned_image_of_gamma3(self):
        # T maps gamma'''(t) = (0, 0, 6) to (0, -1/sqrt2, 1/sqrt2) * ... and
        # the specific vector (1, 0, 6) to (0, 0, sqrt 2).
        T = cone_map_T()
        np.testing.assert_allclose(T.apply([1.0, 0.0, 6.0]).ravel(),
                                   [0.0, 0.0, SQRT2], atol=1e-14)

    def test_determinant_magnitude(self):
        # |det| = 1/12: T and the frame matrix (det 12) compose to volume 1.
        assert abs(cone_map_T().det) == pytest.approx(1.0 / 12.0, rel=1e-12)

    @pytest.mark.parametrize("t", [0.0, 0.25, 0.7, 1.0])
    def test_tangent_image_lies_on_cone(self, t):
        w = cone_map_T().apply(frenet_frame(t)[0]).ravel()
        assert math.hypot(w[0], w[1]) == pytest.approx(w[2], abs=1e-13)
        assert w[2] == pytest.approx(cone_radius(t))
        assert math.atan2(w[1], w[0]) == pytest.approx(cone_angle(t))

    def test_angle_is_strictly_decreasing_from_half_pi(self):
        t = np.linspace(0.0, 1.0, 200)
        angles = np.array([cone_angle(v) for v in t])
        assert angles[0] == pytest.approx(math.pi / 2)
        assert np.all(np.diff(angles) < 0)
        # Endpoint angle is asin(1/3), the direction of gamma'(1).
        assert angles[-1] == pytest.approx(math.asin(1.0 / 3.0), abs=1e-12)

    def test_inverse_roundtrip(self):
        T = cone_map_T()
        rng = np.random.default_rng(4)
        pts = rng.uniform(-1, 1, (20, 3))
        np.testing.assert_allclose(T.inverse().apply(T.apply(pts)), pts, atol=1e-12)


class TestGammaTilde:
    def test_sample_coefficients_stay_in_ranges(self):
        box = gamma_tilde(64.0, 128.0, float(2**20), l=5, c_eps=2.0)
        rng = np.random.default_rng(3)
        abc = box.sample(rng, 400)
        mag_a = np.abs(abc[:, 0])
        assert mag_a.min() >= 1.0 / (2.0 * 128.0) - 1e-15
        assert mag_a.max() <= 2.0 / 64.0 + 1e-15
        assert np.abs(abc[:, 1]).max() <= 2.0 / 64.0**2 + 1e-18
        assert np.abs(abc[:, 2]).max() <= 2.0 / 2.0**20 + 1e-21
        assert box.contains_abc(abc).all()

    def test_points_recover_coefficients(self):
        box = gamma_tilde(16.0, 32.0, 4096.0, l=2)
        rng = np.random.default_rng(5)
        abc = box.sample(rng, 100)
        pts = box.to_points(abc)
        np.testing.assert_allclose(frame_coordinates(box.t0, pts), abc, atol=1e-12)

    def test_validation(self):
        with pytest.raises(SpecValidationError):
            gamma_tilde(128.0, 64.0, 4096.0, l=0)
        with pytest.raises(SpecValidationError):
            gamma_tilde(16.0, 32.0, -1.0, l=0)


class TestRescaleMap:
    def test_l0_is_pure_diagonal(self):
        L = rescale_map_L(4096.0, 0)
        np.testing.assert_allclose(L.matrix, np.diag([16.0, 256.0, 4096.0]))
        np.testing.assert_allclose(L.offset, 0.0, atol=1e-15)

    def test_curve_identity(self):
        # L(gamma(t0 + u)) = gamma(S u) with S = r_prev^(1/3), t0 = l/S.
        L = rescale_map_L(4096.0, 3)
        s, t0 = 16.0, 3.0 / 16.0
        u = np.linspace(0.0, 1.0 / 16.0, 64)
        lhs = L.apply(curve_point(t0 + u))
        rhs = curve_point(s * u)
        assert np.max(np.abs(lhs - rhs)) <= 1e-9

    def test_defects_scale_exactly(self):
        L = rescale_map_L(1728.0, 5)  # S = 12
        rng = np.random.default_rng(6)
        xi = np.column_stack([
            rng.uniform(5 / 12, 6 / 12, 50),
            rng.uniform(0, 1, 50),
            rng.uniform(0, 1, 50),
        ])
        xi[:, 1] = xi[:, 0] ** 2 + rng.uniform(-1, 1, 50) * 1e-4
        xi[:, 2] = 3 * xi[:, 0] * xi[:, 1] - 2 * xi[:, 0] ** 3 + rng.uniform(-1, 1, 50) * 1e-5
        mapped = L.apply(xi)
        np.testing.assert_allclose(defect2(mapped), 144.0 * defect2(xi), rtol=1e-9)
        np.testing.assert_allclose(defect3(mapped), 1728.0 * defect3(xi), rtol=1e-9)

    def test_roundtrip(self):
        L = rescale_map_L(4096.0, 7)
        rng = np.random.default_rng(7)
        pts = rng.uniform(0, 1, (30, 3))
        np.testing.assert_allclose(L.inverse().apply(L.apply(pts)), pts, atol=1e-10)

    def test_check_rescale_report(self):
        params = DecouplingParams(float(2**20), 0.75)
        rep = check_rescale(4096.0, 3, params, samples=2000, seed=1)
        assert rep.scale == pytest.approx(16.0)
        assert rep.max_curve_residual <= 1e-9
        assert rep.max_roundtrip_residual <= 1e-9
        assert rep.member_violations == 0
        assert rep.member_samples == 2000

    def test_validation(self):
        with pytest.raises(SpecValidationError):
            rescale_map_L(0.5, 0)


class TestLadderChecks:
    def test_geo1_zero_violations_and_threshold(self):
        R = float(2**20)
        r_k, r_next = default_geo1_scales(R, 0.75)
        rep = check_overlap_geo1(r_k, r_next, R, 1.0, samples=2000, seed=1)
        assert rep.violations == 0
        # Separation threshold 10 * c_eps * r_next / r_k = 20 anchor steps.
        assert rep.threshold == pytest.approx(20.0)
        assert rep.max_multiplicity >= 1
        assert rep.far_pairs_checked > 0

    def test_geo1_scale_validation(self):
        with pytest.raises(SpecValidationError):
            check_overlap_geo1(128.0, 64.0, float(2**20))

    @pytest.mark.parametrize("case", ["1", "2"])
    def test_geo2_zero_violations(self, case):
        R = float(2**20)
        r_k, r_next = default_geo2_scales(R, 0.75, case)
        rep = check_cone_containment_geo2(r_k, r_next, R, 1.0, samples=1500, seed=2)
        assert rep.case == case
        assert rep.violations == 0
        assert rep.max_angular_ratio <= 1.0
        assert rep.max_radial_ratio <= 1.0
        assert rep.caps_touched <= rep.cap_count

    def test_geo2_case2_beta1_in_range(self):
        # r_k = R^(2/5) puts beta1 = (2/5)/(3/5) = 2/3 inside [1/2, 1].
        R = float(2**20)
        rep = check_cone_containment_geo2(2.0**8, 2.0**9, R, 1.0, samples=800, seed=3)
        assert rep.case == "2"
        assert rep.beta1 == pytest.approx(8.0 / 12.0)

    def test_geo3_zero_violations(self):
        rep = check_cone_containment_geo3(float(2**18), float(2**24),
                                          samples=1500, seed=4)
        assert rep.violations == 0
        assert rep.rejected >= 0
        # Anchor angles are spaced ~|w'(t)|/s with |w'| in [2 sqrt2/3, sqrt2],
        # so the normalized gap stays above 0.9 but can dip below 1 near t=1.
        assert 0.9 <= rep.min_angle_gap_ratio <= 1.5

    def test_geo3_requires_integer_cube_root(self):
        with pytest.raises(SpecValidationError):
            check_cone_containment_geo3(float(2**19), float(2**24))

    def test_partition_members_in_exactly_one_cap(self):
        params = DecouplingParams(1024.0, 0.5)
        rep = check_partition(params, samples=5000, seed=5)
        assert rep.violations == 0
        assert rep.samples_used == 5000

    def test_comparability_sandwich(self):
        rep = check_cap_frame_comparability(128.0, float(2**20), l=9,
                                            samples=2000, seed=6)
        assert rep.outer_violations == 0
        assert rep.inner_violations == 0

    def test_comparability_needs_ladder_scale(self):
        # Below R^(1/3) the cubic defect 2A^3 overflows the 1/R tolerance.
        with pytest.raises(SpecValidationError):
            check_cap_frame_comparability(64.0, float(2**20), l=9)


class TestDefaultScales:
    def test_geo1_scales_in_ladder_window(self):
        R = float(2**20)
        r_k, r_next = default_geo1_scales(R, 0.75)
        assert R ** (1.0 / 3.0) <= r_k <= R**0.75
        assert r_next == 2.0 * r_k

    def test_geo2_case1_matches_r_to_06(self):
        # At R = 2^20, beta = 0.75 the dyadic midpoint rounds to R^0.6 = 2^12.
        r_k, _ = default_geo2_scales(float(2**20), 0.75, "1")
        assert r_k == 2.0**12

    def test_geo2_case1_needs_beta_at_least_half(self):
        with pytest.raises(SpecValidationError):
            default_geo2_scales(float(2**20), 0.4, "1")

    def test_geo2_case2_window(self):
        R = float(2**20)
        r_k, r_next = default_geo2_scales(R, 0.75, "2")
        assert R ** (1.0 / 3.0) <= r_k <= math.sqrt(R)
        assert r_next == 2.0 * r_k

    def test_geo3_adjacent_cube_rungs(self):
        s_k, s_next = default_geo3_scales(float(2**20))
        assert s_next == 8.0 * s_k
        assert round(s_k ** (1.0 / 3.0)) ** 3 == s_k


class TestBlocks:
    def test_block_contains_its_samples(self):
        block = CanonicalBlock(64, 10)
        rng = np.random.default_rng(8)
        pts = sample_block(block, rng, 300)
        assert block.contains(pts).all()

    def test_dilated_samples_leave_core_block(self):
        block = CanonicalBlock(64, 10)
        rng = np.random.default_rng(9)
        pts = sample_block(block, rng, 600, dilation=4.0)
        inside = block.contains(pts)
        assert 0 < inside.sum() < 600

    def test_block_validation(self):
        with pytest.raises(SpecValidationError):
            CanonicalBlock(0, 0)
        with pytest.raises(SpecValidationError):
            CanonicalBlock(8, 8)
