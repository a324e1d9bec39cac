import numpy as np
import pytest

from actionness.adm import (
    ADMConfig,
    PreliminaryBoundary,
    SIGMA_LOWER_BOUND,
    find_peak,
    fit_gaussian,
    fit_uniform,
    gaussian_fit_error,
    generate_pseudo_labels,
    preliminary_boundaries,
    sample_supervision,
    uniform_fit_error,
)
from actionness.errors import InvalidInputError
from actionness.oracles import grid_argmin_scalar, nearest_background_scan
from actionness.signal import BackgroundPoints, PointAnnotation, ProbabilitySignal


def background(*indices):
    return BackgroundPoints(np.array(indices, dtype=np.int64))


def gaussian_column(length, t_star, sigma, height=0.9):
    ts = np.arange(length, dtype=np.float64)
    return height * np.exp(-0.5 * ((ts - t_star) / sigma) ** 2)


class TestPreliminaryBoundaries:
    def test_nearest_on_both_sides(self):
        point = PointAnnotation("v0", 10, 1)
        boundary = preliminary_boundaries(point, background(2, 20), 50)
        assert (boundary.b_start, boundary.b_end) == (2, 20)
        assert boundary.duration == 18

    def test_missing_side_falls_back_to_edges(self):
        point = PointAnnotation("v0", 10, 1)
        assert preliminary_boundaries(point, background(20), 50).b_start == 0
        assert preliminary_boundaries(point, background(2), 50).b_end == 49
        no_bg = preliminary_boundaries(point, background(), 50)
        assert (no_bg.b_start, no_bg.b_end) == (0, 49)

    def test_matches_linear_scan(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            length = 80
            indices = np.flatnonzero(rng.uniform(0, 1, length) < 0.2)
            t = int(rng.integers(0, length))
            boundary = preliminary_boundaries(
                PointAnnotation("v0", t, 1), BackgroundPoints(indices), length
            )
            assert (boundary.b_start, boundary.b_end) == nearest_background_scan(
                t, indices.tolist(), length
            )

    def test_point_outside_length_rejected(self):
        with pytest.raises(InvalidInputError):
            preliminary_boundaries(PointAnnotation("v0", 50, 1), background(), 50)


class TestFindPeak:
    def test_unimodal_bump(self):
        column = gaussian_column(100, 40, 5.0)
        boundary = PreliminaryBoundary(10, 90)
        t_star, found = find_peak(column, boundary, 35, 0.5)
        assert found and t_star == 40

    def test_window_constrains_argmax(self):
        rng = np.random.default_rng(22)
        for _ in range(30):
            column = rng.uniform(0, 1, 120)
            boundary = PreliminaryBoundary(5, 115)
            t = int(rng.integers(20, 100))
            delta = float(rng.uniform(0.05, 0.4))
            t_star, found = find_peak(column, boundary, t, delta)
            radius = delta * boundary.duration
            lo = max(boundary.b_start, int(np.ceil(t - radius)))
            hi = min(boundary.b_end, int(np.floor(t + radius)))
            window = list(range(lo, hi + 1))
            expected = min(window, key=lambda i: (-column[i], i))
            assert found and t_star == expected

    def test_flat_column_ties_to_left_end(self):
        column = np.full(50, 0.5)
        boundary = PreliminaryBoundary(10, 40)
        t_star, found = find_peak(column, boundary, 25, 0.25)
        assert found
        assert t_star == max(10, int(np.ceil(25 - 0.25 * 30)))

    def test_empty_window_falls_back(self):
        column = np.zeros(50)
        boundary = PreliminaryBoundary(30, 40)  # does not contain t
        t_star, found = find_peak(column, boundary, 5, 0.1)
        assert not found and t_star == 5


class TestFitGaussian:
    def test_recovers_constructed_sigma(self):
        for sigma_true in (5.0, 12.5, 24.0):
            column = gaussian_column(512, 250, sigma_true)
            sigma, degenerate = fit_gaussian(column, PreliminaryBoundary(10, 500), 250)
            assert not degenerate
            assert abs(sigma - sigma_true) / sigma_true < 0.01

    def test_single_spike_driven_to_lower_bound(self):
        column = np.zeros(256)
        column[100] = 0.8
        sigma, degenerate = fit_gaussian(column, PreliminaryBoundary(5, 250), 100)
        assert not degenerate
        assert sigma == SIGMA_LOWER_BOUND

    def test_plateau_matches_grid_argmin(self):
        column = np.zeros(200)
        column[40:161] = 0.85
        boundary = PreliminaryBoundary(10, 190)
        t_star = 100
        sigma, _ = fit_gaussian(column, boundary, t_star)
        error = gaussian_fit_error(column, boundary, t_star)
        upper = float(max(t_star - boundary.b_start, boundary.b_end - t_star))
        reference = grid_argmin_scalar(error, SIGMA_LOWER_BOUND, upper, 20001)
        step = upper / 20000
        assert abs(sigma - reference) <= 1e-5 + step

    def test_degenerate_boundary_flagged(self):
        column = np.zeros(50)
        sigma, degenerate = fit_gaussian(column, PreliminaryBoundary(10, 10), 10)
        assert degenerate and sigma == SIGMA_LOWER_BOUND

    def test_scale_invariance(self):
        rng = np.random.default_rng(23)
        column = np.clip(gaussian_column(300, 150, 18.0) + rng.normal(0, 0.03, 300), 0, 1)
        boundary = PreliminaryBoundary(20, 280)
        sigma_full, _ = fit_gaussian(column, boundary, 150)
        sigma_scaled, _ = fit_gaussian(0.5 * column, boundary, 150)
        assert sigma_scaled == pytest.approx(sigma_full, abs=1e-4)


class TestFitUniform:
    def test_recovers_rectangle_half_width(self):
        ts = np.arange(400)
        column = np.where(np.abs(ts - 200) <= 8, 0.9, 0.0)
        omega, degenerate = fit_uniform(column, PreliminaryBoundary(5, 395), 200)
        assert not degenerate
        assert abs(omega - 8) <= 1.0

    def test_single_spike_goes_to_zero(self):
        column = np.zeros(256)
        column[100] = 0.8
        omega, _ = fit_uniform(column, PreliminaryBoundary(5, 250), 100)
        assert omega == 0.0

    def test_gaussian_column_matches_grid(self):
        column = gaussian_column(300, 150, 12.0)
        boundary = PreliminaryBoundary(20, 280)
        omega, _ = fit_uniform(column, boundary, 150)
        error = uniform_fit_error(column, boundary, 150)
        upper = float(max(150 - boundary.b_start, boundary.b_end - 150))
        reference = grid_argmin_scalar(error, 1e-9, upper, 20001)
        assert 0.0 <= omega <= upper
        assert error(omega) <= error(reference) + 1e-12

    def test_scale_invariance(self):
        column = gaussian_column(300, 150, 12.0)
        boundary = PreliminaryBoundary(20, 280)
        omega_full, _ = fit_uniform(column, boundary, 150)
        omega_scaled, _ = fit_uniform(0.3 * column, boundary, 150)
        assert omega_scaled == omega_full

    def test_degenerate_boundary_flagged(self):
        omega, degenerate = fit_uniform(np.zeros(50), PreliminaryBoundary(10, 10), 10)
        assert degenerate and omega == 0.0


def build_signal(columns, video_id="v0"):
    columns = np.asarray(columns, dtype=np.float64)
    bg = 1.0 - columns.max(axis=1, keepdims=True)
    return ProbabilitySignal(video_id, 1, np.hstack([columns, bg]))


class TestGeneratePseudoLabels:
    def setup_method(self):
        length = 300
        column = gaussian_column(length, 150, 10.0, height=0.9)
        self.signal = build_signal(column[:, None])
        self.points = [PointAnnotation("v0", 148, 1)]
        self.background = background(60, 240)

    def test_one_label_per_point(self):
        points = [PointAnnotation("v0", t, 1) for t in (100, 148, 200)]
        labels = generate_pseudo_labels(self.signal, points, self.background, ADMConfig())
        assert len(labels) == len(points)

    def test_gamma_edge_cases(self):
        only_sigma = generate_pseudo_labels(
            self.signal, self.points, self.background, ADMConfig(gamma1=1.0, gamma2=0.0)
        )[0]
        assert only_sigma.delta == pytest.approx(only_sigma.sigma)
        only_omega = generate_pseudo_labels(
            self.signal, self.points, self.background, ADMConfig(gamma1=0.0, gamma2=1.0)
        )[0]
        assert only_omega.delta == pytest.approx(only_omega.omega)

    def test_delta_is_exact_combination(self):
        config = ADMConfig(gamma1=0.7, gamma2=0.3)
        label = generate_pseudo_labels(self.signal, self.points, self.background, config)[0]
        assert label.delta == pytest.approx(0.7 * label.sigma + 0.3 * label.omega)

    def test_interval_contains_peak_and_stays_in_video(self):
        rng = np.random.default_rng(24)
        length = 200
        for _ in range(20):
            column = np.clip(
                gaussian_column(length, int(rng.integers(20, 180)), float(rng.uniform(3, 25)))
                + rng.normal(0, 0.05, length),
                0,
                1,
            )
            signal = build_signal(column[:, None])
            t = int(rng.integers(10, 190))
            labels = generate_pseudo_labels(
                signal, [PointAnnotation("v0", t, 1)], background(), ADMConfig()
            )
            label = labels[0]
            assert 0 <= label.start <= label.t_star <= label.end <= length - 1

    def test_degenerate_boundary_produces_flagged_point_label(self):
        labels = generate_pseudo_labels(
            self.signal, [PointAnnotation("v0", 60, 1)], background(60), ADMConfig()
        )
        label = labels[0]
        assert label.degenerate
        assert label.start <= label.t_star <= label.end

    def test_scaling_column_preserves_fits(self):
        scaled = build_signal(0.5 * self.signal.values[:, :1])
        full = generate_pseudo_labels(self.signal, self.points, self.background, ADMConfig())[0]
        half = generate_pseudo_labels(scaled, self.points, self.background, ADMConfig())[0]
        assert half.sigma == pytest.approx(full.sigma, abs=1e-4)
        assert half.omega == full.omega

    def test_video_mismatch_rejected(self):
        with pytest.raises(InvalidInputError):
            generate_pseudo_labels(
                self.signal, [PointAnnotation("other", 10, 1)], self.background, ADMConfig()
            )


class TestSampleSupervision:
    def make_label(self, start, end, t, class_id=1):
        from actionness.adm import PseudoLabel

        return PseudoLabel("v0", t, t, 1.0, 1.0, 2.0, start, end, class_id)

    def test_radius_within_wide_interval(self):
        label = self.make_label(5, 20, 10)
        assert sample_supervision([label], 2, 1, 2) == [(8, 1), (9, 1), (10, 1), (11, 1), (12, 1)]

    def test_clipped_to_interval(self):
        label = self.make_label(9, 11, 10)
        assert sample_supervision([label], 2, 1, 2) == [(9, 1), (10, 1), (11, 1)]

    def test_level_mapping(self):
        label = self.make_label(0, 40, 10)
        assert sample_supervision([label], 2, 2, 2) == [(3, 1), (4, 1), (5, 1), (6, 1), (7, 1)]


class TestADMConfig:
    def test_rejects_bad_delta(self):
        with pytest.raises(InvalidInputError):
            ADMConfig(delta=0.6)

    def test_rejects_zero_gammas(self):
        with pytest.raises(InvalidInputError):
            ADMConfig(gamma1=0.0, gamma2=0.0)


def test_fitted_parameters_stay_inside_bounds():
    rng = np.random.default_rng(25)
    for _ in range(30):
        length = 200
        column = rng.uniform(0, 1, length)
        b_start = int(rng.integers(0, 80))
        b_end = int(rng.integers(b_start + 1, length))
        boundary = PreliminaryBoundary(b_start, b_end)
        t_star = int(rng.integers(b_start, b_end + 1))
        upper = max(t_star - b_start, b_end - t_star)
        sigma, _ = fit_gaussian(column, boundary, t_star)
        omega, _ = fit_uniform(column, boundary, t_star)
        assert SIGMA_LOWER_BOUND <= sigma <= upper or upper < SIGMA_LOWER_BOUND
        assert 0.0 <= omega <= upper


def test_clip_to_boundary_option():
    length = 300
    column = gaussian_column(length, 150, 40.0, height=0.9)
    signal = build_signal(column[:, None])
    points = [PointAnnotation("v0", 150, 1)]
    bg = background(130, 170)
    free = generate_pseudo_labels(signal, points, bg, ADMConfig(gamma1=2.0, gamma2=2.0))[0]
    clipped = generate_pseudo_labels(
        signal, points, bg, ADMConfig(gamma1=2.0, gamma2=2.0, clip_to_boundary=True)
    )[0]
    assert free.start < 130 or free.end > 170  # wide gammas overshoot the boundary
    assert 130 <= clipped.start <= clipped.end <= 170
