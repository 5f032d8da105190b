#include <doctest.h>

#include <cmath>

#include "rankot/changepoint.hpp"
#include "rankot/errors.hpp"
#include "rankot/rng.hpp"
#include "rankot/statistics.hpp"

using namespace rankot;

namespace {

Eigen::MatrixXd gaussian_series(std::mt19937_64& rng, Eigen::Index T, Eigen::Index d) {
    Eigen::MatrixXd M(T, d);
    for (Eigen::Index i = 0; i < T; ++i)
        for (Eigen::Index j = 0; j < d; ++j) M(i, j) = sample_normal(rng);
    return M;
}

SinkhornOptions loose_solver() {
    SinkhornOptions opts;
    opts.tol = 1e-6;
    opts.max_iter = 5000;
    opts.throw_on_max_iter = false;
    return opts;
}

} // namespace

TEST_CASE("robust standardization centers by median and scales by MAD") {
    Eigen::MatrixXd M(5, 2);
    M << 1, 7,
         2, 7,
         3, 7,
         4, 7,
         100, 7;
    const Eigen::MatrixXd S = robust_standardize(M);
    // Column 0: median 3, MAD 1, scale 1.4826.
    CHECK(S(0, 0) == doctest::Approx(-2.0 / 1.4826).epsilon(1e-12));
    CHECK(S(2, 0) == doctest::Approx(0.0).scale(1.0));
    CHECK(S(4, 0) == doctest::Approx(97.0 / 1.4826).epsilon(1e-12));
    // Constant column: centered only, no division by a zero MAD.
    CHECK(S.col(1).cwiseAbs().maxCoeff() == 0.0);
    // The outlier stays an outlier but the bulk is order one.
    CHECK(std::abs(S(1, 0)) < 2.0);
}

TEST_CASE("lowpass filter truncates and renormalizes at the edges") {
    Eigen::VectorXd v(5);
    v << 1, 2, 3, 4, 5;
    const Eigen::VectorXd one = lowpass(v, 1);
    CHECK(one(0) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(one(1) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(one(2) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(one(4) == doctest::Approx(4.5).epsilon(1e-14));

    CHECK((lowpass(v, 0) - v).cwiseAbs().maxCoeff() == 0.0);

    // A window wider than the series averages everything.
    const Eigen::VectorXd wide = lowpass(v, 10);
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(wide(i) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("sliding statistic matches a direct evaluation at the minimum length") {
    std::mt19937_64 rng = make_rng(25, 1);
    const Eigen::Index w = 10;
    Eigen::MatrixXd series = gaussian_series(rng, 2 * w + 1, 2);
    series.bottomRows(w).array() += 4.0;

    const Trace trace = sliding_statistic(series, w, 0.1, 1, loose_solver());
    REQUIRE(trace.values.size() == 1);
    CHECK(trace.first_index == w + 1);

    const Statistic direct = rank_energy(series.topRows(w), series.bottomRows(w), 0.1,
                                         KernelSpec::distance(), loose_solver());
    CHECK(trace.values(0) == doctest::Approx(direct.scaled_value).epsilon(1e-12));
    CHECK(trace.values(0) > 0.5);
}

TEST_CASE("stride evaluates a lattice and interpolates between its nodes") {
    std::mt19937_64 rng = make_rng(25, 2);
    const Eigen::Index w = 8;
    const Eigen::MatrixXd series = gaussian_series(rng, 2 * w + 12, 2);

    const Trace dense = sliding_statistic(series, w, 0.1, 1, loose_solver());
    const Trace strided = sliding_statistic(series, w, 0.1, 5, loose_solver());
    REQUIRE(dense.values.size() == 12);
    REQUIRE(strided.values.size() == 12);
    CHECK(strided.first_index == dense.first_index);

    // Lattice nodes 0, 5, 10 and the final position 11 are true evaluations.
    for (Eigen::Index i : {0, 5, 10, 11})
        CHECK(strided.values(i) == doctest::Approx(dense.values(i)).epsilon(1e-12));
    // In-between positions are linear in the node values.
    for (Eigen::Index i = 1; i < 5; ++i) {
        const double expected =
            strided.values(0) + (strided.values(5) - strided.values(0)) * double(i) / 5.0;
        CHECK(strided.values(i) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("a single mean shift is located to within a window fraction") {
    std::mt19937_64 rng = make_rng(25, 3);
    const Eigen::Index T = 900, w = 100;
    Eigen::MatrixXd series = gaussian_series(rng, T, 2);
    series.bottomRows(T - 450).array() += 3.0;  // break after row 450 (1-based t = 450)

    CpdConfig config;
    config.window = w;
    config.epsilon = 0.1;
    config.stride = 10;
    config.threshold_mode = ThresholdMode::Relative;
    config.relative_fraction = 0.5;
    config.sinkhorn = loose_solver();
    const CpdResult result = detect_change_points(series, config);

    REQUIRE(result.change_points.size() == 1);
    CHECK(std::abs(double(result.change_points[0]) - 450.0) <= 30.0);
    CHECK(result.raw_trace.values.size() == T - 2 * w);
    CHECK(result.filtered_trace.values.size() == T - 2 * w);
    CHECK(result.raw_trace.first_index == w + 1);
    CHECK(result.threshold > 0.0);

    // The change point indexes the original series, inside the valid band.
    CHECK(result.change_points[0] >= w + 1);
    CHECK(result.change_points[0] <= T - w);
}

TEST_CASE("null series yields no detections under the null quantile threshold") {
    std::mt19937_64 rng = make_rng(25, 4);
    const Eigen::MatrixXd series = gaussian_series(rng, 240, 2);

    CpdConfig config;
    config.window = 40;
    config.epsilon = 0.1;
    config.stride = 8;
    config.threshold_mode = ThresholdMode::NullQuantile;
    config.alpha = 0.01;
    config.null_replicates = 99;
    config.seed = 17;
    config.sinkhorn = loose_solver();
    const CpdResult result = detect_change_points(series, config);
    CHECK(result.change_points.size() <= 1);
    CHECK(result.threshold > 0.0);
}

TEST_CASE("fixed thresholds and separation pruning behave as configured") {
    std::mt19937_64 rng = make_rng(25, 5);
    const Eigen::Index T = 300, w = 30;
    Eigen::MatrixXd series = gaussian_series(rng, T, 2);
    series.middleRows(120, 60).array() += 3.0;  // two breaks: near t = 120 and t = 180

    CpdConfig config;
    config.window = w;
    config.epsilon = 0.1;
    config.stride = 5;
    config.threshold_mode = ThresholdMode::Fixed;
    config.fixed_threshold = 1e9;
    config.sinkhorn = loose_solver();
    CHECK(detect_change_points(series, config).change_points.empty());

    config.fixed_threshold = 2.0;
    config.min_separation = 20;
    const CpdResult two = detect_change_points(series, config);
    CHECK(two.threshold == 2.0);
    REQUIRE(two.change_points.size() == 2);
    CHECK(std::abs(double(two.change_points[0]) - 120.0) <= 20.0);
    CHECK(std::abs(double(two.change_points[1]) - 180.0) <= 20.0);
    CHECK(two.change_points[0] < two.change_points[1]);

    // A separation wider than the gap keeps only the taller peak.
    config.min_separation = 100;
    CHECK(detect_change_points(series, config).change_points.size() == 1);
}

TEST_CASE("changepoint inputs are validated") {
    std::mt19937_64 rng = make_rng(25, 6);
    const Eigen::MatrixXd series = gaussian_series(rng, 30, 2);
    CHECK_THROWS_AS(sliding_statistic(series, 15, 0.1, 1), invalid_argument_error);
    CHECK_THROWS_AS(sliding_statistic(series, 1, 0.1, 1), invalid_argument_error);
    CHECK_THROWS_AS(sliding_statistic(series, 10, 0.1, 0), invalid_argument_error);

    CpdConfig config;
    config.window = 15;  // needs T >= 31
    CHECK_THROWS_AS(detect_change_points(series, config), invalid_argument_error);
}
