#include "rankot/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "rankot/errors.hpp"
#include "rankot/inference.hpp"
#include "rankot/parallel.hpp"
#include "rankot/statistics.hpp"

namespace rankot {

namespace {

double column_median(Eigen::VectorXd v) {
    std::vector<double> w(v.data(), v.data() + v.size());
    auto mid = w.begin() + w.size() / 2;
    std::nth_element(w.begin(), mid, w.end());
    double hi = *mid;
    if (w.size() % 2 == 0) {
        auto lo_it = std::max_element(w.begin(), mid);
        return 0.5 * (*lo_it + hi);
    }
    return hi;
}

} // namespace

Eigen::MatrixXd robust_standardize(const Eigen::MatrixXd& series) {
    Eigen::MatrixXd out = series;
    for (Eigen::Index j = 0; j < series.cols(); ++j) {
        const double med = column_median(series.col(j));
        out.col(j).array() -= med;
        const double mad = column_median(out.col(j).cwiseAbs());
        const double scale = 1.4826 * mad;
        if (scale > 0.0) out.col(j) /= scale;
    }
    return out;
}

Trace sliding_statistic(const Eigen::MatrixXd& series, Eigen::Index window, double epsilon,
                        Eigen::Index stride, const SinkhornOptions& opts) {
    if (window < 2)
        throw invalid_argument_error("sliding_statistic: window must be at least 2");
    if (stride < 1)
        throw invalid_argument_error("sliding_statistic: stride must be at least 1");
    const Eigen::Index T = series.rows();
    if (T < 2 * window + 1)
        throw invalid_argument_error("sliding_statistic: series must have at least 2*window+1 rows");

    // 0-based positions tau in [window, T-1-window]; reported 1-based as tau+1.
    const Eigen::Index count = T - 2 * window;
    std::vector<Eigen::Index> eval_at;
    for (Eigen::Index i = 0; i < count; i += stride) eval_at.push_back(i);
    if (eval_at.back() != count - 1) eval_at.push_back(count - 1);

    std::vector<double> eval_values(eval_at.size());
    parallel_for(eval_at.size(), [&](std::size_t idx) {
        const Eigen::Index tau = window + eval_at[idx];
        const Eigen::MatrixXd X = series.middleRows(tau - window, window);
        const Eigen::MatrixXd Y = series.middleRows(tau + 1, window);
        eval_values[idx] = rank_energy(X, Y, epsilon, KernelSpec::distance(), opts).scaled_value;
    });

    Trace trace;
    trace.first_index = window + 1;
    trace.values.resize(count);
    for (std::size_t seg = 0; seg + 1 < eval_at.size(); ++seg) {
        const Eigen::Index a = eval_at[seg], b = eval_at[seg + 1];
        const double va = eval_values[seg], vb = eval_values[seg + 1];
        for (Eigen::Index i = a; i <= b; ++i) {
            const double t = b == a ? 0.0 : static_cast<double>(i - a) / static_cast<double>(b - a);
            trace.values(i) = va + t * (vb - va);
        }
    }
    if (eval_at.size() == 1) trace.values(eval_at[0]) = eval_values[0];
    return trace;
}

Eigen::VectorXd lowpass(const Eigen::VectorXd& trace, Eigen::Index half_width) {
    if (half_width < 0)
        throw invalid_argument_error("lowpass: half_width must be nonnegative");
    if (half_width == 0) return trace;
    const Eigen::Index n = trace.size();
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, i - half_width);
        const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + half_width);
        out(i) = trace.segment(lo, hi - lo + 1).mean();
    }
    return out;
}

CpdResult detect_change_points(const Eigen::MatrixXd& series, const CpdConfig& config) {
    CpdResult result;
    result.config = config;

    const Eigen::MatrixXd data = config.standardize ? robust_standardize(series) : series;
    result.raw_trace =
        sliding_statistic(data, config.window, config.epsilon, config.stride, config.sinkhorn);

    const Eigen::Index half_width =
        config.filter_half_width >= 0
            ? config.filter_half_width
            : static_cast<Eigen::Index>(std::llround(static_cast<double>(config.window) / 5.0));
    result.filtered_trace.first_index = result.raw_trace.first_index;
    result.filtered_trace.values = lowpass(result.raw_trace.values, half_width);

    switch (config.threshold_mode) {
        case ThresholdMode::NullQuantile: {
            const std::vector<double> nulls =
                null_samples(config.window, config.window, series.cols(), config.epsilon,
                             KernelSpec::distance(), config.null_replicates, config.seed,
                             config.sinkhorn);
            result.threshold = null_quantile(nulls, config.alpha);
            break;
        }
        case ThresholdMode::Relative:
            if (!(config.relative_fraction > 0.0 && config.relative_fraction <= 1.0))
                throw invalid_argument_error(
                    "detect_change_points: relative_fraction must lie in (0, 1]");
            result.threshold = config.relative_fraction * result.filtered_trace.values.maxCoeff();
            break;
        case ThresholdMode::Fixed:
            result.threshold = config.fixed_threshold;
            break;
    }

    // Candidate peaks: strict rise on the left, no rise on the right.
    const Eigen::VectorXd& f = result.filtered_trace.values;
    std::vector<Eigen::Index> peaks;
    for (Eigen::Index i = 1; i + 1 < f.size(); ++i)
        if (f(i) > result.threshold && f(i) > f(i - 1) && f(i) >= f(i + 1)) peaks.push_back(i);

    // Enforce separation, keeping the taller peak on conflicts.
    std::sort(peaks.begin(), peaks.end(),
              [&](Eigen::Index a, Eigen::Index b) { return f(a) > f(b); });
    const Eigen::Index min_sep = config.min_separation >= 0 ? config.min_separation : config.window;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index cand : peaks) {
        bool clashes = false;
        for (Eigen::Index acc : kept)
            if (std::abs(cand - acc) < min_sep) { clashes = true; break; }
        if (!clashes) kept.push_back(cand);
    }
    std::sort(kept.begin(), kept.end());
    result.change_points.reserve(kept.size());
    for (Eigen::Index i : kept)
        result.change_points.push_back(result.filtered_trace.first_index + i);
    return result;
}

} // namespace rankot
