#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rankot/transport.hpp"

namespace rankot {

// Statistic trace over time. values[i] belongs to time index first_index + i,
// with time counted 1-based from the first series row.
struct Trace {
    Eigen::VectorXd values;
    Eigen::Index first_index = 0;
};

enum class ThresholdMode {
    NullQuantile,  // (1 - alpha) quantile of simulated null statistics at the window size
    Relative,      // fraction of the filtered trace maximum
    Fixed,         // caller-supplied constant
};

struct CpdConfig {
    Eigen::Index window = 250;
    double epsilon = 0.01;
    Eigen::Index stride = 5;
    Eigen::Index filter_half_width = -1;  // -1 selects round(window / 5)
    ThresholdMode threshold_mode = ThresholdMode::NullQuantile;
    double alpha = 0.01;             // NullQuantile mode
    int null_replicates = 199;       // NullQuantile mode
    double relative_fraction = 0.5;  // Relative mode
    double fixed_threshold = 0.0;    // Fixed mode
    Eigen::Index min_separation = -1;  // -1 selects window
    bool standardize = true;           // per-column median/MAD before analysis
    std::uint64_t seed = 0;
    SinkhornOptions sinkhorn{};
};

struct CpdResult {
    Trace raw_trace;
    Trace filtered_trace;
    std::vector<Eigen::Index> change_points;  // 1-based time indices
    double threshold = 0.0;
    CpdConfig config;
};

// Scaled soft rank energy between the window rows before and after each time
// index t in [window + 1, T - window] (1-based; row t itself excluded).
// Positions skipped by stride > 1 are filled by linear interpolation.
Trace sliding_statistic(const Eigen::MatrixXd& series, Eigen::Index window, double epsilon,
                        Eigen::Index stride, const SinkhornOptions& opts = {});

// Symmetric moving average of width 2w+1, truncated and renormalized at the
// boundaries. w = 0 returns the input unchanged.
Eigen::VectorXd lowpass(const Eigen::VectorXd& trace, Eigen::Index half_width);

// Per-column robust standardization: subtract the median, divide by
// 1.4826 * MAD (columns with zero MAD are only centered).
Eigen::MatrixXd robust_standardize(const Eigen::MatrixXd& series);

CpdResult detect_change_points(const Eigen::MatrixXd& series, const CpdConfig& config);

} // namespace rankot
