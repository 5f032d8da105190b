#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rankot/statistics.hpp"
#include "rankot/transport.hpp"

namespace rankot {

struct TestResult {
    Statistic statistic;
    double threshold = 0.0;  // (1 - alpha) null quantile of the scaled statistic
    double p_value = 1.0;
    bool reject = false;
    double alpha = 0.05;
    int permutations = 0;
    std::uint64_t seed = 0;
    // The permutation null is exact at epsilon == 0 (distribution-freeness)
    // and an approximation otherwise.
    bool approximate_null = false;
    // Set when B < 1/alpha - 1, i.e. the p-value grid cannot resolve alpha.
    bool resolution_warning = false;
};

// Scaled null statistics: each replicate draws m+n pooled standard Gaussian
// samples, splits them into labels uniformly at random, and evaluates the
// statistic. Deterministic per seed; replicates use independent streams.
std::vector<double> null_samples(Eigen::Index m, Eigen::Index n, Eigen::Index d, double epsilon,
                                 const KernelSpec& kernel, int B, std::uint64_t seed,
                                 const SinkhornOptions& opts = {});

// Empirical (1 - alpha) quantile with higher interpolation: the smallest
// sample value with at least a (1 - alpha) fraction of samples at or below it.
double null_quantile(std::vector<double> samples, double alpha);

TestResult two_sample_test(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double alpha,
                           double epsilon, const KernelSpec& kernel, int B, std::uint64_t seed,
                           const SinkhornOptions& opts = {});

} // namespace rankot
