#include "rankot/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rankot/errors.hpp"
#include "rankot/parallel.hpp"
#include "rankot/rng.hpp"

namespace rankot {

namespace {

constexpr std::uint64_t kNullTask = 0x4e554c4cULL;  // "NULL"

} // namespace

std::vector<double> null_samples(Eigen::Index m, Eigen::Index n, Eigen::Index d, double epsilon,
                                 const KernelSpec& kernel, int B, std::uint64_t seed,
                                 const SinkhornOptions& opts) {
    if (m < 1 || n < 1 || d < 1)
        throw invalid_argument_error("null_samples: m, n, d must be positive");
    if (B < 1)
        throw invalid_argument_error("null_samples: need at least one replicate");

    const Eigen::Index total = m + n;
    std::vector<double> values(static_cast<std::size_t>(B));
    parallel_for(static_cast<std::size_t>(B), [&](std::size_t b) {
        std::mt19937_64 rng = make_rng(seed, kNullTask, b);
        Eigen::MatrixXd pooled(total, d);
        for (Eigen::Index i = 0; i < total; ++i)
            for (Eigen::Index j = 0; j < d; ++j) pooled(i, j) = sample_normal(rng);
        // Uniform random labeling: Fisher-Yates on the row order, first m are X.
        std::vector<Eigen::Index> order(static_cast<std::size_t>(total));
        std::iota(order.begin(), order.end(), 0);
        for (Eigen::Index i = total - 1; i > 0; --i) {
            const auto j = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(i + 1));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
        Eigen::MatrixXd X(m, d), Y(n, d);
        for (Eigen::Index i = 0; i < m; ++i) X.row(i) = pooled.row(order[static_cast<std::size_t>(i)]);
        for (Eigen::Index i = 0; i < n; ++i)
            Y.row(i) = pooled.row(order[static_cast<std::size_t>(m + i)]);
        values[b] = rank_energy(X, Y, epsilon, kernel, opts).scaled_value;
    });
    return values;
}

double null_quantile(std::vector<double> samples, double alpha) {
    if (samples.empty())
        throw invalid_argument_error("null_quantile: empty sample");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw invalid_argument_error("null_quantile: alpha must lie in (0, 1)");
    std::sort(samples.begin(), samples.end());
    const auto B = static_cast<double>(samples.size());
    auto k = static_cast<std::size_t>(std::ceil((1.0 - alpha) * B));
    if (k < 1) k = 1;
    return samples[k - 1];
}

TestResult two_sample_test(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double alpha,
                           double epsilon, const KernelSpec& kernel, int B, std::uint64_t seed,
                           const SinkhornOptions& opts) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw invalid_argument_error("two_sample_test: alpha must lie in (0, 1)");
    if (B < 1)
        throw invalid_argument_error("two_sample_test: need at least one permutation");

    TestResult result;
    result.alpha = alpha;
    result.permutations = B;
    result.seed = seed;
    result.approximate_null = epsilon > 0.0;
    result.resolution_warning = static_cast<double>(B) < 1.0 / alpha - 1.0;
    result.statistic = rank_energy(X, Y, epsilon, kernel, opts);

    const std::vector<double> nulls =
        null_samples(X.rows(), Y.rows(), X.cols(), epsilon, kernel, B, seed, opts);
    result.threshold = null_quantile(nulls, alpha);

    int count_ge = 0;
    for (double v : nulls)
        if (v >= result.statistic.scaled_value) ++count_ge;
    result.p_value = (1.0 + count_ge) / (static_cast<double>(B) + 1.0);
    result.reject = result.statistic.scaled_value > result.threshold;
    return result;
}

} // namespace rankot
