#include "rankot/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rankot/errors.hpp"
#include "rankot/halton.hpp"

namespace rankot {

const char* kind_name(Statistic::Kind kind) {
    switch (kind) {
        case Statistic::Kind::RE: return "RE";
        case Statistic::Kind::SRE: return "sRE";
        case Statistic::Kind::KRE: return "kRE";
        case Statistic::Kind::KSRE: return "ksRE";
    }
    return "?";
}

namespace {

void check_split(const RankSet& ranks) {
    if (ranks.split < 1 || ranks.split >= ranks.ranks.rows())
        throw invalid_argument_error("energy statistic: split must leave both samples nonempty");
}

Statistic::Kind pick_kind(const RankSet& ranks, const KernelSpec& kernel) {
    const bool soft = ranks.mode == RankSet::Mode::Soft;
    if (kernel.type == KernelSpec::Type::Gaussian)
        return soft ? Statistic::Kind::KSRE : Statistic::Kind::KRE;
    return soft ? Statistic::Kind::SRE : Statistic::Kind::RE;
}

double finish(Statistic& s, double value, Eigen::Index m, Eigen::Index n) {
    s.value = value;
    s.scaled_value =
        value * (static_cast<double>(m) * static_cast<double>(n) / static_cast<double>(m + n));
    return value;
}

// Mean pairwise kernel values within X, within Y, and across.
struct KernelMeans {
    double cross = 0.0;   // B
    double within_x = 0.0;  // C
    double within_y = 0.0;  // D
};

// Canonical orientation of the cross loop. Swapping the two samples must
// reproduce the statistic bit for bit, so the accumulation order has to be a
// function of the blocks' content, not of which one came first: the outer
// loop runs over the block that is smaller, or lexicographically earlier on
// a tie. (Identical blocks make the cross matrix symmetric, where both
// orders visit the same value sequence.)
bool first_block_outer(const Eigen::MatrixXd& R, Eigen::Index m) {
    const Eigen::Index n = R.rows() - m;
    if (m != n) return m < n;
    for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index c = 0; c < R.cols(); ++c) {
            const double a = R(r, c), b = R(m + r, c);
            if (a != b) return a < b;
        }
    return true;
}

template <typename KernelFn>
KernelMeans kernel_means(const Eigen::MatrixXd& R, Eigen::Index m, KernelFn k) {
    const Eigen::Index total = R.rows();
    const Eigen::Index n = total - m;
    double wx = 0.0, wy = 0.0, cross = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j) wx += k((R.row(i) - R.row(j)).norm());
    for (Eigen::Index i = m; i < total; ++i)
        for (Eigen::Index j = i + 1; j < total; ++j) wy += k((R.row(i) - R.row(j)).norm());
    if (first_block_outer(R, m)) {
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = m; j < total; ++j) cross += k((R.row(i) - R.row(j)).norm());
    } else {
        for (Eigen::Index j = m; j < total; ++j)
            for (Eigen::Index i = 0; i < m; ++i) cross += k((R.row(i) - R.row(j)).norm());
    }
    const double self = k(0.0);
    const double dm = static_cast<double>(m), dn = static_cast<double>(n);
    KernelMeans out;
    out.cross = cross / (dm * dn);
    out.within_x = (2.0 * wx + dm * self) / (dm * dm);
    out.within_y = (2.0 * wy + dn * self) / (dn * dn);
    return out;
}

} // namespace

Statistic energy_statistic(const RankSet& ranks) {
    check_split(ranks);
    const Eigen::Index m = ranks.split;
    const Eigen::Index n = ranks.ranks.rows() - m;
    const KernelMeans km = kernel_means(ranks.ranks, m, [](double r) { return r; });
    Statistic s;
    s.kind = pick_kind(ranks, KernelSpec::distance());
    s.epsilon = ranks.epsilon;
    s.kernel = KernelSpec::distance();
    // Grouping the within terms keeps the value bit-identical under a swap
    // of the two samples (addition of the pair is commutative).
    finish(s, 2.0 * km.cross - (km.within_x + km.within_y), m, n);
    return s;
}

Statistic kernel_energy_statistic(const RankSet& ranks, const KernelSpec& kernel) {
    if (kernel.type == KernelSpec::Type::Distance) return energy_statistic(ranks);
    check_split(ranks);
    const Eigen::Index m = ranks.split;
    const Eigen::Index n = ranks.ranks.rows() - m;

    double bw;
    if (kernel.bandwidth.has_value()) {
        bw = *kernel.bandwidth;
        if (!(bw > 0.0))
            throw invalid_argument_error("kernel_energy_statistic: bandwidth must be positive");
    } else {
        // Median heuristic over the strictly-upper-triangular pooled distances.
        const Eigen::Index total = ranks.ranks.rows();
        std::vector<double> dists;
        dists.reserve(static_cast<std::size_t>(total * (total - 1) / 2));
        for (Eigen::Index i = 0; i < total; ++i)
            for (Eigen::Index j = i + 1; j < total; ++j)
                dists.push_back((ranks.ranks.row(i) - ranks.ranks.row(j)).norm());
        auto mid = dists.begin() + dists.size() / 2;
        std::nth_element(dists.begin(), mid, dists.end());
        bw = *mid;
        if (!(bw > 0.0)) bw = 1.0;  // all rank vectors coincide; any bandwidth gives 0
    }

    const double inv_two_bw2 = 1.0 / (2.0 * bw * bw);
    const KernelMeans km =
        kernel_means(ranks.ranks, m, [inv_two_bw2](double r) { return std::exp(-r * r * inv_two_bw2); });
    Statistic s;
    s.kind = pick_kind(ranks, kernel);
    s.epsilon = ranks.epsilon;
    s.kernel = kernel;
    s.kernel.bandwidth = bw;
    finish(s, (km.within_x + km.within_y) - 2.0 * km.cross, m, n);
    return s;
}

Statistic rank_energy(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double epsilon,
                      const KernelSpec& kernel, const SinkhornOptions& opts) {
    if (X.cols() != Y.cols())
        throw invalid_argument_error("rank_energy: X and Y must share a dimension");
    if (X.rows() < 1 || Y.rows() < 1)
        throw invalid_argument_error("rank_energy: both samples must be nonempty");
    const HaltonGrid grid = halton_grid(X.rows() + Y.rows(), X.cols());
    const RankSet ranks = joint_rank_map(X, Y, grid, epsilon, opts);
    return kernel_energy_statistic(ranks, kernel);
}

} // namespace rankot
