#pragma once

#include <Eigen/Dense>

#include "rankot/halton.hpp"
#include "rankot/transport.hpp"

namespace rankot {

// Rank vectors for a (possibly pooled) point cloud. Rows 0..split-1 belong to
// the first sample, rows split.. to the second; split == rows() when the set
// was built from a single cloud.
struct RankSet {
    enum class Mode { Hard, Soft };

    Eigen::MatrixXd ranks;   // one rank vector in [0,1]^d per row
    Mode mode = Mode::Hard;
    double epsilon = 0.0;    // 0 for hard ranks
    Eigen::Index split = 0;  // number of leading rows from the first sample
};

// Rank of point i is the grid row assigned to it by the exact transport of
// the empirical measure onto the grid measure.
RankSet hard_rank_map(const Eigen::MatrixXd& points, const HaltonGrid& grid);

// Rank of point i is the barycenter of grid rows under the row-normalized
// entropic plan. Row normalization uses the plan's realized row sums so that
// residual marginal error below tolerance cannot push ranks off the simplex.
RankSet soft_rank_map(const Eigen::MatrixXd& points, const HaltonGrid& grid, double epsilon,
                      const SinkhornOptions& opts = {});

// Stacks X over Y and ranks the pooled cloud; epsilon == 0 routes to the
// exact assignment, epsilon > 0 to the entropic plan. Records split = rows(X).
RankSet joint_rank_map(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const HaltonGrid& grid,
                       double epsilon, const SinkhornOptions& opts = {});

} // namespace rankot
