#include "rankot/ranks.hpp"

#include "rankot/errors.hpp"

namespace rankot {

namespace {

void check_compatible(const Eigen::MatrixXd& points, const HaltonGrid& grid) {
    if (points.rows() != grid.points.rows())
        throw invalid_argument_error("rank map: point count must match grid size");
    if (points.cols() != grid.points.cols())
        throw invalid_argument_error("rank map: point dimension must match grid dimension");
    if (points.rows() == 0)
        throw invalid_argument_error("rank map: empty point cloud");
}

} // namespace

RankSet hard_rank_map(const Eigen::MatrixXd& points, const HaltonGrid& grid) {
    check_compatible(points, grid);
    const Assignment a = solve_assignment(cost_matrix(points, grid.points));
    RankSet rs;
    rs.mode = RankSet::Mode::Hard;
    rs.epsilon = 0.0;
    rs.split = points.rows();
    rs.ranks.resize(points.rows(), points.cols());
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        rs.ranks.row(i) = grid.points.row(a.sigma[static_cast<std::size_t>(i)]);
    return rs;
}

RankSet soft_rank_map(const Eigen::MatrixXd& points, const HaltonGrid& grid, double epsilon,
                      const SinkhornOptions& opts) {
    check_compatible(points, grid);
    if (!(epsilon > 0.0))
        throw invalid_argument_error("soft_rank_map: epsilon must be positive");
    const TransportPlan plan = sinkhorn(cost_matrix(points, grid.points), epsilon, opts);
    RankSet rs;
    rs.mode = RankSet::Mode::Soft;
    rs.epsilon = epsilon;
    rs.split = points.rows();
    const Eigen::VectorXd row_sums = plan.weights.rowwise().sum();
    rs.ranks.noalias() = plan.weights * grid.points;
    rs.ranks.array().colwise() /= row_sums.array();
    return rs;
}

RankSet joint_rank_map(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const HaltonGrid& grid,
                       double epsilon, const SinkhornOptions& opts) {
    if (X.cols() != Y.cols())
        throw invalid_argument_error("joint_rank_map: X and Y must share a dimension");
    if (grid.points.rows() != X.rows() + Y.rows())
        throw invalid_argument_error("joint_rank_map: grid size must equal the pooled sample size");
    Eigen::MatrixXd pooled(X.rows() + Y.rows(), X.cols());
    pooled.topRows(X.rows()) = X;
    pooled.bottomRows(Y.rows()) = Y;
    RankSet rs = epsilon == 0.0 ? hard_rank_map(pooled, grid) : soft_rank_map(pooled, grid, epsilon, opts);
    rs.split = X.rows();
    return rs;
}

} // namespace rankot
