#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rankot {

// Optimal assignment: row i of the cost matrix is matched to column sigma[i].
// row_duals/col_duals are the optimal LP duals (reduced costs nonnegative);
// they double as a warm start for entropic solves at small epsilon.
struct Assignment {
    std::vector<Eigen::Index> sigma;
    Eigen::VectorXd row_duals;
    Eigen::VectorXd col_duals;
    double cost = 0.0;
};

// Entropic transport plan with uniform 1/n marginals.
struct TransportPlan {
    Eigen::MatrixXd weights;        // n x n, nonnegative
    double tol = 0.0;               // requested per-marginal L1 tolerance
    int iterations_used = 0;
    double achieved_violation = 0.0; // max of the two L1 marginal deviations
    Eigen::VectorXd row_potential;  // f (log-domain)
    Eigen::VectorXd col_potential;  // g (log-domain)
};

enum class SinkhornInit {
    Auto,            // assignment duals when epsilon is small relative to costs
    Zero,
    AssignmentDuals,
    Given,           // use f0/g0
};

struct SinkhornOptions {
    double tol = 1e-9;       // L1 deviation per marginal
    int max_iter = 10000;
    double over_relaxation = 1.0;  // 1 = plain alternating scaling; (1,2) = SOR
    SinkhornInit init = SinkhornInit::Auto;
    Eigen::VectorXd f0;
    Eigen::VectorXd g0;
    bool throw_on_max_iter = true;  // false: return best-effort plan
};

// Squared Euclidean costs between rows of `points` and rows of `grid`.
Eigen::MatrixXd cost_matrix(const Eigen::MatrixXd& points, const Eigen::MatrixXd& grid);

// Exact minimum-cost assignment (O(n^3) shortest augmenting path). Among
// cost-minimizing permutations returns the lexicographically smallest sigma.
Assignment solve_assignment(const Eigen::MatrixXd& cost);

// Entropic OT between uniform marginals, solved by log-domain alternating
// scaling. Both marginals are checked after each full sweep.
TransportPlan sinkhorn(const Eigen::MatrixXd& cost, double epsilon,
                       const SinkhornOptions& opts = {});

// Median of all cost entries. Used to set epsilon scales in tests and tools.
double median_cost(const Eigen::MatrixXd& cost);

} // namespace rankot
