#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rankot/transport.hpp"

namespace rankot {

// A d x k matrix with orthonormal columns.
struct StiefelPoint {
    Eigen::MatrixXd U;
    Eigen::Index k = 0;
};

struct PsreOptions {
    int restarts = 5;
    int max_iter = 100;
    double step0 = 1.0;
    double tol = 1e-6;      // stop when relative objective improvement falls below this
    double fd_step = 1e-4;  // finite-difference step for gradient probes
    // Gradient probes rerun only this many Sinkhorn sweeps from the base
    // point's converged potentials; 0 means solve every probe from scratch
    // at full tolerance.
    int probe_sweeps = 8;
    std::uint64_t seed = 0;
    SinkhornOptions sinkhorn{};
};

struct ProjectionResult {
    StiefelPoint U_star;
    double value = 0.0;       // scaled soft statistic at U_star
    double hard_value = 0.0;  // scaled hard-rank statistic at U_star, reported post hoc
    std::vector<std::pair<int, double>> trace;  // (iteration, objective) of the best restart
    int restarts_used = 0;
    int iterations_used = 0;  // accepted ascent steps in the best restart
    bool stagnated = false;   // no restart improved on its initialization
};

// Scaled soft rank energy of the k-dimensionally projected samples
// (rows of X*U vs rows of Y*U) against a [0,1]^k Halton grid.
double psre_objective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const StiefelPoint& U,
                      double epsilon, const SinkhornOptions& opts = {});

// Euclidean gradient by central finite differences over the d*k entries,
// projected to the Stiefel tangent space: G - U * sym(U^T G).
Eigen::MatrixXd riemannian_gradient(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                    const StiefelPoint& U, double epsilon, double h,
                                    const PsreOptions& opts = {});

// Thin-QR retraction with the R diagonal forced positive.
Eigen::MatrixXd qr_retract(const Eigen::MatrixXd& M);

// Riemannian gradient ascent with backtracking line search over restarts.
// Restart 0 starts from the top-k right singular vectors of the pooled,
// column-centered data; later restarts from seeded Gaussian matrices.
ProjectionResult maximize_psre(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, Eigen::Index k,
                               double epsilon, const PsreOptions& opts = {});

} // namespace rankot
