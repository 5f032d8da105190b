#include "rankot/transport.hpp"

#include "rankot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace rankot {

namespace {

// Small-epsilon kernels put most entries deep in the denormal range, and the
// hardware assists for denormal arithmetic then dominate the sweep time.
// Those values are far below any tolerance used here, so the solver runs
// with flush-to-zero / denormals-are-zero and restores the caller's mode.
class DenormalsOffGuard {
public:
    DenormalsOffGuard() {
#if defined(__SSE2__)
        csr_ = _mm_getcsr();
        _mm_setcsr(csr_ | 0x8040);  // FTZ and DAZ bits
#endif
    }
    ~DenormalsOffGuard() {
#if defined(__SSE2__)
        _mm_setcsr(csr_);
#endif
    }
    DenormalsOffGuard(const DenormalsOffGuard&) = delete;
    DenormalsOffGuard& operator=(const DenormalsOffGuard&) = delete;

private:
#if defined(__SSE2__)
    unsigned csr_ = 0;
#endif
};

} // namespace

Eigen::MatrixXd cost_matrix(const Eigen::MatrixXd& points, const Eigen::MatrixXd& grid) {
    if (points.rows() != grid.rows() || points.cols() != grid.cols())
        throw invalid_argument_error("cost_matrix: points and grid must have equal shape");
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd cost(n, n);
    // ||x - h||^2 = ||x||^2 + ||h||^2 - 2 x.h ; the Gram term carries the O(n^2 d) work.
    const Eigen::VectorXd pn = points.rowwise().squaredNorm();
    const Eigen::VectorXd gn = grid.rowwise().squaredNorm();
    cost.noalias() = -2.0 * points * grid.transpose();
    cost.colwise() += pn;
    cost.rowwise() += gn.transpose();
    // Rounding can leave tiny negatives on coincident points.
    cost = cost.cwiseMax(0.0);
    return cost;
}

double median_cost(const Eigen::MatrixXd& cost) {
    std::vector<double> v(cost.data(), cost.data() + cost.size());
    auto mid = v.begin() + v.size() / 2;
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

namespace {

// Shortest augmenting path assignment solver with dual updates.
// p[j] holds the row matched to column j; column n is a virtual root.
void lap_shortest_augmenting(const Eigen::MatrixXd& C, std::vector<Eigen::Index>& row_of_col,
                             Eigen::VectorXd& u, Eigen::VectorXd& v) {
    const Eigen::Index n = C.rows();
    const double INF = std::numeric_limits<double>::infinity();
    u.setZero(n + 1);
    v.setZero(n + 1);
    row_of_col.assign(static_cast<std::size_t>(n + 1), n);
    std::vector<Eigen::Index> way(static_cast<std::size_t>(n + 1), 0);
    std::vector<double> minv(static_cast<std::size_t>(n + 1));
    std::vector<char> used(static_cast<std::size_t>(n + 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        row_of_col[static_cast<std::size_t>(n)] = i;
        Eigen::Index j0 = n;
        std::fill(minv.begin(), minv.end(), INF);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const Eigen::Index i0 = row_of_col[static_cast<std::size_t>(j0)];
            double delta = INF;
            Eigen::Index j1 = -1;
            const double ui0 = u(i0);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = C(i0, j) - ui0 - v(j);
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (Eigen::Index j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u(row_of_col[static_cast<std::size_t>(j)]) += delta;
                    v(j) -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (row_of_col[static_cast<std::size_t>(j0)] != n);
        do {
            const Eigen::Index j1 = way[static_cast<std::size_t>(j0)];
            row_of_col[static_cast<std::size_t>(j0)] = row_of_col[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != n);
    }
}

// Kuhn augmenting search on the tight-edge graph, restricted to free rows >= first_free.
bool try_augment(Eigen::Index row, const std::vector<std::vector<Eigen::Index>>& adj,
                 const std::vector<char>& col_blocked, std::vector<Eigen::Index>& col_row,
                 std::vector<char>& visited) {
    for (Eigen::Index j : adj[static_cast<std::size_t>(row)]) {
        if (col_blocked[static_cast<std::size_t>(j)] || visited[static_cast<std::size_t>(j)])
            continue;
        visited[static_cast<std::size_t>(j)] = 1;
        if (col_row[static_cast<std::size_t>(j)] < 0 ||
            try_augment(col_row[static_cast<std::size_t>(j)], adj, col_blocked, col_row, visited)) {
            col_row[static_cast<std::size_t>(j)] = row;
            return true;
        }
    }
    return false;
}

} // namespace

Assignment solve_assignment(const Eigen::MatrixXd& cost) {
    const Eigen::Index n = cost.rows();
    if (n == 0 || cost.cols() != n)
        throw invalid_argument_error("solve_assignment: cost matrix must be square and nonempty");
    if (!cost.allFinite())
        throw invalid_argument_error("solve_assignment: cost matrix must be finite");

    std::vector<Eigen::Index> row_of_col;
    Eigen::VectorXd u, v;
    lap_shortest_augmenting(cost, row_of_col, u, v);

    Assignment result;
    result.sigma.assign(static_cast<std::size_t>(n), -1);
    for (Eigen::Index j = 0; j < n; ++j)
        result.sigma[static_cast<std::size_t>(row_of_col[static_cast<std::size_t>(j)])] = j;
    result.row_duals = u.head(n);
    result.col_duals = v.head(n);

    // Lexicographic tie-break: every optimal assignment lives on the tight
    // edges of the optimal duals, so fix rows in order to the smallest column
    // that still admits a perfect completion within the tight graph.
    const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
    const double tau = 1e-9 * scale;
    std::vector<std::vector<Eigen::Index>> adj(static_cast<std::size_t>(n));
    bool any_tie = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (cost(i, j) - result.row_duals(i) - result.col_duals(j) <= tau)
                adj[static_cast<std::size_t>(i)].push_back(j);
        }
        if (adj[static_cast<std::size_t>(i)].size() > 1) any_tie = true;
    }

    if (any_tie) {
        std::vector<Eigen::Index> col_row(static_cast<std::size_t>(n));  // matching for rows not yet fixed
        for (Eigen::Index j = 0; j < n; ++j)
            col_row[static_cast<std::size_t>(j)] = row_of_col[static_cast<std::size_t>(j)];
        std::vector<char> col_blocked(static_cast<std::size_t>(n), 0);
        std::vector<char> visited(static_cast<std::size_t>(n));
        std::vector<Eigen::Index> row_col(static_cast<std::size_t>(n), -1);
        for (Eigen::Index i = 0; i < n; ++i) {
            // Earlier augmenting searches may have moved this row, so read the
            // live matching rather than the assignment produced by the solver.
            for (Eigen::Index j = 0; j < n; ++j)
                if (col_row[static_cast<std::size_t>(j)] >= 0)
                    row_col[static_cast<std::size_t>(col_row[static_cast<std::size_t>(j)])] = j;
            const Eigen::Index current = row_col[static_cast<std::size_t>(i)];
            result.sigma[static_cast<std::size_t>(i)] = current;
            for (Eigen::Index j : adj[static_cast<std::size_t>(i)]) {
                if (j == current) break;  // already the smallest feasible column
                if (col_blocked[static_cast<std::size_t>(j)]) continue;
                // Move the row occupying j (if any) elsewhere; row i releases `current`.
                const Eigen::Index displaced = col_row[static_cast<std::size_t>(j)];
                col_row[static_cast<std::size_t>(current)] = -1;
                col_row[static_cast<std::size_t>(j)] = i;
                bool ok = true;
                if (displaced >= 0 && displaced != i) {
                    std::fill(visited.begin(), visited.end(), 0);
                    visited[static_cast<std::size_t>(j)] = 1;
                    ok = try_augment(displaced, adj, col_blocked, col_row, visited);
                }
                if (ok) {
                    result.sigma[static_cast<std::size_t>(i)] = j;
                    break;
                }
                col_row[static_cast<std::size_t>(j)] = displaced;
                col_row[static_cast<std::size_t>(current)] = i;
            }
            col_blocked[static_cast<std::size_t>(result.sigma[static_cast<std::size_t>(i)])] = 1;
        }
        // Rebuild sigma for the rows the augmenting searches may have moved.
        for (Eigen::Index j = 0; j < n; ++j)
            if (col_row[static_cast<std::size_t>(j)] >= 0)
                result.sigma[static_cast<std::size_t>(col_row[static_cast<std::size_t>(j)])] = j;
    }

    result.cost = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        result.cost += cost(i, result.sigma[static_cast<std::size_t>(i)]);
    return result;
}

TransportPlan sinkhorn(const Eigen::MatrixXd& cost, double epsilon, const SinkhornOptions& opts) {
    const Eigen::Index n = cost.rows();
    if (n == 0 || cost.cols() != n)
        throw invalid_argument_error("sinkhorn: cost matrix must be square and nonempty");
    if (!(epsilon > 0.0))
        throw invalid_argument_error("sinkhorn: epsilon must be positive (use solve_assignment for epsilon = 0)");
    if (!cost.allFinite())
        throw invalid_argument_error("sinkhorn: cost matrix must be finite");
    if (opts.over_relaxation < 1.0 || opts.over_relaxation >= 2.0)
        throw invalid_argument_error("sinkhorn: over_relaxation must lie in [1, 2)");

    const DenormalsOffGuard denormals_off;
    const double inv_n = 1.0 / static_cast<double>(n);
    const double log_marginal = std::log(inv_n);
    const double omega = opts.over_relaxation;

    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    switch (opts.init) {
        case SinkhornInit::Zero:
            break;
        case SinkhornInit::Given:
            if (opts.f0.size() != n || opts.g0.size() != n)
                throw invalid_argument_error("sinkhorn: f0/g0 size mismatch for Given init");
            f = opts.f0;
            g = opts.g0;
            break;
        case SinkhornInit::AssignmentDuals: {
            const Assignment a = solve_assignment(cost);
            f = a.row_duals;
            g = a.col_duals;
            break;
        }
        case SinkhornInit::Auto: {
            // LP duals approximate the entropic potentials when epsilon is
            // small against the cost scale; otherwise zero init converges fast.
            if (epsilon < 0.05 * median_cost(cost)) {
                const Assignment a = solve_assignment(cost);
                f = a.row_duals;
                g = a.col_duals;
            }
            break;
        }
    }

    // Column-contiguous views for both sweep directions.
    const Eigen::MatrixXd cost_t = cost.transpose();
    Eigen::VectorXd row_sums(n), col_sums(n);
    TransportPlan plan;
    plan.tol = opts.tol;

    double row_violation = std::numeric_limits<double>::infinity();
    double col_violation = std::numeric_limits<double>::infinity();
    int iter = 0;
    while (iter < opts.max_iter) {
        ++iter;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto z = ((g - cost_t.col(i)) / epsilon).array();
            const double m = z.maxCoeff();
            const double lse = m + std::log((z - m).exp().sum());
            const double fresh = epsilon * (log_marginal - lse);
            f(i) = omega * fresh + (1.0 - omega) * f(i);
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto z = ((f - cost.col(j)) / epsilon).array();
            const double m = z.maxCoeff();
            const double lse = m + std::log((z - m).exp().sum());
            const double fresh = epsilon * (log_marginal - lse);
            g(j) = omega * fresh + (1.0 - omega) * g(j);
        }
        row_sums.setZero();
        col_sums.setZero();
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto pj = (((f.array() + g(j)) - cost.col(j).array()) / epsilon).exp();
            row_sums.array() += pj;
            col_sums(j) = pj.sum();
        }
        row_violation = (row_sums.array() - inv_n).abs().sum();
        col_violation = (col_sums.array() - inv_n).abs().sum();
        if (!std::isfinite(row_violation) || !std::isfinite(col_violation))
            throw numerical_error("sinkhorn: non-finite marginals encountered");
        if (row_violation <= opts.tol && col_violation <= opts.tol) break;
    }

    plan.iterations_used = iter;
    plan.achieved_violation = std::max(row_violation, col_violation);
    if (plan.achieved_violation > opts.tol && opts.throw_on_max_iter) {
        char message[160];
        std::snprintf(message, sizeof(message),
                      "sinkhorn: marginal tolerance not reached within max_iter "
                      "(achieved %.3g, requested %.3g)",
                      plan.achieved_violation, opts.tol);
        throw convergence_error(message, plan.achieved_violation, iter);
    }

    plan.row_potential = f;
    plan.col_potential = g;
    plan.weights.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        plan.weights.col(j) = (((f.array() + g(j)) - cost.col(j).array()) / epsilon).exp();
    return plan;
}

} // namespace rankot
