#include "rankot/projection.hpp"

#include <cmath>
#include <limits>

#include "rankot/errors.hpp"
#include "rankot/halton.hpp"
#include "rankot/ranks.hpp"
#include "rankot/rng.hpp"
#include "rankot/statistics.hpp"

namespace rankot {

namespace {

constexpr std::uint64_t kPsreTask = 0x50535245ULL;  // "PSRE"

void check_stiefel(const StiefelPoint& U, Eigen::Index d) {
    if (U.k < 1 || U.k > d || U.U.rows() != d || U.U.cols() != U.k)
        throw invalid_argument_error("projection: U must be d x k with 1 <= k <= d");
    const double residual =
        (U.U.transpose() * U.U - Eigen::MatrixXd::Identity(U.k, U.k)).cwiseAbs().maxCoeff();
    if (residual > 1e-8)
        throw invalid_argument_error("projection: U^T U deviates from identity beyond 1e-8");
}

// Shared state for repeated objective evaluations at fixed (X, Y, epsilon).
struct Evaluator {
    const Eigen::MatrixXd& X;
    const Eigen::MatrixXd& Y;
    double epsilon;
    SinkhornOptions opts;
    int probe_sweeps;
    HaltonGrid grid;

    Evaluator(const Eigen::MatrixXd& X_, const Eigen::MatrixXd& Y_, Eigen::Index k, double epsilon_,
              const SinkhornOptions& opts_, int probe_sweeps_)
        : X(X_), Y(Y_), epsilon(epsilon_), opts(opts_), probe_sweeps(probe_sweeps_),
          grid(halton_grid(X_.rows() + Y_.rows(), k)) {}

    Eigen::MatrixXd pooled_projection(const Eigen::MatrixXd& U) const {
        Eigen::MatrixXd P(X.rows() + Y.rows(), U.cols());
        P.topRows(X.rows()).noalias() = X * U;
        P.bottomRows(Y.rows()).noalias() = Y * U;
        return P;
    }

    double statistic_of_plan(const TransportPlan& plan) const {
        RankSet rs;
        rs.mode = RankSet::Mode::Soft;
        rs.epsilon = epsilon;
        rs.split = X.rows();
        const Eigen::VectorXd row_sums = plan.weights.rowwise().sum();
        rs.ranks.noalias() = plan.weights * grid.points;
        rs.ranks.array().colwise() /= row_sums.array();
        return energy_statistic(rs).scaled_value;
    }

    // Full evaluation; also hands back the converged potentials for probes.
    double evaluate(const Eigen::MatrixXd& U, Eigen::VectorXd* f = nullptr,
                    Eigen::VectorXd* g = nullptr) const {
        const Eigen::MatrixXd cost = cost_matrix(pooled_projection(U), grid.points);
        const TransportPlan plan = sinkhorn(cost, epsilon, opts);
        if (f) *f = plan.row_potential;
        if (g) *g = plan.col_potential;
        return statistic_of_plan(plan);
    }

    // Probe evaluation warm-started from base potentials with a fixed sweep
    // budget; falls back to a full solve when probe_sweeps == 0.
    double probe(const Eigen::MatrixXd& U, const Eigen::VectorXd& f0,
                 const Eigen::VectorXd& g0) const {
        if (probe_sweeps <= 0) return evaluate(U);
        const Eigen::MatrixXd cost = cost_matrix(pooled_projection(U), grid.points);
        SinkhornOptions probe_opts = opts;
        probe_opts.init = SinkhornInit::Given;
        probe_opts.f0 = f0;
        probe_opts.g0 = g0;
        probe_opts.max_iter = probe_sweeps;
        probe_opts.tol = 0.0;  // always run the full sweep budget, keeping probes symmetric
        probe_opts.throw_on_max_iter = false;
        const TransportPlan plan = sinkhorn(cost, epsilon, probe_opts);
        return statistic_of_plan(plan);
    }

    Eigen::MatrixXd euclidean_gradient(const Eigen::MatrixXd& U, double h) const {
        Eigen::VectorXd f0, g0;
        evaluate(U, &f0, &g0);
        Eigen::MatrixXd G(U.rows(), U.cols());
        Eigen::MatrixXd probe_point = U;
        for (Eigen::Index c = 0; c < U.cols(); ++c) {
            for (Eigen::Index r = 0; r < U.rows(); ++r) {
                const double saved = probe_point(r, c);
                probe_point(r, c) = saved + h;
                const double up = probe(probe_point, f0, g0);
                probe_point(r, c) = saved - h;
                const double down = probe(probe_point, f0, g0);
                probe_point(r, c) = saved;
                if (!std::isfinite(up) || !std::isfinite(down))
                    throw numerical_error("riemannian_gradient: non-finite objective probe");
                G(r, c) = (up - down) / (2.0 * h);
            }
        }
        return G;
    }
};

Eigen::MatrixXd tangent_project(const Eigen::MatrixXd& U, const Eigen::MatrixXd& G) {
    const Eigen::MatrixXd UtG = U.transpose() * G;
    return G - U * (0.5 * (UtG + UtG.transpose()));
}

} // namespace

Eigen::MatrixXd qr_retract(const Eigen::MatrixXd& M) {
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    Eigen::MatrixXd Q =
        qr.householderQ() * Eigen::MatrixXd::Identity(M.rows(), M.cols());
    const Eigen::MatrixXd R = qr.matrixQR().topRows(M.cols()).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    return Q;
}

double psre_objective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const StiefelPoint& U,
                      double epsilon, const SinkhornOptions& opts) {
    if (X.cols() != Y.cols())
        throw invalid_argument_error("psre_objective: X and Y must share a dimension");
    check_stiefel(U, X.cols());
    if (!(epsilon > 0.0))
        throw invalid_argument_error("psre_objective: epsilon must be positive");
    const Evaluator ev(X, Y, U.k, epsilon, opts, 0);
    return ev.evaluate(U.U);
}

Eigen::MatrixXd riemannian_gradient(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                    const StiefelPoint& U, double epsilon, double h,
                                    const PsreOptions& opts) {
    if (X.cols() != Y.cols())
        throw invalid_argument_error("riemannian_gradient: X and Y must share a dimension");
    check_stiefel(U, X.cols());
    if (!(h > 0.0))
        throw invalid_argument_error("riemannian_gradient: step h must be positive");
    const Evaluator ev(X, Y, U.k, epsilon, opts.sinkhorn, opts.probe_sweeps);
    return tangent_project(U.U, ev.euclidean_gradient(U.U, h));
}

ProjectionResult maximize_psre(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, Eigen::Index k,
                               double epsilon, const PsreOptions& opts) {
    if (X.cols() != Y.cols())
        throw invalid_argument_error("maximize_psre: X and Y must share a dimension");
    const Eigen::Index d = X.cols();
    if (k < 1 || k > d)
        throw invalid_argument_error("maximize_psre: need 1 <= k <= d");
    if (!(epsilon > 0.0))
        throw invalid_argument_error("maximize_psre: epsilon must be positive");
    if (opts.restarts < 1 || opts.max_iter < 0)
        throw invalid_argument_error("maximize_psre: restarts must be >= 1 and max_iter >= 0");

    const Evaluator ev(X, Y, k, epsilon, opts.sinkhorn, opts.probe_sweeps);

    ProjectionResult best;
    best.value = -std::numeric_limits<double>::infinity();
    bool any_step_accepted = false;

    // At k == d the identity frame makes the projected statistic coincide
    // with the unprojected one, so it is always included as an extra restart:
    // the optimizer can then never end up below the plain soft statistic.
    const int total_restarts = opts.restarts + (k == d ? 1 : 0);

    for (int restart = 0; restart < total_restarts; ++restart) {
        Eigen::MatrixXd U;
        if (restart == opts.restarts) {
            U = Eigen::MatrixXd::Identity(d, k);
        } else if (restart == 0) {
            // Dominant right singular vectors of the pooled, centered data.
            Eigen::MatrixXd pooled(X.rows() + Y.rows(), d);
            pooled.topRows(X.rows()) = X;
            pooled.bottomRows(Y.rows()) = Y;
            pooled.rowwise() -= pooled.colwise().mean();
            Eigen::BDCSVD<Eigen::MatrixXd> svd(pooled, Eigen::ComputeThinV);
            U = svd.matrixV().leftCols(k);
        } else {
            std::mt19937_64 rng = make_rng(opts.seed, kPsreTask, static_cast<std::uint64_t>(restart));
            Eigen::MatrixXd M(d, k);
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = 0; j < k; ++j) M(i, j) = sample_normal(rng);
            U = qr_retract(M);
        }

        double current = ev.evaluate(U);
        std::vector<std::pair<int, double>> trace;
        trace.emplace_back(0, current);
        int accepted = 0;

        for (int iter = 1; iter <= opts.max_iter; ++iter) {
            const Eigen::MatrixXd grad = tangent_project(U, ev.euclidean_gradient(U, opts.fd_step));
            double step = opts.step0;
            bool improved = false;
            for (int halving = 0; halving < 20; ++halving) {
                const Eigen::MatrixXd candidate = qr_retract(U + step * grad);
                const double value = ev.evaluate(candidate);
                if (value > current) {
                    const double gain = (value - current) / std::max(std::abs(current), 1e-300);
                    U = candidate;
                    current = value;
                    improved = true;
                    ++accepted;
                    trace.emplace_back(iter, current);
                    if (gain < opts.tol) iter = opts.max_iter;  // converged; leave the loop
                    break;
                }
                step *= 0.5;
            }
            if (!improved) break;
        }

        if (accepted > 0) any_step_accepted = true;
        if (current > best.value) {
            best.value = current;
            best.U_star = {U, k};
            best.trace = std::move(trace);
            best.iterations_used = accepted;
        }
    }

    best.restarts_used = total_restarts;
    best.stagnated = !any_step_accepted;

    // Hard-rank statistic at the optimum, reported alongside the soft value.
    const Eigen::MatrixXd proj = ev.pooled_projection(best.U_star.U);
    RankSet hard = hard_rank_map(proj, ev.grid);
    hard.split = X.rows();
    best.hard_value = energy_statistic(hard).scaled_value;
    return best;
}

} // namespace rankot
