// Acceptance harness: end-to-end checks of the shipped behavior, one line of
// output per criterion. Unlike the unit suite this runs at experiment scale
// (hundreds of samples, hundreds of replicates), so it lives in its own
// binary with a generous ctest timeout.
//
// Usage: rankot_acceptance [criterion numbers...]
// With no arguments all criteria run in order. Exit code = number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rankot/changepoint.hpp"
#include "rankot/halton.hpp"
#include "rankot/inference.hpp"
#include "rankot/projection.hpp"
#include "rankot/ranks.hpp"
#include "rankot/rng.hpp"
#include "rankot/statistics.hpp"
#include "rankot/synthgen.hpp"
#include "rankot/transport.hpp"

using namespace rankot;

namespace {

// One shared base seed; every criterion derives its own streams from it.
constexpr std::uint64_t kSeed = 20260822;

// Best-effort solver for the replicated experiments below. The alternating
// scaling tail stalls far above the library default tolerance at the epsilons
// used here while the statistic is already stable: at pooled size 400 and
// eps = 0.01 the value moves by under 1e-4 between a 300-sweep cap and a
// 3000-sweep cap, orders of magnitude below every tolerance these criteria
// check, so the caps are set by the runtime budgets.
SinkhornOptions capped_solver(int max_iter) {
    SinkhornOptions opts;
    opts.tol = 1e-6;
    opts.max_iter = max_iter;
    opts.throw_on_max_iter = false;
    return opts;
}

Eigen::MatrixXd gaussian_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = sample_normal(rng);
    return M;
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    auto mid = v.begin() + v.size() / 2;
    std::nth_element(v.begin(), mid, v.end());
    double hi = *mid;
    if (v.size() % 2 == 0) {
        auto lo = std::max_element(v.begin(), mid);
        return 0.5 * (*lo + hi);
    }
    return hi;
}

// Two-sample Kolmogorov-Smirnov distance between empirical distributions.
double ks_distance(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

// Exhaustive assignment oracle (cost only); sums c(i, perm(i)) in ascending i,
// the same order the solver uses, so a unique optimum compares bit-for-bit.
double brute_force_cost(const Eigen::MatrixXd& cost) {
    const Eigen::Index n = cost.rows();
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) c += cost(i, perm[static_cast<std::size_t>(i)]);
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Independent entropic-OT oracle: Newton's method on the dual potentials
// (second-order, full linear solve per step), nothing shared with the
// production solver.
Eigen::MatrixXd newton_entropic_plan(const Eigen::MatrixXd& cost, double epsilon) {
    const Eigen::Index n = cost.rows();
    const double target = 1.0 / static_cast<double>(n);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    const auto plan_of = [&](const Eigen::VectorXd& fv, const Eigen::VectorXd& gv) {
        Eigen::MatrixXd P(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                P(i, j) = std::exp((fv(i) + gv(j) - cost(i, j)) / epsilon);
        return P;
    };
    for (int iter = 0; iter < 200; ++iter) {
        const Eigen::MatrixXd P = plan_of(f, g);
        Eigen::VectorXd residual(2 * n);
        residual.head(n) = P.rowwise().sum().array() - target;
        residual.tail(n) = P.colwise().sum().transpose().array() - target;
        if (residual.cwiseAbs().maxCoeff() < 1e-14) break;
        Eigen::MatrixXd J(2 * n, 2 * n);
        J.setZero();
        J.topLeftCorner(n, n).diagonal() = P.rowwise().sum();
        J.bottomRightCorner(n, n).diagonal() = P.colwise().sum();
        J.topRightCorner(n, n) = P;
        J.bottomLeftCorner(n, n) = P.transpose();
        J /= epsilon;
        // The dual is shift-invariant; pin the last coordinate of g.
        for (Eigen::Index k = 0; k < 2 * n; ++k) J(2 * n - 1, k) = 0.0;
        J(2 * n - 1, 2 * n - 1) = 1.0;
        residual(2 * n - 1) = 0.0;
        const Eigen::VectorXd step = J.fullPivLu().solve(residual);
        double damp = 1.0;
        for (int k = 0; k < 30; ++k) {
            Eigen::VectorXd f2 = f - damp * step.head(n);
            Eigen::VectorXd g2 = g - damp * step.tail(n);
            const Eigen::MatrixXd P2 = plan_of(f2, g2);
            Eigen::VectorXd r2(2 * n);
            r2.head(n) = P2.rowwise().sum().array() - target;
            r2.tail(n) = P2.colwise().sum().transpose().array() - target;
            if (P2.allFinite() && r2.cwiseAbs().maxCoeff() < residual.cwiseAbs().maxCoeff()) {
                f = f2;
                g = g2;
                break;
            }
            damp *= 0.5;
        }
    }
    return plan_of(f, g);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> draw_setting(int id, Eigen::Index m, Eigen::Index n,
                                                         Eigen::Index d, Hypothesis hyp,
                                                         std::uint64_t seed) {
    SettingSpec spec;
    spec.id = id;
    spec.m = m;
    spec.n = n;
    spec.d = d;
    spec.hypothesis = hyp;
    spec.seed = seed;
    return generate(spec);
}

struct CriterionResult {
    bool pass = false;
    std::string detail;
};

char buffer_storage[512];

template <typename... Args>
std::string fmt(const char* format, Args... args) {
    std::snprintf(buffer_storage, sizeof(buffer_storage), format, args...);
    return std::string(buffer_storage);
}

// ---------------------------------------------------------------------------
// 1. Exact assignment vs exhaustive enumeration, 200 random instances, n <= 7.

CriterionResult criterion_1() {
    std::mt19937_64 rng = make_rng(kSeed, 101);
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 6);  // 2..7
        const Eigen::MatrixXd C = gaussian_matrix(rng, n, n);
        const Assignment a = solve_assignment(C);
        const double oracle = brute_force_cost(C);
        if (a.cost != oracle) ++mismatches;
    }
    CriterionResult r;
    r.pass = mismatches == 0;
    r.detail = fmt("200 instances, %d cost mismatches (exact comparison)", mismatches);
    return r;
}

// ---------------------------------------------------------------------------
// 2. Sinkhorn plan vs Newton dual oracle on 50 random 4x4 problems.

CriterionResult criterion_2() {
    constexpr double kTolEntry = 1e-6;     // plan entries vs the oracle
    constexpr double kTolMarginal = 1e-9;  // achieved marginal L1 violation
    const double epsilons[] = {0.1, 0.3, 1.0};
    std::mt19937_64 rng = make_rng(kSeed, 102);
    SinkhornOptions opts;  // library tolerance, budget for near-degenerate draws
    opts.max_iter = 300000;
    opts.throw_on_max_iter = false;
    double worst_entry = 0.0;
    double worst_marginal = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::MatrixXd C = gaussian_matrix(rng, 4, 4).cwiseAbs();
        const double eps = epsilons[trial % 3];
        const TransportPlan plan = sinkhorn(C, eps, opts);
        const Eigen::MatrixXd oracle = newton_entropic_plan(C, eps);
        worst_entry = std::max(worst_entry, (plan.weights - oracle).cwiseAbs().maxCoeff());
        worst_marginal = std::max(worst_marginal, plan.achieved_violation);
    }
    CriterionResult r;
    r.pass = worst_entry <= kTolEntry && worst_marginal <= kTolMarginal;
    r.detail = fmt("max entry deviation %.3g (tol %.0e), max marginal L1 %.3g (tol %.0e)",
                   worst_entry, kTolEntry, worst_marginal, kTolMarginal);
    return r;
}

// ---------------------------------------------------------------------------
// 3. Distribution-freeness of the null statistic across data laws: at eps = 0
// and eps = 0.01 the null distributions for settings v1, v3, v7, v11 must
// coincide (pairwise KS < 0.10); at eps = 1 they must visibly separate.

CriterionResult criterion_3() {
    constexpr double kKsSame = 0.10;
    constexpr double kKsDifferent = 0.15;
    constexpr int kReplicates = 300;
    const Eigen::Index m = 200, n = 200, d = 3;
    const int settings[] = {1, 3, 7, 11};
    const double epsilons[] = {0.0, 0.01, 1.0};
    const SinkhornOptions solver = capped_solver(300);

    // values[e][s] = null sample of the scaled statistic.
    std::vector<std::vector<std::vector<double>>> values(
        3, std::vector<std::vector<double>>(4, std::vector<double>(kReplicates)));
    for (int s = 0; s < 4; ++s) {
        for (int b = 0; b < kReplicates; ++b) {
            const auto [X, Y] = draw_setting(settings[s], m, n, d, Hypothesis::Null,
                                             derive_seed(kSeed, 103, 1000u * s + b));
            for (int e = 0; e < 3; ++e)
                values[e][s][b] =
                    rank_energy(X, Y, epsilons[e], KernelSpec::distance(), solver).scaled_value;
        }
    }

    double worst_same = 0.0;
    double best_separation = 0.0;
    for (int e = 0; e < 3; ++e) {
        double worst_pair = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b)
                worst_pair = std::max(worst_pair, ks_distance(values[e][a], values[e][b]));
        if (e < 2)
            worst_same = std::max(worst_same, worst_pair);
        else
            best_separation = worst_pair;
    }
    CriterionResult r;
    r.pass = worst_same < kKsSame && best_separation > kKsDifferent;
    r.detail = fmt("max pairwise KS %.3f at eps in {0, 0.01} (< %.2f); %.3f at eps = 1 (> %.2f)",
                   worst_same, kKsSame, best_separation, kKsDifferent);
    return r;
}

// ---------------------------------------------------------------------------
// 4. Epsilon limits: on v1..v8 alternates, mean soft statistic at eps = 0.001
// tracks the hard statistic within 5 percent, and eps = 10 collapses it below
// a tenth of the hard value.

CriterionResult criterion_4() {
    constexpr double kTolRelative = 0.05;
    constexpr double kLargeEpsFactor = 0.1;
    constexpr int kReplicates = 100;
    const Eigen::Index m = 200, n = 200, d = 3;
    const SinkhornOptions solver = capped_solver(300);

    bool pass = true;
    double worst_rel = 0.0, worst_factor = 0.0;
    for (int id = 1; id <= 8; ++id) {
        std::vector<double> hard(kReplicates), soft_small(kReplicates), soft_large(kReplicates);
        for (int rep = 0; rep < kReplicates; ++rep) {
            const auto [X, Y] = draw_setting(id, m, n, d, Hypothesis::Alternate,
                                             derive_seed(kSeed, 104, 1000u * id + rep));
            hard[rep] = rank_energy(X, Y, 0.0).scaled_value;
            soft_small[rep] =
                rank_energy(X, Y, 0.001, KernelSpec::distance(), solver).scaled_value;
            soft_large[rep] =
                rank_energy(X, Y, 10.0, KernelSpec::distance(), solver).scaled_value;
        }
        const double mh = mean_of(hard);
        const double rel = std::abs(mean_of(soft_small) - mh) / mh;
        const double factor = mean_of(soft_large) / mh;
        worst_rel = std::max(worst_rel, rel);
        worst_factor = std::max(worst_factor, factor);
        if (rel >= kTolRelative || factor >= kLargeEpsFactor) pass = false;
    }
    CriterionResult r;
    r.pass = pass;
    r.detail = fmt("worst |mean sRE(0.001) - mean RE| / mean RE = %.4f (tol %.2f); "
                   "worst mean sRE(10) / mean RE = %.4f (tol %.2f)",
                   worst_rel, kTolRelative, worst_factor, kLargeEpsFactor);
    return r;
}

// ---------------------------------------------------------------------------
// 5. Dimension response: v3 alternate means strictly increase over
// d in {3, 8, 20, 50}; v11 (single-coordinate shift) mean decreases from
// d = 3 to d = 50.

CriterionResult criterion_5() {
    constexpr int kReplicates = 100;
    const Eigen::Index m = 200, n = 200;
    const double eps = 0.01;
    const SinkhornOptions solver = capped_solver(300);

    const Eigen::Index dims_v3[] = {3, 8, 20, 50};
    double means_v3[4];
    for (int k = 0; k < 4; ++k) {
        std::vector<double> vals(kReplicates);
        for (int rep = 0; rep < kReplicates; ++rep) {
            const auto [X, Y] = draw_setting(3, m, n, dims_v3[k], Hypothesis::Alternate,
                                             derive_seed(kSeed, 105, 1000u * k + rep));
            vals[rep] = rank_energy(X, Y, eps, KernelSpec::distance(), solver).scaled_value;
        }
        means_v3[k] = mean_of(vals);
    }

    double means_v11[2];
    const Eigen::Index dims_v11[] = {3, 50};
    for (int k = 0; k < 2; ++k) {
        std::vector<double> vals(kReplicates);
        for (int rep = 0; rep < kReplicates; ++rep) {
            const auto [X, Y] = draw_setting(11, m, n, dims_v11[k], Hypothesis::Alternate,
                                             derive_seed(kSeed, 106, 1000u * k + rep));
            vals[rep] = rank_energy(X, Y, eps, KernelSpec::distance(), solver).scaled_value;
        }
        means_v11[k] = mean_of(vals);
    }

    const bool increasing =
        means_v3[0] < means_v3[1] && means_v3[1] < means_v3[2] && means_v3[2] < means_v3[3];
    const bool diluted = means_v11[1] < means_v11[0];
    CriterionResult r;
    r.pass = increasing && diluted;
    r.detail = fmt("v3 means %.4f / %.4f / %.4f / %.4f (d = 3/8/20/50); "
                   "v11 means %.4f (d = 3) vs %.4f (d = 50)",
                   means_v3[0], means_v3[1], means_v3[2], means_v3[3], means_v11[0], means_v11[1]);
    return r;
}

// ---------------------------------------------------------------------------
// 6. Projection recovers low-dimensional signal: at d = 100, k = 8, the
// median alt-null separation of the projected statistic beats the unprojected
// one on v11 and v12.

CriterionResult criterion_6() {
    constexpr int kReplicates = 30;
    const Eigen::Index m = 200, n = 200, d = 100, k = 8;
    const double eps = 0.001;
    const SinkhornOptions solver = capped_solver(250);

    CriterionResult r;
    r.pass = true;
    for (int id : {11, 12}) {
        double med_sre[2], med_psre[2];
        for (int h = 0; h < 2; ++h) {
            const Hypothesis hyp = h == 0 ? Hypothesis::Null : Hypothesis::Alternate;
            std::vector<double> sre(kReplicates), psre(kReplicates);
            for (int rep = 0; rep < kReplicates; ++rep) {
                const std::uint64_t tag = 1000u * id + 100u * h + rep;
                const auto [X, Y] = draw_setting(id, m, n, d, hyp, derive_seed(kSeed, 107, tag));
                sre[rep] = rank_energy(X, Y, eps, KernelSpec::distance(), solver).scaled_value;
                // One restart from the singular-vector start plus a single
                // refinement step: the runtime budget rules out longer runs,
                // and the start already concentrates on the loaded directions.
                PsreOptions opts;
                opts.restarts = 1;
                opts.max_iter = 1;
                opts.probe_sweeps = 1;
                opts.seed = derive_seed(kSeed, 108, tag);
                opts.sinkhorn = solver;
                psre[rep] = maximize_psre(X, Y, k, eps, opts).value;
            }
            med_sre[h] = median_of(sre);
            med_psre[h] = median_of(psre);
        }
        const double gap_sre = med_sre[1] - med_sre[0];
        const double gap_psre = med_psre[1] - med_psre[0];
        if (gap_psre <= gap_sre) r.pass = false;
        r.detail += fmt("v%d: median separation PsRE %.4f vs sRE %.4f; ", id, gap_psre, gap_sre);
    }
    return r;
}

// ---------------------------------------------------------------------------
// 7. Manifold machinery: tangency, retraction orthonormality, monotone
// optimization trace, secant agreement of the Riemannian gradient.

CriterionResult criterion_7() {
    constexpr double kTolTangency = 1e-8;
    constexpr double kTolOrthonormal = 1e-10;
    constexpr double kTolSecant = 0.05;  // relative, on 10 random tangent probes
    const Eigen::Index m = 30, n = 30, d = 20, k = 3;
    // Epsilon a few percent of the projected cost scale: large enough that the
    // full-tolerance solves behind the secant probes converge quickly.
    const double eps = 2.0;

    std::mt19937_64 rng = make_rng(kSeed, 109);
    const Eigen::MatrixXd X = gaussian_matrix(rng, m, d);
    Eigen::MatrixXd Y = gaussian_matrix(rng, n, d);
    Y.col(0).array() += 1.5;  // planted signal so gradients are not near zero

    PsreOptions opts;
    opts.probe_sweeps = 0;  // exact evaluations for the finite-difference probes
    opts.sinkhorn.tol = 1e-9;
    opts.sinkhorn.max_iter = 50000;
    opts.sinkhorn.throw_on_max_iter = false;

    const StiefelPoint U0{qr_retract(gaussian_matrix(rng, d, k)), k};
    const Eigen::MatrixXd G = riemannian_gradient(X, Y, U0, eps, 1e-5, opts);
    const double tangency = (U0.U.transpose() * G + G.transpose() * U0.U).cwiseAbs().maxCoeff();

    const Eigen::MatrixXd moved = qr_retract(U0.U + 0.5 * G);
    const double ortho =
        (moved.transpose() * moved - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();

    // Secant probes along random tangent directions.
    int checked = 0, secant_failures = 0;
    double worst_secant = 0.0;
    const double t = 1e-5;
    for (int probe = 0; probe < 10; ++probe) {
        Eigen::MatrixXd Z = gaussian_matrix(rng, d, k);
        const Eigen::MatrixXd sym =
            0.5 * (U0.U.transpose() * Z + Z.transpose() * U0.U);
        Z -= U0.U * sym;  // tangent projection
        Z /= Z.norm();
        const double directional = (G.array() * Z.array()).sum();
        if (std::abs(directional) < 1e-4) continue;  // too flat for a stable ratio
        StiefelPoint up{U0.U + t * Z, k};
        StiefelPoint down{U0.U - t * Z, k};
        // The secant uses the raw (non-retracted) perturbation; at t = 1e-5 the
        // curvature correction is O(t^2) and far below the 5 percent gate.
        const double fu = psre_objective(X, Y, up, eps, opts.sinkhorn);
        const double fd = psre_objective(X, Y, down, eps, opts.sinkhorn);
        const double secant = (fu - fd) / (2.0 * t);
        const double rel = std::abs(secant - directional) / std::abs(secant);
        worst_secant = std::max(worst_secant, rel);
        if (rel > kTolSecant) ++secant_failures;
        ++checked;
    }

    // Monotone trace on a short optimization run.
    PsreOptions run_opts = opts;
    run_opts.restarts = 2;
    run_opts.max_iter = 5;
    run_opts.probe_sweeps = 8;
    run_opts.seed = derive_seed(kSeed, 110);
    const ProjectionResult res = maximize_psre(X, Y, k, eps, run_opts);
    bool monotone = true;
    for (std::size_t i = 1; i < res.trace.size(); ++i)
        if (res.trace[i].second < res.trace[i - 1].second - 1e-12) monotone = false;
    const double ortho_star =
        (res.U_star.U.transpose() * res.U_star.U - Eigen::MatrixXd::Identity(k, k))
            .cwiseAbs()
            .maxCoeff();

    CriterionResult r;
    r.pass = tangency < kTolTangency && ortho < kTolOrthonormal && ortho_star < kTolOrthonormal &&
             monotone && secant_failures == 0 && checked >= 5;
    r.detail = fmt("tangency %.2e (tol %.0e); orthonormality %.2e / %.2e (tol %.0e); "
                   "trace %s; secant worst %.3f on %d probes (tol %.2f)",
                   tangency, kTolTangency, ortho, ortho_star, kTolOrthonormal,
                   monotone ? "monotone" : "NOT monotone", worst_secant, checked, kTolSecant);
    return r;
}

// ---------------------------------------------------------------------------
// 8. Permutation-test calibration: v3 null rejection rate over 500 trials at
// alpha = 0.05, B = 199 lands in [0.03, 0.08].
//
// The null reference set of two_sample_test depends only on (m, n, d, eps, B,
// seed), not on the data, so the 500 trials are organized as 20 groups of 25:
// each group draws one fresh null set and threshold, and 25 independent data
// pairs are compared against it. Repeating a single fixed seed 500 times
// would recompute the identical threshold 500 times; varying it per group
// exercises threshold noise as well as data noise.

CriterionResult criterion_8() {
    constexpr double kRateLow = 0.03;
    constexpr double kRateHigh = 0.08;
    constexpr int kGroups = 20;
    constexpr int kPerGroup = 25;
    constexpr int kPermutations = 199;
    constexpr double kAlpha = 0.05;
    const Eigen::Index m = 200, n = 200, d = 3;
    const double eps = 0.01;
    const SinkhornOptions solver = capped_solver(300);

    int rejections = 0;
    for (int g = 0; g < kGroups; ++g) {
        const std::vector<double> nulls =
            null_samples(m, n, d, eps, KernelSpec::distance(), kPermutations,
                         derive_seed(kSeed, 111, g), solver);
        const double threshold = null_quantile(nulls, kAlpha);
        for (int trial = 0; trial < kPerGroup; ++trial) {
            const auto [X, Y] = draw_setting(3, m, n, d, Hypothesis::Null,
                                             derive_seed(kSeed, 112, 100u * g + trial));
            const double observed =
                rank_energy(X, Y, eps, KernelSpec::distance(), solver).scaled_value;
            if (observed > threshold) ++rejections;
        }
    }
    const double rate = static_cast<double>(rejections) / (kGroups * kPerGroup);
    CriterionResult r;
    r.pass = rate >= kRateLow && rate <= kRateHigh;
    r.detail = fmt("rejection rate %.4f over %d trials (window [%.2f, %.2f])", rate,
                   kGroups * kPerGroup, kRateLow, kRateHigh);
    return r;
}

// ---------------------------------------------------------------------------
// 9. Change-point pipeline: three planted breaks (mean, covariance, mean) in
// a length-4000 trivariate series; at least 8 of 10 seeds must recover all
// three within 50 samples with at most one spurious detection.

CriterionResult criterion_9() {
    constexpr Eigen::Index kLocalization = 50;
    const Eigen::Index T = 4000, d = 3, window = 250;
    const Eigen::Index breaks[] = {1000, 2000, 3000};  // last row of each regime, 1-based
    const double eps = 0.01;

    CpdConfig config;
    config.window = window;
    config.epsilon = eps;
    config.stride = 50;
    config.threshold_mode = ThresholdMode::Fixed;
    config.min_separation = window;
    config.sinkhorn = capped_solver(200);

    // One shared detection threshold: the 0.99 null quantile at the window
    // size, simulated once (the statistic is distribution-free at this eps).
    {
        const std::vector<double> nulls =
            null_samples(window, window, d, eps, KernelSpec::distance(), 99,
                         derive_seed(kSeed, 113), config.sinkhorn);
        config.fixed_threshold = null_quantile(nulls, 0.01);
    }

    int good_seeds = 0;
    std::string per_seed;
    for (int s = 0; s < 10; ++s) {
        std::mt19937_64 rng = make_rng(kSeed, 114, s);
        Eigen::MatrixXd series = gaussian_matrix(rng, T, d);
        // Regime 2: mean shift. Regime 3: covariance (scale) shift on top.
        // Regime 4: second mean shift at the inflated scale.
        series.middleRows(1000, 1000).array() += 2.0;
        series.middleRows(2000, 1000) *= 2.0;
        series.middleRows(2000, 1000).array() += 2.0;
        series.middleRows(3000, 1000) *= 2.0;
        series.middleRows(3000, 1000).array() += 6.0;

        const CpdResult res = detect_change_points(series, config);
        int matched = 0;
        std::vector<bool> used(res.change_points.size(), false);
        for (const Eigen::Index b : breaks) {
            Eigen::Index best = -1, best_dist = std::numeric_limits<Eigen::Index>::max();
            for (std::size_t i = 0; i < res.change_points.size(); ++i) {
                if (used[i]) continue;
                const Eigen::Index dist = std::abs(res.change_points[i] - b);
                if (dist < best_dist) {
                    best_dist = dist;
                    best = static_cast<Eigen::Index>(i);
                }
            }
            if (best >= 0 && best_dist <= kLocalization) {
                used[static_cast<std::size_t>(best)] = true;
                ++matched;
            }
        }
        const int spurious = static_cast<int>(res.change_points.size()) - matched;
        const bool ok = matched == 3 && spurious <= 1;
        if (ok) ++good_seeds;
        per_seed += ok ? 'Y' : 'n';
    }
    CriterionResult r;
    r.pass = good_seeds >= 8;
    r.detail = fmt("%d/10 seeds recovered all breaks within %lld samples [%s]", good_seeds,
                   static_cast<long long>(kLocalization), per_seed.c_str());
    return r;
}

// ---------------------------------------------------------------------------
// 10. Statistic invariants at scale: nonnegativity and swap symmetry on 1000
// random instances, hard ranks exact, soft ranks to 1e-8.

CriterionResult criterion_10() {
    constexpr double kNonneg = -1e-12;
    constexpr double kSoftSwap = 1e-8;
    std::mt19937_64 rng = make_rng(kSeed, 115);
    SinkhornOptions solver;
    solver.max_iter = 100000;
    solver.throw_on_max_iter = false;

    int hard_violations = 0, soft_violations = 0, negative = 0;
    double worst_soft = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng() % 9);
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 9);
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 3);
        const Eigen::MatrixXd X = gaussian_matrix(rng, m, d);
        const Eigen::MatrixXd Y = gaussian_matrix(rng, n, d);

        const Statistic h1 = rank_energy(X, Y, 0.0);
        const Statistic h2 = rank_energy(Y, X, 0.0);
        if (h1.value < kNonneg) ++negative;
        if (h1.value != h2.value || h1.scaled_value != h2.scaled_value) ++hard_violations;

        const Statistic s1 = rank_energy(X, Y, 0.05, KernelSpec::distance(), solver);
        const Statistic s2 = rank_energy(Y, X, 0.05, KernelSpec::distance(), solver);
        if (s1.value < kNonneg) ++negative;
        worst_soft = std::max(worst_soft, std::abs(s1.value - s2.value));
        if (std::abs(s1.value - s2.value) > kSoftSwap) ++soft_violations;
    }
    CriterionResult r;
    r.pass = hard_violations == 0 && soft_violations == 0 && negative == 0;
    r.detail = fmt("1000 instances: %d hard swap mismatches (exact), %d soft (worst %.2e, "
                   "tol %.0e), %d negative values",
                   hard_violations, soft_violations, worst_soft, kSoftSwap, negative);
    return r;
}

// ---------------------------------------------------------------------------
// 11. Affine invariance of hard ranks: translation and positive scaling leave
// the rank map unchanged on 100 clouds whose optimal assignment is unique.

CriterionResult criterion_11() {
    constexpr double kGapTol = 1e-9;  // minimal reduced-cost slack certifying uniqueness
    std::mt19937_64 rng = make_rng(kSeed, 116);

    int checked = 0, mismatches = 0, draws = 0;
    while (checked < 100 && draws < 400) {
        ++draws;
        const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng() % 10);
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 3);
        const Eigen::MatrixXd X = gaussian_matrix(rng, n, d);
        const HaltonGrid grid = halton_grid(n, d);
        const Eigen::MatrixXd C = cost_matrix(X, grid.points);
        const Assignment a = solve_assignment(C);

        // Uniqueness certificate: every non-matched edge keeps positive
        // reduced cost. Ambiguous clouds are redrawn, not counted.
        double slack = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == a.sigma[static_cast<std::size_t>(i)]) continue;
                slack = std::min(slack, C(i, j) - a.row_duals(i) - a.col_duals(j));
            }
        if (slack <= kGapTol) continue;

        const double scale = 0.25 + 3.0 * uniform01(rng);
        Eigen::RowVectorXd shift(d);
        for (Eigen::Index j = 0; j < d; ++j) shift(j) = 4.0 * (uniform01(rng) - 0.5);
        const Eigen::MatrixXd Xt = (scale * X).rowwise() + shift;

        const Eigen::MatrixXd r1 = hard_rank_map(X, grid).ranks;
        const Eigen::MatrixXd r2 = hard_rank_map(Xt, grid).ranks;
        if ((r1 - r2).cwiseAbs().maxCoeff() != 0.0) ++mismatches;
        ++checked;
    }
    CriterionResult r;
    r.pass = checked == 100 && mismatches == 0;
    r.detail = fmt("%d unique-assignment clouds checked (%d draws), %d rank mismatches", checked,
                   draws, mismatches);
    return r;
}

struct Criterion {
    int number;
    const char* name;
    double budget_seconds;
    CriterionResult (*run)();
};

const Criterion kCriteria[] = {
    {1, "assignment matches exhaustive enumeration", 10, criterion_1},
    {2, "entropic plan matches Newton oracle", 30, criterion_2},
    {3, "null distribution is data-law free", 900, criterion_3},
    {4, "epsilon limits bracket the hard statistic", 1200, criterion_4},
    {5, "dimension response", 1800, criterion_5},
    {6, "projection recovers low-dimensional signal", 7200, criterion_6},
    {7, "manifold gradient and retraction", 60, criterion_7},
    {8, "permutation test calibration", 1800, criterion_8},
    {9, "change-point recovery", 600, criterion_9},
    {10, "statistic invariants at scale", 60, criterion_10},
    {11, "hard ranks are affine invariant", 60, criterion_11},
};

} // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const Criterion& c : kCriteria) {
        if (!selected.empty() && selected.count(c.number) == 0) continue;
        const auto start = std::chrono::steady_clock::now();
        const CriterionResult result = c.run();
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %2d %-46s %8.1f s (budget %.0f s)\n",
                    result.pass && seconds <= c.budget_seconds ? "PASS" : "FAIL", c.number, c.name,
                    seconds, c.budget_seconds);
        std::printf("          %s\n", result.detail.c_str());
        std::fflush(stdout);
        if (!result.pass || seconds > c.budget_seconds) ++failures;
    }
    return failures;
}
