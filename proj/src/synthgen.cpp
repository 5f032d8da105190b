#include "rankot/synthgen.hpp"

#include <cmath>
#include <string>

#include "rankot/errors.hpp"
#include "rankot/rng.hpp"

namespace rankot {

namespace {

// Task tag separating synthetic generation from other seeded workloads.
constexpr std::uint64_t kSynthTask = 0x53594e5447454eULL;  // "SYNTGEN"

Eigen::MatrixXd standard_normal_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = sample_normal(rng);
    return M;
}

Eigen::MatrixXd toeplitz_covariance(Eigen::Index d, double rho) {
    Eigen::MatrixXd S(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) S(i, j) = std::pow(rho, std::abs(double(i - j)));
    return S;
}

Eigen::MatrixXd equicorrelation_covariance(Eigen::Index d, double off) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Constant(d, d, off);
    S.diagonal().setOnes();
    return S;
}

// Rows are i.i.d. N(0, sigma) draws, generated via the Cholesky factor.
Eigen::MatrixXd mvn_matrix(std::mt19937_64& rng, Eigen::Index rows, const Eigen::MatrixXd& sigma) {
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw numerical_error("generate: covariance is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    return standard_normal_matrix(rng, rows, sigma.rows()) * L.transpose();
}

Eigen::MatrixXd cauchy_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                              double location) {
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = sample_cauchy(rng, location, 1.0);
    return M;
}

// First coordinate uniform, then the affine recursion across coordinates.
Eigen::MatrixXd autoregressive_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                                      double coeff) {
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        M(i, 0) = uniform01(rng);
        for (Eigen::Index j = 1; j < cols; ++j)
            M(i, j) = 0.25 + coeff * M(i, j - 1) + uniform01(rng);
    }
    return M;
}

Eigen::MatrixXd gamma_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = sample_gamma_shape2(rng, 0.1);
    return M;
}

Eigen::MatrixXd laplace_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                               double first_coordinate_location) {
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            M(i, j) = sample_laplace(rng, j == 0 ? first_coordinate_location : 0.0, 1.0);
    return M;
}

// v12's law: unit variance everywhere except the final coordinate (variance 4).
Eigen::MatrixXd inflated_tail_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd M = standard_normal_matrix(rng, rows, cols);
    M.col(cols - 1) *= 2.0;
    return M;
}

// Gamma base contaminated by a lognormal factor: A*V + (1-A)*V*W.
Eigen::MatrixXd gamma_contaminated_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                                          bool literal_product, bool per_coordinate) {
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        bool keep_row = false;
        if (!literal_product && !per_coordinate) keep_row = sample_bernoulli(rng, 0.8);
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double v = sample_gamma_shape2(rng, 0.1);
            const double w = std::exp(sample_normal(rng));
            if (literal_product) {
                M(i, j) = v * w;
            } else {
                const bool keep = per_coordinate ? sample_bernoulli(rng, 0.8) : keep_row;
                M(i, j) = keep ? v : v * w;
            }
        }
    }
    return M;
}

// Standard Gaussian contaminated by an independent noise law with prob. 0.2.
template <typename NoiseFn>
Eigen::MatrixXd contaminated_gaussian_matrix(std::mt19937_64& rng, Eigen::Index rows,
                                             Eigen::Index cols, bool per_coordinate, NoiseFn noise) {
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        bool keep_row = false;
        if (!per_coordinate) keep_row = sample_bernoulli(rng, 0.8);
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double z = sample_normal(rng);
            const bool keep = per_coordinate ? sample_bernoulli(rng, 0.8) : keep_row;
            M(i, j) = keep ? z : noise(rng);
        }
    }
    return M;
}

Eigen::MatrixXd draw_x_law(const SettingSpec& spec, std::mt19937_64& rng, Eigen::Index rows) {
    const Eigen::Index d = spec.d;
    switch (spec.id) {
        case 1: return cauchy_matrix(rng, rows, d, 0.0);
        case 2: return autoregressive_matrix(rng, rows, d, 0.35);
        case 3: return mvn_matrix(rng, rows, toeplitz_covariance(d, 0.35));
        case 4: return mvn_matrix(rng, rows, equicorrelation_covariance(d, 0.2));
        case 5: return mvn_matrix(rng, rows, toeplitz_covariance(d, 0.35)).array().exp().matrix();
        case 6:
            return mvn_matrix(rng, rows, equicorrelation_covariance(d, 0.75)).array().exp().matrix();
        case 7: return mvn_matrix(rng, rows, 3.0 * Eigen::MatrixXd::Identity(d, d));
        case 8: return gamma_matrix(rng, rows, d);
        case 9:
        case 10: return standard_normal_matrix(rng, rows, d);
        case 11: return laplace_matrix(rng, rows, d, 0.0);
        case 12: return inflated_tail_matrix(rng, rows, d);
        default: throw invalid_argument_error("generate: setting id must be in v1..v12");
    }
}

Eigen::MatrixXd draw_y_law(const SettingSpec& spec, std::mt19937_64& rng, Eigen::Index rows) {
    const Eigen::Index d = spec.d;
    switch (spec.id) {
        case 1: return cauchy_matrix(rng, rows, d, 0.2);
        case 2: return autoregressive_matrix(rng, rows, d, 0.5);
        case 3: return mvn_matrix(rng, rows, toeplitz_covariance(d, 0.65));
        case 4: return mvn_matrix(rng, rows, equicorrelation_covariance(d, 0.5));
        case 5: return mvn_matrix(rng, rows, toeplitz_covariance(d, 0.65)).array().exp().matrix();
        case 6:
            return mvn_matrix(rng, rows, equicorrelation_covariance(d, 0.5)).array().exp().matrix();
        case 7: {
            Eigen::MatrixXd Y = mvn_matrix(rng, rows, 3.0 * Eigen::MatrixXd::Identity(d, d));
            Y.array() += 0.25;
            return Y;
        }
        case 8:
            return gamma_contaminated_matrix(rng, rows, d, spec.v8_literal_product,
                                             spec.contaminate_per_coordinate);
        case 9:
            return contaminated_gaussian_matrix(rng, rows, d, spec.contaminate_per_coordinate,
                                                [](std::mt19937_64& r) { return 10.0 * uniform01(r); });
        case 10:
            return contaminated_gaussian_matrix(
                rng, rows, d, spec.contaminate_per_coordinate,
                [](std::mt19937_64& r) { return 10.0 + std::sqrt(0.1) * sample_normal(r); });
        case 11: return laplace_matrix(rng, rows, d, 1.0);
        case 12: return standard_normal_matrix(rng, rows, d);
        default: throw invalid_argument_error("generate: setting id must be in v1..v12");
    }
}

} // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> generate(const SettingSpec& spec) {
    if (spec.id < 1 || spec.id > 12)
        throw invalid_argument_error("generate: setting id must be in v1..v12");
    if (spec.m < 1 || spec.n < 1)
        throw invalid_argument_error("generate: sample counts must be positive");
    if (spec.d < 1)
        throw invalid_argument_error("generate: dimension must be positive");
    if (spec.id == 2 && spec.d < 2)
        throw invalid_argument_error("generate: v2 needs d >= 2 for its recursion");

    std::mt19937_64 rng_x = make_rng(spec.seed, kSynthTask + static_cast<std::uint64_t>(spec.id), 0);
    std::mt19937_64 rng_y = make_rng(spec.seed, kSynthTask + static_cast<std::uint64_t>(spec.id), 1);
    Eigen::MatrixXd X = draw_x_law(spec, rng_x, spec.m);
    Eigen::MatrixXd Y = spec.hypothesis == Hypothesis::Null ? draw_x_law(spec, rng_y, spec.n)
                                                            : draw_y_law(spec, rng_y, spec.n);
    return {std::move(X), std::move(Y)};
}

int parse_setting_id(const std::string& name) {
    std::string t = name;
    if (!t.empty() && (t[0] == 'v' || t[0] == 'V')) t = t.substr(1);
    try {
        std::size_t pos = 0;
        const int id = std::stoi(t, &pos);
        if (pos == t.size() && id >= 1 && id <= 12) return id;
    } catch (...) {
    }
    throw invalid_argument_error("setting must be one of v1..v12, got '" + name + "'");
}

} // namespace rankot
