#include "rankot/halton.hpp"

#include "rankot/errors.hpp"

namespace rankot {

namespace {

bool is_prime(int n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (int d = 3; static_cast<long long>(d) * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

} // namespace

std::vector<int> first_primes(Eigen::Index k) {
    std::vector<int> primes;
    primes.reserve(static_cast<std::size_t>(k));
    int candidate = 2;
    while (static_cast<Eigen::Index>(primes.size()) < k) {
        if (is_prime(candidate)) primes.push_back(candidate);
        ++candidate;
    }
    return primes;
}

double radical_inverse(std::uint64_t index, int base) {
    if (index < 1) throw invalid_argument_error("radical_inverse: index must be >= 1");
    if (!is_prime(base)) throw invalid_argument_error("radical_inverse: base must be prime");
    const double inv = 1.0 / base;
    double factor = inv;
    double value = 0.0;
    while (index) {
        value += static_cast<double>(index % static_cast<std::uint64_t>(base)) * factor;
        index /= static_cast<std::uint64_t>(base);
        factor *= inv;
    }
    return value;
}

HaltonGrid halton_grid(Eigen::Index n, Eigen::Index d) {
    if (n < 1 || d < 1) throw invalid_argument_error("halton_grid: n and d must be >= 1");
    HaltonGrid grid;
    grid.bases = first_primes(d);
    grid.start_index = 1;
    grid.points.resize(n, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const int base = grid.bases[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < n; ++i) {
            grid.points(i, j) =
                radical_inverse(static_cast<std::uint64_t>(grid.start_index + i), base);
        }
    }
    return grid;
}

} // namespace rankot
