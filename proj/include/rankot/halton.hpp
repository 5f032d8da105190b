#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace rankot {

// Deterministic low-discrepancy reference grid in the open unit cube.
// Row i is the (start_index + i - 1)-th Halton point in the first d prime
// bases; the empirical measure on the rows approximates U(0,1)^d.
struct HaltonGrid {
    Eigen::MatrixXd points;   // n x d, all coordinates strictly in (0,1)
    std::vector<int> bases;   // first d primes
    std::int64_t start_index = 1;
};

// van der Corput digit-reversal value of `index` in a prime base.
// index >= 1 guarantees a value strictly inside (0,1).
double radical_inverse(std::uint64_t index, int base);

HaltonGrid halton_grid(Eigen::Index n, Eigen::Index d);

// First k primes (2, 3, 5, ...).
std::vector<int> first_primes(Eigen::Index k);

} // namespace rankot
