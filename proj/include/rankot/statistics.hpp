#pragma once

#include <optional>

#include <Eigen/Dense>

#include "rankot/ranks.hpp"
#include "rankot/transport.hpp"

namespace rankot {

// Kernel used by the energy statistic. Distance is the negative-type kernel
// of the classical energy distance; Gaussian gives an MMD-style statistic.
// A Gaussian kernel without a bandwidth uses the median pairwise distance
// among the pooled rank vectors (median heuristic).
struct KernelSpec {
    enum class Type { Distance, Gaussian };

    Type type = Type::Distance;
    std::optional<double> bandwidth;  // Gaussian only; empty selects the median heuristic

    static KernelSpec distance() { return {}; }
    static KernelSpec gaussian(std::optional<double> bandwidth = std::nullopt) {
        return {Type::Gaussian, bandwidth};
    }
};

struct Statistic {
    enum class Kind { RE, SRE, KRE, KSRE };

    double value = 0.0;         // raw two-sample statistic on rank vectors
    double scaled_value = 0.0;  // value * mn/(m+n), the quantity tests threshold
    Kind kind = Kind::RE;
    double epsilon = 0.0;
    KernelSpec kernel;
};

const char* kind_name(Statistic::Kind kind);

// Two-sample energy distance between the rank images of the two samples:
// (2/mn) sum ||rX_i - rY_j|| - (1/m^2) sum ||rX_i - rX_j|| - (1/n^2) sum ||rY_i - rY_j||.
Statistic energy_statistic(const RankSet& ranks);

// Kernelized variant. The distance kernel reproduces energy_statistic
// exactly; the Gaussian kernel is reported as C + D - 2B (within-sample
// means minus twice the cross mean) so that larger always means more
// different, matching the rejection direction of the distance kernel.
Statistic kernel_energy_statistic(const RankSet& ranks, const KernelSpec& kernel);

// Full pipeline: Halton grid for the pooled size, joint rank map at the
// requested epsilon, then the kernel's statistic.
Statistic rank_energy(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double epsilon,
                      const KernelSpec& kernel = {}, const SinkhornOptions& opts = {});

} // namespace rankot
