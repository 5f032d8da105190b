#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace rankot {

enum class Hypothesis { Null, Alternate };

// One of the twelve benchmark settings. Under the null hypothesis Y is drawn
// from X's law using an independent stream, so X and Y are exchangeable.
struct SettingSpec {
    int id = 1;  // 1..12, named v1..v12
    Eigen::Index m = 0;
    Eigen::Index n = 0;
    Eigen::Index d = 1;
    Hypothesis hypothesis = Hypothesis::Alternate;
    std::uint64_t seed = 0;

    // v8's contaminating factor is A*V + (1-A)*V*W by default; this switches
    // to the plain product V*W.
    bool v8_literal_product = false;
    // v9/v10 contaminate whole samples by default; this switches to
    // independent per-coordinate contamination.
    bool contaminate_per_coordinate = false;
};

// Draws (X, Y) for the given setting. Deterministic per seed; X and Y use
// independent derived streams.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> generate(const SettingSpec& spec);

// Parses "v1".."v12" (or bare "1".."12"); throws invalid_argument_error otherwise.
int parse_setting_id(const std::string& name);

} // namespace rankot
