#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rankot {

// Reads a comma-separated numeric matrix. A single leading header row is
// skipped when its first field does not parse as a number. Throws
// invalid_argument_error on missing files, ragged rows, or non-numeric data.
Eigen::MatrixXd read_csv(const std::string& path);

// Writes a matrix as comma-separated values with enough digits to round-trip
// doubles exactly. An empty header vector writes no header row.
void write_csv(const std::string& path, const Eigen::MatrixXd& matrix,
               const std::vector<std::string>& header = {});

} // namespace rankot
