#include "rankot/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rankot/errors.hpp"

namespace rankot {

namespace {

bool parse_double(const std::string& field, double& out) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (*(last - 1) == ' ' || *(last - 1) == '\t' || *(last - 1) == '\r')) --last;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && first != last;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

} // namespace

Eigen::MatrixXd read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw invalid_argument_error("cannot open file: " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    bool first_line = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        std::vector<double> row(fields.size());
        bool ok = true;
        for (std::size_t i = 0; i < fields.size(); ++i)
            if (!parse_double(fields[i], row[i])) { ok = false; break; }
        if (!ok) {
            if (first_line) { first_line = false; continue; }  // header row
            throw invalid_argument_error(path + ":" + std::to_string(line_no) +
                                         ": non-numeric field");
        }
        first_line = false;
        if (!rows.empty() && row.size() != rows.front().size())
            throw invalid_argument_error(path + ":" + std::to_string(line_no) +
                                         ": inconsistent column count");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw invalid_argument_error(path + ": no numeric rows");

    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return M;
}

void write_csv(const std::string& path, const Eigen::MatrixXd& matrix,
               const std::vector<std::string>& header) {
    std::ofstream out(path);
    if (!out)
        throw invalid_argument_error("cannot write file: " + path);
    if (!header.empty()) {
        if (static_cast<Eigen::Index>(header.size()) != matrix.cols())
            throw invalid_argument_error("write_csv: header width must match columns");
        for (std::size_t j = 0; j < header.size(); ++j)
            out << (j ? "," : "") << header[j];
        out << '\n';
    }
    char buf[64];
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", matrix(i, j));
            out << (j ? "," : "") << buf;
        }
        out << '\n';
    }
    if (!out)
        throw invalid_argument_error("write failed: " + path);
}

} // namespace rankot
