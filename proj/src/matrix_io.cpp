#include "subspace/matrix_io.hpp"

#include "subspace/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace subspace {

namespace {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_value(const std::string &token, const std::filesystem::path &path) {
    char *end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
        throw IoError(path.string() + ": cannot parse '" + token + "' as a number");
    }
    return v;
}

std::vector<std::string> split_commas(const std::string &line) {
    std::vector<std::string> out;
    std::string token;
    std::stringstream ss(line);
    while (std::getline(ss, token, ',')) {
        out.push_back(token);
    }
    return out;
}

std::string strip(const std::string &s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

} // namespace

Matrix read_matrix_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError(path.string() + ": empty file");
    }
    const auto header = split_commas(strip(line));
    if (header.size() != 2) {
        throw IoError(path.string() + ": header must be 'rows,cols'");
    }
    const long rows = std::strtol(header[0].c_str(), nullptr, 10);
    const long cols = std::strtol(header[1].c_str(), nullptr, 10);
    if (rows < 1 || cols < 1) {
        throw IoError(path.string() + ": invalid dimensions " + strip(line));
    }
    Matrix m(rows, cols);
    for (long i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) {
            throw IoError(path.string() + ": expected " + std::to_string(rows) +
                          " data rows, got " + std::to_string(i));
        }
        const auto tokens = split_commas(strip(line));
        if (static_cast<long>(tokens.size()) != cols) {
            throw IoError(path.string() + ": row " + std::to_string(i + 1) + " has " +
                          std::to_string(tokens.size()) + " values, expected " +
                          std::to_string(cols));
        }
        for (long j = 0; j < cols; ++j) {
            m(i, j) = parse_value(tokens[j], path);
        }
    }
    return m;
}

void write_matrix_csv(const std::filesystem::path &path, const Matrix &m) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << m.rows() << "," << m.cols() << "\n";
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j > 0) {
                out << ",";
            }
            out << format_value(m(i, j));
        }
        out << "\n";
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

void write_pgm_heatmap(const std::filesystem::path &path, const Matrix &m) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    const double maxabs = m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0;
    out << "P2\n" << m.cols() << " " << m.rows() << "\n255\n";
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            const int level =
                maxabs > 0.0 ? static_cast<int>(std::lround(255.0 * std::abs(m(i, j)) / maxabs))
                             : 0;
            out << level << (j + 1 < m.cols() ? " " : "\n");
        }
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

std::vector<std::string> read_lines(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        const std::string s = strip(line);
        if (!s.empty()) {
            lines.push_back(s);
        }
    }
    return lines;
}

} // namespace subspace
