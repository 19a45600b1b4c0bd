#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dagforge/dag.hpp"
#include "dagforge/dataset.hpp"
#include "dagforge/train.hpp"

namespace dagforge {

// Thrown on malformed input files; the message always carries path and line.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline bool parse_double(std::string_view field, double& out) {
    // Trim ASCII whitespace; from_chars accepts neither leading spaces nor
    // trailing garbage.
    std::size_t b = 0, e = field.size();
    while (b < e && (field[b] == ' ' || field[b] == '\t' || field[b] == '\r')) ++b;
    while (e > b && (field[e - 1] == ' ' || field[e - 1] == '\t' || field[e - 1] == '\r')) --e;
    if (b == e) return false;
    const auto res = std::from_chars(field.data() + b, field.data() + e, out);
    return res.ec == std::errc{} && res.ptr == field.data() + e;
}

inline std::vector<std::string_view> split_fields(const std::string& line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.emplace_back(line.data() + start, i - start);
            start = i + 1;
        }
    }
    return out;
}

}  // namespace detail

// Comma-separated numeric matrix, one sample per row. A single leading header
// row is skipped when any of its fields fails to parse as a number. Ragged or
// malformed rows fail with the offending line number.
inline Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open for reading");

    std::vector<std::vector<double>> rows;
    std::string line;
    long line_no = 0;
    bool first_data_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_fields(line);
        std::vector<double> row(fields.size());
        bool ok = true;
        for (std::size_t i = 0; i < fields.size(); ++i)
            if (!detail::parse_double(fields[i], row[i])) {
                ok = false;
                break;
            }
        if (!ok) {
            if (first_data_line) {  // header row
                first_data_line = false;
                continue;
            }
            throw ParseError(path + ":" + std::to_string(line_no) + ": non-numeric field");
        }
        first_data_line = false;
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(rows.front().size()) + " fields, got " +
                             std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");

    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows.front().size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return m;
}

// Shortest round-trippable decimal per value, no header, newline-terminated.
inline void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    char buf[32];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
            if (c) out << ',';
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

inline Dataset read_dataset_csv(const std::string& path) {
    try {
        return Dataset(read_matrix_csv(path));
    } catch (const std::invalid_argument& e) {
        throw ParseError(path + ": " + e.what());
    }
}

// d x d 0/1 integers. Validation (squareness, binary entries, hollow
// diagonal, acyclicity) happens in validated_dag; its message is prefixed
// with the path.
inline Dag read_adjacency_csv(const std::string& path) {
    const Eigen::MatrixXd m = read_matrix_csv(path);
    try {
        return validated_dag(m.cast<int>());
    } catch (const std::invalid_argument& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline void write_adjacency_csv(const std::string& path, const Dag& g) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    for (int i = 0; i < g.node_count; ++i) {
        for (int j = 0; j < g.node_count; ++j) {
            if (j) out << ',';
            out << g.adj(i, j);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

// Plot-ready training trace; the best_shd column is empty on rows where no
// truth graph was available.
inline void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "step,mean_reward,best_reward,best_shd\n";
    char buf[32];
    for (const TraceRow& row : trace) {
        out << row.step << ',';
        std::snprintf(buf, sizeof buf, "%.17g", row.mean_reward);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", row.best_reward);
        out << buf << ',';
        if (!std::isnan(row.best_shd)) {
            std::snprintf(buf, sizeof buf, "%g", row.best_shd);
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

// Straight-through ablation trace: iteration index and loss.
inline void write_loss_trace_csv(const std::string& path, const std::vector<double>& losses) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "iter,loss\n";
    char buf[32];
    for (std::size_t i = 0; i < losses.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", losses[i]);
        out << i << ',' << buf << '\n';
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace dagforge
