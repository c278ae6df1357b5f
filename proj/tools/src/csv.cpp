#include "wlogit_cli/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "wlogit/error.hpp"

namespace wlogit::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string where(std::size_t line, std::size_t col, const std::vector<std::string>& header) {
    std::string s = "line " + std::to_string(line) + ", column " + std::to_string(col + 1);
    if (col < header.size()) s += " ('" + header[col] + "')";
    return s;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw DataError("unterminated quoted field");
    out.push_back(trim(cur));
    return out;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");

    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw DataError("'" + path.string() + "' has no header row");
    try {
        t.header = split_csv_line(line);
    } catch (const DataError& e) {
        throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
    for (std::size_t j = 0; j < t.header.size(); ++j) {
        if (t.header[j].empty()) throw DataError("empty column name at " + where(lineno, j, {}));
    }
    {
        auto sorted = t.header;
        std::sort(sorted.begin(), sorted.end());
        const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
        if (dup != sorted.end()) throw DataError("duplicate column name '" + *dup + "'");
    }

    const std::size_t cols = t.header.size();
    std::vector<double> cells;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields;
        try {
            fields = split_csv_line(line);
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (fields.size() != cols) {
            throw DataError("line " + std::to_string(lineno) + " has " + std::to_string(fields.size()) +
                            " cells, header has " + std::to_string(cols));
        }
        for (std::size_t j = 0; j < cols; ++j) {
            const std::string& f = fields[j];
            if (f.empty()) throw DataError("missing value at " + where(lineno, j, t.header));
            double v = 0.0;
            const char* first = f.data();
            if (*first == '+') ++first;
            const auto res = std::from_chars(first, f.data() + f.size(), v);
            if (res.ec != std::errc() || res.ptr != f.data() + f.size() || !std::isfinite(v)) {
                throw DataError("not a finite number '" + f + "' at " + where(lineno, j, t.header));
            }
            cells.push_back(v);
        }
        ++rows;
    }
    t.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cells[i * cols + j];
        }
    }
    return t;
}

namespace {

std::vector<Eigen::Index> columns_except(std::size_t cols, std::optional<std::size_t> skip) {
    std::vector<Eigen::Index> keep;
    for (std::size_t j = 0; j < cols; ++j) {
        if (!skip || j != *skip) keep.push_back(static_cast<Eigen::Index>(j));
    }
    return keep;
}

}  // namespace

CsvDataset read_csv_dataset(const std::filesystem::path& path, const std::string& label_column) {
    const CsvTable t = read_csv_table(path);
    const auto it = std::find(t.header.begin(), t.header.end(), label_column);
    if (it == t.header.end()) throw DataError("label column '" + label_column + "' not found");
    const auto label = static_cast<std::size_t>(it - t.header.begin());
    if (t.values.rows() < 2) throw DataError("need at least 2 data rows, found " + std::to_string(t.values.rows()));
    if (t.header.size() < 2) throw DataError("no feature columns besides the label");

    CsvDataset d;
    d.label_name = label_column;
    const auto keep = columns_except(t.header.size(), label);
    for (auto j : keep) d.feature_names.push_back(t.header[static_cast<std::size_t>(j)]);
    d.data.X = t.values(Eigen::all, keep);
    d.data.y = t.values.col(static_cast<Eigen::Index>(label));
    for (Eigen::Index i = 0; i < d.data.y.size(); ++i) {
        const double v = d.data.y(i);
        if (v != 0.0 && v != 1.0) {
            // i-th data row; blank lines are not tracked, so report the row index.
            throw DataError("label must be 0 or 1 at data row " + std::to_string(i + 1) + ", column " +
                            std::to_string(label + 1) + " ('" + label_column + "')");
        }
    }
    return d;
}

CsvTable read_csv_features(const std::filesystem::path& path,
                           const std::optional<std::string>& label_column) {
    CsvTable t = read_csv_table(path);
    std::optional<std::size_t> skip;
    if (label_column) {
        const auto it = std::find(t.header.begin(), t.header.end(), *label_column);
        if (it != t.header.end()) skip = static_cast<std::size_t>(it - t.header.begin());
    }
    if (!skip) return t;
    const auto keep = columns_except(t.header.size(), skip);
    CsvTable out;
    for (auto j : keep) out.header.push_back(t.header[static_cast<std::size_t>(j)]);
    out.values = t.values(Eigen::all, keep);
    return out;
}

}  // namespace wlogit::cli
