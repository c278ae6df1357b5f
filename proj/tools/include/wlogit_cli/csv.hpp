#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wlogit/glm.hpp"

namespace wlogit::cli {

struct CsvTable {
    std::vector<std::string> header;
    Matrix values;  ///< rows = samples, one column per header entry
};

/// Comma-separated file with a header row. Every cell must be a finite number;
/// errors name the 1-based line and the column.
CsvTable read_csv_table(const std::filesystem::path& path);

struct CsvDataset {
    std::vector<std::string> feature_names;
    std::string label_name;
    Dataset data;
};

/// Splits off `label_column` (values 0 or 1) from the remaining feature columns.
CsvDataset read_csv_dataset(const std::filesystem::path& path, const std::string& label_column);

/// Feature matrix of a file, dropping `label_column` when it is given and present.
CsvTable read_csv_features(const std::filesystem::path& path,
                           const std::optional<std::string>& label_column);

/// Split one CSV record; double quotes group fields and "" escapes a quote.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace wlogit::cli
