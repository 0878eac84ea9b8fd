#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "smpkit/types.hpp"

namespace smpkit {

// Deterministic CSV writing: %.17g cells, '\n' line endings, no locale
// dependence — the reproducibility contract is byte identity.
std::string csv_cell(double v);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<double>& values);
    void raw_row(const std::vector<std::string>& cells);
    ~CsvWriter();

private:
    std::ofstream out_;
    std::size_t width_;
};

// Node table export: one CSV row per (node, path) with the given matrix rows
// flattened; plus a little-endian binary dump alongside (same stem, .bin)
// with a one-line text header describing the layout.
void export_node_table(const std::filesystem::path& csv_path,
                       const std::vector<std::string>& value_names,
                       const std::vector<Mat>& per_node, double dt,
                       int csv_path_limit = 8);

}  // namespace smpkit
