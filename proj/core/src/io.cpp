#include "smpkit/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace smpkit {

std::string csv_cell(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), width_(header.size()) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i)
        out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != width_) throw Error("CSV row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i)
        out_ << (i ? "," : "") << csv_cell(values[i]);
    out_ << '\n';
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw Error("CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i)
        out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
}

CsvWriter::~CsvWriter() = default;

void export_node_table(const std::filesystem::path& csv_path,
                       const std::vector<std::string>& value_names,
                       const std::vector<Mat>& per_node, double dt, int csv_path_limit) {
    const int nodes = static_cast<int>(per_node.size());
    const int rows = nodes ? static_cast<int>(per_node[0].rows()) : 0;
    const int paths = nodes ? static_cast<int>(per_node[0].cols()) : 0;

    std::vector<std::string> header{"node", "t", "path"};
    for (const auto& v : value_names) header.push_back(v);
    CsvWriter csv(csv_path, header);
    const int shown = std::min(paths, csv_path_limit);
    for (int i = 0; i < nodes; ++i) {
        for (int m = 0; m < shown; ++m) {
            std::vector<double> row{static_cast<double>(i), i * dt, static_cast<double>(m)};
            for (int r = 0; r < rows; ++r) row.push_back(per_node[i](r, m));
            csv.row(row);
        }
    }

    // full ensemble, little-endian doubles, after a single text header line
    auto bin_path = csv_path;
    bin_path.replace_extension(".bin");
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw Error("cannot open " + bin_path.string() + " for writing");
    char head[160];
    std::snprintf(head, sizeof(head), "smpkit-table nodes=%d rows=%d paths=%d dt=%.17g\n",
                  nodes, rows, paths, dt);
    bin.write(head, static_cast<std::streamsize>(std::strlen(head)));
    for (int i = 0; i < nodes; ++i)
        bin.write(reinterpret_cast<const char*>(per_node[i].data()),
                  static_cast<std::streamsize>(sizeof(double) * rows * paths));
}

}  // namespace smpkit
