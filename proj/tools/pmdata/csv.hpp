#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pmdata::cli {

/// Shortest round-trip decimal form; identical across runs.
std::string fmt(double v);
std::string fmt(std::optional<double> v);

/// Comma-separated output with a header row. Fields containing commas,
/// quotes or newlines are quoted.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& file, std::initializer_list<std::string_view> header);

    void row(const std::vector<std::string>& fields);
    std::size_t rows() const { return rows_; }

private:
    void write(const std::vector<std::string>& fields);

    std::ofstream out_;
    std::size_t columns_;
    std::size_t rows_ = 0;
};

}  // namespace pmdata::cli
