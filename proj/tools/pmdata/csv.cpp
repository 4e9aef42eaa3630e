#include "pmdata/csv.hpp"

#include <charconv>
#include <cmath>

#include "pmdata/errors.hpp"

namespace pmdata::cli {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string fmt(std::optional<double> v) { return v ? fmt(*v) : std::string(); }

CsvWriter::CsvWriter(const std::filesystem::path& file, std::initializer_list<std::string_view> header)
    : out_(file, std::ios::binary), columns_(header.size()) {
    if (!out_) throw StorageUnavailable("cannot write " + file.string());
    write(std::vector<std::string>(header.begin(), header.end()));
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    if (fields.size() != columns_) throw PreconditionViolation("csv row width does not match header");
    write(fields);
    ++rows_;
}

void CsvWriter::write(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        const auto& f = fields[i];
        if (f.find_first_of(",\"\n\r") == std::string::npos) {
            out_ << f;
            continue;
        }
        out_ << '"';
        for (char c : f) {
            if (c == '"') out_ << '"';
            out_ << c;
        }
        out_ << '"';
    }
    out_ << '\n';
}

}  // namespace pmdata::cli
