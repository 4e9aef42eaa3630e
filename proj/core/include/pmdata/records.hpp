#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "pmdata/errors.hpp"
#include "pmdata/model.hpp"

namespace pmdata {

// Canonical line-delimited record format: one JSON object per line, keys
// named after the record fields, absent optionals omitted, hex lowercase,
// timestamps ISO-8601 UTC with seconds precision.

void to_json(nlohmann::json& j, const MarketMetadata& v);
void from_json(const nlohmann::json& j, MarketMetadata& v);
void to_json(nlohmann::json& j, const MarketRecord& v);
void from_json(const nlohmann::json& j, MarketRecord& v);
void to_json(nlohmann::json& j, const FillRecord& v);
void from_json(const nlohmann::json& j, FillRecord& v);
void to_json(nlohmann::json& j, const OracleEvent& v);
void from_json(const nlohmann::json& j, OracleEvent& v);
void to_json(nlohmann::json& j, const TokenRegistration& v);
void from_json(const nlohmann::json& j, TokenRegistration& v);

template <typename T>
std::string to_record_line(const T& value) {
    return nlohmann::json(value).dump();
}

/// Throws DecodeError with the parser's message on malformed input.
template <typename T>
T parse_record_line(std::string_view line) {
    try {
        return nlohmann::json::parse(line).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(e.what());
    }
}

}  // namespace pmdata
