#include "pmdata/records.hpp"

#include <algorithm>
#include <cctype>

namespace pmdata {

using nlohmann::json;

namespace {

template <typename T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

void put_time(json& j, const char* key, const std::optional<Timestamp>& t) {
    if (t) j[key] = format_iso8601(*t);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

std::optional<Timestamp> get_time(const json& j, const char* key) {
    auto s = get_opt<std::string>(j, key);
    if (!s) return std::nullopt;
    return parse_iso8601(*s);
}

std::string lower_hex(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::optional<std::string> lower_hex(std::optional<std::string> s) {
    if (s) *s = lower_hex(std::move(*s));
    return s;
}

}  // namespace

void to_json(json& j, const MarketMetadata& v) {
    j = json{{"slug", v.slug},
             {"title", v.title},
             {"description", v.description},
             {"created_at", format_iso8601(v.created_at)},
             {"tags", v.tags}};
    put_time(j, "end_date", v.end_date);
    put_opt(j, "category", v.category);
    put_opt(j, "event_slug", v.event_slug);
    put_opt(j, "series_slug", v.series_slug);
}

void from_json(const json& j, MarketMetadata& v) {
    v.slug = j.at("slug").get<std::string>();
    v.title = j.at("title").get<std::string>();
    v.description = j.value("description", std::string{});
    v.created_at = parse_iso8601(j.at("created_at").get<std::string>());
    v.end_date = get_time(j, "end_date");
    v.category = get_opt<std::string>(j, "category");
    v.tags = j.value("tags", std::vector<std::string>{});
    v.event_slug = get_opt<std::string>(j, "event_slug");
    v.series_slug = get_opt<std::string>(j, "series_slug");
}

void to_json(json& j, const MarketRecord& v) {
    j = json{{"condition_id", v.condition_id},
             {"oracle_address", v.oracle_address},
             {"yes_token", v.yes_token},
             {"no_token", v.no_token},
             {"metadata", v.metadata},
             {"provenance", to_string(v.provenance)}};
    put_opt(j, "gamma_id", v.gamma_id);
    put_opt(j, "question_id", v.question_id);
    put_opt(j, "clob_token_ids", v.clob_token_ids);
}

void from_json(const json& j, MarketRecord& v) {
    v.gamma_id = get_opt<std::string>(j, "gamma_id");
    v.condition_id = lower_hex(j.at("condition_id").get<std::string>());
    v.question_id = lower_hex(get_opt<std::string>(j, "question_id"));
    v.oracle_address = lower_hex(j.at("oracle_address").get<std::string>());
    v.yes_token = j.value("yes_token", std::string{});
    v.no_token = j.value("no_token", std::string{});
    v.clob_token_ids = get_opt<std::vector<std::string>>(j, "clob_token_ids");
    v.metadata = j.at("metadata").get<MarketMetadata>();
    v.provenance = parse_provenance(j.at("provenance").get<std::string>());
}

void to_json(json& j, const FillRecord& v) {
    json meta{{"source_contract", to_string(v.meta.source_contract)}, {"side", to_string(v.meta.side)}};
    put_time(meta, "block_timestamp", v.meta.block_timestamp);
    j = json{{"tx_hash", v.tx_hash},
             {"log_index", v.log_index},
             {"block_number", v.block_number},
             {"maker", v.maker},
             {"taker", v.taker},
             {"asset_id", v.asset_id},
             {"maker_amount", v.maker_amount},
             {"taker_amount", v.taker_amount},
             {"fee", v.fee},
             {"size", v.size},
             {"price", v.price},
             {"meta", std::move(meta)}};
    put_opt(j, "market_id", v.market_id);
}

void from_json(const json& j, FillRecord& v) {
    v.tx_hash = lower_hex(j.at("tx_hash").get<std::string>());
    v.log_index = j.at("log_index").get<std::uint64_t>();
    v.block_number = j.at("block_number").get<std::uint64_t>();
    v.maker = lower_hex(j.at("maker").get<std::string>());
    v.taker = lower_hex(j.at("taker").get<std::string>());
    v.asset_id = j.at("asset_id").get<std::string>();
    v.maker_amount = j.at("maker_amount").get<std::uint64_t>();
    v.taker_amount = j.at("taker_amount").get<std::uint64_t>();
    v.fee = j.value("fee", std::uint64_t{0});
    v.size = j.value("size", 0.0);
    v.price = j.value("price", 0.0);
    v.market_id = lower_hex(get_opt<std::string>(j, "market_id"));
    const json& meta = j.at("meta");
    v.meta.source_contract = parse_exchange(meta.at("source_contract").get<std::string>());
    v.meta.side = parse_side(meta.at("side").get<std::string>());
    v.meta.block_timestamp = get_time(meta, "block_timestamp");
}

void to_json(json& j, const OracleEvent& v) {
    j = json{{"tx_hash", v.tx_hash},
             {"log_index", v.log_index},
             {"block_number", v.block_number},
             {"event_type", to_string(v.event_type)},
             {"source_contract", v.source_contract},
             {"meta", json::object()}};
    for (const auto& [k, val] : v.meta) j["meta"][k] = val;
    put_time(j, "timestamp", v.timestamp);
    put_opt(j, "requester", v.requester);
    put_opt(j, "question_id", v.question_id);
    put_opt(j, "condition_id", v.condition_id);
    put_opt(j, "market_id", v.market_id);
    put_opt(j, "actor", v.actor);
    put_opt(j, "ancillary", v.ancillary);
    put_opt(j, "proposed_price", v.proposed_price);
    put_opt(j, "settled_price", v.settled_price);
}

void from_json(const json& j, OracleEvent& v) {
    v.tx_hash = lower_hex(j.at("tx_hash").get<std::string>());
    v.log_index = j.at("log_index").get<std::uint64_t>();
    v.block_number = j.at("block_number").get<std::uint64_t>();
    v.timestamp = get_time(j, "timestamp");
    v.event_type = parse_event_type(j.at("event_type").get<std::string>());
    v.requester = lower_hex(get_opt<std::string>(j, "requester"));
    v.question_id = lower_hex(get_opt<std::string>(j, "question_id"));
    v.condition_id = lower_hex(get_opt<std::string>(j, "condition_id"));
    v.market_id = lower_hex(get_opt<std::string>(j, "market_id"));
    v.source_contract = lower_hex(j.at("source_contract").get<std::string>());
    v.actor = lower_hex(get_opt<std::string>(j, "actor"));
    v.ancillary = lower_hex(get_opt<std::string>(j, "ancillary"));
    v.proposed_price = get_opt<double>(j, "proposed_price");
    v.settled_price = get_opt<double>(j, "settled_price");
    v.meta.clear();
    if (auto it = j.find("meta"); it != j.end()) {
        for (const auto& [k, val] : it->items()) v.meta.emplace(k, val.get<std::string>());
    }
}

void to_json(json& j, const TokenRegistration& v) {
    j = json{{"token0", v.token0},
             {"token1", v.token1},
             {"condition_id", v.condition_id},
             {"source_contract", to_string(v.source_contract)},
             {"block_number", v.block_number},
             {"tx_hash", v.tx_hash},
             {"log_index", v.log_index}};
}

void from_json(const json& j, TokenRegistration& v) {
    v.token0 = j.at("token0").get<std::string>();
    v.token1 = j.at("token1").get<std::string>();
    v.condition_id = lower_hex(j.at("condition_id").get<std::string>());
    v.source_contract = parse_exchange(j.at("source_contract").get<std::string>());
    v.block_number = j.at("block_number").get<std::uint64_t>();
    v.tx_hash = lower_hex(j.at("tx_hash").get<std::string>());
    v.log_index = j.at("log_index").get<std::uint64_t>();
}

}  // namespace pmdata
