#include "pmdata/resolution.hpp"

#include <algorithm>

#include "pmdata/errors.hpp"

namespace pmdata {

std::string_view to_string(TokenSource v) {
    switch (v) {
        case TokenSource::api_clob_ids: return "api_clob_ids";
        case TokenSource::api_token_fields: return "api_token_fields";
        case TokenSource::onchain_registration: return "onchain_registration";
    }
    return "?";
}

TokenSource parse_token_source(std::string_view s) {
    for (auto v : {TokenSource::api_clob_ids, TokenSource::api_token_fields,
                   TokenSource::onchain_registration}) {
        if (to_string(v) == s) return v;
    }
    throw DecodeError("unknown token source: '" + std::string(s) + "'");
}

std::string_view to_string(ResolutionPath v) {
    switch (v) {
        case ResolutionPath::direct: return "direct";
        case ResolutionPath::adapter: return "adapter";
        case ResolutionPath::negrisk: return "negrisk";
    }
    return "?";
}

ResolutionPath parse_resolution_path(std::string_view s) {
    for (auto v : {ResolutionPath::direct, ResolutionPath::adapter, ResolutionPath::negrisk}) {
        if (to_string(v) == s) return v;
    }
    throw DecodeError("unknown resolution path: '" + std::string(s) + "'");
}

TokenInsert TokenBridge::insert(const TokenMapping& mapping) {
    auto [it, added] = entries_.try_emplace(mapping.asset_id, mapping);
    if (added) return {TokenInsert::Kind::added, std::nullopt};

    TokenMapping& current = it->second;
    if (current.condition_id == mapping.condition_id) {
        if (mapping.source < current.source) {
            current.source = mapping.source;
            return {TokenInsert::Kind::upgraded, std::nullopt};
        }
        return {TokenInsert::Kind::unchanged, std::nullopt};
    }
    if (mapping.source < current.source) {
        MappingConflict conflict{mapping.asset_id, mapping.condition_id, mapping.source,
                                 current.condition_id, current.source};
        current = mapping;
        return {TokenInsert::Kind::replaced, conflict};
    }
    return {TokenInsert::Kind::rejected,
            MappingConflict{mapping.asset_id, current.condition_id, current.source,
                            mapping.condition_id, mapping.source}};
}

void TokenBridge::insert_strict(const TokenMapping& mapping) {
    auto result = insert(mapping);
    if (result.kind == TokenInsert::Kind::rejected) {
        throw ConflictingMapping("token " + mapping.asset_id + " already mapped to " +
                                 result.conflict->kept);
    }
}

TokenBridge::RegisterResult TokenBridge::register_market_tokens(const MarketRecord& market) {
    RegisterResult out;
    auto apply = [&](const TokenId& token, TokenSource source) {
        if (token.empty()) return;
        auto r = insert({token, market.condition_id, source});
        switch (r.kind) {
            case TokenInsert::Kind::added: ++out.new_entries; break;
            case TokenInsert::Kind::replaced:
                out.conflicts.push_back(*r.conflict);
                out.remapped.push_back(token);
                break;
            case TokenInsert::Kind::rejected: out.conflicts.push_back(*r.conflict); break;
            default: break;
        }
    };
    if (market.provenance == Provenance::onchain_recovered) {
        apply(market.yes_token, TokenSource::onchain_registration);
        apply(market.no_token, TokenSource::onchain_registration);
        return out;
    }
    std::vector<TokenId> seen;
    if (market.clob_token_ids) {
        for (const auto& token : *market.clob_token_ids) {
            apply(token, TokenSource::api_clob_ids);
            seen.push_back(token);
        }
    }
    for (const auto* token : {&market.yes_token, &market.no_token}) {
        if (std::find(seen.begin(), seen.end(), *token) == seen.end()) apply(*token, TokenSource::api_token_fields);
    }
    return out;
}

std::optional<ConditionId> TokenBridge::resolve(const TokenId& asset_id) const {
    auto it = entries_.find(asset_id);
    if (it == entries_.end()) return std::nullopt;
    return it->second.condition_id;
}

std::optional<TokenMapping> TokenBridge::lookup(const TokenId& asset_id) const {
    auto it = entries_.find(asset_id);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::vector<TokenMapping> TokenBridge::entries() const {
    std::vector<TokenMapping> out;
    out.reserve(entries_.size());
    for (const auto& [_, m] : entries_) out.push_back(m);
    std::sort(out.begin(), out.end(),
              [](const TokenMapping& a, const TokenMapping& b) { return a.asset_id < b.asset_id; });
    return out;
}

bool BridgePaths::enabled(ResolutionPath p) const {
    switch (p) {
        case ResolutionPath::direct: return direct;
        case ResolutionPath::adapter: return adapter;
        case ResolutionPath::negrisk: return negrisk;
    }
    return false;
}

std::size_t OracleBridge::learn(const OracleEvent& event) {
    if (event.event_type != OracleEventType::initialize || !event.question_id) return 0;
    std::size_t added = 0;
    if (event.condition_id && add_question(*event.question_id, *event.condition_id)) ++added;
    if (auto it = event.meta.find(kMetaRequestId); it != event.meta.end()) {
        if (add_request(it->second, *event.question_id)) ++added;
    }
    return added;
}

bool OracleBridge::add_question(const QuestionId& question, const ConditionId& condition) {
    return questions_.emplace(question, condition).second;
}

bool OracleBridge::add_request(const std::string& request_id, const QuestionId& question) {
    return requests_.emplace(request_id, question).second;
}

std::optional<ConditionId> OracleBridge::condition_of(const QuestionId& question) const {
    auto it = questions_.find(question);
    if (it == questions_.end()) return std::nullopt;
    return it->second;
}

std::optional<QuestionId> OracleBridge::question_of_request(const std::string& request_id) const {
    auto it = requests_.find(request_id);
    if (it == requests_.end()) return std::nullopt;
    return it->second;
}

std::optional<OracleResolution> OracleBridge::resolve(const OracleEvent& event, const BridgePaths& paths,
                                                      const MarketExists& exists) const {
    if (paths.direct && event.condition_id && exists(*event.condition_id)) {
        return OracleResolution{*event.condition_id, ResolutionPath::direct};
    }
    if (paths.adapter && event.question_id) {
        if (auto c = condition_of(*event.question_id); c && exists(*c)) {
            return OracleResolution{*c, ResolutionPath::adapter};
        }
    }
    if (paths.negrisk) {
        if (auto it = event.meta.find(kMetaRequestId); it != event.meta.end()) {
            if (auto q = question_of_request(it->second)) {
                if (auto c = condition_of(*q); c && exists(*c)) {
                    return OracleResolution{*c, ResolutionPath::negrisk};
                }
            }
        }
    }
    return std::nullopt;
}

std::optional<double> LinkCounts::rate() const {
    if (total == 0) return std::nullopt;
    return static_cast<double>(linked) / static_cast<double>(total);
}

BridgeStats bridge_stats(const std::vector<LinkedEvent>& events) {
    BridgeStats s;
    for (auto type : {OracleEventType::initialize, OracleEventType::request, OracleEventType::propose,
                      OracleEventType::dispute, OracleEventType::settle}) {
        s.by_type[type] = {};
    }
    for (auto p : {ResolutionPath::direct, ResolutionPath::adapter, ResolutionPath::negrisk}) {
        s.by_path[p] = 0;
    }
    for (const auto& e : events) {
        ++s.overall.total;
        ++s.by_type[e.type].total;
        if (e.path) {
            ++s.overall.linked;
            ++s.by_type[e.type].linked;
            ++s.by_path[*e.path];
        }
    }
    return s;
}

}  // namespace pmdata
