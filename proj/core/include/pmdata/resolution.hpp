#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "pmdata/model.hpp"

namespace pmdata {

/// Ordered by priority: a lower value wins a conflict.
enum class TokenSource { api_clob_ids, api_token_fields, onchain_registration };

std::string_view to_string(TokenSource v);
TokenSource parse_token_source(std::string_view s);

struct TokenMapping {
    TokenId asset_id;
    ConditionId condition_id;
    TokenSource source = TokenSource::api_clob_ids;

    bool operator==(const TokenMapping&) const = default;
};

/// A mapping that lost a conflict against `kept`.
struct MappingConflict {
    TokenId asset_id;
    ConditionId kept;
    TokenSource kept_source = TokenSource::api_clob_ids;
    ConditionId rejected;
    TokenSource rejected_source = TokenSource::api_clob_ids;

    auto operator<=>(const MappingConflict&) const = default;
};

/// Effect of one insert on the bridge.
struct TokenInsert {
    enum class Kind { added, unchanged, upgraded, replaced, rejected } kind = Kind::unchanged;
    std::optional<MappingConflict> conflict;  ///< set for replaced and rejected
};

/// asset_id -> condition_id. A mapping from a higher-priority source
/// replaces a lower-priority one; between equal priorities the first
/// writer wins. Either way the losing claim is reported as a conflict.
class TokenBridge {
public:
    TokenInsert insert(const TokenMapping& mapping);

    /// Like insert, but throws ConflictingMapping when the claim loses.
    void insert_strict(const TokenMapping& mapping);

    struct RegisterResult {
        std::size_t new_entries = 0;
        std::vector<MappingConflict> conflicts;
        /// Tokens whose condition changed (replaced) and must be relinked.
        std::vector<TokenId> remapped;
    };

    /// Registers C_i tokens (api_clob_ids) and Y_i/N_i (api_token_fields) of an
    /// api record, or the token pair of a recovered record (onchain_registration).
    RegisterResult register_market_tokens(const MarketRecord& market);

    std::optional<ConditionId> resolve(const TokenId& asset_id) const;
    std::optional<TokenMapping> lookup(const TokenId& asset_id) const;
    std::size_t size() const { return entries_.size(); }
    /// Sorted by asset_id.
    std::vector<TokenMapping> entries() const;

private:
    std::unordered_map<TokenId, TokenMapping> entries_;
};

enum class ResolutionPath { direct, adapter, negrisk };

std::string_view to_string(ResolutionPath v);
ResolutionPath parse_resolution_path(std::string_view s);

struct BridgePaths {
    bool direct = true;
    bool adapter = true;
    bool negrisk = true;

    bool enabled(ResolutionPath p) const;
    bool operator==(const BridgePaths&) const = default;
};

struct OracleResolution {
    ConditionId market_id;
    ResolutionPath path = ResolutionPath::direct;

    bool operator==(const OracleResolution&) const = default;
};

/// question_id -> condition_id (adapter initialize logs) and negative-risk
/// request_id -> question_id. Market existence is supplied by the caller.
class OracleBridge {
public:
    using MarketExists = std::function<bool(const ConditionId&)>;

    /// Learns mappings from an initialize event; first writer wins.
    /// Returns the number of new entries.
    std::size_t learn(const OracleEvent& event);
    bool add_question(const QuestionId& question, const ConditionId& condition);
    bool add_request(const std::string& request_id, const QuestionId& question);

    std::optional<ConditionId> condition_of(const QuestionId& question) const;
    std::optional<QuestionId> question_of_request(const std::string& request_id) const;

    /// Tries direct -> adapter -> negrisk, skipping disabled paths, and
    /// returns the first path that ends at a market in M. At most 3 hops.
    std::optional<OracleResolution> resolve(const OracleEvent& event, const BridgePaths& paths,
                                            const MarketExists& exists) const;

    const std::map<QuestionId, ConditionId>& questions() const { return questions_; }
    const std::map<std::string, QuestionId>& requests() const { return requests_; }

private:
    std::map<QuestionId, ConditionId> questions_;
    std::map<std::string, QuestionId> requests_;
};

/// Linkage counts for one slice of the oracle relation.
struct LinkCounts {
    std::size_t total = 0;
    std::size_t linked = 0;

    /// Undefined when total is 0.
    std::optional<double> rate() const;
    bool operator==(const LinkCounts&) const = default;
};

struct BridgeStats {
    LinkCounts overall;
    std::map<OracleEventType, LinkCounts> by_type;
    std::map<ResolutionPath, std::size_t> by_path;

    bool operator==(const BridgeStats&) const = default;
};

/// One stored oracle event's linkage, as bridge_stats consumes it.
struct LinkedEvent {
    OracleEventType type = OracleEventType::request;
    std::optional<ResolutionPath> path;  ///< absent when unlinked
};

BridgeStats bridge_stats(const std::vector<LinkedEvent>& events);

}  // namespace pmdata
