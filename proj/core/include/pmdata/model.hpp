#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmdata/time.hpp"

namespace pmdata {

// Identifiers keep their canonical text form: lowercase hex with a 0x prefix
// for hashes and addresses, base-10 digits for ERC-1155 token ids.
using ConditionId = std::string;
using QuestionId = std::string;
using Address = std::string;
using TxHash = std::string;
using TokenId = std::string;

/// Collateral and outcome tokens both use 6 decimals on chain.
using BaseUnits = std::uint64_t;
inline constexpr double kBaseUnitsPerToken = 1'000'000.0;

enum class Provenance { api, onchain_recovered };
enum class ExchangeContract { ctf_exchange, negrisk_exchange };
enum class Side { buy, sell };
enum class OracleEventType { initialize, request, propose, dispute, settle };
enum class Layer { market, fill, oracle, registration };

std::string_view to_string(Provenance v);
std::string_view to_string(ExchangeContract v);
std::string_view to_string(Side v);
std::string_view to_string(OracleEventType v);
std::string_view to_string(Layer v);

// Parsers throw DecodeError on unknown names.
Provenance parse_provenance(std::string_view s);
ExchangeContract parse_exchange(std::string_view s);
Side parse_side(std::string_view s);
OracleEventType parse_event_type(std::string_view s);
Layer parse_layer(std::string_view s);

struct MarketMetadata {
    std::string slug;
    std::string title;
    std::string description;
    Timestamp created_at{};
    std::optional<Timestamp> end_date;
    std::optional<std::string> category;
    std::vector<std::string> tags;
    std::optional<std::string> event_slug;
    std::optional<std::string> series_slug;

    bool operator==(const MarketMetadata&) const = default;
};

/// Canonical market. An empty yes/no token string means "not known".
struct MarketRecord {
    std::optional<std::string> gamma_id;
    ConditionId condition_id;
    std::optional<QuestionId> question_id;
    Address oracle_address;
    TokenId yes_token;
    TokenId no_token;
    /// First element is the YES token when the upstream order is known.
    std::optional<std::vector<TokenId>> clob_token_ids;
    MarketMetadata metadata;
    Provenance provenance = Provenance::api;

    /// Tokens in (YES, NO) order, preferring clob_token_ids when present.
    std::vector<TokenId> tokens() const;

    bool operator==(const MarketRecord&) const = default;
};

/// Side is the maker order's side: a buy maker pays collateral for tokens.
struct FillMeta {
    ExchangeContract source_contract = ExchangeContract::ctf_exchange;
    std::optional<Timestamp> block_timestamp;
    Side side = Side::buy;

    bool operator==(const FillMeta&) const = default;
};

struct FillRecord {
    TxHash tx_hash;
    std::uint64_t log_index = 0;
    std::uint64_t block_number = 0;
    Address maker;
    Address taker;
    TokenId asset_id;
    BaseUnits maker_amount = 0;
    BaseUnits taker_amount = 0;
    BaseUnits fee = 0;
    double size = 0.0;   ///< token units
    double price = 0.0;  ///< collateral per token
    std::optional<ConditionId> market_id;
    FillMeta meta;

    bool operator==(const FillRecord&) const = default;
};

inline constexpr std::string_view kMetaRequestId = "request_id";
inline constexpr std::string_view kMetaNonstandardSettlement = "nonstandard_settlement";

struct OracleEvent {
    TxHash tx_hash;
    std::uint64_t log_index = 0;
    std::uint64_t block_number = 0;
    std::optional<Timestamp> timestamp;
    OracleEventType event_type = OracleEventType::request;
    std::optional<Address> requester;
    std::optional<QuestionId> question_id;
    std::optional<ConditionId> condition_id;
    std::optional<ConditionId> market_id;
    Address source_contract;
    /// Proposer for propose events, disputer for dispute events.
    std::optional<Address> actor;
    /// Hex-encoded ancillary payload.
    std::optional<std::string> ancillary;
    std::optional<double> proposed_price;
    std::optional<double> settled_price;
    std::map<std::string, std::string, std::less<>> meta;

    bool operator==(const OracleEvent&) const = default;
};

struct TokenRegistration {
    TokenId token0;
    TokenId token1;
    ConditionId condition_id;
    ExchangeContract source_contract = ExchangeContract::ctf_exchange;
    std::uint64_t block_number = 0;
    TxHash tx_hash;
    std::uint64_t log_index = 0;

    bool operator==(const TokenRegistration&) const = default;
};

/// Dedup key shared by fills and oracle events.
struct LogKey {
    TxHash tx_hash;
    std::uint64_t log_index = 0;

    auto operator<=>(const LogKey&) const = default;
};

// --- validation -----------------------------------------------------------

enum class Violation {
    missing_condition_id,
    malformed_condition_id,
    malformed_question_id,
    malformed_oracle_address,
    malformed_token_id,
    duplicate_tokens,
    foreign_clob_token,
    missing_gamma_id,
    end_before_creation,
    duplicate_tags,
    malformed_tx_hash,
    malformed_address,
    zero_amount,
    nonpositive_size,
    price_out_of_range,
    price_mismatch,
    missing_proposed_price,
    missing_settled_price,
    unflagged_nonstandard_settlement,
};

std::string_view to_string(Violation v);

bool is_hex_id(std::string_view s, std::size_t bytes);
bool is_token_id(std::string_view s);

/// Empty iff every MarketRecord invariant holds. Uniqueness of condition_id
/// across the market relation is the store's job, not this function's.
std::vector<Violation> validate_market(const MarketRecord& record);
std::vector<Violation> validate_fill(const FillRecord& fill);
std::vector<Violation> validate_oracle_event(const OracleEvent& event);

// --- prices -----------------------------------------------------------------

enum class PriceDirection { collateral_for_token, token_for_collateral };

/// Collateral units per token unit. maker_amount is what the maker gives:
/// collateral under collateral_for_token, tokens under token_for_collateral.
/// Values above 1 are returned as-is. Throws ZeroAmount.
double derive_fill_price(BaseUnits maker_amount, BaseUnits taker_amount, PriceDirection direction);

inline PriceDirection direction_of(Side maker_side) {
    return maker_side == Side::buy ? PriceDirection::collateral_for_token
                                   : PriceDirection::token_for_collateral;
}

BaseUnits collateral_amount(const FillRecord& fill);
BaseUnits token_amount(const FillRecord& fill);

/// Collateral value of the fill in whole collateral units.
inline double trade_value(const FillRecord& fill) {
    return static_cast<double>(collateral_amount(fill)) / kBaseUnitsPerToken;
}

/// Recomputes size and price from the integer amounts. Throws ZeroAmount.
void derive_size_and_price(FillRecord& fill);

/// True for settled prices in {0, 0.5, 1}.
bool is_standard_settlement(double price);

}  // namespace pmdata
