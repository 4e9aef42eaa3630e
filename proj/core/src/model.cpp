#include "pmdata/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <utility>

#include "pmdata/errors.hpp"

namespace pmdata {

namespace {

template <typename Enum, std::size_t N>
using NameTable = std::array<std::pair<Enum, std::string_view>, N>;

constexpr NameTable<Provenance, 2> kProvenance{{
    {Provenance::api, "api"},
    {Provenance::onchain_recovered, "onchain_recovered"},
}};
constexpr NameTable<ExchangeContract, 2> kExchange{{
    {ExchangeContract::ctf_exchange, "ctf_exchange"},
    {ExchangeContract::negrisk_exchange, "negrisk_exchange"},
}};
constexpr NameTable<Side, 2> kSide{{{Side::buy, "buy"}, {Side::sell, "sell"}}};
constexpr NameTable<OracleEventType, 5> kEventType{{
    {OracleEventType::initialize, "initialize"},
    {OracleEventType::request, "request"},
    {OracleEventType::propose, "propose"},
    {OracleEventType::dispute, "dispute"},
    {OracleEventType::settle, "settle"},
}};
constexpr NameTable<Layer, 4> kLayer{{
    {Layer::market, "market"},
    {Layer::fill, "fill"},
    {Layer::oracle, "oracle"},
    {Layer::registration, "registration"},
}};

template <typename Enum, std::size_t N>
std::string_view name_of(const NameTable<Enum, N>& table, Enum v) {
    for (const auto& [e, name] : table) {
        if (e == v) return name;
    }
    return "?";
}

template <typename Enum, std::size_t N>
Enum parse_name(const NameTable<Enum, N>& table, std::string_view s, std::string_view what) {
    for (const auto& [e, name] : table) {
        if (name == s) return e;
    }
    throw DecodeError("unknown " + std::string(what) + ": '" + std::string(s) + "'");
}

void add(std::vector<Violation>& out, Violation v) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
}

}  // namespace

std::string_view to_string(Provenance v) { return name_of(kProvenance, v); }
std::string_view to_string(ExchangeContract v) { return name_of(kExchange, v); }
std::string_view to_string(Side v) { return name_of(kSide, v); }
std::string_view to_string(OracleEventType v) { return name_of(kEventType, v); }
std::string_view to_string(Layer v) { return name_of(kLayer, v); }

Provenance parse_provenance(std::string_view s) { return parse_name(kProvenance, s, "provenance"); }
ExchangeContract parse_exchange(std::string_view s) { return parse_name(kExchange, s, "exchange"); }
Side parse_side(std::string_view s) { return parse_name(kSide, s, "side"); }
OracleEventType parse_event_type(std::string_view s) {
    return parse_name(kEventType, s, "event type");
}
Layer parse_layer(std::string_view s) { return parse_name(kLayer, s, "layer"); }

std::string_view to_string(Violation v) {
    switch (v) {
        case Violation::missing_condition_id: return "MISSING_CONDITION_ID";
        case Violation::malformed_condition_id: return "MALFORMED_CONDITION_ID";
        case Violation::malformed_question_id: return "MALFORMED_QUESTION_ID";
        case Violation::malformed_oracle_address: return "MALFORMED_ORACLE_ADDRESS";
        case Violation::malformed_token_id: return "MALFORMED_TOKEN_ID";
        case Violation::duplicate_tokens: return "DUPLICATE_TOKENS";
        case Violation::foreign_clob_token: return "FOREIGN_CLOB_TOKEN";
        case Violation::missing_gamma_id: return "MISSING_GAMMA_ID";
        case Violation::end_before_creation: return "END_BEFORE_CREATION";
        case Violation::duplicate_tags: return "DUPLICATE_TAGS";
        case Violation::malformed_tx_hash: return "MALFORMED_TX_HASH";
        case Violation::malformed_address: return "MALFORMED_ADDRESS";
        case Violation::zero_amount: return "ZERO_AMOUNT";
        case Violation::nonpositive_size: return "NONPOSITIVE_SIZE";
        case Violation::price_out_of_range: return "PRICE_OUT_OF_RANGE";
        case Violation::price_mismatch: return "PRICE_MISMATCH";
        case Violation::missing_proposed_price: return "MISSING_PROPOSED_PRICE";
        case Violation::missing_settled_price: return "MISSING_SETTLED_PRICE";
        case Violation::unflagged_nonstandard_settlement: return "UNFLAGGED_NONSTANDARD_SETTLEMENT";
    }
    return "?";
}

bool is_hex_id(std::string_view s, std::size_t bytes) {
    if (s.size() != 2 + 2 * bytes || s[0] != '0' || s[1] != 'x') return false;
    return std::all_of(s.begin() + 2, s.end(),
                       [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

bool is_token_id(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<TokenId> MarketRecord::tokens() const {
    if (clob_token_ids && !clob_token_ids->empty()) return *clob_token_ids;
    std::vector<TokenId> out;
    if (!yes_token.empty()) out.push_back(yes_token);
    if (!no_token.empty()) out.push_back(no_token);
    return out;
}

std::vector<Violation> validate_market(const MarketRecord& record) {
    std::vector<Violation> out;
    if (record.condition_id.empty()) {
        add(out, Violation::missing_condition_id);
    } else if (!is_hex_id(record.condition_id, 32)) {
        add(out, Violation::malformed_condition_id);
    }
    if (record.question_id && !is_hex_id(*record.question_id, 32)) {
        add(out, Violation::malformed_question_id);
    }
    if (!is_hex_id(record.oracle_address, 20)) add(out, Violation::malformed_oracle_address);

    for (const auto* token : {&record.yes_token, &record.no_token}) {
        if (!token->empty() && !is_token_id(*token)) add(out, Violation::malformed_token_id);
    }
    if (!record.yes_token.empty() && record.yes_token == record.no_token) {
        add(out, Violation::duplicate_tokens);
    }
    if (record.clob_token_ids) {
        for (const auto& token : *record.clob_token_ids) {
            if (!is_token_id(token)) add(out, Violation::malformed_token_id);
            if (token != record.yes_token && token != record.no_token) {
                add(out, Violation::foreign_clob_token);
            }
        }
    }
    if (record.provenance == Provenance::api && (!record.gamma_id || record.gamma_id->empty())) {
        add(out, Violation::missing_gamma_id);
    }
    if (record.metadata.end_date && *record.metadata.end_date < record.metadata.created_at) {
        add(out, Violation::end_before_creation);
    }
    std::set<std::string_view> seen;
    for (const auto& tag : record.metadata.tags) {
        if (!seen.insert(tag).second) add(out, Violation::duplicate_tags);
    }
    return out;
}

std::vector<Violation> validate_fill(const FillRecord& fill) {
    std::vector<Violation> out;
    if (!is_hex_id(fill.tx_hash, 32)) add(out, Violation::malformed_tx_hash);
    if (!is_hex_id(fill.maker, 20) || !is_hex_id(fill.taker, 20)) add(out, Violation::malformed_address);
    if (!is_token_id(fill.asset_id)) add(out, Violation::malformed_token_id);
    if (fill.maker_amount == 0 || fill.taker_amount == 0) {
        add(out, Violation::zero_amount);
        return out;
    }
    if (!(fill.size > 0.0)) add(out, Violation::nonpositive_size);
    if (!(fill.price >= 0.0 && fill.price <= 1.0)) add(out, Violation::price_out_of_range);
    const double recomputed =
        derive_fill_price(fill.maker_amount, fill.taker_amount, direction_of(fill.meta.side));
    if (std::abs(recomputed - fill.price) > 1e-12) add(out, Violation::price_mismatch);
    return out;
}

std::vector<Violation> validate_oracle_event(const OracleEvent& event) {
    std::vector<Violation> out;
    if (!is_hex_id(event.tx_hash, 32)) add(out, Violation::malformed_tx_hash);
    if (!is_hex_id(event.source_contract, 20)) add(out, Violation::malformed_address);
    if (event.question_id && !is_hex_id(*event.question_id, 32)) {
        add(out, Violation::malformed_question_id);
    }
    if (event.condition_id && !is_hex_id(*event.condition_id, 32)) {
        add(out, Violation::malformed_condition_id);
    }
    if (event.event_type == OracleEventType::propose && !event.proposed_price) {
        add(out, Violation::missing_proposed_price);
    }
    if (event.event_type == OracleEventType::settle && !event.settled_price) {
        add(out, Violation::missing_settled_price);
    }
    if (event.settled_price && !is_standard_settlement(*event.settled_price) &&
        !event.meta.contains(kMetaNonstandardSettlement)) {
        add(out, Violation::unflagged_nonstandard_settlement);
    }
    return out;
}

double derive_fill_price(BaseUnits maker_amount, BaseUnits taker_amount, PriceDirection direction) {
    if (maker_amount == 0 || taker_amount == 0) throw ZeroAmount();
    const auto [collateral, tokens] = direction == PriceDirection::collateral_for_token
                                          ? std::pair{maker_amount, taker_amount}
                                          : std::pair{taker_amount, maker_amount};
    return static_cast<double>(collateral) / static_cast<double>(tokens);
}

BaseUnits collateral_amount(const FillRecord& fill) {
    return fill.meta.side == Side::buy ? fill.maker_amount : fill.taker_amount;
}

BaseUnits token_amount(const FillRecord& fill) {
    return fill.meta.side == Side::buy ? fill.taker_amount : fill.maker_amount;
}

void derive_size_and_price(FillRecord& fill) {
    fill.price = derive_fill_price(fill.maker_amount, fill.taker_amount, direction_of(fill.meta.side));
    fill.size = static_cast<double>(token_amount(fill)) / kBaseUnitsPerToken;
}

bool is_standard_settlement(double price) { return price == 0.0 || price == 0.5 || price == 1.0; }

}  // namespace pmdata
