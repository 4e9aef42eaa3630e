#include "pmdata/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_map>

#include "pmdata/errors.hpp"
#include "rng.hpp"

namespace pmdata {

namespace {

std::size_t exact_count(double fraction, std::size_t n) {
    return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

std::string hex_encode(std::string_view bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out = "0x";
    for (unsigned char c : bytes) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xf]);
    }
    return out;
}

double fee_rate_for(const SimConfig& config, const std::string& category, int day) {
    double rate = 0.0;
    int best_start = -1;
    for (const auto& step : config.fee_regime) {
        if (step.category == category && step.start_day <= day && step.start_day >= best_start) {
            best_start = step.start_day;
            rate = step.rate;
        }
    }
    return rate;
}

// Every log gets its position once all layers are generated, so that log
// indices are unique per block across fills, registrations and oracle events.
enum class LogKind { registration, fill, oracle };

struct PendingLog {
    std::uint64_t block;
    std::uint64_t seq;
    LogKind kind;
    std::size_t index;
};

}  // namespace

void SimConfig::validate() const {
    auto fraction = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InvalidConfig(std::string(name) + " must lie in [0,1]");
        }
    };
    if (n_markets < 0) throw InvalidConfig("n_markets must be non-negative");
    fraction(dispute_rate, "dispute_rate");
    fraction(withheld_fraction, "withheld_fraction");
    fraction(late_metadata_fraction, "late_metadata_fraction");
    fraction(negrisk_fraction, "negrisk_fraction");
    fraction(indirect_oracle_fraction, "indirect_oracle_fraction");
    fraction(tie_rate, "tie_rate");
    if (withheld_fraction + late_metadata_fraction > 1.0) {
        throw InvalidConfig("withheld_fraction + late_metadata_fraction exceeds 1");
    }
    if (horizon_days < 1) throw InvalidConfig("horizon_days must be >= 1");
    if (block_time_seconds < 1 || block_time_seconds > 86400) {
        throw InvalidConfig("block_time_seconds must lie in [1, 86400]");
    }
    if (trades_mean < 0.0) throw InvalidConfig("trades_mean must be non-negative");
    if (!(trades_dispersion > 0.0)) throw InvalidConfig("trades_dispersion must be positive");
    if (topics.empty()) throw InvalidConfig("topics must not be empty");
    for (const auto& step : fee_regime) {
        if (step.start_day < 0 || !(step.rate >= 0.0 && step.rate < 1.0)) {
            throw InvalidConfig("fee_regime steps need start_day >= 0 and rate in [0,1)");
        }
    }
}

std::uint64_t Universe::blocks_per_day() const {
    return static_cast<std::uint64_t>(86400 / config.block_time_seconds);
}

Timestamp Universe::timestamp_of(std::uint64_t block) const {
    if (block < config.genesis_block || block > final_block) throw UnknownBlock(block);
    return config.genesis_time +
           std::chrono::seconds{static_cast<std::int64_t>(block - config.genesis_block) *
                                config.block_time_seconds};
}

std::optional<ConditionId> Universe::market_of_token(const TokenId& token) const {
    for (const auto& m : markets) {
        if (m.record.yes_token == token || m.record.no_token == token) return m.record.condition_id;
    }
    return std::nullopt;
}

Universe generate_lifecycle(const SimConfig& config) {
    config.validate();
    detail::Rng rng(config.seed);

    Universe u;
    u.config = config;
    const std::uint64_t g = config.genesis_block;
    const std::uint64_t per_day = u.blocks_per_day();
    const std::uint64_t horizon = per_day * static_cast<std::uint64_t>(config.horizon_days);
    const auto frac = [&](double f) {
        return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(f * static_cast<double>(horizon)));
    };
    const std::uint64_t liveness = std::max<std::uint64_t>(1, 7200 / config.block_time_seconds);
    const auto n = static_cast<std::size_t>(config.n_markets);

    std::vector<bool> withheld(n, false);
    std::vector<bool> late(n, false);
    for (auto i : rng.choose(n, exact_count(config.withheld_fraction, n))) withheld[i] = true;
    {
        std::vector<std::size_t> eligible;
        for (std::size_t i = 0; i < n; ++i) {
            if (!withheld[i]) eligible.push_back(i);
        }
        const auto k = std::min(eligible.size(), exact_count(config.late_metadata_fraction, n));
        for (auto j : rng.choose(eligible.size(), k)) late[eligible[j]] = true;
    }

    std::vector<Address> wallets(std::max<std::size_t>(20, 4 * n));
    for (auto& w : wallets) w = rng.hex(20);

    std::vector<PendingLog> logs;
    std::uint64_t seq = 0;
    auto log_at = [&](std::uint64_t block, LogKind kind, std::size_t index) {
        logs.push_back({block, seq++, kind, index});
    };

    for (std::size_t i = 0; i < n; ++i) {
        SimMarket m;
        MarketRecord& r = m.record;
        r.condition_id = rng.hex(32);
        r.question_id = rng.hex(32);
        r.yes_token = rng.token_id();
        do {
            r.no_token = rng.token_id();
        } while (r.no_token == r.yes_token);
        r.clob_token_ids = std::vector<TokenId>{r.yes_token, r.no_token};
        m.exchange = rng.bernoulli(config.negrisk_fraction) ? ExchangeContract::negrisk_exchange
                                                             : ExchangeContract::ctf_exchange;
        r.oracle_address = m.exchange == ExchangeContract::negrisk_exchange ? SimContracts::negrisk_adapter
                                                                            : SimContracts::uma_adapter;
        if (m.exchange == ExchangeContract::negrisk_exchange) m.request_id = rng.hex(32);
        r.gamma_id = std::to_string(500000 + i);
        r.provenance = Provenance::api;

        const std::string& topic = config.topics[rng.below(config.topics.size())];
        m.listing_block = g + 1 + rng.below(frac(0.4));
        const std::uint64_t elapsed = m.listing_block - g;
        const std::uint64_t event_end =
            m.listing_block + frac(0.05) + rng.below(std::max<std::uint64_t>(1, frac(0.7) - std::min(frac(0.7), elapsed + frac(0.05))));
        const std::uint64_t propose = event_end + 1 + rng.below(frac(0.02));
        m.disputed = rng.bernoulli(config.dispute_rate);
        std::uint64_t dispute = 0, repropose = 0;
        if (m.disputed) {
            dispute = propose + 1 + rng.below(frac(0.02));
            repropose = dispute + 1 + rng.below(frac(0.02));
        }
        const std::uint64_t last_propose = m.disputed ? repropose : propose;
        m.settle_block = last_propose + liveness;
        m.outcome = rng.bernoulli(config.tie_rate) ? 0.5 : (rng.bernoulli(0.5) ? 1.0 : 0.0);

        MarketMetadata& md = r.metadata;
        md.slug = "sim-market-" + std::to_string(i);
        md.title = "Will " + topic + " event " + std::to_string(i) + " resolve YES?";
        md.description = "Simulated " + topic + " market.";
        md.category = topic;
        md.tags = {topic};
        md.event_slug = "sim-event-" + std::to_string(i / 4);
        md.series_slug = "sim-series-" + topic;
        m.withheld = withheld[i];
        m.late_metadata = late[i];

        // Registration precedes adapter initialization and the price request.
        TokenRegistration reg;
        reg.token0 = r.yes_token;
        reg.token1 = r.no_token;
        reg.condition_id = r.condition_id;
        reg.source_contract = m.exchange;
        reg.block_number = m.listing_block;
        reg.tx_hash = rng.hex(32);
        u.registrations.push_back(reg);
        log_at(m.listing_block, LogKind::registration, u.registrations.size() - 1);

        auto emit = [&](OracleEventType type, std::uint64_t block, const TxHash& tx) -> OracleEvent& {
            OracleEvent e;
            e.tx_hash = tx;
            e.block_number = block;
            e.event_type = type;
            e.question_id = r.question_id;
            e.condition_id = r.condition_id;
            e.requester = r.oracle_address;
            e.source_contract = type == OracleEventType::initialize ? r.oracle_address
                                                                    : SimContracts::optimistic_oracle;
            u.oracle_events.push_back(std::move(e));
            log_at(block, LogKind::oracle, u.oracle_events.size() - 1);
            return u.oracle_events.back();
        };
        const TxHash init_tx = rng.hex(32);
        OracleEvent& init = emit(OracleEventType::initialize, m.listing_block + 1, init_tx);
        init.ancillary = hex_encode("q: " + md.title);
        if (m.request_id) init.meta.emplace(kMetaRequestId, *m.request_id);
        emit(OracleEventType::request, m.listing_block + 1, init_tx);
        const double wrong = m.outcome == 0.5 ? 1.0 : 1.0 - m.outcome;
        emit(OracleEventType::propose, propose, rng.hex(32)).proposed_price = m.disputed ? wrong : m.outcome;
        u.oracle_events.back().actor = wallets[rng.below(wallets.size())];
        if (m.disputed) {
            emit(OracleEventType::dispute, dispute, rng.hex(32)).actor = wallets[rng.below(wallets.size())];
            emit(OracleEventType::propose, repropose, rng.hex(32)).proposed_price = m.outcome;
            u.oracle_events.back().actor = wallets[rng.below(wallets.size())];
        }
        emit(OracleEventType::settle, m.settle_block, rng.hex(32)).settled_price = m.outcome;

        // Trading runs from listing until settlement, so it continues past
        // proposals and disputes.
        const std::uint64_t n_exec = rng.negative_binomial(config.trades_mean, config.trades_dispersion);
        std::vector<std::uint64_t> exec_blocks(n_exec);
        for (auto& b : exec_blocks) b = m.listing_block + 1 + rng.below(m.settle_block - m.listing_block - 1);
        std::sort(exec_blocks.begin(), exec_blocks.end());
        double p_yes = rng.uniform(0.15, 0.85);
        for (std::uint64_t block : exec_blocks) {
            p_yes = std::clamp(p_yes + 0.04 * rng.normal(), 0.01, 0.99);
            const bool yes = rng.bernoulli(0.6);
            const auto yes_cents = std::clamp<std::int64_t>(std::llround(p_yes * 100.0), 1, 99);
            const std::int64_t cents = yes ? yes_cents : 100 - yes_cents;
            const bool taker_buys = rng.bernoulli(0.5);
            const std::uint64_t n_makers = 1 + (rng.bernoulli(0.4) ? 1 + rng.below(2) : 0);
            const TxHash tx = rng.hex(32);
            const Address& taker = wallets[rng.below(wallets.size())];
            const int day = static_cast<int>((block - g) / per_day);
            const double rate = fee_rate_for(config, topic, day);
            for (std::uint64_t k = 0; k < n_makers; ++k) {
                FillRecord f;
                f.tx_hash = tx;
                f.block_number = block;
                do {
                    f.maker = wallets[rng.below(wallets.size())];
                } while (f.maker == taker);
                f.taker = taker;
                f.asset_id = yes ? r.yes_token : r.no_token;
                const BaseUnits tokens = static_cast<BaseUnits>(1 + rng.below(500)) * 1'000'000ULL;
                const BaseUnits collateral = tokens / 100 * static_cast<BaseUnits>(cents);
                f.meta.side = taker_buys ? Side::sell : Side::buy;
                f.meta.source_contract = m.exchange;
                f.maker_amount = f.meta.side == Side::buy ? collateral : tokens;
                f.taker_amount = f.meta.side == Side::buy ? tokens : collateral;
                f.fee = static_cast<BaseUnits>(std::floor(static_cast<double>(collateral) * rate));
                derive_size_and_price(f);
                u.fills.push_back(std::move(f));
                log_at(block, LogKind::fill, u.fills.size() - 1);
            }
        }

        const std::uint64_t first_activity = exec_blocks.empty() ? m.listing_block : exec_blocks.front();
        m.metadata_block = late[i] ? first_activity + 1 + rng.below(frac(0.03)) : m.listing_block;
        md.created_at = u.config.genesis_time + std::chrono::seconds{
            static_cast<std::int64_t>(m.listing_block - g) * config.block_time_seconds};
        md.end_date = u.config.genesis_time + std::chrono::seconds{
            static_cast<std::int64_t>(event_end - g) * config.block_time_seconds};
        u.markets.push_back(std::move(m));
    }

    // Strip direct identifiers from an exact share of non-initialize events.
    {
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < u.oracle_events.size(); ++i) {
            if (u.oracle_events[i].event_type != OracleEventType::initialize) candidates.push_back(i);
        }
        const auto k = std::min(candidates.size(),
                                exact_count(config.indirect_oracle_fraction, u.oracle_events.size()));
        std::unordered_map<ConditionId, const SimMarket*> owner;
        for (const auto& m : u.markets) owner.emplace(m.record.condition_id, &m);
        for (auto j : rng.choose(candidates.size(), k)) {
            OracleEvent& e = u.oracle_events[candidates[j]];
            const SimMarket& m = *owner.at(*e.condition_id);
            e.condition_id.reset();
            if (m.request_id) {
                e.question_id.reset();
                e.meta.emplace(kMetaRequestId, *m.request_id);
            }
        }
    }

    std::stable_sort(logs.begin(), logs.end(), [](const PendingLog& a, const PendingLog& b) {
        return std::tie(a.block, a.seq) < std::tie(b.block, b.seq);
    });
    std::uint64_t current_block = 0, next_index = 0;
    for (const auto& log : logs) {
        if (log.block != current_block) {
            current_block = log.block;
            next_index = 0;
        }
        const std::uint64_t index = next_index++;
        switch (log.kind) {
            case LogKind::registration: u.registrations[log.index].log_index = index; break;
            case LogKind::fill: u.fills[log.index].log_index = index; break;
            case LogKind::oracle: u.oracle_events[log.index].log_index = index; break;
        }
    }
    auto by_position = [](const auto& a, const auto& b) {
        return std::tie(a.block_number, a.log_index) < std::tie(b.block_number, b.log_index);
    };
    std::sort(u.registrations.begin(), u.registrations.end(), by_position);
    std::sort(u.fills.begin(), u.fills.end(), by_position);
    std::sort(u.oracle_events.begin(), u.oracle_events.end(), by_position);

    std::unordered_map<TokenId, std::size_t> market_by_token;
    for (std::size_t i = 0; i < u.markets.size(); ++i) {
        market_by_token.emplace(u.markets[i].record.yes_token, i);
        market_by_token.emplace(u.markets[i].record.no_token, i);
    }
    for (const auto& f : u.fills) ++u.markets[market_by_token.at(f.asset_id)].fill_count;

    for (std::size_t i = 0; i < u.markets.size(); ++i) {
        if (!u.markets[i].withheld) u.metadata_stream.push_back(i);
    }
    std::stable_sort(u.metadata_stream.begin(), u.metadata_stream.end(), [&](std::size_t a, std::size_t b) {
        return u.markets[a].metadata_block < u.markets[b].metadata_block;
    });

    u.final_block = g + horizon;
    for (const auto& m : u.markets) u.final_block = std::max(u.final_block, m.settle_block);
    for (const auto& m : u.markets) u.final_block = std::max(u.final_block, m.metadata_block);
    return u;
}

SimulatorSource::SimulatorSource(std::shared_ptr<const Universe> universe)
    : universe_(std::move(universe)), head_(universe_->final_block) {}

void SimulatorSource::set_head(std::uint64_t block) {
    head_.store(std::clamp(block, universe_->config.genesis_block, universe_->final_block));
}

Poll<MarketRecord> SimulatorSource::poll_markets(const SourceCursor& cursor) {
    require_layer(cursor, Layer::market);
    const auto& stream = universe_->metadata_stream;
    const std::uint64_t head = head_block();
    std::size_t visible = 0;
    while (visible < stream.size() && universe_->markets[stream[visible]].metadata_block <= head) ++visible;
    if (cursor.position >= visible) return {{}, cursor, {}};
    Poll<MarketRecord> out;
    for (std::size_t i = cursor.position; i < visible; ++i) {
        out.batch.push_back(universe_->markets[stream[i]].record);
    }
    out.next = SourceCursor{Layer::market, visible};
    return out;
}

namespace {

template <typename T>
std::vector<T> block_slice(const std::vector<T>& sorted, std::uint64_t from, std::uint64_t to) {
    auto lo = std::lower_bound(sorted.begin(), sorted.end(), from,
                               [](const T& r, std::uint64_t b) { return r.block_number < b; });
    auto hi = std::upper_bound(sorted.begin(), sorted.end(), to,
                               [](std::uint64_t b, const T& r) { return b < r.block_number; });
    return {lo, hi};
}

}  // namespace

Scan<FillRecord> SimulatorSource::poll_fills(std::uint64_t from_block, std::uint64_t to_block) {
    require_range(from_block, to_block);
    to_block = std::min(to_block, head_block());
    if (from_block > to_block) return {};
    return {block_slice(universe_->fills, from_block, to_block), {}};
}

Scan<OracleEvent> SimulatorSource::oracle_events_in(std::uint64_t from_block, std::uint64_t to_block) {
    require_range(from_block, to_block);
    to_block = std::min(to_block, head_block());
    if (from_block > to_block) return {};
    return {block_slice(universe_->oracle_events, from_block, to_block), {}};
}

Scan<TokenRegistration> SimulatorSource::scan_token_registrations(std::uint64_t from_block,
                                                                  std::uint64_t to_block) {
    require_range(from_block, to_block);
    to_block = std::min(to_block, head_block());
    if (from_block > to_block) return {};
    return {block_slice(universe_->registrations, from_block, to_block), {}};
}

Timestamp SimulatorSource::block_timestamp(std::uint64_t block) {
    ++timestamp_fetches_;
    return universe_->timestamp_of(block);
}

}  // namespace pmdata
