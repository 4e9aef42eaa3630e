#include <gtest/gtest.h>

#include "pmdata/records.hpp"
#include "support/builders.hpp"

namespace pmdata {
namespace {

TEST(Records, MarketRoundTrip) {
    auto m = test::market(4, "Will it rain?");
    m.metadata.end_date = m.metadata.created_at + std::chrono::hours(5);
    m.metadata.category = "Weather";
    m.metadata.tags = {"Weather", "Daily"};
    m.metadata.event_slug = "rain";
    EXPECT_EQ(parse_record_line<MarketRecord>(to_record_line(m)), m);

    m.gamma_id.reset();
    m.question_id.reset();
    m.clob_token_ids.reset();
    m.provenance = Provenance::onchain_recovered;
    EXPECT_EQ(parse_record_line<MarketRecord>(to_record_line(m)), m);
}

TEST(Records, FillRoundTrip) {
    auto f = test::fill(9, test::token(3), 0.61, 12.5, 77, from_unix(1767225700), Side::sell);
    f.fee = 1234;
    f.market_id = test::condition(1);
    f.meta.source_contract = ExchangeContract::negrisk_exchange;
    EXPECT_EQ(parse_record_line<FillRecord>(to_record_line(f)), f);
}

TEST(Records, OracleRoundTrip) {
    auto e = test::oracle_event(3, OracleEventType::settle, test::condition(2), from_unix(1767225800));
    e.question_id = test::hex_id(5);
    e.requester = test::address(7);
    e.actor = test::address(8);
    e.ancillary = "0x71";
    e.settled_price = 0.37;
    e.meta.emplace(std::string(kMetaNonstandardSettlement), "true");
    EXPECT_EQ(parse_record_line<OracleEvent>(to_record_line(e)), e);
}

TEST(Records, RegistrationRoundTrip) {
    TokenRegistration r{test::token(1), test::token(2), test::condition(1), ExchangeContract::negrisk_exchange, 5,
                        test::tx(1), 2};
    EXPECT_EQ(parse_record_line<TokenRegistration>(to_record_line(r)), r);
}

TEST(Records, HexIsLowercaseAndTimestampsIso) {
    auto e = test::oracle_event(3, OracleEventType::request, test::condition(2), from_unix(1767225600));
    const auto line = to_record_line(e);
    EXPECT_NE(line.find("2026-01-01T00:00:00Z"), std::string::npos);
    EXPECT_EQ(line.find('\n'), std::string::npos);
}

TEST(Records, MalformedLineThrowsDecodeError) {
    EXPECT_THROW(parse_record_line<FillRecord>("{not json"), DecodeError);
    EXPECT_THROW(parse_record_line<FillRecord>(R"({"tx_hash": 5})"), DecodeError);
}

}  // namespace
}  // namespace pmdata
