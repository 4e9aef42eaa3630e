#include "pmdata/time.hpp"

#include <charconv>
#include <cstdio>

#include "pmdata/errors.hpp"

namespace pmdata {

namespace {

int parse_fixed(std::string_view text, std::size_t pos, std::size_t width) {
    int value = 0;
    auto first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + width, value);
    if (ec != std::errc{} || ptr != first + width) {
        throw DecodeError("malformed timestamp: " + std::string(text));
    }
    return value;
}

void expect(std::string_view text, std::size_t pos, char c) {
    if (text[pos] != c) throw DecodeError("malformed timestamp: " + std::string(text));
}

Day civil_day(std::string_view text) {
    expect(text, 4, '-');
    expect(text, 7, '-');
    using namespace std::chrono;
    year_month_day ymd{year{parse_fixed(text, 0, 4)},
                       month{static_cast<unsigned>(parse_fixed(text, 5, 2))},
                       day{static_cast<unsigned>(parse_fixed(text, 8, 2))}};
    if (!ymd.ok()) throw DecodeError("invalid calendar date: " + std::string(text));
    return sys_days{ymd};
}

}  // namespace

std::string format_iso8601(Timestamp t) {
    using namespace std::chrono;
    auto d = floor<days>(t);
    year_month_day ymd{d};
    hh_mm_ss tod{t - d};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()));
    return buf;
}

Timestamp parse_iso8601(std::string_view text) {
    const bool zulu = text.size() == 20 && text[19] == 'Z';
    const bool offset = text.size() == 25 && text.substr(19) == "+00:00";
    if (!zulu && !offset) throw DecodeError("malformed timestamp: " + std::string(text));
    expect(text, 10, 'T');
    expect(text, 13, ':');
    expect(text, 16, ':');
    const int hh = parse_fixed(text, 11, 2);
    const int mm = parse_fixed(text, 14, 2);
    const int ss = parse_fixed(text, 17, 2);
    if (hh > 23 || mm > 59 || ss > 59) {
        throw DecodeError("time of day out of range: " + std::string(text));
    }
    using namespace std::chrono;
    return Timestamp{civil_day(text)} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_day(Day d) {
    using namespace std::chrono;
    year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Day parse_day(std::string_view text) {
    if (text.size() != 10) throw DecodeError("malformed date: " + std::string(text));
    return civil_day(text);
}

}  // namespace pmdata
