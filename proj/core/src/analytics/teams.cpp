#include "pmdata/analytics/teams.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace pmdata::analytics {

namespace {

std::string normalize(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) out += ' ';
        space = false;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string strip_article(std::string s) {
    if (s.rfind("the ", 0) == 0) s.erase(0, 4);
    return s;
}

}  // namespace

TeamLexicon::TeamLexicon(std::vector<Team> teams) : teams_(std::move(teams)) {}

std::optional<std::string> TeamLexicon::lookup(std::string_view text) const {
    const std::string key = strip_article(normalize(text));
    for (const auto& team : teams_) {
        if (normalize(team.name) == key) return team.name;
        for (const auto& alias : team.aliases) {
            if (normalize(alias) == key) return team.name;
        }
    }
    return std::nullopt;
}

const TeamLexicon& nba_lexicon() {
    static const TeamLexicon lexicon({
        {"Atlanta Hawks", {"Hawks", "Atlanta", "ATL"}},
        {"Boston Celtics", {"Celtics", "Boston", "BOS"}},
        {"Brooklyn Nets", {"Nets", "Brooklyn", "BKN"}},
        {"Charlotte Hornets", {"Hornets", "Charlotte", "CHA"}},
        {"Chicago Bulls", {"Bulls", "Chicago", "CHI"}},
        {"Cleveland Cavaliers", {"Cavaliers", "Cavs", "Cleveland", "CLE"}},
        {"Dallas Mavericks", {"Mavericks", "Mavs", "Dallas", "DAL"}},
        {"Denver Nuggets", {"Nuggets", "Denver", "DEN"}},
        {"Detroit Pistons", {"Pistons", "Detroit", "DET"}},
        {"Golden State Warriors", {"Warriors", "Golden State", "GSW"}},
        {"Houston Rockets", {"Rockets", "Houston", "HOU"}},
        {"Indiana Pacers", {"Pacers", "Indiana", "IND"}},
        {"LA Clippers", {"Clippers", "Los Angeles Clippers", "LAC"}},
        {"Los Angeles Lakers", {"Lakers", "LA Lakers", "LAL"}},
        {"Memphis Grizzlies", {"Grizzlies", "Memphis", "MEM"}},
        {"Miami Heat", {"Heat", "Miami", "MIA"}},
        {"Milwaukee Bucks", {"Bucks", "Milwaukee", "MIL"}},
        {"Minnesota Timberwolves", {"Timberwolves", "Wolves", "Minnesota", "MIN"}},
        {"New Orleans Pelicans", {"Pelicans", "New Orleans", "NOP"}},
        {"New York Knicks", {"Knicks", "New York", "NYK"}},
        {"Oklahoma City Thunder", {"Thunder", "Oklahoma City", "OKC"}},
        {"Orlando Magic", {"Magic", "Orlando", "ORL"}},
        {"Philadelphia 76ers", {"76ers", "Sixers", "Philadelphia", "PHI"}},
        {"Phoenix Suns", {"Suns", "Phoenix", "PHX"}},
        {"Portland Trail Blazers", {"Trail Blazers", "Blazers", "Portland", "POR"}},
        {"Sacramento Kings", {"Kings", "Sacramento", "SAC"}},
        {"San Antonio Spurs", {"Spurs", "San Antonio", "SAS"}},
        {"Toronto Raptors", {"Raptors", "Toronto", "TOR"}},
        {"Utah Jazz", {"Jazz", "Utah", "UTA"}},
        {"Washington Wizards", {"Wizards", "Washington", "WAS"}},
    });
    return lexicon;
}

std::optional<Matchup> match_winner_question(std::string_view title, const TeamLexicon& lexicon) {
    std::string text = normalize(title);
    static const std::vector<std::string> excluded{
        "spread", "total",  "o/u",   "over/under", "mvp",     "quarter", "half",
        "1h",     "2h",     "1q",    "points",     "rebounds", "assists", "prop", "series",  "(-",
        "(+",     "margin", "by more", "finals", "championship"};
    for (const auto& pattern : excluded) {
        if (text.find(pattern) != std::string::npos) return std::nullopt;
    }
    while (!text.empty() && (text.back() == '?' || text.back() == '.' || text.back() == ' ')) text.pop_back();
    if (text.rfind("nba:", 0) == 0) text = normalize(text.substr(4));

    static const std::regex versus(R"(^(.+?) vs\.? (.+)$)");
    static const std::regex beat(R"(^will (.+?) (?:beat|defeat) (.+)$)");
    static const std::regex win_against(R"(^will (.+?) win (?:against|vs\.?|over) (.+)$)");
    std::smatch m;
    if (!std::regex_match(text, m, versus) && !std::regex_match(text, m, beat) &&
        !std::regex_match(text, m, win_against)) {
        return std::nullopt;
    }
    auto a = lexicon.lookup(m[1].str());
    auto b = lexicon.lookup(m[2].str());
    if (!a || !b || *a == *b) return std::nullopt;
    return Matchup{*a, *b};
}

}  // namespace pmdata::analytics
