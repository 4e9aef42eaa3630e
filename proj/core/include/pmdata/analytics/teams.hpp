#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pmdata::analytics {

struct Team {
    std::string name;                  ///< canonical, e.g. "Los Angeles Lakers"
    std::vector<std::string> aliases;  ///< matched case-insensitively
};

class TeamLexicon {
public:
    explicit TeamLexicon(std::vector<Team> teams);

    /// Canonical name for an exact alias or name match.
    std::optional<std::string> lookup(std::string_view text) const;
    const std::vector<Team>& teams() const { return teams_; }

private:
    std::vector<Team> teams_;
};

/// The 30 NBA franchises with city, nickname and common short forms.
const TeamLexicon& nba_lexicon();

struct Matchup {
    std::string team_a;  ///< the YES side
    std::string team_b;  ///< the NO side

    bool operator==(const Matchup&) const = default;
};

/// Single-game winner questions only: "<A> vs. <B>", "<A> vs <B>",
/// "Will <A> beat <B>?", "Will <A> win against <B>?". Spreads, totals,
/// props, MVP, quarter and half markets are rejected, as is anything the
/// templates do not parse into two distinct lexicon teams.
std::optional<Matchup> match_winner_question(std::string_view title, const TeamLexicon& lexicon);

}  // namespace pmdata::analytics
