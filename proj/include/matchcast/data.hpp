#pragma once

// Match-result data model: team identifiers, fixtures and results, CSV
// ingestion, seasons, and venue-split win/draw/loss tallies.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace matchcast {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Trim, ASCII case-fold and collapse runs of internal whitespace.
inline std::string normalize_team_name(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char c : raw) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isspace(uc)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(uc)));
    }
    return out;
}

/// Team identifier. Equality and ordering use the normalized key; the first
/// spelling seen is kept for display.
class TeamId {
public:
    TeamId() = default;

    explicit TeamId(std::string_view raw) : key_(normalize_team_name(raw)) {
        if (key_.empty()) throw Error("empty team name");
        display_ = std::string(raw);
        const auto first = display_.find_first_not_of(" \t\r\n");
        const auto last = display_.find_last_not_of(" \t\r\n");
        display_ = display_.substr(first, last - first + 1);
    }

    const std::string& key() const noexcept { return key_; }
    const std::string& display() const noexcept { return display_; }

    friend bool operator==(const TeamId& a, const TeamId& b) noexcept { return a.key_ == b.key_; }
    friend std::strong_ordering operator<=>(const TeamId& a, const TeamId& b) noexcept {
        return a.key_ <=> b.key_;
    }

private:
    std::string key_;
    std::string display_;
};

enum class Outcome { HomeWin = 1, Draw = 2, AwayWin = 3 };

inline constexpr std::size_t index_of(Outcome o) noexcept { return static_cast<std::size_t>(o) - 1; }

/// The same result seen from the other team's side.
inline constexpr Outcome swap_perspective(Outcome o) noexcept {
    return o == Outcome::HomeWin ? Outcome::AwayWin : o == Outcome::AwayWin ? Outcome::HomeWin : o;
}

inline std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::HomeWin: return "H";
        case Outcome::Draw: return "D";
        case Outcome::AwayWin: return "A";
    }
    return "?";
}

/// A fixture without its result. Predictors only ever receive fixtures for
/// the matchday they forecast.
struct Fixture {
    int season = 0;
    int matchday = 0;
    TeamId home;
    TeamId away;

    friend bool operator==(const Fixture&, const Fixture&) = default;
};

struct MatchRecord {
    int season = 0;
    int matchday = 0;
    TeamId home;
    TeamId away;
    std::optional<int> home_goals;
    std::optional<int> away_goals;

    bool played() const noexcept { return home_goals.has_value(); }
    Fixture fixture() const { return {season, matchday, home, away}; }

    friend bool operator==(const MatchRecord&, const MatchRecord&) = default;
};

/// Builds a record and enforces its invariants.
inline MatchRecord make_match(int season, int matchday, TeamId home, TeamId away,
                              std::optional<int> home_goals = std::nullopt,
                              std::optional<int> away_goals = std::nullopt) {
    if (matchday < 1) throw Error("matchday must be >= 1");
    if (home == away) throw Error("home team equals away team: " + home.display());
    if (home_goals.has_value() != away_goals.has_value())
        throw Error("goals must be both present or both absent");
    if (home_goals && (*home_goals < 0 || *away_goals < 0)) throw Error("negative goals");
    return {season, matchday, std::move(home), std::move(away), home_goals, away_goals};
}

inline Outcome outcome_of(const MatchRecord& m) {
    if (!m.played()) throw Error("no result");
    if (*m.home_goals > *m.away_goals) return Outcome::HomeWin;
    if (*m.home_goals == *m.away_goals) return Outcome::Draw;
    return Outcome::AwayWin;
}

/// A point on the 2-simplex: (home win, draw, away win).
class Prediction {
public:
    static constexpr double kSimplexTol = 1e-9;

    Prediction() : p_{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0} {}

    Prediction(double home_win, double draw, double away_win) : p_{home_win, draw, away_win} {
        for (double v : p_) {
            if (!(v >= -kSimplexTol && v <= 1.0 + kSimplexTol))
                throw Error("prediction component outside [0,1]");
        }
        if (std::abs(p_[0] + p_[1] + p_[2] - 1.0) > kSimplexTol)
            throw Error("prediction does not sum to 1");
        for (double& v : p_) v = std::clamp(v, 0.0, 1.0);
    }

    static Prediction uniform() { return {}; }

    double operator[](std::size_t i) const { return p_.at(i); }
    double operator[](Outcome o) const { return p_[index_of(o)]; }
    double home_win() const noexcept { return p_[0]; }
    double draw() const noexcept { return p_[1]; }
    double away_win() const noexcept { return p_[2]; }
    const std::array<double, 3>& values() const noexcept { return p_; }

private:
    std::array<double, 3> p_;
};

/// Wins, draws and losses of one team in one venue role.
struct CountVector {
    int wins = 0;
    int draws = 0;
    int losses = 0;

    int total() const noexcept { return wins + draws + losses; }

    void add(Outcome from_team_perspective) {
        switch (from_team_perspective) {
            case Outcome::HomeWin: ++wins; break;
            case Outcome::Draw: ++draws; break;
            case Outcome::AwayWin: ++losses; break;
        }
    }

    CountVector& operator+=(const CountVector& o) {
        wins += o.wins;
        draws += o.draws;
        losses += o.losses;
        return *this;
    }
    friend CountVector operator+(CountVector a, const CountVector& b) { return a += b; }
    friend bool operator==(const CountVector&, const CountVector&) = default;
};

enum class Venue { Home, Away };

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kMatchCsvHeader = "season,matchday,home,away,home_goals,away_goals";

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// Splits one CSV line; double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) throw ParseError(line_no, "unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

inline int parse_int(std::string_view text, std::size_t line_no, std::string_view what) {
    const auto t = trim(text);
    if (t.empty()) throw ParseError(line_no, std::string(what) + " is empty");
    std::size_t pos = 0;
    int value = 0;
    try {
        value = std::stoi(std::string(t), &pos);
    } catch (const std::exception&) {
        throw ParseError(line_no, std::string(what) + " is not an integer: '" + std::string(t) + "'");
    }
    if (pos != t.size())
        throw ParseError(line_no, std::string(what) + " is not an integer: '" + std::string(t) + "'");
    return value;
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

/// Iterates over lines, stripping a UTF-8 BOM and trailing CR.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        fn(++line_no, line);
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
}

}  // namespace detail

/// A parsed row together with its 1-based source line.
struct SourcedMatch {
    MatchRecord match;
    std::size_t line = 0;
};

inline std::vector<SourcedMatch> parse_matches_with_lines(std::string_view csv_text) {
    std::vector<SourcedMatch> out;
    bool header_seen = false;
    detail::for_each_line(csv_text, [&](std::size_t line_no, std::string_view line) {
        if (detail::trim(line).empty()) return;
        if (!header_seen) {
            std::string h;
            for (const auto& f : detail::split_csv_line(line, line_no)) {
                if (!h.empty()) h.push_back(',');
                h += normalize_team_name(f);
            }
            if (h != kMatchCsvHeader)
                throw ParseError(line_no, "bad header, expected '" + std::string(kMatchCsvHeader) + "'");
            header_seen = true;
            return;
        }
        const auto f = detail::split_csv_line(line, line_no);
        if (f.size() != 6)
            throw ParseError(line_no, "expected 6 fields, got " + std::to_string(f.size()));
        const int season = detail::parse_int(f[0], line_no, "season");
        const int matchday = detail::parse_int(f[1], line_no, "matchday");
        const auto hg_text = detail::trim(f[4]);
        const auto ag_text = detail::trim(f[5]);
        std::optional<int> hg, ag;
        if (!hg_text.empty()) hg = detail::parse_int(hg_text, line_no, "home_goals");
        if (!ag_text.empty()) ag = detail::parse_int(ag_text, line_no, "away_goals");
        try {
            out.push_back({make_match(season, matchday, TeamId(f[2]), TeamId(f[3]), hg, ag), line_no});
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        }
    });
    if (!header_seen) throw ParseError(1, "missing header");
    return out;
}

inline std::vector<MatchRecord> parse_matches(std::string_view csv_text) {
    std::vector<MatchRecord> out;
    for (auto& s : parse_matches_with_lines(csv_text)) out.push_back(std::move(s.match));
    return out;
}

/// Canonical CSV: header, one row per match, blank goals for scheduled fixtures.
inline std::string serialize_matches(const std::vector<MatchRecord>& matches) {
    std::ostringstream os;
    os << kMatchCsvHeader << '\n';
    for (const auto& m : matches) {
        os << m.season << ',' << m.matchday << ',' << detail::csv_quote(m.home.display()) << ','
           << detail::csv_quote(m.away.display()) << ',';
        if (m.played()) os << *m.home_goals << ',' << *m.away_goals;
        else os << ',';
        os << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Seasons

struct SeasonOptions {
    /// Reject anything other than a complete 20-team double round robin.
    bool strict = false;
};

class Season {
public:
    /// Groups one season's records. Duplicate (season, matchday, home, away)
    /// keys and mixed seasons are rejected.
    static Season from_records(int year, std::vector<MatchRecord> records, SeasonOptions opts = {}) {
        Season s;
        s.year_ = year;
        std::set<std::tuple<int, std::string, std::string>> keys;
        for (const auto& m : records) {
            if (m.season != year)
                throw Error("record of season " + std::to_string(m.season) + " in season " +
                            std::to_string(year));
            if (!keys.emplace(m.matchday, m.home.key(), m.away.key()).second)
                throw Error("duplicate fixture: season " + std::to_string(year) + " matchday " +
                            std::to_string(m.matchday) + " " + m.home.display() + " v " +
                            m.away.display());
            s.teams_.insert(m.home);
            s.teams_.insert(m.away);
        }
        std::stable_sort(records.begin(), records.end(),
                         [](const MatchRecord& a, const MatchRecord& b) { return a.matchday < b.matchday; });
        s.matches_ = std::move(records);
        s.regular_ = s.is_double_round_robin();
        if (opts.strict && !(s.regular_ && s.teams_.size() == 20))
            throw Error("season " + std::to_string(year) + " is not a complete 20-team double round robin (" +
                        std::to_string(s.matches_.size()) + " matches)");
        return s;
    }

    int year() const noexcept { return year_; }
    const std::set<TeamId>& teams() const noexcept { return teams_; }
    const std::vector<MatchRecord>& matches() const noexcept { return matches_; }

    /// Highest scheduled matchday (0 for an empty season).
    int rounds() const noexcept { return matches_.empty() ? 0 : matches_.back().matchday; }

    /// Last matchday of the first half: ceil(rounds / 2).
    int first_half_end() const noexcept { return (rounds() + 1) / 2; }

    /// True for a complete double round robin: every ordered pair meets exactly
    /// once over 2(T-1) rounds. Anything else is flagged as irregular.
    bool regular() const noexcept { return regular_; }

    bool has_team(const TeamId& t) const { return teams_.count(t) > 0; }

    std::vector<MatchRecord> matchday(int md) const {
        std::vector<MatchRecord> out;
        for (const auto& m : matches_)
            if (m.matchday == md) out.push_back(m);
        return out;
    }

private:
    bool is_double_round_robin() const {
        const std::size_t t = teams_.size();
        if (t < 2 || matches_.size() != t * (t - 1)) return false;
        if (rounds() != static_cast<int>(2 * (t - 1))) return false;
        std::set<std::pair<std::string, std::string>> pairs;
        for (const auto& m : matches_) pairs.emplace(m.home.key(), m.away.key());
        return pairs.size() == matches_.size();
    }

    int year_ = 0;
    std::set<TeamId> teams_;
    std::vector<MatchRecord> matches_;
    bool regular_ = false;
};

/// Splits records into seasons ordered by year, preserving row order within each.
inline std::vector<Season> group_seasons(const std::vector<MatchRecord>& records, SeasonOptions opts = {}) {
    std::map<int, std::vector<MatchRecord>> by_year;
    for (const auto& m : records) by_year[m.season].push_back(m);
    std::vector<Season> out;
    for (auto& [year, recs] : by_year) out.push_back(Season::from_records(year, std::move(recs), opts));
    return out;
}

/// Tallies played matches with matchday <= through_matchday in which `team`
/// occupied `role`, from that team's perspective.
inline CountVector venue_counts(const Season& season, const TeamId& team, Venue role, int through_matchday) {
    if (!season.has_team(team)) throw Error("unknown team: " + team.display());
    CountVector c;
    for (const auto& m : season.matches()) {
        if (m.matchday > through_matchday) break;
        if (!m.played()) continue;
        if (role == Venue::Home && m.home == team) {
            c.add(outcome_of(m));
        } else if (role == Venue::Away && m.away == team) {
            c.add(swap_perspective(outcome_of(m)));
        }
    }
    return c;
}

/// Matchdays of the second half: those strictly after ceil(rounds / 2).
inline std::vector<int> second_half_matchdays(const Season& season) {
    std::vector<int> out;
    for (int md = season.first_half_end() + 1; md <= season.rounds(); ++md) out.push_back(md);
    return out;
}

// ---------------------------------------------------------------------------
// History

/// Played matches strictly before a cutoff (season, matchday): every played
/// match of earlier seasons plus the current season's matches on earlier
/// matchdays. This is the only data a predictor can see, so the outcome of the
/// matchday being forecast is unreachable by construction.
class History {
public:
    static History before(const std::vector<Season>& seasons, int season_year, int matchday) {
        History h;
        h.season_ = season_year;
        h.cutoff_ = matchday;
        bool found = false;
        for (const auto& s : seasons) {
            if (s.year() > season_year) continue;
            if (s.year() == season_year) {
                found = true;
                h.teams_ = s.teams();
                h.rounds_ = s.rounds();
            }
            for (const auto& m : s.matches()) {
                if (!m.played()) continue;
                if (s.year() == season_year && m.matchday >= matchday) continue;
                (s.year() == season_year ? h.current_ : h.earlier_).push_back(m);
            }
        }
        if (!found) throw Error("unknown season " + std::to_string(season_year));
        return h;
    }

    static History before(const Season& season, int matchday) {
        return before(std::vector<Season>{season}, season.year(), matchday);
    }

    int season() const noexcept { return season_; }
    int cutoff_matchday() const noexcept { return cutoff_; }
    /// Scheduled teams and rounds of the current season; no results involved.
    const std::set<TeamId>& teams() const noexcept { return teams_; }
    int season_rounds() const noexcept { return rounds_; }
    int first_half_end() const noexcept { return (rounds_ + 1) / 2; }

    /// Played matches of the current season, matchday < cutoff, ordered by matchday.
    const std::vector<MatchRecord>& current() const noexcept { return current_; }
    /// Played matches of earlier seasons, ordered by (season, matchday).
    const std::vector<MatchRecord>& earlier() const noexcept { return earlier_; }

    std::vector<MatchRecord> all() const {
        std::vector<MatchRecord> out = earlier_;
        out.insert(out.end(), current_.begin(), current_.end());
        return out;
    }

    /// Venue counts of the current season through `through_matchday`
    /// (clamped to the cutoff).
    CountVector counts(const TeamId& team, Venue role, int through_matchday) const {
        CountVector c;
        for (const auto& m : current_) {
            if (m.matchday > through_matchday) break;
            if (role == Venue::Home && m.home == team) {
                c.add(outcome_of(m));
            } else if (role == Venue::Away && m.away == team) {
                c.add(swap_perspective(outcome_of(m)));
            }
        }
        return c;
    }

private:
    History() = default;

    int season_ = 0;
    int cutoff_ = 0;
    int rounds_ = 0;
    std::set<TeamId> teams_;
    std::vector<MatchRecord> current_;
    std::vector<MatchRecord> earlier_;
};

}  // namespace matchcast
