#include <gtest/gtest.h>

#include <random>

#include "matchcast/data.hpp"
#include "test_support.hpp"

using namespace matchcast;
using namespace matchcast::testing;

namespace {

const std::string kHeader = "season,matchday,home,away,home_goals,away_goals\n";

}  // namespace

TEST(ParseMatches, PlayedRowMapsFields) {
    const auto ms = parse_matches(kHeader + "2014,20,Gremio,Atletico-PR,1,0\n");
    ASSERT_EQ(ms.size(), 1u);
    EXPECT_EQ(ms[0].season, 2014);
    EXPECT_EQ(ms[0].matchday, 20);
    EXPECT_EQ(ms[0].home.display(), "Gremio");
    EXPECT_EQ(ms[0].away.display(), "Atletico-PR");
    EXPECT_EQ(ms[0].home_goals, 1);
    EXPECT_EQ(ms[0].away_goals, 0);
}

TEST(ParseMatches, BlankGoalsMeanScheduled) {
    const auto ms = parse_matches(kHeader + "2014,21,Gremio,Santos,,\n");
    ASSERT_EQ(ms.size(), 1u);
    EXPECT_FALSE(ms[0].played());
    EXPECT_THROW(outcome_of(ms[0]), Error);
}

TEST(ParseMatches, RejectsSameTeamWithLineNumber) {
    try {
        parse_matches(kHeader + "2014,19,Santos,Vasco,0,0\n2014,20,Gremio,Gremio,1,0\n");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(ParseMatches, RejectsNegativeGoals) {
    EXPECT_THROW(parse_matches(kHeader + "2014,20,Gremio,Santos,-1,0\n"), ParseError);
}

TEST(ParseMatches, RejectsOneGoalMissing) {
    EXPECT_THROW(parse_matches(kHeader + "2014,20,Gremio,Santos,1,\n"), ParseError);
}

TEST(ParseMatches, RejectsMalformedRows) {
    EXPECT_THROW(parse_matches(kHeader + "2014,20,Gremio,Santos,1\n"), ParseError);
    EXPECT_THROW(parse_matches(kHeader + "2014,x,Gremio,Santos,1,0\n"), ParseError);
    EXPECT_THROW(parse_matches(kHeader + "2014,0,Gremio,Santos,1,0\n"), ParseError);
    EXPECT_THROW(parse_matches("season,round,home,away,hg,ag\n"), ParseError);
    EXPECT_THROW(parse_matches(""), ParseError);
}

TEST(ParseMatches, AcceptsQuotesCrlfAndBom) {
    const auto ms = parse_matches("\xEF\xBB\xBF" + kHeader + "2014,1,\"Sao Paulo, SP\",Santos,2,2\r\n");
    ASSERT_EQ(ms.size(), 1u);
    EXPECT_EQ(ms[0].home.display(), "Sao Paulo, SP");
    EXPECT_EQ(outcome_of(ms[0]), Outcome::Draw);
}

TEST(TeamId, NormalizesCaseAndWhitespace) {
    EXPECT_EQ(TeamId("  Atletico   MG "), TeamId("atletico mg"));
    EXPECT_NE(TeamId("Atletico MG"), TeamId("Atletico PR"));
    EXPECT_EQ(TeamId("  Atletico   MG ").display(), "Atletico   MG");
    EXPECT_THROW(TeamId("   "), Error);
}

TEST(OutcomeOf, ComparesGoals) {
    EXPECT_EQ(outcome_of(played(2014, 1, "A", "B", 2, 1)), Outcome::HomeWin);
    EXPECT_EQ(outcome_of(played(2014, 1, "A", "B", 0, 0)), Outcome::Draw);
    EXPECT_EQ(outcome_of(played(2014, 1, "A", "B", 0, 3)), Outcome::AwayWin);
}

TEST(Prediction, EnforcesSimplex) {
    EXPECT_NO_THROW(Prediction(0.2, 0.3, 0.5));
    EXPECT_THROW(Prediction(0.2, 0.3, 0.6), Error);
    EXPECT_THROW(Prediction(-0.1, 0.6, 0.5), Error);
    EXPECT_DOUBLE_EQ(Prediction::uniform().draw(), 1.0 / 3.0);
}

TEST(VenueCounts, HandEnumeratedHomeRecord) {
    // H at home on matchdays 1-3: win, win, draw. One away match on matchday 4.
    const auto s = Season::from_records(2020, {played(2020, 1, "H", "A", 2, 0), played(2020, 2, "H", "B", 1, 0),
                                               played(2020, 3, "H", "C", 1, 1), played(2020, 4, "A", "H", 3, 0)});
    EXPECT_EQ(venue_counts(s, team("H"), Venue::Home, 3), (CountVector{2, 1, 0}));
    EXPECT_EQ(venue_counts(s, team("H"), Venue::Home, 0), (CountVector{0, 0, 0}));
    EXPECT_EQ(venue_counts(s, team("H"), Venue::Away, 4), (CountVector{0, 0, 1}));
    EXPECT_EQ(venue_counts(s, team("A"), Venue::Away, 4), (CountVector{0, 0, 1}));
    EXPECT_EQ(venue_counts(s, team("A"), Venue::Home, 4), (CountVector{1, 0, 0}));
}

TEST(VenueCounts, AwayOnlyTeamHasEmptyHomeRecord) {
    const auto s = Season::from_records(2020, {played(2020, 1, "H", "V", 0, 1), played(2020, 2, "G", "V", 2, 2)});
    EXPECT_EQ(venue_counts(s, team("V"), Venue::Home, 2), (CountVector{0, 0, 0}));
    EXPECT_EQ(venue_counts(s, team("V"), Venue::Away, 2), (CountVector{1, 1, 0}));
}

TEST(VenueCounts, UnknownTeamAndScheduledMatches) {
    const auto s = Season::from_records(2020, {played(2020, 1, "H", "V", 0, 1), scheduled(2020, 2, "V", "H")});
    EXPECT_THROW(venue_counts(s, team("Nobody"), Venue::Home, 2), Error);
    EXPECT_EQ(venue_counts(s, team("V"), Venue::Home, 2).total(), 0);
}

TEST(SecondHalf, StandardAndSmallAndEmpty) {
    Rng rng(1);
    const auto full = simulated_season(2001, 20, rng);
    EXPECT_EQ(full.matches().size(), 380u);
    EXPECT_TRUE(full.regular());
    const auto md = second_half_matchdays(full);
    ASSERT_EQ(md.size(), 19u);
    EXPECT_EQ(md.front(), 20);
    EXPECT_EQ(md.back(), 38);

    const auto small = simulated_season(2002, 4, rng);
    EXPECT_EQ(second_half_matchdays(small), (std::vector<int>{4, 5, 6}));

    const auto empty = Season::from_records(2003, {});
    EXPECT_TRUE(second_half_matchdays(empty).empty());
}

TEST(Season, IrregularSeasonIsFlaggedNotRejected) {
    const auto s = Season::from_records(2020, {played(2020, 1, "A", "B", 1, 0), played(2020, 2, "B", "C", 1, 0)});
    EXPECT_FALSE(s.regular());
    EXPECT_THROW(Season::from_records(2020, {played(2020, 1, "A", "B", 1, 0)}, SeasonOptions{true}), Error);
}

TEST(Season, RejectsDuplicatesAndForeignSeasons) {
    EXPECT_THROW(Season::from_records(2020, {played(2020, 1, "A", "B", 1, 0), played(2020, 1, "a ", "B", 2, 0)}),
                 Error);
    EXPECT_THROW(Season::from_records(2020, {played(2019, 1, "A", "B", 1, 0)}), Error);
}

TEST(SeasonProperty, HomeTalliesCountPlayedMatches) {
    Rng rng(7);
    for (int rep = 0; rep < 5; ++rep) {
        const auto s = simulated_season(2000 + rep, 6 + 2 * rep, rng);
        for (int m = 0; m <= s.rounds(); ++m) {
            int tallies = 0;
            for (const auto& t : s.teams()) tallies += venue_counts(s, t, Venue::Home, m).total();
            int played_through = 0;
            for (const auto& r : s.matches()) played_through += (r.played() && r.matchday <= m) ? 1 : 0;
            EXPECT_EQ(tallies, played_through);
        }
    }
}

TEST(SeasonProperty, VenueCountsAreMonotone) {
    Rng rng(8);
    const auto s = simulated_season(2000, 8, rng);
    for (const auto& t : s.teams()) {
        for (Venue v : {Venue::Home, Venue::Away}) {
            CountVector prev;
            for (int m = 0; m <= s.rounds(); ++m) {
                const auto c = venue_counts(s, t, v, m);
                EXPECT_GE(c.wins, prev.wins);
                EXPECT_GE(c.draws, prev.draws);
                EXPECT_GE(c.losses, prev.losses);
                prev = c;
            }
        }
    }
}

TEST(SeasonProperty, OutcomesPartitionPlayedMatches) {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> goals(0, 6);
    int counts[3] = {0, 0, 0};
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        const int hg = goals(rng), ag = goals(rng);
        const Outcome o = outcome_of(played(2020, 1, "A", "B", hg, ag));
        ++counts[index_of(o)];
        EXPECT_EQ(o == Outcome::HomeWin, hg > ag);
        EXPECT_EQ(o == Outcome::Draw, hg == ag);
        EXPECT_EQ(o == Outcome::AwayWin, hg < ag);
    }
    EXPECT_EQ(counts[0] + counts[1] + counts[2], n);
}

TEST(SeasonProperty, ParseSerializeRoundTrip) {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> goals(0, 5), coin(0, 3), md(1, 38), team_idx(0, 5);
    const std::vector<std::string> names{"Gremio", "Sao Paulo", "Atletico-PR", "Vasco da Gama", "Santos, SP",
                                         "Quote \"Q\""};
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<MatchRecord> ms;
        for (int i = 0; i < 30; ++i) {
            const int h = team_idx(rng);
            int a = team_idx(rng);
            if (a == h) a = (a + 1) % 6;
            if (coin(rng) == 0)
                ms.push_back(scheduled(2010 + rep, md(rng), names[h], names[a]));
            else
                ms.push_back(played(2010 + rep, md(rng), names[h], names[a], goals(rng), goals(rng)));
        }
        const auto text = serialize_matches(ms);
        const auto back = parse_matches(text);
        EXPECT_EQ(back, ms);
        EXPECT_EQ(serialize_matches(back), text);
    }
}

TEST(History, SeesOnlyEarlierMatchdays) {
    Rng rng(5);
    const auto s1 = simulated_season(2001, 6, rng);
    const auto s2 = simulated_season(2002, 6, rng);
    const std::vector<Season> seasons{s1, s2};
    const auto h = History::before(seasons, 2002, 4);
    EXPECT_EQ(h.earlier().size(), s1.matches().size());
    for (const auto& m : h.current()) EXPECT_LT(m.matchday, 4);
    EXPECT_EQ(h.current().size(), 9u);
    EXPECT_EQ(h.teams().size(), 6u);
    EXPECT_EQ(h.first_half_end(), 5);
    EXPECT_THROW(History::before(seasons, 1999, 1), Error);
    // Later seasons never leak into an earlier cutoff.
    EXPECT_TRUE(History::before(seasons, 2001, 1).earlier().empty());
}
