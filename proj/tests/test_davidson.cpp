#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "matchcast/davidson.hpp"
#include "test_support.hpp"

using namespace matchcast;
using namespace matchcast::testing;

namespace {

BTParams two_teams(double pi, double pj, double gamma, double nu) {
    BTParams p;
    p.worth[team("I")] = pi;
    p.worth[team("J")] = pj;
    p.gamma = gamma;
    p.nu = nu;
    return p;
}

}  // namespace

TEST(BtOutcomeProbs, ClosedFormCases) {
    auto p = bt_outcome_probs(two_teams(0.5, 0.5, 1.0, 1.0), team("I"), team("J"));
    EXPECT_NEAR(p.home_win(), 1.0 / 3, 1e-15);
    EXPECT_NEAR(p.draw(), 1.0 / 3, 1e-15);
    p = bt_outcome_probs(two_teams(0.5, 0.5, 2.0, 1.0), team("I"), team("J"));
    EXPECT_NEAR(p.home_win(), 0.5, 1e-15);
    EXPECT_NEAR(p.draw(), 0.25, 1e-15);
    EXPECT_NEAR(p.away_win(), 0.25, 1e-15);
    p = bt_outcome_probs(two_teams(0.6, 0.4, 1.0, 0.0), team("I"), team("J"));
    EXPECT_NEAR(p.home_win(), 0.6, 1e-15);
    EXPECT_EQ(p.draw(), 0.0);
    EXPECT_NEAR(p.away_win(), 0.4, 1e-15);
    EXPECT_THROW(bt_outcome_probs(two_teams(0.5, 0.5, 1, 1), team("I"), team("K")), Error);
}

TEST(BtOutcomeProbs, SimplexScaleInvarianceAndSwap) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.01, 5.0), sc(1e-3, 1e3);
    for (int k = 0; k < 5000; ++k) {
        const double pi = u(rng), pj = u(rng), g = u(rng), nu = u(rng), c = sc(rng);
        const auto p = bt_outcome_probs(two_teams(pi, pj, g, nu), team("I"), team("J"));
        EXPECT_NEAR(p.home_win() + p.draw() + p.away_win(), 1.0, 1e-12);
        const auto q = bt_outcome_probs(two_teams(c * pi, c * pj, g, nu), team("I"), team("J"));
        for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p[i], q[i], 1e-12);
        // Roles exchanged: the formula with i and j swapped.
        const auto r = bt_outcome_probs(two_teams(pi, pj, g, nu), team("J"), team("I"));
        const double d = g * pj + pi + nu * std::sqrt(pi * pj);
        EXPECT_NEAR(r.home_win(), g * pj / d, 1e-12);
        EXPECT_NEAR(r.draw(), nu * std::sqrt(pi * pj) / d, 1e-12);
        const auto s = bt_outcome_probs(two_teams(pi, pj, 1.0, nu), team("J"), team("I"));
        const auto t = bt_outcome_probs(two_teams(pi, pj, 1.0, nu), team("I"), team("J"));
        EXPECT_NEAR(s.home_win(), t.away_win(), 1e-12);
        EXPECT_NEAR(s.draw(), t.draw(), 1e-12);
    }
}

TEST(BtLogLikelihood, SmallCases) {
    const auto params = two_teams(0.5, 0.5, 2.0, 1.0);
    const std::vector<MatchRecord> one{played(2001, 1, "I", "J", 1, 0)};
    EXPECT_NEAR(bt_log_likelihood(params, one), std::log(0.5), 1e-15);
    EXPECT_EQ(bt_log_likelihood(params, std::vector<MatchRecord>{}), 0.0);
    const std::vector<MatchRecord> two{played(2001, 1, "I", "J", 1, 0), played(2001, 2, "J", "I", 1, 1)};
    const double second = std::log(bt_outcome_probs(params, team("J"), team("I")).draw());
    EXPECT_NEAR(bt_log_likelihood(params, two), std::log(0.5) + second, 1e-14);
    const std::vector<MatchRecord> draw{played(2001, 1, "I", "J", 0, 0)};
    EXPECT_EQ(bt_log_likelihood(two_teams(0.5, 0.5, 1.0, 0.0), draw), -std::numeric_limits<double>::infinity());
}

TEST(DavidsonLikelihood, MatchesDirectLikelihoodAndFiniteDifferences) {
    Rng rng(31);
    const auto s = simulated_season(2001, 8, rng);
    const DavidsonLikelihood lik(s.matches());
    std::uniform_real_distribution<double> coord(-1.5, 1.5);
    for (int k = 0; k < 100; ++k) {
        std::vector<double> x(lik.dimension());
        for (double& v : x) v = coord(rng);
        std::vector<double> g;
        const double f = lik.value(x, &g);
        EXPECT_NEAR(f, bt_log_likelihood(lik.unpack(x), s.matches()), 1e-9 * std::abs(f));
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double h = 1e-5;
            auto xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            const double fd = (lik.value(xp) - lik.value(xm)) / (2 * h);
            EXPECT_LE(std::abs(g[i] - fd), 1e-5 * std::max({std::abs(g[i]), std::abs(fd), 1.0}));
        }
    }
}

TEST(BtFit, ImprovesOnStartAndConverges) {
    Rng rng(32);
    const auto s = simulated_season(2001, 10, rng);
    const auto fit = bt_fit(s.matches());
    EXPECT_TRUE(fit.converged);
    EXPECT_LE(fit.gradient_norm, OptimizerSettings{}.tol);
    BTParams start;
    for (const auto& t : s.teams()) start.worth[t] = 1.0 / s.teams().size();
    EXPECT_GE(fit.log_likelihood, bt_log_likelihood(start, s.matches()));
    EXPECT_NEAR(fit.log_likelihood, bt_log_likelihood(fit.params, s.matches()), 1e-9);
    EXPECT_NO_THROW(fit.params.validate());
    EXPECT_FALSE(fit.boundary.any());

    const auto again = bt_fit(s.matches());
    EXPECT_EQ(again.params.gamma, fit.params.gamma);
    EXPECT_EQ(again.params.worth, fit.params.worth);
}

TEST(BtFit, MirroredResultsGiveEqualWorths) {
    // Every pairing meets twice; each team wins its home leg.
    const auto teams = synthetic_teams(6);
    std::vector<MatchRecord> ms;
    for (const auto& f : double_round_robin(2001, teams)) ms.push_back(make_match(f.season, f.matchday, f.home, f.away, 1, 0));
    ms.push_back(make_match(2001, 11, teams[0], teams[1], 0, 0));
    ms.push_back(make_match(2001, 11, teams[1], teams[0], 0, 0));
    const auto fit = bt_fit(ms);
    for (const auto& [t, w] : fit.params.worth) EXPECT_NEAR(w, 1.0 / 6, 1e-6);
}

TEST(BtFit, NoDrawsFlagsNu) {
    Rng rng(33);
    const auto teams = synthetic_teams(6);
    const auto data = simulate_davidson(double_round_robin(2001, teams), linear_worths(6, 1.3, 0.0), rng);
    const auto fit = bt_fit(data);
    EXPECT_TRUE(fit.boundary.nu);
    EXPECT_LT(fit.params.nu, 1e-3);
}

TEST(BtFit, UnbeatenTeamFlagsWorth) {
    std::vector<MatchRecord> ms{played(2001, 1, "A", "B", 1, 0), played(2001, 2, "B", "A", 0, 2),
                                played(2001, 1, "C", "D", 1, 1), played(2001, 2, "D", "C", 2, 1),
                                played(2001, 3, "A", "C", 3, 0), played(2001, 3, "B", "D", 0, 0)};
    const auto fit = bt_fit(ms);
    EXPECT_TRUE(fit.boundary.worth);
    ASSERT_EQ(fit.boundary.divergent_teams.size(), 1u);
    EXPECT_EQ(fit.boundary.divergent_teams[0], team("A"));
}

TEST(BtFit, RejectsEmptyOrUnplayed) {
    EXPECT_THROW(bt_fit(std::vector<MatchRecord>{}), Error);
    EXPECT_THROW(bt_fit(std::vector<MatchRecord>{scheduled(2001, 1, "A", "B")}), Error);
}

TEST(BtRolling, EqualsDirectFitComposition) {
    Rng rng(34);
    const auto s = simulated_season(2001, 20, rng);
    const auto rolled = bt_rolling_predict(s, 20);
    std::vector<MatchRecord> before;
    for (const auto& m : s.matches())
        if (m.matchday < 20) before.push_back(m);
    const auto fit = bt_fit(before);
    ASSERT_EQ(rolled.size(), 10u);
    for (const auto& fp : rolled) {
        ASSERT_TRUE(fp.prediction);
        EXPECT_EQ(fp.fixture.matchday, 20);
        const auto direct = bt_outcome_probs(fit.params, fp.fixture.home, fp.fixture.away);
        for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ((*fp.prediction)[i], direct[i]);
    }
}

TEST(BtRolling, DrawOnlyHistoryPredictsDraws) {
    const auto teams = synthetic_teams(6);
    std::vector<MatchRecord> ms;
    for (const auto& f : double_round_robin(2001, teams))
        ms.push_back(f.matchday <= 5 ? make_match(f.season, f.matchday, f.home, f.away, 1, 1)
                                     : make_match(f.season, f.matchday, f.home, f.away));
    const auto s = Season::from_records(2001, ms);
    FitReport rep;
    const auto h = History::before(s, 6);
    std::vector<Fixture> fx;
    for (const auto& m : s.matchday(6)) fx.push_back(m.fixture());
    const auto preds = bt_predict(h, fx, {}, &rep);
    EXPECT_TRUE(rep.boundary.nu);
    ASSERT_EQ(preds.size(), 3u);
    for (const auto& p : preds) {
        ASSERT_TRUE(p);
        EXPECT_GT(p->draw(), 0.999);
    }
}

TEST(BtRolling, SecondLegDiffersFromFirstLeg) {
    // A beats B at home on matchday 1; the return fixture on matchday 4 is
    // forecast after more results arrive.
    const std::vector<MatchRecord> ms{played(2001, 1, "A", "B", 2, 0), played(2001, 1, "C", "D", 1, 1),
                                      played(2001, 2, "A", "C", 0, 0), played(2001, 2, "B", "D", 1, 0),
                                      played(2001, 3, "D", "A", 0, 1), played(2001, 3, "C", "B", 1, 2),
                                      scheduled(2001, 4, "B", "A"),    scheduled(2001, 4, "D", "C")};
    const auto s = Season::from_records(2001, ms);
    const auto p = bt_rolling_predict(s, 4);
    const auto fit = bt_fit(std::vector<MatchRecord>(ms.begin(), ms.begin() + 6));
    const auto first_leg = bt_outcome_probs(fit.params, team("A"), team("B"));
    ASSERT_TRUE(p[0].prediction);
    EXPECT_GT(std::abs(p[0].prediction->home_win() - first_leg.away_win()), 1e-3);
}

TEST(BtParamsCsv, Format) {
    const auto csv = bt_params_csv(two_teams(0.25, 0.75, 1.5, 0.5));
    EXPECT_EQ(csv, "team,worth\nI,0.25\nJ,0.75\ngamma,nu\n1.5,0.5\n");
}
