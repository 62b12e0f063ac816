#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "matchcast/scoring.hpp"
#include "matchcast/simulate.hpp"
#include "test_support.hpp"

using namespace matchcast;
using namespace matchcast::testing;

namespace {

constexpr std::array<Outcome, 3> kOutcomes{Outcome::HomeWin, Outcome::Draw, Outcome::AwayWin};

ForecastOutcome fo(const char* home, const char* away, Prediction p, Outcome o, int season = 2001) {
    return {{season, 20, team(home), team(away)}, p, o};
}

}  // namespace

TEST(ScoringRules, GoldenValues) {
    const Prediction p{0.25, 0.35, 0.40};
    EXPECT_NEAR(brier(Outcome::AwayWin, p), 0.0625 + 0.1225 + 0.36, 1e-15);
    EXPECT_NEAR(brier(Outcome::HomeWin, p), 0.5625 + 0.1225 + 0.16, 1e-15);
    EXPECT_NEAR(log_score(Outcome::Draw, p), -std::log(0.35), 1e-15);
    EXPECT_NEAR(spherical(Outcome::AwayWin, p), -0.4 / std::sqrt(0.345), 1e-15);
    for (Outcome x : kOutcomes) {
        EXPECT_NEAR(brier(x, Prediction::uniform()), 2.0 / 3, 1e-15);
        EXPECT_NEAR(log_score(x, Prediction::uniform()), std::log(3.0), 1e-15);
        EXPECT_NEAR(spherical(x, Prediction::uniform()), -1 / std::sqrt(3.0), 1e-15);
    }
    const Prediction sure{1.0, 0.0, 0.0};
    EXPECT_EQ(brier(Outcome::HomeWin, sure), 0.0);
    EXPECT_EQ(brier(Outcome::AwayWin, sure), 2.0);
    EXPECT_EQ(log_score(Outcome::HomeWin, sure), 0.0);
    EXPECT_EQ(log_score(Outcome::Draw, sure), std::numeric_limits<double>::infinity());
    EXPECT_EQ(spherical(Outcome::HomeWin, sure), -1.0);
}

TEST(ScoringRules, RangesAndBrierIdentity) {
    std::mt19937_64 rng(51);
    std::gamma_distribution<double> g(0.7);
    for (int k = 0; k < 20000; ++k) {
        const double a = g(rng) + 1e-12, b = g(rng) + 1e-12, c = g(rng) + 1e-12, s = a + b + c;
        const Prediction p{a / s, b / s, c / s};
        const double sq = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        for (Outcome x : kOutcomes) {
            const double bs = brier(x, p);
            EXPECT_GE(bs, 0.0);
            EXPECT_LE(bs, 2.0);
            EXPECT_NEAR(bs, 1.0 - 2.0 * p[x] + sq, 1e-14);
            EXPECT_GE(log_score(x, p), 0.0);
            EXPECT_GE(spherical(x, p), -1.0);
            EXPECT_LE(spherical(x, p), 0.0);
        }
    }
}

TEST(ScoringRules, ExpectedScoreMinimizedByTruth) {
    std::mt19937_64 rng(52);
    std::gamma_distribution<double> g(1.0);
    const auto draw = [&] {
        const double a = g(rng), b = g(rng), c = g(rng), s = a + b + c;
        return Prediction{a / s, b / s, c / s};
    };
    const auto expected = [](auto rule, const Prediction& q, const Prediction& p) {
        double e = 0.0;
        for (Outcome x : kOutcomes) e += q[x] * rule(x, p);
        return e;
    };
    for (int k = 0; k < 2000; ++k) {
        const auto q = draw(), p = draw();
        EXPECT_LE(expected(brier, q, q), expected(brier, q, p));
        EXPECT_LE(expected(log_score, q, q), expected(log_score, q, p));
        EXPECT_LE(expected(spherical, q, q), expected(spherical, q, p) + 1e-15);
    }
}

TEST(TopChoice, ErrorsAndTies) {
    const std::vector<ForecastOutcome> right{fo("A", "B", {0.6, 0.3, 0.1}, Outcome::HomeWin)};
    EXPECT_EQ(proportion_of_errors(right).proportion, 0.0);
    const std::vector<ForecastOutcome> wrong{fo("A", "B", {0.6, 0.3, 0.1}, Outcome::Draw)};
    EXPECT_EQ(proportion_of_errors(wrong).proportion, 1.0);
    const std::vector<ForecastOutcome> mixed{
        fo("A", "B", {0.6, 0.3, 0.1}, Outcome::Draw), fo("C", "D", {0.2, 0.3, 0.5}, Outcome::AwayWin),
        fo("E", "F", {0.4, 0.4, 0.2}, Outcome::Draw), fo("G", "H", {0.4, 0.4, 0.2}, Outcome::AwayWin)};
    const auto r = proportion_of_errors(mixed);
    EXPECT_EQ(r.proportion, 0.5);
    EXPECT_EQ(r.tied, 2u);
    EXPECT_FALSE(top_choice(Outcome::HomeWin, Prediction::uniform()).error);
    EXPECT_TRUE(top_choice(Outcome::HomeWin, Prediction::uniform()).tied);
    EXPECT_THROW(proportion_of_errors(std::vector<ForecastOutcome>{}), Error);
}

TEST(Entropy, Examples) {
    EXPECT_NEAR(entropy(Prediction::uniform()), std::log(3.0), 1e-15);
    EXPECT_EQ(entropy({1.0, 0.0, 0.0}), 0.0);
    EXPECT_NEAR(entropy({0.5, 0.25, 0.25}), 1.5 * std::log(2.0), 1e-15);
}

TEST(CondHomeWin, Examples) {
    EXPECT_NEAR(*cond_home_win_given_no_draw({0.5, 0.3, 0.2}), 5.0 / 7, 1e-15);
    EXPECT_EQ(*cond_home_win_given_no_draw(Prediction::uniform()), 0.5);
    EXPECT_FALSE(cond_home_win_given_no_draw({0.0, 1.0, 0.0}));
}

TEST(Calibration, BinsForConstantPrediction) {
    std::vector<ProbabilityEvent> ev;
    for (int i = 0; i < 100; ++i) ev.push_back({0.7, i < 70 ? 1.0 : 0.0});
    const auto t = calibration_curve(std::span<const ProbabilityEvent>(ev));
    EXPECT_EQ(t.pairs, 100u);
    ASSERT_EQ(t.bins.size(), 10u);
    EXPECT_EQ(t.bins[7].count, 100u);
    EXPECT_NEAR(t.bins[7].mean_assigned, 0.7, 1e-13);
    EXPECT_NEAR(t.bins[7].observed, 0.7, 1e-15);
    EXPECT_NEAR(t.bins[7].se, std::sqrt(0.21 / 100), 1e-15);
    for (std::size_t b = 0; b < 10; ++b)
        EXPECT_EQ(t.bins[b].count, b == 7 ? 100u : 0u);
}

TEST(Calibration, OverconfidentForecastsFallBelowIdentity) {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ProbabilityEvent> over, good;
    for (int i = 0; i < 4000; ++i) {
        const double p = u(rng);
        const double truth = 0.5 + 0.5 * (p - 0.5);
        over.push_back({p, u(rng) < truth ? 1.0 : 0.0});
        good.push_back({p, u(rng) < p ? 1.0 : 0.0});
    }
    const auto t = calibration_curve(std::span<const ProbabilityEvent>(over));
    const auto at = [](const CalibrationTable& tab, double x) {
        for (const auto& c : tab.curve)
            if (std::abs(c.assigned - x) < 1e-12) return c;
        throw std::runtime_error("grid point missing");
    };
    const auto c = at(t, 0.9);
    EXPECT_LT(c.estimate, c.identity_lower);
    EXPECT_NEAR(c.estimate, 0.7, 0.05);
    EXPECT_LT(t.fraction_within_band(), 0.5);

    const auto tg = calibration_curve(std::span<const ProbabilityEvent>(good));
    EXPECT_EQ(tg.curve.size(), 49u);
    EXPECT_GE(tg.fraction_within_band(), 0.9);
}

TEST(Calibration, RequiresThirtyPairs) {
    std::vector<ProbabilityEvent> ev(29, {0.5, 1.0});
    EXPECT_THROW(calibration_curve(std::span<const ProbabilityEvent>(ev)), Error);
    ev.push_back({0.5, 0.0});
    EXPECT_NO_THROW(calibration_curve(std::span<const ProbabilityEvent>(ev)));
}

TEST(ChiSquare, UpperTailClosedForms) {
    for (double x : {0.1, 1.0, 3.5, 12.0}) {
        EXPECT_NEAR(chi_square_upper_tail(x, 2), std::exp(-x / 2), 1e-14);
        EXPECT_NEAR(chi_square_upper_tail(x, 1), std::erfc(std::sqrt(x / 2)), 1e-14);
    }
    EXPECT_EQ(chi_square_upper_tail(0.0, 5), 1.0);
}

TEST(ChiSquareGof, SmallCases) {
    const std::vector<ForecastOutcome> perfect{fo("A", "B", {0.5, 0.0, 0.5}, Outcome::HomeWin),
                                               fo("A", "B", {0.5, 0.0, 0.5}, Outcome::AwayWin)};
    auto r = chi_square_gof(perfect);
    EXPECT_EQ(r.statistic, 0.0);
    EXPECT_EQ(r.df, 2);
    EXPECT_EQ(r.p_value, 1.0);

    const std::vector<ForecastOutcome> one{fo("A", "B", {0.5, 0.5, 0.0}, Outcome::HomeWin)};
    r = chi_square_gof(one);
    EXPECT_NEAR(r.statistic, 0.5, 1e-15);
    EXPECT_EQ(r.df, 1);
    EXPECT_EQ(r.excluded_terms, 1u);
    EXPECT_NEAR(r.p_value, std::erfc(0.5), 1e-14);
}

TEST(ChiSquareGof, TwentyTeamsGiveFortyTerms) {
    Rng rng(54);
    const auto teams = synthetic_teams(20);
    const auto truth = linear_worths(20, 1.5, 0.9);
    std::vector<ForecastOutcome> scored;
    for (const auto& f : double_round_robin(2001, teams)) {
        const auto p = bt_outcome_probs(truth, f.home, f.away);
        scored.push_back({f, p, draw_outcome(p, rng)});
    }
    EXPECT_EQ(chi_square_gof(scored).df, 40);
}

TEST(ChiSquareGof, SimulatedMeanMatchesBernoulliExpectation) {
    // With o a sum of independent Bernoulli(p_k) and e = sum p_k,
    // E[(e - o)^2 / e] = sum p_k (1 - p_k) / e for each term.
    Rng rng(55);
    const auto teams = synthetic_teams(20);
    const auto truth = linear_worths(20, 1.5, 0.9);
    const auto fixtures = double_round_robin(2001, teams);
    std::map<std::pair<TeamId, int>, std::pair<double, double>> sums;  // (sum p, sum p(1-p))
    for (const auto& f : fixtures) {
        const auto p = bt_outcome_probs(truth, f.home, f.away);
        auto& h = sums[{f.home, 0}];
        h.first += p.home_win();
        h.second += p.home_win() * (1 - p.home_win());
        auto& a = sums[{f.away, 1}];
        a.first += p.away_win();
        a.second += p.away_win() * (1 - p.away_win());
    }
    double analytic = 0.0;
    for (const auto& [k, v] : sums) analytic += v.second / v.first;

    const int reps = 400;
    double mean = 0.0, m2 = 0.0;
    for (int r = 0; r < reps; ++r) {
        std::vector<ForecastOutcome> scored;
        for (const auto& f : fixtures) {
            const auto p = bt_outcome_probs(truth, f.home, f.away);
            scored.push_back({f, p, draw_outcome(p, rng)});
        }
        const double s = chi_square_gof(scored).statistic;
        const double d = s - mean;
        mean += d / (r + 1);
        m2 += d * (s - mean);
    }
    const double se = std::sqrt(m2 / (reps - 1) / reps);
    EXPECT_LE(std::abs(mean - analytic), 4 * se);
    EXPECT_LT(analytic, 40.0);
}
