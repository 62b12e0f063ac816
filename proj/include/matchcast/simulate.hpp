#pragma once

// Synthetic leagues for self-tests: round-robin schedules and seasons drawn
// from the Davidson or bivariate Poisson models.

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "matchcast/data.hpp"
#include "matchcast/davidson.hpp"
#include "matchcast/poisson.hpp"

namespace matchcast {

using Rng = std::mt19937_64;

/// Team names "T01", "T02", ...
inline std::vector<TeamId> synthetic_teams(int n) {
    std::vector<TeamId> out;
    for (int i = 1; i <= n; ++i) out.emplace_back((i < 10 ? "T0" : "T") + std::to_string(i));
    return out;
}

/// Double round robin by the circle method: 2(T-1) matchdays for even T; the
/// second half mirrors the first with venues swapped. Odd T gets a bye slot.
inline std::vector<Fixture> double_round_robin(int season, const std::vector<TeamId>& teams) {
    std::vector<int> slots;
    for (int i = 0; i < static_cast<int>(teams.size()); ++i) slots.push_back(i);
    if (slots.size() % 2 == 1) slots.push_back(-1);
    const int n = static_cast<int>(slots.size());
    const int rounds = n - 1;
    std::vector<Fixture> first;
    for (int r = 0; r < rounds; ++r) {
        for (int k = 0; k < n / 2; ++k) {
            const int a = slots[static_cast<std::size_t>(k)];
            const int b = slots[static_cast<std::size_t>(n - 1 - k)];
            if (a < 0 || b < 0) continue;
            // Alternate venues so each team's home games spread over the half.
            const bool swap = (k == 0) ? (r % 2 == 1) : (k % 2 == 1);
            const auto& home = teams[static_cast<std::size_t>(swap ? b : a)];
            const auto& away = teams[static_cast<std::size_t>(swap ? a : b)];
            first.push_back({season, r + 1, home, away});
        }
        // rotate all but the first slot
        const int last = slots.back();
        for (int k = n - 1; k > 1; --k) slots[static_cast<std::size_t>(k)] = slots[static_cast<std::size_t>(k - 1)];
        slots[1] = last;
    }
    std::vector<Fixture> out = first;
    for (const auto& f : first) out.push_back({season, f.matchday + rounds, f.away, f.home});
    return out;
}

inline Outcome draw_outcome(const Prediction& p, Rng& rng) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (u < p.home_win()) return Outcome::HomeWin;
    if (u < p.home_win() + p.draw()) return Outcome::Draw;
    return Outcome::AwayWin;
}

/// (Y1, Y2) = (X1 + Z, X2 + Z) with independent Poisson X1, X2, Z.
inline std::pair<int, int> sample_bivariate_poisson(const BivPoissonParams& p, Rng& rng) {
    const int x1 = std::poisson_distribution<int>(p.lambda1)(rng);
    const int x2 = std::poisson_distribution<int>(p.lambda2)(rng);
    const int z = p.lambda3 > 0.0 ? std::poisson_distribution<int>(p.lambda3)(rng) : 0;
    return {x1 + z, x2 + z};
}

/// Outcomes drawn from Davidson probabilities; scores are written as 1-0, 0-0 or 0-1.
inline std::vector<MatchRecord> simulate_davidson(const std::vector<Fixture>& fixtures, const BTParams& params, Rng& rng) {
    std::vector<MatchRecord> out;
    for (const auto& f : fixtures) {
        const Outcome o = draw_outcome(bt_outcome_probs(params, f.home, f.away), rng);
        const int hg = o == Outcome::HomeWin ? 1 : 0;
        const int ag = o == Outcome::AwayWin ? 1 : 0;
        out.push_back(make_match(f.season, f.matchday, f.home, f.away, hg, ag));
    }
    return out;
}

inline std::vector<MatchRecord> simulate_poisson(const std::vector<Fixture>& fixtures, const TeamStrengths& s, Rng& rng) {
    std::vector<MatchRecord> out;
    for (const auto& f : fixtures) {
        const auto [y1, y2] = sample_bivariate_poisson(link_rates(s, f.home, f.away), rng);
        out.push_back(make_match(f.season, f.matchday, f.home, f.away, y1, y2));
    }
    return out;
}

}  // namespace matchcast
