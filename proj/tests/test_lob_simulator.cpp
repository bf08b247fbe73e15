#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "loblab/lob_simulator.hpp"

using namespace loblab;

namespace {

const DerivedConstants kDc = derive_constants(ModelParams{});

SimConfig config(long n, double horizon, std::uint64_t seed, std::uint64_t path = 0) {
    SimConfig c;
    c.n = n;
    c.horizon = horizon;
    c.seed = seed;
    c.path_index = path;
    return c;
}

// Summed rate per (tick, delta) over the active clocks.
std::map<std::pair<int, int>, double> rates_by_target(const ClockSet& cs) {
    std::map<std::pair<int, int>, double> m;
    for (int i = 0; i < cs.size; ++i) {
        const Clock& c = cs.clocks[static_cast<std::size_t>(i)];
        m[{c.tick, c.delta}] += c.rate;
    }
    return m;
}

}  // namespace

TEST_CASE("initial state rounds scaled values") {
    SimConfig c = config(100, 1.0, 1);
    const LOBState s = initial_state(c, kDc);
    CHECK(s.at(kV) == 7);  // 7.5 rounds toward zero
    CHECK(s.at(kY) == -7);
    CHECK(s.at(kW) == 0);
    CHECK(s.at(kX) == 0);
    c.initial_scaled_state = std::array<double, 6>{0.0, -0.1, 0.0, 0.0, -0.75, 0.0};
    CHECK_THROWS_AS(initial_state(c, kDc), std::invalid_argument);
    c.initial_scaled_state = std::array<double, 6>{0.0, 0.75, -0.5, 0.5, -0.75, 0.0};
    CHECK_THROWS_AS(initial_state(c, kDc), std::invalid_argument);
    c = config(0, 1.0, 1);
    CHECK_THROWS_AS(initial_state(c, kDc), std::invalid_argument);
}

TEST_CASE("NE panel clocks") {
    SimConfig c = config(100, 1.0, 1);
    c.initial_scaled_state = std::array<double, 6>{0.0, 0.75, 0.5, 0.5, -0.75, 0.0};
    const LOBState s = initial_state(c, kDc);
    REQUIRE(region_of(static_cast<double>(s.at(kW)), static_cast<double>(s.at(kX))) == Region::NE);
    const ClockSet cs = active_clocks(s, kDc, c.n, Dynamics::book);
    double interior = 0.0, total = 0.0;
    for (int i = 0; i < cs.size; ++i) {
        const Clock& k = cs.clocks[static_cast<std::size_t>(i)];
        CHECK(k.rate > 0.0);
        total += k.rate;
        if (k.tick == kW || k.tick == kX) interior += k.rate;
    }
    CHECK(std::fabs(total - cs.total) < 1e-12);
    CHECK(std::fabs(interior - (kDc.lambda1 + kDc.lambda2 + kDc.mu0)) < 1e-12);
}

TEST_CASE("O point clocks") {
    SimConfig c = config(100, 1.0, 1);
    const LOBState s = initial_state(c, kDc);  // W = X = 0
    const auto m = rates_by_target(active_clocks(s, kDc, c.n, Dynamics::book));
    CHECK(m.at({kW, +1}) == doctest::Approx(kDc.lambda2));
    CHECK(m.at({kW, -1}) == doctest::Approx(kDc.mu1));
    CHECK(m.at({kX, +1}) == doctest::Approx(kDc.lambda1));
    CHECK(m.at({kX, -1}) == doctest::Approx(kDc.mu2));
    CHECK(m.at({kV, -1}) == doctest::Approx(kDc.mu0));  // market sells at the bid
    CHECK(m.at({kY, +1}) == doctest::Approx(kDc.lambda0));
    // Cancellation: buy orders at bid - 2 and below, per order theta_b / sqrt(n).
    CHECK(m.count({kV, +1}) == 0);
}

TEST_CASE("cancellation rate vanishes with n") {
    for (long n : {100L, 10000L, 1000000L}) {
        SimConfig c = config(n, 1.0, 1);
        c.initial_scaled_state = std::array<double, 6>{0.5, 0.75, 0.5, 0.5, -0.75, 0.0};
        const LOBState s = initial_state(c, kDc);
        const ClockSet cs = active_clocks(s, kDc, n, Dynamics::book);
        double cancel = 0.0;
        for (int i = 0; i < cs.size; ++i)
            if (cs.clocks[static_cast<std::size_t>(i)].kind == EventKind::cancel_buy)
                cancel += cs.clocks[static_cast<std::size_t>(i)].rate;
        // U and V sit at bid - 2 and below with bid at X: rate theta_b (U + V) / sqrt n.
        const double want = (static_cast<double>(s.at(kU) + s.at(kV))) / std::sqrt(static_cast<double>(n));
        CHECK(cancel == doctest::Approx(want));
        CHECK(cancel / std::sqrt(static_cast<double>(n)) < 1.3 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("events keep the sign discipline") {
    SimConfig c = config(400, 1.0, 3);
    LOBState s = initial_state(c, kDc);
    Rng rng = Rng(c.seed).split(0);
    for (int k = 0; k < 20000; ++k) {
        LOBState before = s;
        const EventInfo e = step_event(s, kDc, c.n, rng, Dynamics::frozen_window);
        REQUIRE(e.holding_time > 0.0);
        REQUIRE(std::abs(e.delta) == 1);
        int changed = 0;
        for (int i = 0; i < kTicks; ++i) changed += s.at(i) != before.at(i) ? 1 : 0;
        REQUIRE(changed == 1);
        REQUIRE(s.at(e.tick) - before.at(e.tick) == e.delta);
        double occ = 0.0;
        for (double v : s.occupation) occ += v;
        REQUIRE(std::fabs(occ - s.clock) <= 1e-9 * std::max(1.0, s.clock));
    }
}

TEST_CASE("renewal record") {
    const RenewalRecord a = run_until_renewal(config(100, 1e4, 42), kDc);
    const RenewalRecord b = run_until_renewal(config(100, 1e4, 42), kDc);
    CHECK(a.direction == b.direction);
    CHECK(a.s_hat == b.s_hat);
    CHECK(a.state_at_renewal == b.state_at_renewal);
    CHECK(a.events == b.events);
    CHECK(a.s_hat > 0.0);
    if (a.direction == Direction::down) {
        CHECK(a.state_at_renewal[1] == 0.0);
        CHECK(a.relabelled_state[1] == a.state_at_renewal[0]);
    } else {
        CHECK(a.state_at_renewal[4] == 0.0);
        CHECK(a.relabelled_state[4] == a.state_at_renewal[5]);
    }
    CHECK_THROWS_AS(run_until_renewal(config(10000, 1e-6, 1), kDc), HorizonExceeded);
}

TEST_CASE("symmetric parameters give balanced directions") {
    int down = 0;
    const int runs = 2000;
    for (int i = 0; i < runs; ++i)
        down += run_until_renewal(config(100, 1e4, 5, static_cast<std::uint64_t>(i)), kDc).direction == Direction::down;
    const double p = static_cast<double>(down) / runs;
    CHECK(std::fabs(p - 0.5) < 3.0 * std::sqrt(0.25 / runs) + 1e-12);
}

TEST_CASE("scaled path bookkeeping") {
    SimConfig c = config(1000, 1.0, 9);
    c.grid_step = 0.01;
    const ScaledPathBundle b = run_scaled_path(c, kDc);
    REQUIRE(b.rows.size() == 101);
    const double root_n = std::sqrt(1000.0);
    const ModelParams p{};
    std::array<double, kRegionCount> prev{};
    for (std::size_t k = 0; k < b.rows.size(); ++k) {
        const ScaledRow& r = b.rows[k];
        const GH gh = gh_transform(p, r.values[2], r.values[3]);
        REQUIRE(gh.g == r.values[6]);
        REQUIRE(gh.h == r.values[7]);
        double occ = 0.0;
        for (int i = 0; i < kRegionCount; ++i) {
            const double v = r.occupation[static_cast<std::size_t>(i)];
            REQUIRE(v >= prev[static_cast<std::size_t>(i)]);
            if (k > 0) REQUIRE(v - prev[static_cast<std::size_t>(i)] <= r.t - b.rows[k - 1].t + 1e-12);
            prev[static_cast<std::size_t>(i)] = v;
            occ += v;
        }
        REQUIRE(std::fabs(occ - r.t) <= b.max_event_gap + 1e-12);
        // H moves on the 1/sqrt(n) lattice.
        const double steps = r.values[7] * root_n;
        REQUIRE(std::fabs(steps - std::round(steps)) < 1e-9);
    }
    for (double v : b.rows.front().occupation) CHECK(v == 0.0);
    const OccupationFractions f = occupation_fractions(b);
    double sum = 0.0;
    for (double v : f.region) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.one_tick + f.two_tick <= 1.0 + 1e-12);
}

TEST_CASE("scaled path reproducibility") {
    SimConfig c = config(500, 0.5, 77, 3);
    const ScaledPathBundle a = run_scaled_path(c, kDc);
    const ScaledPathBundle b = run_scaled_path(c, kDc);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        REQUIRE(a.rows[k].values == b.rows[k].values);
        REQUIRE(a.rows[k].occupation == b.rows[k].occupation);
    }
    c.path_index = 4;
    const ScaledPathBundle d = run_scaled_path(c, kDc);
    CHECK(d.rows.back().values != a.rows.back().values);
}

TEST_CASE("martingale drift statistic") {
    std::vector<ScaledPathBundle> one{run_scaled_path(config(100, 1.0, 1), kDc)};
    CHECK_THROWS_AS(martingale_drift_stat(one), std::invalid_argument);
    one.push_back(one.front());
    CHECK_THROWS_AS(martingale_drift_stat(one), std::invalid_argument);
    std::vector<ScaledPathBundle> zero;
    for (std::uint64_t i = 0; i < 2; ++i) {
        SimConfig c = config(1, 0.0, 1, i);
        c.grid_step = 1.0;
        zero.push_back(run_scaled_path(c, kDc));
    }
    CHECK(martingale_drift_stat(zero).mean == 0.0);
    std::vector<ScaledPathBundle> many;
    for (std::uint64_t i = 0; i < 200; ++i) many.push_back(run_scaled_path(config(100, 1.0, 2, i), kDc));
    const MeanSe m = martingale_drift_stat(many);
    CHECK(m.count == 200);
    CHECK(std::fabs(m.mean) <= 3.0 * m.se);
}
