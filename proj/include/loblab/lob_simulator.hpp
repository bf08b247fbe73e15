#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "loblab/model_params.hpp"
#include "loblab/rng.hpp"
#include "loblab/stats.hpp"

namespace loblab {

// Window layout: two guard ticks, U V W X Y Z, two guard ticks.
inline constexpr int kTicks = 10;
inline constexpr int kU = 2, kV = 3, kW = 4, kX = 5, kY = 6, kZ = 7;

// How the best quotes are located when choosing active clocks.
//  book:          bid/ask are the actual extreme occupied ticks (the true book).
//  frozen_window: bid/ask are read off the interior pair (W, X) only, so the
//                 bracketing queues V and Y keep their roles even after one of
//                 them empties. This is the renewal-free auxiliary system.
enum class Dynamics { book, frozen_window };

struct SimConfig {
    long n = 10000;
    double horizon = 1.0;
    std::uint64_t seed = 1;
    std::uint64_t path_index = 0;
    // (U, V, W, X, Y, Z) scaled; defaults to (0, kappa_L, 0, 0, kappa_R, 0).
    std::optional<std::array<double, 6>> initial_scaled_state;
    double grid_step = 0.01;
};

struct LOBState {
    std::array<long long, kTicks> queues{};  // >0 buy orders, <0 sell orders
    long long window_origin = 0;              // absolute tick of the U queue
    double clock = 0.0;                       // unscaled time
    std::array<double, kRegionCount> occupation{};
    std::uint64_t event_count = 0;

    long long at(int k) const { return queues[static_cast<std::size_t>(k)]; }
};

class ModelViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class HorizonExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class EventKind {
    limit_buy_1, limit_buy_2, limit_sell_1, limit_sell_2,
    market_buy, market_sell, cancel_buy, cancel_sell
};

struct EventInfo {
    double holding_time = 0.0;
    EventKind kind = EventKind::limit_buy_1;
    int tick = 0;        // window index that changed
    int delta = 0;       // +1 or -1
    Region region_before = Region::O;
    double total_rate = 0.0;
};

// One active clock: rate, target tick, and signed change.
struct Clock {
    double rate;
    EventKind kind;
    int tick;
    int delta;
};

// Active clocks for the current state (no allocation beyond the fixed buffer).
struct ClockSet {
    std::array<Clock, 32> clocks{};
    int size = 0;
    double total = 0.0;
    void push(double rate, EventKind kind, int tick, int delta) {
        if (rate <= 0.0) return;
        clocks[static_cast<std::size_t>(size++)] = {rate, kind, tick, delta};
        total += rate;
    }
};

struct Quotes {
    int bid;
    int ask;
};

Quotes best_quotes(const LOBState& s, Dynamics mode);
ClockSet active_clocks(const LOBState& s, const DerivedConstants& dc, long n, Dynamics mode);

LOBState initial_state(const SimConfig& cfg, const DerivedConstants& dc);

// Samples and applies the next transition in place.
EventInfo step_event(LOBState& s, const DerivedConstants& dc, long n, Rng& rng,
                     Dynamics mode = Dynamics::book);

enum class Direction { down, up };
const char* direction_name(Direction d);

struct RenewalRecord {
    Direction direction = Direction::down;
    double s_hat = 0.0;
    // Scaled (U..Z) at the renewal instant, window not yet shifted.
    std::array<double, 6> state_at_renewal{};
    // Same queues relabelled after the one-tick window shift.
    std::array<double, 6> relabelled_state{};
    long long window_origin_after = 0;
    std::uint64_t events = 0;
};

RenewalRecord run_until_renewal(const SimConfig& cfg, const DerivedConstants& dc);

struct ScaledRow {
    double t;
    std::array<double, 8> values;  // U V W X Y Z G H
    std::array<double, kRegionCount> occupation;
};

struct ScaledPathBundle {
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    long n = 0;
    double horizon = 0.0;
    std::vector<ScaledRow> rows;
    // Event-level statistics over [0, horizon].
    double h_sup = 0.0;          // sup |H| (scaled)
    double qv_plus = 0.0;        // sum of squared G jumps taken from G > 0
    double qv_minus = 0.0;       // ... from G < 0
    double time_plus = 0.0;      // scaled time with G > 0
    double time_minus = 0.0;     // scaled time with G < 0
    double max_event_gap = 0.0;  // largest scaled holding time
    std::uint64_t events = 0;
};

ScaledPathBundle run_scaled_path(const SimConfig& cfg, const DerivedConstants& dc);

struct OccupationFractions {
    std::array<double, kRegionCount> region{};
    double one_tick = 0.0;  // NE, SE_plus, SE, SE_minus, SW
    double two_tick = 0.0;  // E, S
};

OccupationFractions occupation_fractions(const ScaledPathBundle& b);

// Mean and standard error of G(T) - G(0) across paths. Needs two or more
// bundles from distinct (seed, path_index) streams.
MeanSe martingale_drift_stat(const std::vector<ScaledPathBundle>& paths);

}  // namespace loblab
