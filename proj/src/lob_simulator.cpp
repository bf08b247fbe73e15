#include "loblab/lob_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

namespace loblab {

namespace {

long long to_unscaled(double v, double root_n) {
    const double y = v * root_n;
    const double m = std::ceil(std::fabs(y) - 0.5);  // round half toward zero
    return static_cast<long long>(y < 0 ? -m : m);
}

Region interior_region(const LOBState& s) {
    return region_of(static_cast<double>(s.at(kW)), static_cast<double>(s.at(kX)));
}

void check_book(const LOBState& s) {
    int last_buy = -1, first_sell = kTicks;
    for (int k = 0; k < kTicks; ++k) {
        if (s.at(k) > 0) last_buy = k;
        if (s.at(k) < 0 && first_sell == kTicks) first_sell = k;
    }
    if (last_buy >= first_sell) throw ModelViolation("buy orders at or above the ask");
}

}  // namespace

const char* direction_name(Direction d) { return d == Direction::down ? "down" : "up"; }

Quotes best_quotes(const LOBState& s, Dynamics mode) {
    if (mode == Dynamics::frozen_window) {
        const long long w = s.at(kW), x = s.at(kX);
        const int bid = x > 0 ? kX : (w > 0 ? kW : kV);
        const int ask = w < 0 ? kW : (x < 0 ? kX : kY);
        return {bid, ask};
    }
    int bid = -1, ask = kTicks;
    for (int k = 0; k < kTicks; ++k) {
        if (s.at(k) > 0) bid = k;
    }
    for (int k = kTicks - 1; k >= 0; --k) {
        if (s.at(k) < 0) ask = k;
    }
    if (bid < 0) throw ModelViolation("book has no bid inside the window");
    if (ask >= kTicks) throw ModelViolation("book has no ask inside the window");
    if (bid >= ask) throw ModelViolation("bid not below ask");
    return {bid, ask};
}

ClockSet active_clocks(const LOBState& s, const DerivedConstants& dc, long n, Dynamics mode) {
    const Quotes q = best_quotes(s, mode);
    ClockSet cs;
    if (q.ask - 1 >= 0) cs.push(dc.lambda1, EventKind::limit_buy_1, q.ask - 1, +1);
    if (q.ask - 2 >= 0) cs.push(dc.lambda2, EventKind::limit_buy_2, q.ask - 2, +1);
    if (q.bid + 1 < kTicks) cs.push(dc.mu1, EventKind::limit_sell_1, q.bid + 1, -1);
    if (q.bid + 2 < kTicks) cs.push(dc.mu2, EventKind::limit_sell_2, q.bid + 2, -1);
    cs.push(dc.lambda0, EventKind::market_buy, q.ask, +1);
    cs.push(dc.mu0, EventKind::market_sell, q.bid, -1);
    const double root_n = std::sqrt(static_cast<double>(n));
    const double cb = dc.input.theta_b / root_n;
    const double cs_rate = dc.input.theta_s / root_n;
    for (int k = 0; k <= q.bid - 2; ++k) {
        const long long cnt = std::max<long long>(s.at(k), 0);
        if (cnt > 0) cs.push(cb * static_cast<double>(cnt), EventKind::cancel_buy, k, -1);
    }
    for (int k = q.ask + 2; k < kTicks; ++k) {
        const long long cnt = std::max<long long>(-s.at(k), 0);
        if (cnt > 0) cs.push(cs_rate * static_cast<double>(cnt), EventKind::cancel_sell, k, +1);
    }
    return cs;
}

LOBState initial_state(const SimConfig& cfg, const DerivedConstants& dc) {
    if (cfg.n < 1) throw std::invalid_argument("n must be a positive integer");
    if (!(cfg.horizon > 0.0) && cfg.horizon != 0.0) throw std::invalid_argument("horizon must be >= 0");
    if (!(cfg.grid_step > 0.0)) throw std::invalid_argument("grid_step must be > 0");
    const std::array<double, 6> v =
        cfg.initial_scaled_state.value_or(std::array<double, 6>{0.0, dc.kappa_L, 0.0, 0.0, dc.kappa_R, 0.0});
    const double root_n = std::sqrt(static_cast<double>(cfg.n));
    LOBState s;
    for (int i = 0; i < 6; ++i) s.queues[static_cast<std::size_t>(kU + i)] = to_unscaled(v[static_cast<std::size_t>(i)], root_n);
    if (s.at(kU) < 0) throw std::invalid_argument("initial state: U must be >= 0");
    if (s.at(kV) <= 0) throw std::invalid_argument("initial state: V must round to a positive queue");
    if (s.at(kY) >= 0) throw std::invalid_argument("initial state: Y must round to a negative queue");
    if (s.at(kZ) > 0) throw std::invalid_argument("initial state: Z must be <= 0");
    if (s.at(kW) < 0 && s.at(kX) > 0) throw std::invalid_argument("initial state: W < 0 < X is inadmissible");
    return s;
}

EventInfo step_event(LOBState& s, const DerivedConstants& dc, long n, Rng& rng, Dynamics mode) {
    const ClockSet cs = active_clocks(s, dc, n, mode);
    if (!(cs.total > 0.0)) throw ModelViolation("no active clocks");
    EventInfo info;
    info.total_rate = cs.total;
    info.holding_time = rng.exponential() / cs.total;
    info.region_before = interior_region(s);
    double u = rng.uniform() * cs.total;
    int pick = cs.size - 1;
    for (int i = 0; i < cs.size; ++i) {
        u -= cs.clocks[static_cast<std::size_t>(i)].rate;
        if (u < 0.0) {
            pick = i;
            break;
        }
    }
    const Clock& c = cs.clocks[static_cast<std::size_t>(pick)];
    s.occupation[static_cast<std::size_t>(region_index(info.region_before))] += info.holding_time;
    s.clock += info.holding_time;
    const long long before = s.at(c.tick);
    s.queues[static_cast<std::size_t>(c.tick)] += c.delta;
    ++s.event_count;
    if (mode == Dynamics::book) {
        const long long after = s.at(c.tick);
        if ((before > 0 && after < 0) || (before < 0 && after > 0)) throw ModelViolation("queue changed sign");
        check_book(s);
    }
    info.kind = c.kind;
    info.tick = c.tick;
    info.delta = c.delta;
    return info;
}

RenewalRecord run_until_renewal(const SimConfig& cfg, const DerivedConstants& dc) {
    LOBState s = initial_state(cfg, dc);
    Rng rng = Rng(cfg.seed).split(cfg.path_index);
    const double t_end = cfg.horizon * static_cast<double>(cfg.n);
    while (s.at(kV) != 0 && s.at(kY) != 0) {
        step_event(s, dc, cfg.n, rng, Dynamics::book);
        if (s.clock > t_end)
            throw HorizonExceeded("no renewal before scaled time " + std::to_string(cfg.horizon));
    }
    RenewalRecord r;
    r.direction = s.at(kV) == 0 ? Direction::down : Direction::up;
    const double root_n = std::sqrt(static_cast<double>(cfg.n));
    r.s_hat = s.clock / static_cast<double>(cfg.n);
    for (int i = 0; i < 6; ++i) r.state_at_renewal[static_cast<std::size_t>(i)] = static_cast<double>(s.at(kU + i)) / root_n;
    if (r.direction == Direction::down) {
        r.relabelled_state = {static_cast<double>(s.at(kU - 1)) / root_n, r.state_at_renewal[0],
                              r.state_at_renewal[1], r.state_at_renewal[2], r.state_at_renewal[3],
                              r.state_at_renewal[4]};
        r.window_origin_after = s.window_origin - 1;
    } else {
        r.relabelled_state = {r.state_at_renewal[1], r.state_at_renewal[2], r.state_at_renewal[3],
                              r.state_at_renewal[4], r.state_at_renewal[5],
                              static_cast<double>(s.at(kZ + 1)) / root_n};
        r.window_origin_after = s.window_origin + 1;
    }
    r.events = s.event_count;
    return r;
}

namespace {

ScaledRow make_row(const LOBState& s, const DerivedConstants& dc, double t_unscaled, double root_n,
                   double n) {
    ScaledRow row;
    row.t = t_unscaled / n;
    for (int i = 0; i < 6; ++i) row.values[static_cast<std::size_t>(i)] = static_cast<double>(s.at(kU + i)) / root_n;
    const GH gh = gh_transform(dc.input, row.values[2], row.values[3]);
    row.values[6] = gh.g;
    row.values[7] = gh.h;
    const int r = region_index(interior_region(s));
    for (int i = 0; i < kRegionCount; ++i) {
        double occ = s.occupation[static_cast<std::size_t>(i)];
        if (i == r) occ += t_unscaled - s.clock;
        row.occupation[static_cast<std::size_t>(i)] = occ / n;
    }
    return row;
}

}  // namespace

ScaledPathBundle run_scaled_path(const SimConfig& cfg, const DerivedConstants& dc) {
    LOBState s = initial_state(cfg, dc);
    Rng rng = Rng(cfg.seed).split(cfg.path_index);
    const double n = static_cast<double>(cfg.n);
    const double root_n = std::sqrt(n);
    const double t_end = cfg.horizon * n;
    const long steps = static_cast<long>(std::floor(cfg.horizon / cfg.grid_step + 1e-9));

    ScaledPathBundle b;
    b.seed = cfg.seed;
    b.path_index = cfg.path_index;
    b.n = cfg.n;
    b.horizon = cfg.horizon;
    b.rows.reserve(static_cast<std::size_t>(steps + 2));

    long next_k = 0;
    auto grid_time = [&](long k) {
        return k == steps + 1 ? t_end : static_cast<double>(k) * cfg.grid_step * n;
    };
    const bool extra_end = static_cast<double>(steps) * cfg.grid_step < cfg.horizon * (1.0 - 1e-12);
    const long last_k = extra_end ? steps + 1 : steps;

    auto g_of = [&](const LOBState& st) {
        return gh_transform(dc.input, static_cast<double>(st.at(kW)) / root_n,
                            static_cast<double>(st.at(kX)) / root_n);
    };
    GH gh_prev = g_of(s);
    b.h_sup = std::fabs(gh_prev.h);

    for (;;) {
        const LOBState prev = s;
        step_event(s, dc, cfg.n, rng, Dynamics::frozen_window);
        while (next_k <= last_k && grid_time(next_k) < s.clock) {
            b.rows.push_back(make_row(prev, dc, grid_time(next_k), root_n, n));
            ++next_k;
        }
        const double dt_in = (std::min(s.clock, t_end) - prev.clock) / n;
        if (gh_prev.g > 0.0) b.time_plus += dt_in;
        if (gh_prev.g < 0.0) b.time_minus += dt_in;
        if (s.clock > t_end) break;
        b.max_event_gap = std::max(b.max_event_gap, (s.clock - prev.clock) / n);
        const GH gh = g_of(s);
        const double jump = gh.g - gh_prev.g;
        if (gh_prev.g > 0.0) b.qv_plus += jump * jump;
        if (gh_prev.g < 0.0) b.qv_minus += jump * jump;
        b.h_sup = std::max(b.h_sup, std::fabs(gh.h));
        gh_prev = gh;
        ++b.events;
    }
    return b;
}

OccupationFractions occupation_fractions(const ScaledPathBundle& b) {
    if (!(b.horizon > 0.0) || b.rows.empty()) throw std::invalid_argument("occupation_fractions needs horizon > 0");
    OccupationFractions f;
    const auto& occ = b.rows.back().occupation;
    double total = 0.0;
    for (double v : occ) total += v;
    for (int i = 0; i < kRegionCount; ++i) f.region[static_cast<std::size_t>(i)] = occ[static_cast<std::size_t>(i)] / total;
    auto r = [&](Region x) { return f.region[static_cast<std::size_t>(region_index(x))]; };
    f.one_tick = r(Region::NE) + r(Region::SE_plus) + r(Region::SE) + r(Region::SE_minus) + r(Region::SW);
    f.two_tick = r(Region::E) + r(Region::S);
    return f;
}

MeanSe martingale_drift_stat(const std::vector<ScaledPathBundle>& paths) {
    if (paths.size() < 2) throw std::invalid_argument("martingale_drift_stat needs at least two paths");
    std::set<std::pair<std::uint64_t, std::uint64_t>> streams;
    for (const auto& p : paths) {
        if (p.rows.empty()) throw std::invalid_argument("martingale_drift_stat: empty path");
        streams.insert({p.seed, p.path_index});
    }
    if (streams.size() < 2) throw std::invalid_argument("martingale_drift_stat needs paths from at least two distinct streams");
    MeanSe m;
    m.count = paths.size();
    double sum = 0.0, sum2 = 0.0;
    for (const auto& p : paths) {
        const double d = p.rows.back().values[6] - p.rows.front().values[6];
        sum += d;
        sum2 += d * d;
    }
    const double k = static_cast<double>(paths.size());
    m.mean = sum / k;
    const double var = std::max(0.0, (sum2 - k * m.mean * m.mean) / (k - 1.0));
    m.se = std::sqrt(var / k);
    return m;
}

}  // namespace loblab
