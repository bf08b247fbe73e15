#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "loblab/analytics.hpp"
#include "loblab/model_params.hpp"
#include "loblab/rng.hpp"

namespace loblab {

// How a check turns its numbers into a verdict. For every component i:
//  absolute:  |observed - reference| <= tolerance
//  relative:  |observed - reference| <= tolerance * |reference|
//  k_se:      |observed - reference| <= tolerance * se
//  at_most:   observed <= tolerance   (KS distances, worst-case violations)
//  at_least:  observed >= tolerance   (decay factors, frequencies)
enum class Rule { absolute, relative, k_se, at_most, at_least };
const char* rule_name(Rule r);

struct CheckReport {
    std::string name;  // "suite.check"
    std::vector<double> observed;
    std::vector<double> reference;
    std::vector<double> se;  // only read by k_se
    Rule rule = Rule::absolute;
    double tolerance = 0.0;
    bool pass = false;
    bool soft = false;  // soft checks never gate the exit status
    std::vector<std::size_t> samples;
    double runtime = 0.0;  // seconds
    std::string note;
};

// Applies the rule; pass is always set from this.
bool rule_holds(const CheckReport& r);

struct ValidationConfig {
    ModelParams params;
    QuadratureConfig quadrature;
    std::uint64_t seed = 20240611;

    // quadrant
    std::size_t quadrant_paths = 100000;
    double quadrant_dt = 1e-4;
    double quadrant_horizon = 200.0;
    bool quadrant_bridge = false;
    std::size_t conditioned_samples = 10000;

    // excursion-conditioned hitting
    std::size_t excursion_hits = 10000;
    double excursion_dt = 1e-4;
    std::size_t marginal_samples = 10000;

    // renewal
    std::size_t limit_renewals = 10000;
    double limit_dt = 1e-4;
    std::size_t lob_renewals = 2000;
    long lob_n = 10000;

    // two-speed constructions
    std::size_t two_speed_samples = 10000;
    double two_speed_dt = 1e-3;
    // The discrete Psi coupling carries an O(sqrt(dt)) upward bias (the + clock
    // trails its new minimum by one step), so Psi gets its own finer grid.
    double psi_dt = 2.5e-5;

    // LOB battery
    std::size_t occupation_paths = 20;
    std::size_t crushing_paths = 40;
    std::size_t drift_paths = 1000;
    long drift_n = 1000;
    std::size_t covariation_paths = 200;
    long covariation_n = 100000;
    std::size_t tracking_renewals = 200;
};

std::vector<std::string> suite_names();
// Unknown names raise std::invalid_argument.
std::vector<CheckReport> run_suite(const std::string& name, const ValidationConfig& cfg);
// All suites, merged by check name.
std::vector<CheckReport> run_all(const ValidationConfig& cfg);

// Fixed-width table, one row per check.
std::string summary_table(const std::vector<CheckReport>& reports);
// True iff every non-soft check passed.
bool gating_pass(const std::vector<CheckReport>& reports);

// Correlated Brownian pair (D, E) from (v1, -x1) until one coordinate leaves
// (0, inf). Exposed for the suite and its tests.
struct QuadrantSample {
    int first = 0;  // 1: D, 2: E, 0: censored at the horizon
    double time = 0.0;
};
QuadrantSample quadrant_path(const QuadrantParams& q, double dt, double horizon, bool bridge, Rng& rng);

}  // namespace loblab
