// Acceptance run: one PASS/FAIL line per criterion. Criteria gather checks
// from the validation suites by name and add a wall-clock budget per criterion.
// Soft checks are printed but never decide a criterion. With an argument N only
// criterion N runs (ctest registers one entry per criterion).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "loblab/validation.hpp"

namespace {

using namespace loblab;

struct Criterion {
    int id;
    std::string title;
    std::vector<std::string> suites;
    // Entries ending in '.' select every check with that prefix.
    std::vector<std::string> checks;
    double budget_seconds;
};

const std::vector<Criterion> kCriteria = {
    {1, "kernel normalization and semigroup", {"kernels"}, {"kernels."}, 5.0},
    {2, "half-stable identity", {"identity"}, {"identity."}, 10.0},
    {3, "quadrant exit probability and mass identity", {"quadrant"},
     {"quadrant.exit_prob_mc", "quadrant.exit_prob_mc_offset_start", "quadrant.mass_d_first", "quadrant.mass_e_first",
      "quadrant.rho_zero_closed_form"},
     300.0},
    {4, "conditioned passage-time laws", {"quadrant"}, {"quadrant.ks_tau_d", "quadrant.ks_tau_e"}, 600.0},
    {5, "excursion-conditioned hitting law", {"excursion"}, {"excursion.hit_time_ks", "excursion.hit_probability"},
     600.0},
    {6, "renewal direction law", {"renewal"},
     {"renewal.intensity_symmetry", "renewal.down_prob_symmetric", "renewal.limit_down_half", "renewal.lob_down_half",
      "renewal.limit_down_theta_b_doubled", "renewal.down_prob_increases_with_theta_b"},
     1200.0},
    {7, "renewal characteristic function", {"renewal"},
     {"renewal.cf_at_zero", "renewal.cf_empirical", "renewal.cf_modulus", "renewal.cf_conjugate_symmetry"}, 1200.0},
    {8, "two-speed constructions", {"two_speed"}, {"two_speed."}, 1800.0},
    {9, "LOB convergence battery", {"occupation", "crushing", "variance", "renewal"},
     {"occupation.one_tick_fraction", "crushing.", "variance.qv_plus_rate", "variance.qv_minus_rate",
      "renewal.lob_state_u", "renewal.lob_state_y"},
     1800.0},
    {10, "exact-math regression", {"exact"}, {"exact."}, 1.0},
};

bool selected(const std::string& name, const std::vector<std::string>& patterns) {
    for (const auto& p : patterns) {
        const bool prefix = !p.empty() && p.back() == '.';
        if (prefix ? name.rfind(p, 0) == 0 : name == p) return true;
    }
    return false;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> criteria;
    for (const auto& c : kCriteria)
        if (argc < 2 || c.id == std::atoi(argv[1])) criteria.push_back(c);
    if (criteria.empty()) {
        std::fprintf(stderr, "usage: acceptance [criterion 1-%zu]\n", kCriteria.size());
        return 2;
    }

    const ValidationConfig cfg;
    std::map<std::string, std::vector<CheckReport>> by_suite;
    std::map<std::string, double> seconds;
    for (const auto& c : criteria)
        for (const auto& s : c.suites) {
            if (by_suite.count(s)) continue;
            const auto t0 = std::chrono::steady_clock::now();
            by_suite[s] = run_suite(s, cfg);
            seconds[s] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }

    std::size_t failed = 0;
    for (const auto& c : criteria) {
        double runtime = 0.0;
        std::vector<const CheckReport*> picked;
        for (const auto& s : c.suites) {
            runtime += seconds[s];
            for (const auto& r : by_suite[s])
                if (selected(r.name, c.checks)) picked.push_back(&r);
        }
        // Every named check must be present; a missing one fails the criterion.
        bool ok = runtime <= c.budget_seconds;
        std::vector<std::string> problems;
        if (!ok) problems.push_back(fmt::format("runtime {:.1f}s over budget", runtime));
        for (const auto& p : c.checks) {
            bool found = false;
            for (const auto* r : picked) found = found || selected(r->name, {p});
            if (!found) {
                ok = false;
                problems.push_back("missing " + p);
            }
        }
        int hard = 0, soft = 0;
        for (const auto* r : picked) {
            (r->soft ? soft : hard) += 1;
            if (!r->soft && !r->pass) {
                ok = false;
                problems.push_back("failed " + r->name);
            }
        }
        failed += ok ? 0 : 1;
        std::printf("criterion %2d %s  %s  [%d gating, %d soft checks; %.1fs of %.0fs]\n", c.id, ok ? "PASS" : "FAIL",
                    c.title.c_str(), hard, soft, runtime, c.budget_seconds);
        for (const auto& p : problems) std::printf("             %s\n", p.c_str());
        for (const auto* r : picked) {
            if (!r->soft) continue;
            std::printf("             soft %s %s: observed %.6g", r->pass ? "pass" : "FAIL", r->name.c_str(),
                        r->observed.empty() ? 0.0 : r->observed.front());
            if (!r->reference.empty()) std::printf(", reference %.6g", r->reference.front());
            std::printf(", %s %.3g\n", rule_name(r->rule), r->tolerance);
        }
    }
    std::printf("%s: %zu of %zu criteria passed\n", failed == 0 ? "ACCEPTED" : "REJECTED", criteria.size() - failed,
                criteria.size());
    return failed == 0 ? 0 : 1;
}
