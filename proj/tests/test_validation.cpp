#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "loblab/validation.hpp"

using namespace loblab;

namespace {

CheckReport report(Rule rule, std::vector<double> obs, std::vector<double> ref, double tol,
                   std::vector<double> se = {}) {
    CheckReport r;
    r.name = "t.check";
    r.rule = rule;
    r.observed = std::move(obs);
    r.reference = std::move(ref);
    r.se = std::move(se);
    r.tolerance = tol;
    return r;
}

}  // namespace

TEST_CASE("rule semantics") {
    CHECK(rule_holds(report(Rule::absolute, {1.05}, {1.0}, 0.1)));
    CHECK_FALSE(rule_holds(report(Rule::absolute, {1.2}, {1.0}, 0.1)));
    CHECK(rule_holds(report(Rule::relative, {101.0}, {100.0}, 0.02)));
    CHECK_FALSE(rule_holds(report(Rule::relative, {103.0}, {100.0}, 0.02)));
    CHECK(rule_holds(report(Rule::k_se, {0.52}, {0.5}, 3.0, {0.01})));
    CHECK_FALSE(rule_holds(report(Rule::k_se, {0.54}, {0.5}, 3.0, {0.01})));
    CHECK(rule_holds(report(Rule::at_most, {0.01, 0.02}, {}, 0.02)));
    CHECK_FALSE(rule_holds(report(Rule::at_most, {0.01, 0.03}, {}, 0.02)));
    CHECK(rule_holds(report(Rule::at_least, {5.0}, {}, 4.0)));
    CHECK_FALSE(rule_holds(report(Rule::at_least, {3.0}, {}, 4.0)));
    // Every component must hold.
    CHECK_FALSE(rule_holds(report(Rule::absolute, {1.0, 2.0}, {1.0, 1.0}, 0.5)));
}

TEST_CASE("malformed reports never pass") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_FALSE(rule_holds(report(Rule::at_most, {nan}, {}, 1.0)));
    CHECK_FALSE(rule_holds(report(Rule::at_least, {inf}, {}, 1.0)));
    CHECK_FALSE(rule_holds(report(Rule::absolute, {}, {}, 1.0)));
    CHECK_FALSE(rule_holds(report(Rule::absolute, {1.0}, {}, 1.0)));
    CHECK_FALSE(rule_holds(report(Rule::k_se, {1.0}, {1.0}, 3.0)));
}

TEST_CASE("gating ignores soft checks") {
    CheckReport hard = report(Rule::at_most, {0.0}, {}, 1.0);
    hard.pass = true;
    CheckReport soft = report(Rule::at_most, {2.0}, {}, 1.0);
    soft.soft = true;
    soft.pass = false;
    CHECK(gating_pass({hard, soft}));
    hard.pass = false;
    CHECK_FALSE(gating_pass({hard, soft}));
    CHECK(gating_pass({}));
}

TEST_CASE("summary table") {
    CheckReport a = report(Rule::relative, {1.0}, {1.0}, 1e-3);
    a.name = "x.first";
    a.pass = true;
    CheckReport b = report(Rule::at_most, {2.0}, {}, 1.0);
    b.name = "x.second";
    b.soft = true;
    const std::string t = summary_table({a, b});
    CHECK(t.find("x.first") != std::string::npos);
    CHECK(t.find("FAIL-soft") != std::string::npos);
    CHECK(t.find("relative") != std::string::npos);
    int lines = 0;
    for (char ch : t) lines += ch == '\n';
    CHECK(lines == 3);
}

TEST_CASE("suite registry") {
    const auto names = suite_names();
    for (const char* want : {"exact", "kernels", "identity", "quadrant", "excursion", "renewal", "two_speed",
                             "occupation", "crushing", "variance"})
        CHECK(std::find(names.begin(), names.end(), want) != names.end());
    CHECK_THROWS_AS(run_suite("no_such_suite", ValidationConfig{}), std::invalid_argument);
}

TEST_CASE("exact and kernel suites pass") {
    for (const char* name : {"exact", "kernels", "identity"}) {
        const auto reports = run_suite(name, ValidationConfig{});
        REQUIRE_FALSE(reports.empty());
        for (const auto& r : reports) {
            INFO(r.name);
            CHECK(r.pass == rule_holds(r));
            CHECK(r.pass);
            CHECK(r.name.rfind(std::string(name) + ".", 0) == 0);
        }
    }
}

TEST_CASE("quadrant path sampler") {
    const DerivedConstants dc = derive_constants(ModelParams{});
    const QuadrantParams q = make_quadrant_params(dc.kappa_L, dc.kappa_R, dc);
    Rng a(3), b(3);
    const QuadrantSample s1 = quadrant_path(q, 1e-3, 50.0, false, a);
    const QuadrantSample s2 = quadrant_path(q, 1e-3, 50.0, false, b);
    CHECK(s1.first == s2.first);
    CHECK(s1.time == s2.time);
    Rng r(4);
    int d = 0, censored = 0;
    const int paths = 2000;
    for (int i = 0; i < paths; ++i) {
        const QuadrantSample s = quadrant_path(q, 1e-3, 50.0, true, r);
        REQUIRE(s.time > 0.0);
        REQUIRE(s.time <= 50.0 + 1e-9);
        d += s.first == 1;
        censored += s.first == 0;
    }
    // Symmetric start: D first with probability 1/2.
    const double p = static_cast<double>(d) / (paths - censored);
    CHECK(std::fabs(p - 0.5) < 4.0 * std::sqrt(0.25 / paths));
    CHECK(censored < paths / 20);
    // A tiny horizon censors.
    Rng c(5);
    CHECK(quadrant_path(q, 1e-3, 1e-3, false, c).first == 0);
}
