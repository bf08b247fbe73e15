#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "loblab/model_params.hpp"
#include "loblab/rng.hpp"

using namespace loblab;

namespace {

double rel(double got, double want) { return std::fabs(got - want) / std::max(std::fabs(want), 1e-300); }

}  // namespace

TEST_CASE("default constants by hand arithmetic") {
    const DerivedConstants d = derive_constants(ModelParams{});
    CHECK(rel(d.lambda1, 0.5) < 1e-14);
    CHECK(rel(d.lambda2, 0.75) < 1e-14);
    CHECK(rel(d.mu0, 1.0) < 1e-14);
    CHECK(rel(d.mu1, 0.5) < 1e-14);
    CHECK(rel(d.mu2, 0.75) < 1e-14);
    CHECK(rel(d.c, 0.5) < 1e-14);
    CHECK(rel(d.kappa_L, 0.75) < 1e-14);
    CHECK(rel(d.kappa_R, -0.75) < 1e-14);
    CHECK(rel(d.sigma_plus * d.sigma_plus, 3.5) < 1e-14);
    CHECK(rel(d.sigma_minus * d.sigma_minus, 3.5) < 1e-14);
    CHECK(rel(d.rho, -4.0 / 7.0) < 1e-14);
    CHECK(rel(d.frac_one_tick, 2.0 / 3.0) < 1e-14);
    CHECK(rel(d.frac_one_tick + d.frac_two_tick, 1.0) < 1e-14);
}

TEST_CASE("c agrees across its expressions") {
    const DerivedConstants d = derive_constants(ModelParams{2.0, 1.5, 1.0, 1.0, 1.0});
    CHECK(rel(d.c, 1.0 / 3.0) < 1e-14);
    CHECK(rel(d.mu0 - d.lambda1, d.c) < 1e-14);
    CHECK(rel(d.lambda0 - d.mu1, d.c) < 1e-14);

    Rng rng(99);
    for (int i = 0; i < 1000; ++i) {
        const double a = 1.0 + 2.0 * rng.uniform();
        const double b = 1.0 + (a / (a - 1.0) - 1.0) * rng.uniform();
        const double l0 = 0.1 + 5.0 * rng.uniform();
        const DerivedConstants e = derive_constants(ModelParams{a, b, l0, 1.0, 1.0});
        const double slack = (a + b - a * b) * l0 / b;
        REQUIRE(rel(e.c, slack) < 1e-12);
        REQUIRE(rel(e.mu0 - e.lambda1, slack) < 1e-12);
        REQUIRE(rel(e.alpha_minus, -e.rho * e.sigma_plus / e.sigma_minus) < 1e-14);
        REQUIRE(e.rho < 0.0);
        REQUIRE(e.rho > -1.0);
    }
}

TEST_CASE("parameter constraints") {
    CHECK_THROWS_AS(validate(ModelParams{2.0, 2.0, 1.0, 1.0, 1.0}), ParamError);
    try {
        validate(ModelParams{2.0, 2.0, 1.0, 1.0, 1.0});
    } catch (const ParamError& e) {
        CHECK(std::string(e.what()).find("a + b > a*b") != std::string::npos);
    }
    CHECK_THROWS_AS(validate(ModelParams{1.0, 1.5, 1.0, 1.0, 1.0}), ParamError);
    CHECK_THROWS_AS(validate(ModelParams{1.5, 1.5, 0.0, 1.0, 1.0}), ParamError);
    CHECK_THROWS_AS(validate(ModelParams{1.5, 1.5, 1.0, -1.0, 1.0}), ParamError);
    CHECK_THROWS_AS(validate(ModelParams{1.5, 1.5, 1.0, 1.0, NAN}), ParamError);
    CHECK_THROWS_AS(derive_constants(ModelParams{3.0, 3.0, 1.0, 1.0, 1.0}), ParamError);
    CHECK_NOTHROW(validate(ModelParams{2.0, 1.5, 1.0, 1.0, 1.0}));
}

TEST_CASE("region table") {
    CHECK(region_of(1, 1) == Region::NE);
    CHECK(region_of(0, 1) == Region::NE);
    CHECK(region_of(1, 0) == Region::E);
    CHECK(region_of(0, 0) == Region::O);
    CHECK(region_of(0, -1) == Region::S);
    CHECK(region_of(-1, 0) == Region::SW);
    CHECK(region_of(-1, -1) == Region::SW);
    CHECK(region_of(2, -1) == Region::SE_plus);
    CHECK(region_of(1, -1) == Region::SE);
    CHECK(region_of(1, -2) == Region::SE_minus);
    CHECK_THROWS_AS(region_of(-1, 1), DomainError);
    for (Region r : kAllRegions) CHECK(std::string(region_name(r)) != "?");
}

TEST_CASE("gh transform examples") {
    const ModelParams p{};
    const GH ne = gh_transform(p, 1, 1);
    CHECK(rel(ne.g, 2.5) < 1e-15);
    CHECK(rel(ne.h, 1.0) < 1e-15);
    const GH o = gh_transform(p, 0, 0);
    CHECK(o.g == 0.0);
    CHECK(o.h == 0.0);
    const GH sw = gh_transform(p, -1, -1);
    CHECK(rel(sw.g, -2.5) < 1e-15);
    CHECK(rel(sw.h, 1.0) < 1e-15);
    const WX back = gh_inverse(p, 2.5, 1.0);
    CHECK(rel(back.w, 1.0) < 1e-15);
    CHECK(rel(back.x, 1.0) < 1e-15);
    const WX sw_back = gh_inverse(p, -2.5, 1.0);
    CHECK(rel(sw_back.w, -1.0) < 1e-15);
    CHECK(rel(sw_back.x, -1.0) < 1e-15);
    CHECK_THROWS_AS(gh_inverse(p, 1.0, 1.0), DomainError);   // g >= 0 needs h <= g/b
    CHECK_THROWS_AS(gh_inverse(p, -1.0, 1.0), DomainError);  // g < 0 needs h <= -g/a
    CHECK_THROWS_AS(gh_transform(p, -1.0, 1.0), DomainError);
}

TEST_CASE("gh round trip and continuity") {
    const ModelParams p{1.7, 1.3, 1.0, 1.0, 1.0};
    Rng rng(7);
    for (int i = 0; i < 100000; ++i) {
        const double w = 6.0 * rng.uniform() - 3.0;
        double x = 6.0 * rng.uniform() - 3.0;
        if (w < 0.0 && x > 0.0) x = -x;
        const GH gh = gh_transform(p, w, x);
        const WX back = gh_inverse(p, gh.g, gh.h);
        const double scale = std::max(std::fabs(w), std::fabs(x));
        REQUIRE(std::fabs(back.w - w) <= 1e-12 * scale);
        REQUIRE(std::fabs(back.x - x) <= 1e-12 * scale);
    }
    // Points straddling each boundary ray.
    const double delta = 1e-9;
    const double bound = 10.0 * delta * std::max(p.a, p.b);
    for (double r : {0.3, 1.0, 2.7}) {
        const std::pair<WX, WX> pairs[] = {
            {{0.0, r}, {delta, r}},                  // NE, w = 0 edge
            {{r, 0.0}, {r, delta}},                  // E against NE
            {{r, 0.0}, {r, -delta}},                 // E against SE_plus
            {{r, -r}, {r + delta, -r}},              // SE against SE_plus
            {{r, -r}, {r - delta, -r}},              // SE against SE_minus
            {{0.0, -r}, {delta, -r}},                // S against SE_minus
            {{0.0, -r}, {-delta, -r}},               // S against SW
            {{-r, 0.0}, {-r, -delta}},               // SW edge x = 0
        };
        for (const auto& [u, v] : pairs) {
            const GH gu = gh_transform(p, u.w, u.x);
            const GH gv = gh_transform(p, v.w, v.x);
            CHECK(std::fabs(gu.g - gv.g) <= bound);
            CHECK(std::fabs(gu.h - gv.h) <= bound);
        }
    }
}

TEST_CASE("rng streams") {
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) REQUIRE(a() == b());
    const Rng parent(11);
    Rng used = parent;
    for (int i = 0; i < 37; ++i) used();
    Rng c1 = parent.split(3), c2 = used.split(3);
    for (int i = 0; i < 10; ++i) REQUIRE(c1() == c2());
    Rng s0 = parent.split(0), s1 = parent.split(1);
    CHECK(s0() != s1());
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
    // Published Philox4x32-10 answers.
    const auto z = philox4x32_10({0u, 0u, 0u, 0u}, {0u, 0u});
    CHECK(z[0] == 0x6627e8d5u);
    CHECK(z[3] == 0x9b00dbd8u);
    const auto f = philox4x32_10({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u});
    CHECK(f[0] == 0x408f276du);
    CHECK(f[3] == 0x6d5451fdu);
}
