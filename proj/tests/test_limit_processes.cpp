#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "loblab/limit_processes.hpp"
#include "loblab/stats.hpp"

using namespace loblab;

namespace {

GridPath from(double dt, std::vector<double> v) { return {0.0, dt, std::move(v)}; }

double max_step(const GridPath& z) {
    double m = 0.0;
    for (std::size_t k = 1; k < z.size(); ++k) m = std::max(m, std::fabs(z[k] - z[k - 1]));
    return m;
}

}  // namespace

TEST_CASE("skorohod map") {
    const std::size_t n = 1001;
    std::vector<double> down(n), up(n);
    for (std::size_t k = 0; k < n; ++k) {
        down[k] = -1e-3 * static_cast<double>(k);
        up[k] = std::sin(1e-3 * static_cast<double>(k)) + 0.1;
    }
    const GridPath g = skorohod_map(from(1e-3, down));
    for (std::size_t k = 0; k < n; ++k) CHECK(g[k] == -down[k]);
    for (double v : skorohod_map(from(1e-3, up)).values) CHECK(v == 0.0);

    Rng rng(3);
    const GridPath z = brownian_path(1.0, TimeGrid{1e-3, 1.0}, rng);
    const GridPath gz = skorohod_map(z);
    for (std::size_t k = 0; k < z.size(); ++k) {
        double brute = 0.0;
        for (std::size_t j = 0; j <= k; ++j) brute = std::max(brute, -z[j]);
        REQUIRE(gz[k] == brute);
        REQUIRE(z[k] + gz[k] >= 0.0);
        if (k > 0) {
            REQUIRE(gz[k] >= gz[k - 1]);
            if (gz[k] > gz[k - 1]) REQUIRE(z[k] + gz[k] == 0.0);
        }
    }
}

TEST_CASE("phi coupling examples") {
    const std::size_t n = 501;
    std::vector<double> zero(n, 0.0), dec(n);
    for (std::size_t k = 0; k < n; ++k) dec[k] = -static_cast<double>(k) * 1e-3;
    const PhiCoupling pc = phi_coupling(from(1e-3, zero), from(1e-3, dec));
    CHECK(pc.p_plus[0] == 0.0);
    CHECK(pc.p_minus[0] == 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        CHECK(pc.idx_plus[k] + 1 >= k);  // p+ = theta up to one step
        CHECK(pc.idx_plus[k] + pc.idx_minus[k] == k);
    }
    CHECK_THROWS_AS(phi_coupling(from(1e-3, zero), from(2e-3, zero)), std::invalid_argument);
    for (double v : psi_construct(from(1e-3, zero), from(1e-3, zero)).values) CHECK(v == 0.0);
}

TEST_CASE("phi coupling on Brownian inputs") {
    Rng rng(17);
    const TimeGrid grid{1e-3, 1.0};
    for (int rep = 0; rep < 20; ++rep) {
        const GridPath zp = brownian_path(1.0, grid, rng);
        const GridPath zm = brownian_path(4.0, grid, rng);
        const PhiCoupling pc = phi_coupling(zp, zm);
        const GridPath gp = skorohod_map(zp), gm = skorohod_map(zm);
        const GridPath psi = psi_construct(zp, zm, pc);
        const double tol = 2.0 * std::max(max_step(zp), max_step(zm));
        for (std::size_t k = 0; k < zp.size(); ++k) {
            const std::size_t i = pc.idx_plus[k], j = pc.idx_minus[k];
            REQUIRE(i + j == k);
            if (k > 0) {
                REQUIRE(i - pc.idx_plus[k - 1] <= 1);
                REQUIRE(j - pc.idx_minus[k - 1] <= 1);
            }
            // Gamma(z+) o p+ and Gamma(z-) o p- agree within one increment.
            REQUIRE(std::fabs(gp[i] - gm[j]) <= tol);
            // Complementarity.
            REQUIRE(std::min(zp[i] + gp[i], zm[j] + gm[j]) <= tol);
            // |Psi| identity: with y = z+ o p+ + z- o p-, |Psi| = y + Gamma(y).
            REQUIRE(psi[k] == zp[i] - zm[j]);
        }
        std::vector<double> y(zp.size());
        for (std::size_t k = 0; k < y.size(); ++k) y[k] = zp[pc.idx_plus[k]] + zm[pc.idx_minus[k]];
        const GridPath gy = skorohod_map(from(grid.dt, y));
        for (std::size_t k = 0; k < y.size(); ++k) REQUIRE(std::fabs(std::fabs(psi[k]) - (y[k] + gy[k])) <= 2.0 * tol);
    }
}

TEST_CASE("two-speed marginals") {
    const TimeGrid grid{1e-3, 1.0};
    const std::size_t n = 3000;
    const TwoSpeedParams unit{1.0, 1.0}, skew{1.0, 2.0};
    std::vector<double> tc(n), sf(n), tc_skew(n), sf_skew(n);
    Rng base(2024);
    for (std::size_t i = 0; i < n; ++i) {
        Rng r0 = base.split(4 * i), r1 = base.split(4 * i + 1), r2 = base.split(4 * i + 2), r3 = base.split(4 * i + 3);
        tc[i] = sample_two_speed_timechange(unit, grid, r0).values.back();
        sf[i] = sample_two_speed_skewflip(unit, grid, r1).values.back();
        tc_skew[i] = sample_two_speed_timechange(skew, grid, r2).values.back();
        sf_skew[i] = sample_two_speed_skewflip(skew, grid, r3).values.back();
    }
    const double crit = ks_critical_one(n);
    CHECK(ks_one_sample(tc, normal_cdf) < crit);
    CHECK(ks_one_sample(sf, normal_cdf) < crit);
    CHECK(ks_two_sample(tc_skew, sf_skew) < ks_critical_two(n, n));
    const double want = 2.0 / 3.0;
    for (const auto* v : {&tc_skew, &sf_skew}) {
        const auto pos = static_cast<std::size_t>(std::count_if(v->begin(), v->end(), [](double x) { return x > 0.0; }));
        const MeanSe p = proportion(pos, n);
        CHECK(std::fabs(p.mean - want) <= 3.0 * p.se);
    }
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = tc[i] * tc[i];
    const MeanSe var = mean_se(sq);
    CHECK(std::fabs(var.mean - 1.0) <= 3.0 * var.se);
}

TEST_CASE("psi marginal on a fine grid") {
    const TimeGrid grid{1e-4, 1.0};
    const std::size_t n = 1000;
    std::vector<double> ps(n);
    Rng base(5);
    for (std::size_t i = 0; i < n; ++i) {
        Rng r = base.split(i);
        ps[i] = sample_two_speed_psi({1.0, 1.0}, grid, r).values.back();
    }
    CHECK(ks_one_sample(ps, normal_cdf) < ks_critical_one(n));
}

TEST_CASE("time change spends little time at zero") {
    Rng rng(8);
    double frac_coarse = 0.0, frac_fine = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        for (double dt : {1e-2, 1e-4}) {
            const GridPath z = sample_two_speed_timechange({1.0, 2.0}, TimeGrid{dt, 1.0}, rng);
            const double tol = 0.01;
            double at_zero = 0.0;
            for (double v : z.values) at_zero += std::fabs(v) < tol * std::sqrt(dt) ? 1.0 : 0.0;
            (dt > 1e-3 ? frac_coarse : frac_fine) += at_zero / static_cast<double>(z.size());
        }
    }
    CHECK(frac_fine <= frac_coarse + 1e-12);
    CHECK(frac_fine / 50.0 < 0.01);
}

TEST_CASE("excursion decomposition") {
    const std::size_t n = 6284;
    const double dt = 2.0 * std::numbers::pi / static_cast<double>(n - 1);
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k) s[k] = std::sin(dt * static_cast<double>(k));
    const ExcursionList ex = decompose_excursions(from(dt, s), 1.0, 1e-9);
    REQUIRE(ex.entries.size() == 2);
    CHECK(ex.entries[0].sign == 1);
    CHECK(ex.entries[1].sign == -1);
    CHECK(std::fabs(ex.right_time(ex.entries[0]) - std::numbers::pi) <= 2.0 * dt);
    CHECK(std::fabs(ex.length(ex.entries[1]) - std::numbers::pi) <= 2.0 * dt);

    std::vector<double> pos(100, 1.0);
    const ExcursionList one = decompose_excursions(from(0.01, pos), 0.02, 1e-9);
    REQUIRE(one.entries.size() == 1);
    CHECK(one.entries[0].left == 0);
    CHECK(one.entries[0].right == 99);

    // Total excursion time of a BM approaches the horizon as min_length shrinks.
    Rng rng(21);
    const GridPath z = brownian_path(1.0, TimeGrid{1e-4, 1.0}, rng);
    double total_big = 0.0, total_small = 0.0;
    const double tol = default_zero_tol(1e-4);
    for (const auto& e : decompose_excursions(z, 0.05, tol).entries) total_big += 1e-4 * static_cast<double>(e.right - e.left);
    for (const auto& e : decompose_excursions(z, 2e-4, tol).entries) total_small += 1e-4 * static_cast<double>(e.right - e.left);
    CHECK(total_small >= total_big);
    CHECK(total_small > 0.95);
}

TEST_CASE("brownian excursion samples") {
    Rng rng(31);
    for (int rep = 0; rep < 50; ++rep) {
        const double ell = 0.5 + 0.01 * rep;
        const int sign = rep % 2 == 0 ? 1 : -1;
        const GridPath e = sample_excursion(ell, sign, 1e-3, rng);
        REQUIRE(e.values.front() == 0.0);
        REQUIRE(e.values.back() == 0.0);
        REQUIRE(std::fabs(e.time(e.size() - 1) - ell) < 1e-12);
        for (std::size_t k = 1; k + 1 < e.size(); ++k) REQUIRE(sign * e[k] > 0.0);
    }
    // E e(t)^2 = 3 t (ell - t) / ell for a unit-variance excursion.
    const std::size_t n = 4000;
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const GridPath e = sample_excursion(1.0, 1, 1e-3, rng);
        sq[i] = e[500] * e[500];
    }
    const MeanSe m = mean_se(sq);
    CHECK(std::fabs(m.mean - 0.75) <= 3.0 * m.se);
}

TEST_CASE("bracketing limits") {
    const DerivedConstants dc = derive_constants(ModelParams{});
    Rng rng(41);
    const TimeGrid grid{1e-3, 2.0};
    const GridPath g = sample_two_speed_skewflip(two_speed_params(dc), grid, rng);
    const BracketingLimits bl = build_bracketing_limits(g, dc, Rng(42));
    const BracketingLimits again = build_bracketing_limits(g, dc, Rng(42));
    CHECK(bl.v_star.values == again.v_star.values);
    const double tol = default_zero_tol(grid.dt);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g[k] >= tol) REQUIRE(bl.v_star[k] == dc.kappa_L);
        if (g[k] <= -tol) REQUIRE(bl.y_star[k] == dc.kappa_R);
    }
    for (const auto& e : bl.excursions.entries) {
        if (e.sign < 0) CHECK(bl.v_star[e.left] == dc.kappa_L);
        if (e.sign > 0) CHECK(bl.y_star[e.left] == dc.kappa_R);
    }
}

TEST_CASE("limit renewal simulator") {
    const DerivedConstants dc = derive_constants(ModelParams{});
    LimitGridConfig cfg;
    cfg.dt = 1e-3;
    Rng a(7), b(7);
    const LimitRenewalSample s1 = simulate_renewal_limit(dc, cfg, a);
    const LimitRenewalSample s2 = simulate_renewal_limit(dc, cfg, b);
    CHECK(s1.s_star == s2.s_star);
    std::size_t down = 0;
    const std::size_t n = 1000;
    for (std::size_t i = 0; i < n; ++i) {
        Rng r = Rng(8).split(i);
        const LimitRenewalSample s = simulate_renewal_limit(dc, cfg, r);
        REQUIRE(s.s_star > 0.0);
        if (s.direction == Direction::down) {
            ++down;
            REQUIRE(s.g_at_renewal < 0.0);
        } else {
            REQUIRE(s.g_at_renewal > 0.0);
        }
    }
    const MeanSe p = proportion(down, n);
    CHECK(std::fabs(p.mean - 0.5) <= 3.0 * p.se);
    LimitGridConfig tight = cfg;
    tight.initial_horizon = 1e-3;
    tight.max_doublings = 0;
    Rng r(9);
    CHECK_THROWS_AS(simulate_renewal_limit(dc, tight, r), ExtensionLimit);
}
