#include "loblab/limit_processes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace loblab {

std::size_t TimeGrid::steps() const {
    if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be > 0");
    if (!(horizon >= 0.0)) throw std::invalid_argument("TimeGrid: horizon must be >= 0");
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

TwoSpeedParams two_speed_params(const DerivedConstants& dc) { return {dc.sigma_plus, dc.sigma_minus}; }

GridPath brownian_path(double variance_rate, const TimeGrid& grid, Rng& rng) {
    const std::size_t n = grid.steps();
    GridPath p{0.0, grid.dt, std::vector<double>(n + 1, 0.0)};
    const double sd = std::sqrt(variance_rate * grid.dt);
    for (std::size_t i = 1; i <= n; ++i) p.values[i] = p.values[i - 1] + sd * rng.normal();
    return p;
}

GridPath skorohod_map(const GridPath& z) {
    GridPath g{z.t0, z.dt, std::vector<double>(z.size(), 0.0)};
    double run = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        run = std::max(run, -z.values[i]);
        g.values[i] = run;
    }
    return g;
}

PhiCoupling phi_coupling(const GridPath& z_plus, const GridPath& z_minus) {
    if (z_plus.size() != z_minus.size() || z_plus.size() == 0 || z_plus.dt != z_minus.dt)
        throw std::invalid_argument("phi_coupling: inputs must share one grid");
    const GridPath gp = skorohod_map(z_plus);
    const GridPath gm = skorohod_map(z_minus);
    const std::size_t n = z_plus.size();
    PhiCoupling pc;
    pc.idx_plus.assign(n, 0);
    pc.idx_minus.assign(n, 0);
    // The largest admissible nu is nondecreasing in theta and moves by at most
    // one grid step, so one forward sweep suffices.
    std::size_t j = 0;
    for (std::size_t k = 0; k < n; ++k) {
        while (j + 1 <= k && gp.values[j + 1] <= gm.values[k - (j + 1)]) ++j;
        pc.idx_plus[k] = j;
        pc.idx_minus[k] = k - j;
    }
    pc.p_plus = {z_plus.t0, z_plus.dt, std::vector<double>(n)};
    pc.p_minus = {z_plus.t0, z_plus.dt, std::vector<double>(n)};
    for (std::size_t k = 0; k < n; ++k) {
        pc.p_plus.values[k] = z_plus.dt * static_cast<double>(pc.idx_plus[k]);
        pc.p_minus.values[k] = z_plus.dt * static_cast<double>(pc.idx_minus[k]);
    }
    return pc;
}

GridPath psi_construct(const GridPath& z_plus, const GridPath& z_minus, const PhiCoupling& pc) {
    GridPath psi{z_plus.t0, z_plus.dt, std::vector<double>(z_plus.size())};
    for (std::size_t k = 0; k < z_plus.size(); ++k)
        psi.values[k] = z_plus.values[pc.idx_plus[k]] - z_minus.values[pc.idx_minus[k]];
    return psi;
}

GridPath psi_construct(const GridPath& z_plus, const GridPath& z_minus) {
    return psi_construct(z_plus, z_minus, phi_coupling(z_plus, z_minus));
}

GridPath sample_two_speed_timechange(const TwoSpeedParams& p, const TimeGrid& grid, Rng& rng, int oversample) {
    if (oversample < 1) throw std::invalid_argument("oversample must be >= 1");
    const std::size_t n = grid.steps();
    const double h = grid.dt / oversample;
    const double sh = std::sqrt(h);
    const double wp = 1.0 / (p.sigma_plus * p.sigma_plus);
    const double wm = 1.0 / (p.sigma_minus * p.sigma_minus);
    GridPath z{0.0, grid.dt, std::vector<double>(n + 1, 0.0)};
    // Theta is piecewise linear: its slope on each fine step is fixed by the
    // sign of B at the step's left end.
    double b = 0.0, theta = 0.0;
    std::size_t k = 1;
    while (k <= n) {
        const double b_next = b + sh * rng.normal();
        const double slope = b >= 0.0 ? wp : wm;
        const double theta_next = theta + slope * h;
        while (k <= n && grid.dt * static_cast<double>(k) <= theta_next) {
            const double frac = (grid.dt * static_cast<double>(k) - theta) / (theta_next - theta);
            z.values[k] = b + frac * (b_next - b);
            ++k;
        }
        b = b_next;
        theta = theta_next;
    }
    return z;
}

GridPath sample_two_speed_psi(const TwoSpeedParams& p, const TimeGrid& grid, Rng& rng) {
    const GridPath zp = brownian_path(p.sigma_plus * p.sigma_plus, grid, rng);
    const GridPath zm = brownian_path(p.sigma_minus * p.sigma_minus, grid, rng);
    return psi_construct(zp, zm);
}

double two_speed_step(const TwoSpeedParams& p, double g, double dt, Rng& rng, bool& touched) {
    // Standardized reflected coordinate |g| / sigma_sign runs as a unit BM in
    // this clock; a touch of zero redraws the sign of the current excursion.
    const double beta = p.sigma_minus / (p.sigma_plus + p.sigma_minus);
    int sign = g > 0.0 ? 1 : (g < 0.0 ? -1 : 0);
    const double a = sign > 0 ? g / p.sigma_plus : (sign < 0 ? -g / p.sigma_minus : 0.0);
    const double y = a + std::sqrt(dt) * rng.normal();
    touched = y <= 0.0 || sign == 0 || rng.uniform() < std::exp(-2.0 * a * y / dt);
    if (touched) sign = rng.bernoulli(beta) ? 1 : -1;
    const double r = std::fabs(y);
    return sign > 0 ? p.sigma_plus * r : -p.sigma_minus * r;
}

GridPath sample_two_speed_skewflip(const TwoSpeedParams& p, const TimeGrid& grid, Rng& rng) {
    const std::size_t n = grid.steps();
    const double s = p.sigma_plus + p.sigma_minus;
    const double beta = p.sigma_minus / s;
    // Skew BM X in the clock u = s^2 theta, reported as phi(X(u)) / s.
    const double du = s * s * grid.dt;
    const double sdu = std::sqrt(du);
    GridPath z{0.0, grid.dt, std::vector<double>(n + 1, 0.0)};
    double r = 0.0;  // |X|
    int sign = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double y = r + sdu * rng.normal();
        const bool touched = y <= 0.0 || sign == 0 || rng.uniform() < std::exp(-2.0 * r * y / du);
        if (touched) sign = rng.bernoulli(beta) ? 1 : -1;
        r = std::fabs(y);
        z.values[k] = sign > 0 ? p.sigma_plus * r / s : -p.sigma_minus * r / s;
    }
    return z;
}

ExcursionList decompose_excursions(const GridPath& path, double min_length, double zero_tol) {
    if (min_length < 0.0) throw std::invalid_argument("decompose_excursions: min_length must be >= 0");
    ExcursionList out;
    out.t0 = path.t0;
    out.dt = path.dt;
    const std::size_t n = path.size();
    if (n == 0) return out;
    auto sgn = [&](std::size_t i) {
        const double v = path.values[i];
        if (std::fabs(v) < zero_tol) return 0;
        return v > 0.0 ? 1 : -1;
    };
    std::size_t i = 0;
    std::size_t prev_right = 0;
    bool have_prev = false;
    while (i < n) {
        const int s = sgn(i);
        if (s == 0) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && sgn(j + 1) == s) ++j;
        std::size_t left = i > 0 ? i - 1 : 0;
        const std::size_t right = j + 1 < n ? j + 1 : n - 1;
        // A direct sign flip between neighbours: the endpoint shared by the two
        // runs is whichever neighbour sits closer to zero.
        if (i > 0 && sgn(i - 1) == -s) {
            left = std::fabs(path.values[i - 1]) <= std::fabs(path.values[i]) ? i - 1 : i;
        }
        std::size_t r = right;
        if (j + 1 < n && sgn(j + 1) == -s) {
            r = std::fabs(path.values[j + 1]) < std::fabs(path.values[j]) ? j + 1 : j;
        }
        if (have_prev && left < prev_right) left = prev_right;
        if (r > left && path.dt * static_cast<double>(r - left) >= min_length) {
            out.entries.push_back({left, r, s});
            prev_right = r;
            have_prev = true;
        }
        i = j + 1;
    }
    return out;
}

BracketingLimits build_bracketing_limits(const GridPath& gstar, const DerivedConstants& dc, const Rng& rng,
                                         double zero_tol) {
    if (zero_tol < 0.0) zero_tol = default_zero_tol(gstar.dt);
    BracketingLimits out;
    out.excursions = decompose_excursions(gstar, 0.0, zero_tol);
    const std::size_t n = gstar.size();
    out.v_star = {gstar.t0, gstar.dt, std::vector<double>(n, dc.kappa_L)};
    out.y_star = {gstar.t0, gstar.dt, std::vector<double>(n, dc.kappa_R)};
    const double one_m_r2 = 1.0 - dc.rho * dc.rho;
    const double sd_v = std::sqrt(one_m_r2 * dc.sigma_plus * dc.sigma_plus * gstar.dt);
    const double sd_y = std::sqrt(one_m_r2 * dc.sigma_minus * dc.sigma_minus * gstar.dt);
    const double slope_v = dc.rho * dc.sigma_plus / dc.sigma_minus;
    const double slope_y = dc.rho * dc.sigma_minus / dc.sigma_plus;
    for (std::size_t k = 0; k < out.excursions.entries.size(); ++k) {
        const Excursion& e = out.excursions.entries[k];
        Rng crng = rng.split(k);
        // The right endpoint belongs to the excursion only when the run is cut
        // off by the end of the path.
        const bool open_end = e.right == n - 1 && gstar.values[e.right] * e.sign >= zero_tol;
        const std::size_t last = open_end ? e.right : e.right - 1;
        double c = 0.0;
        for (std::size_t i = e.left + 1; i <= last; ++i) {
            if (e.sign < 0) {
                c += sd_v * crng.normal();
                out.v_star.values[i] = dc.kappa_L + c - slope_v * gstar.values[i];
            } else {
                c += sd_y * crng.normal();
                out.y_star.values[i] = dc.kappa_R + c - slope_y * gstar.values[i];
            }
        }
    }
    return out;
}

LimitRenewalSample simulate_renewal_limit(const DerivedConstants& dc, const LimitGridConfig& cfg, Rng& rng) {
    if (!(cfg.dt > 0.0) || !(cfg.initial_horizon > 0.0)) throw std::invalid_argument("LimitGridConfig: dt and horizon must be > 0");
    const TwoSpeedParams tp = two_speed_params(dc);
    const double dt = cfg.dt;
    const double sdt = std::sqrt(dt);
    const double one_m_r2 = 1.0 - dc.rho * dc.rho;
    const double sd_v = std::sqrt(one_m_r2) * dc.sigma_plus * sdt;
    const double sd_y = std::sqrt(one_m_r2) * dc.sigma_minus * sdt;
    const double slope_v = dc.rho * dc.sigma_plus / dc.sigma_minus;
    const double slope_y = dc.rho * dc.sigma_minus / dc.sigma_plus;
    const double var_v = dc.sigma_plus * dc.sigma_plus * dt;
    const double var_y = dc.sigma_minus * dc.sigma_minus * dt;

    Rng path_rng = rng.split(0);
    std::uint64_t excursion = 0;
    Rng crng = rng.split(1).split(excursion);
    double g = 0.0, t = 0.0, c = 0.0;
    double v = dc.kappa_L, y = dc.kappa_R;
    double horizon = cfg.initial_horizon;
    int doublings = 0;
    for (;;) {
        bool touched = false;
        const double g_new = two_speed_step(tp, g, dt, path_rng, touched);
        const bool fresh = touched || (g_new > 0.0) != (g > 0.0);
        if (fresh) {
            ++excursion;
            crng = rng.split(1).split(excursion);
            c = 0.0;
        }
        // Bracketing values at the step's ends; a fresh excursion restarts
        // from the reset level.
        double v0 = fresh ? dc.kappa_L : v;
        double y0 = fresh ? dc.kappa_R : y;
        double v1 = dc.kappa_L, y1 = dc.kappa_R;
        if (g_new < 0.0) {
            if (!fresh) c += sd_v * crng.normal();
            v1 = dc.kappa_L + c - slope_v * g_new;
        } else if (g_new > 0.0) {
            if (!fresh) c += sd_y * crng.normal();
            y1 = dc.kappa_R + c - slope_y * g_new;
        }
        if (g_new < 0.0) {
            double frac = -1.0;
            if (v1 <= 0.0) {
                frac = v0 / (v0 - v1);
            } else if (path_rng.uniform() < std::exp(-2.0 * v0 * v1 / var_v)) {
                frac = v0 / (v0 + v1);
            }
            if (frac >= 0.0) return {Direction::down, t + frac * dt, g + frac * (g_new - g) < 0.0 ? g + frac * (g_new - g) : g_new};
        } else if (g_new > 0.0) {
            double frac = -1.0;
            if (y1 >= 0.0) {
                frac = y0 / (y0 - y1);
            } else if (path_rng.uniform() < std::exp(-2.0 * y0 * y1 / var_y)) {
                frac = y0 / (y0 + y1);
            }
            if (frac >= 0.0) return {Direction::up, t + frac * dt, g + frac * (g_new - g) > 0.0 ? g + frac * (g_new - g) : g_new};
        }
        g = g_new;
        v = v1;
        y = y1;
        t += dt;
        if (t > horizon) {
            if (++doublings > cfg.max_doublings)
                throw ExtensionLimit("no renewal after " + std::to_string(cfg.max_doublings) + " horizon doublings");
            horizon *= 2.0;
        }
    }
}

GridPath sample_excursion(double ell, int sign, double dt, Rng& rng) {
    if (!(ell >= 4.0 * dt) || !(dt > 0.0)) throw std::invalid_argument("sample_excursion: need ell >= 4*dt");
    const std::size_t m = static_cast<std::size_t>(std::llround(ell / dt));
    const double h = ell / static_cast<double>(m);
    GridPath e{0.0, h, std::vector<double>(m + 1, 0.0)};
    std::array<double, 3> b{0.0, 0.0, 0.0};
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const double rem = ell - h * static_cast<double>(k);
        const double shrink = (rem - h) / rem;
        const double sd = std::sqrt(h * shrink);
        double r2 = 0.0;
        for (double& bi : b) {
            bi = bi * shrink + sd * rng.normal();
            r2 += bi * bi;
        }
        e.values[k + 1] = (sign < 0 ? -1.0 : 1.0) * std::sqrt(r2);
    }
    return e;
}

}  // namespace loblab
