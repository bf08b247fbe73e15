#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "loblab/lob_simulator.hpp"
#include "loblab/model_params.hpp"
#include "loblab/rng.hpp"

namespace loblab {

struct GridPath {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
    double operator[](std::size_t i) const { return values[i]; }
};

// Uniform grid on [0, horizon] with step dt; horizon is rounded to a whole
// number of steps.
struct TimeGrid {
    double dt = 1e-3;
    double horizon = 1.0;
    std::size_t steps() const;
};

struct TwoSpeedParams {
    double sigma_plus = 1.0;
    double sigma_minus = 1.0;
};
TwoSpeedParams two_speed_params(const DerivedConstants& dc);

GridPath brownian_path(double variance_rate, const TimeGrid& grid, Rng& rng);

// Gamma(z)(t) = max(0, max_{v <= t} -z(v)).
GridPath skorohod_map(const GridPath& z);

struct PhiCoupling {
    GridPath p_plus;
    GridPath p_minus;
    std::vector<std::size_t> idx_plus;   // p_plus / dt
    std::vector<std::size_t> idx_minus;  // p_minus / dt
};

// p_plus(theta) = largest grid nu <= theta with Gamma(z+)(nu) <= Gamma(z-)(theta - nu).
PhiCoupling phi_coupling(const GridPath& z_plus, const GridPath& z_minus);
GridPath psi_construct(const GridPath& z_plus, const GridPath& z_minus);
GridPath psi_construct(const GridPath& z_plus, const GridPath& z_minus, const PhiCoupling& pc);

// Time change of a standard BM by the inverse of its speed-weighted occupation.
// The auxiliary BM runs on a grid oversample times finer than the output grid.
GridPath sample_two_speed_timechange(const TwoSpeedParams& p, const TimeGrid& grid, Rng& rng,
                                     int oversample = 4);
GridPath sample_two_speed_psi(const TwoSpeedParams& p, const TimeGrid& grid, Rng& rng);
// Reflected BM whose excursions carry independent signs, + with probability
// sigma_minus / (sigma_plus + sigma_minus), then scaled per sign. A step whose
// reflected bridge touches zero starts a fresh excursion and redraws the sign.
GridPath sample_two_speed_skewflip(const TwoSpeedParams& p, const TimeGrid& grid, Rng& rng);

// One exact grid step of the two-speed process from g over time dt.
// Sets touched when the underlying reflected path met zero inside the step.
double two_speed_step(const TwoSpeedParams& p, double g, double dt, Rng& rng, bool& touched);

struct Excursion {
    std::size_t left;
    std::size_t right;
    int sign;  // +1 or -1
};

struct ExcursionList {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<Excursion> entries;

    double left_time(const Excursion& e) const { return t0 + dt * static_cast<double>(e.left); }
    double right_time(const Excursion& e) const { return t0 + dt * static_cast<double>(e.right); }
    double length(const Excursion& e) const { return dt * static_cast<double>(e.right - e.left); }
};

inline double default_zero_tol(double dt) { return 0.1 * std::sqrt(dt); }

// Maximal runs of grid points with |value| >= zero_tol and one strict sign.
// Endpoints are the grid points bracketing each run (clamped to the path ends);
// runs shorter than min_length are dropped.
ExcursionList decompose_excursions(const GridPath& path, double min_length, double zero_tol);

struct BracketingLimits {
    GridPath v_star;
    GridPath y_star;
    ExcursionList excursions;
};

// V* = kappa_L off negative excursions of G*; on the k-th negative excursion
// V*(L + t) = kappa_L + C_k(t) - (rho sigma+/sigma-) G*(L + t) with C_k a fresh
// BM of rate (1 - rho^2) sigma+^2 from rng.split(k). Y* mirrors this on
// positive excursions.
BracketingLimits build_bracketing_limits(const GridPath& gstar, const DerivedConstants& dc, const Rng& rng,
                                         double zero_tol = -1.0);

struct LimitGridConfig {
    double dt = 1e-4;
    double initial_horizon = 4.0;
    int max_doublings = 12;
};

struct LimitRenewalSample {
    Direction direction = Direction::down;
    double s_star = 0.0;
    double g_at_renewal = 0.0;
};

class ExtensionLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

LimitRenewalSample simulate_renewal_limit(const DerivedConstants& dc, const LimitGridConfig& cfg, Rng& rng);

// Brownian excursion of length ell (Bessel(3) bridge) on the grid t = k*dt,
// with the last point at ell. Negated for sign < 0.
GridPath sample_excursion(double ell, int sign, double dt, Rng& rng);

}  // namespace loblab
