#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "loblab/model_params.hpp"

namespace loblab {

struct QuadratureConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int series_terms_max = 200;
    // Improper integrals over excursion length run over [ell_min, ell_max];
    // the pieces outside are bounded or taken in closed form.
    double ell_min = 1e-4;
    double ell_max = 1e3;
};

// Bit flags attached to numeric results.
enum ResultFlag : unsigned {
    kSeriesNonconverged = 1u << 0,  // term cap hit; value is the partial sum
    kBelowNoiseFloor = 1u << 1,     // alternating sum lost to cancellation; value set to 0
    kLargeArgumentCutoff = 1u << 2, // cap hit at huge argument; value is exponentially small
    kTailUncertain = 1u << 3,       // truncation-error bound exceeds rel_tol
    kQuadratureError = 1u << 4,     // quadrature error estimate exceeds its target
};
std::vector<std::string> flag_names(unsigned flags);

struct SeriesResult {
    double value = 0.0;
    double error = 0.0;
    unsigned flags = 0;
};

// Wedge first-passage problem for correlated BMs (D, E) started at
// (v1, -x1), variance rates sigma_plus^2 and sigma_minus^2, correlation rho.
struct QuadrantParams {
    double v1 = 0.0;
    double x1 = 0.0;
    double sigma_plus = 1.0;
    double sigma_minus = 1.0;
    double rho = 0.0;
    double alpha = 0.0;   // wedge angle in (0, pi/2]
    double theta0 = 0.0;  // initial angle in (0, alpha)
    double r0 = 0.0;      // initial radius in the whitened coordinates
};

QuadrantParams make_quadrant_params(double v1, double x1, double sigma_plus, double sigma_minus, double rho);
QuadrantParams make_quadrant_params(double v1, double x1, const DerivedConstants& dc);

struct ExitProbs {
    double d_first = 0.0;
    double e_first = 0.0;
};
ExitProbs exit_probs(const QuadrantParams& q);

// Joint density of (tau_D, tau_E) at (s, t), s != t.
SeriesResult metzler_density(double s, double t, const QuadrantParams& q, const QuadratureConfig& cfg = {});
// Density of tau_D given D exits first, and of tau_E given E exits first.
SeriesResult conditional_fpt_density_D(double s, const QuadrantParams& q, const QuadratureConfig& cfg = {});
SeriesResult conditional_fpt_density_E(double t, const QuadrantParams& q, const QuadratureConfig& cfg = {});
// Mass of the joint density on {s < t} (D first) or {s > t} (E first).
SeriesResult metzler_mass(const QuadrantParams& q, bool d_first, const QuadratureConfig& cfg = {});

// Distribution function built from a density on (0, inf): exact panel
// integrals on log-spaced breakpoints up to x_max, cubic Hermite in between
// (the density supplies the slopes), and an
// adaptive integral for arguments beyond x_max.
class TabulatedCdf {
public:
    TabulatedCdf(std::function<double(double)> density, double x_max, int panels, double normalizer,
                 double x_min = 1e-4);
    double operator()(double x) const;
    double mass_to_max() const { return cum_.back(); }

private:
    std::function<double(double)> density_;
    std::vector<double> x_;
    std::vector<double> cum_;
    std::vector<double> dens_;
    double normalizer_;
};

TabulatedCdf conditional_fpt_cdf_D(const QuadrantParams& q, const QuadratureConfig& cfg = {});
TabulatedCdf conditional_fpt_cdf_E(const QuadrantParams& q, const QuadratureConfig& cfg = {});

// Density in s of the first zero of V* (resp. Y*) during a negative (resp.
// positive) excursion of G* of length ell, 0 < s < ell. Defective: it integrates
// to the probability of hitting zero before the excursion ends.
SeriesResult p_vstar_density(double s, double ell, const DerivedConstants& dc, const QuadratureConfig& cfg = {});
SeriesResult p_ystar_density(double s, double ell, const DerivedConstants& dc, const QuadratureConfig& cfg = {});
SeriesResult p_vstar_total(double ell, const DerivedConstants& dc, const QuadratureConfig& cfg = {});
SeriesResult p_ystar_total(double ell, const DerivedConstants& dc, const QuadratureConfig& cfg = {});
// Hitting time given a hit before ell, as a distribution function on (0, ell).
TabulatedCdf p_vstar_hit_cdf(double ell, const DerivedConstants& dc, const QuadratureConfig& cfg = {});

// Length-integrated quantities over a fixed product rule in (ell, s). One
// table serves the intensities and the characteristic function at every
// alpha, so that cf(0) = 1 holds to the last bit.
class RenewalTables {
public:
    explicit RenewalTables(const DerivedConstants& dc, const QuadratureConfig& cfg = {});

    double lambda_minus() const { return v_.lambda; }
    double lambda_plus() const { return y_.lambda; }
    double error_minus() const { return v_.error; }
    double error_plus() const { return y_.error; }
    unsigned flags() const { return flags_; }

    struct Cf {
        std::complex<double> down;
        std::complex<double> up;
        std::complex<double> all;
        double error = 0.0;
        unsigned flags = 0;
    };
    Cf cf(double alpha) const;

private:
    struct Side {
        double inv_sigma = 1.0;    // excursion-measure weight of this sign
        std::vector<double> ell;   // outer nodes
        std::vector<double> w_ell; // outer weights including 1/sqrt(2 pi ell^3)
        std::vector<std::vector<double>> s;   // inner nodes per outer node
        std::vector<std::vector<double>> w_s; // inner weights times density
        std::vector<double> total;            // p(ell) at outer nodes
        std::vector<double> s_tail, w_tail;   // inner rule at ell_max
        double total_tail = 0.0;
        double lambda = 0.0;
        double error = 0.0;
        std::vector<double> log_ell, log_miss;  // log(1 - p) against log(ell), outer nodes
    };
    void build_side(Side& side, bool v_side);
    std::complex<double> numerator(const Side& side, double alpha) const;
    std::complex<double> miss_integral(const Side& side, double alpha, double& err) const;

    DerivedConstants dc_;
    QuadratureConfig cfg_;
    Side v_, y_;
    unsigned flags_ = 0;
};

struct RenewalIntensities {
    double lambda_minus = 0.0;
    double lambda_plus = 0.0;
    double error_minus = 0.0;
    double error_plus = 0.0;
    unsigned flags = 0;
};
RenewalIntensities renewal_intensities(const DerivedConstants& dc, const QuadratureConfig& cfg = {});
SeriesResult renewal_down_prob(const DerivedConstants& dc, const QuadratureConfig& cfg = {});
RenewalTables::Cf renewal_cf(double alpha, const DerivedConstants& dc, const QuadratureConfig& cfg = {});

// int_0^inf (1 - e^{i alpha l}) / sqrt(2 pi l^3) dl by quadrature, against the
// closed form sqrt|alpha| (1 - sign(alpha) i).
struct HalfStableIdentity {
    std::complex<double> numeric;
    std::complex<double> closed_form;
    double error = 0.0;
};
HalfStableIdentity half_stable_identity(double alpha);
std::complex<double> half_stable_closed_form(double alpha);

// Excursion kernels: first-passage density K, absorbed-BM transition density
// p0, and the excursion transition h (interior case, and the s = a = 0 entrance
// case selected by s == 0).
double kernel_K(double t, double x);
double kernel_p0(double t, double x, double y);
double kernel_h(double ell, double s, double a, double t, double b);

}  // namespace loblab
