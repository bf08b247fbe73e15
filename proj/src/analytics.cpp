#include "loblab/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/interpolators/barycentric_rational.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "loblab/bessel.hpp"

namespace loblab {

namespace quad = boost::math::quadrature;
using std::numbers::pi;
using cplx = std::complex<double>;

std::vector<std::string> flag_names(unsigned flags) {
    std::vector<std::string> out;
    if (flags & kSeriesNonconverged) out.emplace_back("series_nonconverged");
    if (flags & kBelowNoiseFloor) out.emplace_back("below_noise_floor");
    if (flags & kLargeArgumentCutoff) out.emplace_back("large_argument_cutoff");
    if (flags & kTailUncertain) out.emplace_back("tail_uncertain");
    if (flags & kQuadratureError) out.emplace_back("quadrature_error");
    return out;
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
const double kSqrt2Pi = std::sqrt(2.0 * pi);
// Beyond this exponent the cancelling sum is below double-precision noise.
constexpr double kDecayCutoff = 32.0;

// scale * sum_n coef(n) Ie_{n nu}(z), scale = pre * exp(log_w). Terms are
// compared in final units: stop after three consecutive terms below
// abs_tol * (1 + |partial|) once the orders are past the term peak.
// The coefficients oscillate with phase step phase (pi for an alternating
// sign). For large z the terms are a sampled Gaussian in n and the sum is
// exp(-phase^2 z / (2 nu^2)) times the term scale, which drops below double
// precision cancellation long before the terms themselves decay.
template <class Coef>
SeriesResult bessel_series(double pre, double log_w, double z, double nu, double phase, Coef coef,
                           const QuadratureConfig& cfg, double unit = 1.0) {
    SeriesResult r;
    const double scale = pre * std::exp(log_w);
    if (scale == 0.0 || !std::isfinite(scale)) return r;
    const double decay = phase * phase * z / (2.0 * nu * nu);
    if (decay > kDecayCutoff) {
        // Term magnitudes peak near n ~ sqrt(z)/nu at about scale / sqrt(2 pi z).
        const double peak_n = std::max(1.0, std::sqrt(z) / nu);
        r.error = scale * peak_n * peak_n * peak_n * std::exp(-decay);
        r.flags |= kBelowNoiseFloor;
        return r;
    }
    double partial = 0.0, abssum = 0.0, last = 0.0;
    int quiet = 0;
    bool capped = true;
    for (int n = 1; n <= cfg.series_terms_max; ++n) {
        const double t = scale * coef(n) * bessel_i_scaled(n * nu, z);
        partial += t;
        abssum += std::fabs(t);
        last = std::fabs(t);
        // Before the Gaussian peak at n nu ~ sqrt(2z) small terms say nothing
        // about the tail, so the quiet count starts only past it.
        const bool past_peak = n * nu > 2.0 * std::sqrt(z) + 2.0;
        quiet = past_peak && last < cfg.abs_tol * (unit + std::fabs(partial)) ? quiet + 1 : 0;
        if (quiet >= 3) {
            capped = false;
            break;
        }
    }
    const double floor = 64.0 * kEps * abssum;
    if (capped) {
        // Orders that have not outrun sqrt(z) at the cap leave a partial sum
        // dominated by cancellation; the true sum is below exp(-decay).
        const double reach = cfg.series_terms_max * nu;
        if (reach * reach < 80.0 * z) {
            r.value = 0.0;
            r.error = abssum * std::exp(-decay);
            r.flags |= kLargeArgumentCutoff;
            return r;
        }
        r.flags |= kSeriesNonconverged;
    }
    if (std::fabs(partial) < floor) {
        r.value = 0.0;
        r.error = floor;
        r.flags |= kBelowNoiseFloor;
        return r;
    }
    r.value = partial;
    r.error = std::max(last, floor);
    return r;
}

struct SideConst {
    double kappa;  // > 0
    double sigma;  // own variance-rate sd
    double rho;
    double alpha;
    double inv_sigma_weight;  // 1/sigma of the opposite side, the excursion-measure weight
};

SideConst v_side(const DerivedConstants& dc) {
    return {dc.kappa_L, dc.sigma_plus, dc.rho, std::acos(-dc.rho), 1.0 / dc.sigma_minus};
}
SideConst y_side(const DerivedConstants& dc) {
    return {-dc.kappa_R, dc.sigma_minus, dc.rho, std::acos(-dc.rho), 1.0 / dc.sigma_plus};
}

SeriesResult side_density(double s, double ell, const SideConst& c, const QuadratureConfig& cfg) {
    if (!(s > 0.0) || !(s < ell)) throw DomainError("bracketing hit density: need 0 < s < ell");
    const double one_m_r2 = 1.0 - c.rho * c.rho;
    const double ca = std::cos(c.alpha), c2a = std::cos(2.0 * c.alpha), sa = std::sin(c.alpha);
    const double d = ell - s;
    const double k = c.kappa * c.kappa / (2.0 * c.sigma * c.sigma * one_m_r2 * s);
    const double den = d + (ell - s * c2a);
    const double pre = std::sqrt(2.0 * pi * one_m_r2 * ell * ell * ell) * pi * pi * c.sigma * sa /
                       (2.0 * c.kappa * c.alpha * c.alpha * c.alpha * d * std::sqrt(s * (ell - s * ca * ca)));
    const double z = k * d / den;
    const double log_w = -k * s * (1.0 - c2a) / den;
    const double nu = pi / (2.0 * c.alpha);
    return bessel_series(pre, log_w, z, nu, pi, [](int n) { return (n % 2 ? 1.0 : -1.0) * n * n; }, cfg);
}

double side_density_value(double s, double ell, const SideConst& c, const QuadratureConfig& cfg) {
    if (!(s > 0.0) || !(s < ell)) return 0.0;
    return side_density(s, ell, c, cfg).value;
}

SeriesResult side_total(double ell, const SideConst& c, const QuadratureConfig& cfg) {
    if (!(ell > 0.0)) throw DomainError("bracketing hit probability: need ell > 0");
    unsigned flags = 0;
    auto f = [&](double s) {
        if (!(s > 0.0) || !(s < ell)) return 0.0;
        const SeriesResult r = side_density(s, ell, c, cfg);
        flags |= r.flags & (kSeriesNonconverged);
        return r.value;
    };
    SeriesResult r;
    double l1 = 0.0;
    // Split at the bulk of the hitting mass so long excursions stay resolved.
    const double mid = std::min(ell, 1.0);
    quad::tanh_sinh<double> ts;
    r.value = ts.integrate(f, 0.0, mid, cfg.rel_tol, &r.error, &l1);
    if (ell > mid) {
        double e2 = 0.0;
        auto g = [&](double y) {
            const double s = std::exp(y);
            return s * f(s);
        };
        r.value += ts.integrate(g, 0.0, std::log(ell), cfg.rel_tol, &e2, &l1);
        r.error += e2;
    }
    r.flags = flags;
    if (r.error > std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(r.value)) * 10.0) r.flags |= kQuadratureError;
    return r;
}

// Tanh-sinh nodes and weights on (a, b) with step h.
void de_rule(double a, double b, double h, std::vector<double>& x, std::vector<double>& w) {
    const int m = static_cast<int>(std::ceil(3.4 / h));
    for (int k = -m; k <= m; ++k) {
        const double t = k * h;
        const double u = pi * std::sinh(t);
        const double lo = 1.0 / (1.0 + std::exp(u));   // 1 - fraction
        const double hi = 1.0 / (1.0 + std::exp(-u));  // fraction
        const double dw = pi * std::cosh(t) * lo * hi;
        const double xk = t < 0.0 ? a + (b - a) * hi : b - (b - a) * lo;
        if (!(xk > a) || !(xk < b)) continue;
        x.push_back(xk);
        w.push_back(h * (b - a) * dw);
    }
}

// Inner rule for int_0^ell g(s) ds: one tanh-sinh panel for short lengths;
// for long ones a panel on (0, 1) plus one in log s over (1, ell).
void inner_rule(double ell, double h, std::vector<double>& s, std::vector<double>& w) {
    if (ell <= 2.0) {
        de_rule(0.0, ell, h, s, w);
        return;
    }
    de_rule(0.0, 1.0, h, s, w);
    std::vector<double> y, wy;
    de_rule(0.0, std::log(ell), h, y, wy);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double sv = std::exp(y[i]);
        if (!(sv < ell)) continue;
        s.push_back(sv);
        w.push_back(wy[i] * sv);
    }
}

// Gauss-Legendre 30-point rule on (a, b).
void gl_rule(double a, double b, std::vector<double>& x, std::vector<double>& w) {
    using G = quad::gauss<double, 30>;
    const auto& ab = G::abscissa();
    const auto& wt = G::weights();
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    // Increasing order: the outer nodes double as interpolation abscissae.
    for (std::size_t i = ab.size(); i-- > 0;) {
        x.push_back(c - r * ab[i]);
        w.push_back(r * wt[i]);
    }
    for (std::size_t i = 0; i < ab.size(); ++i) {
        x.push_back(c + r * ab[i]);
        w.push_back(r * wt[i]);
    }
}

// int_L^inf e^{i alpha l} l^{-3/2} dl.
cplx oscillatory_tail(double alpha, double L, double* err) {
    const double om = std::fabs(alpha);
    auto f = [L](double t) { return std::pow(t + L, -1.5); };
    quad::ooura_fourier_cos<double> oc;
    quad::ooura_fourier_sin<double> os;
    const auto c = oc.integrate(f, om);
    const auto s = os.integrate(f, om);
    if (err) *err = c.second * std::fabs(c.first) + s.second * std::fabs(s.first);
    const cplx shifted(c.first, (alpha > 0 ? 1.0 : -1.0) * s.first);
    return std::polar(1.0, alpha * L) * shifted;
}

// int_0^eps (1 - e^{i alpha l}) l^{-3/2} dl as a power series in alpha * eps.
cplx small_length_miss(double alpha, double eps) {
    cplx sum = 0.0, ia_pow = 1.0;
    double fact = 1.0;
    for (int k = 1; k < 60; ++k) {
        ia_pow *= cplx(0.0, alpha * eps);
        fact *= k;
        const cplx term = -ia_pow / (fact * (k - 0.5));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum / std::sqrt(eps);
}

}  // namespace

// ---------------------------------------------------------------- quadrant

QuadrantParams make_quadrant_params(double v1, double x1, double sigma_plus, double sigma_minus, double rho) {
    if (!(v1 > 0.0)) throw DomainError("quadrant: v1 must be > 0");
    if (!(x1 < 0.0)) throw DomainError("quadrant: x1 must be < 0");
    if (!(sigma_plus > 0.0) || !(sigma_minus > 0.0)) throw DomainError("quadrant: sigmas must be > 0");
    if (!(rho > -1.0) || !(rho <= 0.0)) throw DomainError("quadrant: rho must lie in (-1, 0]");
    QuadrantParams q;
    q.v1 = v1;
    q.x1 = x1;
    q.sigma_plus = sigma_plus;
    q.sigma_minus = sigma_minus;
    q.rho = rho;
    const double sq = std::sqrt(1.0 - rho * rho);
    q.alpha = std::atan2(sq, -rho);
    q.theta0 = std::atan2(sigma_plus * sq * std::fabs(x1), sigma_minus * v1 + sigma_plus * rho * x1);
    q.r0 = std::sqrt((v1 * v1 / (sigma_plus * sigma_plus) + 2.0 * rho * v1 * x1 / (sigma_plus * sigma_minus) +
                      x1 * x1 / (sigma_minus * sigma_minus)) /
                     (1.0 - rho * rho));
    return q;
}

QuadrantParams make_quadrant_params(double v1, double x1, const DerivedConstants& dc) {
    return make_quadrant_params(v1, x1, dc.sigma_plus, dc.sigma_minus, dc.rho);
}

ExitProbs exit_probs(const QuadrantParams& q) {
    const double p = q.theta0 / q.alpha;
    return {p, 1.0 - p};
}

namespace {

// unit = 1 is the absolute stopping rule; unit = 0 stops relative to the
// partial sum, which integrands over long ranges need.
SeriesResult metzler_series(double s, double t, const QuadrantParams& q, const QuadratureConfig& cfg, double unit) {
    if (!(s > 0.0) || !(t > 0.0) || s == t) throw DomainError("metzler_density: need s, t > 0 and s != t");
    const double a = std::min(s, t), b = std::max(s, t);
    const double ang = s < t ? q.alpha - q.theta0 : q.theta0;
    const double ca = std::cos(q.alpha), c2a = std::cos(2.0 * q.alpha);
    const double den = (b - a) + (b - a * c2a);
    const double pre = pi * std::sin(q.alpha) /
                       (2.0 * q.alpha * q.alpha * (b - a) * std::sqrt(a * (b - a * ca * ca)));
    const double r2 = q.r0 * q.r0;
    const double z = r2 / (2.0 * a) * (b - a) / den;
    const double log_w = -r2 * (1.0 - c2a) / (2.0 * den);
    const double nu = pi / (2.0 * q.alpha);
    const double step = pi * ang / q.alpha;
    return bessel_series(pre, log_w, z, nu, std::min(step, 2.0 * pi - step), [step](int n) { return n * std::sin(n * step); }, cfg, unit);
}

}  // namespace

SeriesResult metzler_density(double s, double t, const QuadrantParams& q, const QuadratureConfig& cfg) {
    return metzler_series(s, t, q, cfg, 1.0);
}

namespace {

SeriesResult conditional_density(double x, const QuadrantParams& q, const QuadratureConfig& cfg, bool d_side) {
    if (!(x > 0.0)) throw DomainError("conditional first-passage density: argument must be > 0");
    unsigned flags = 0;
    auto f = [&](double u) {
        if (!(u > 0.0) || x + u == x || !std::isfinite(u)) return 0.0;
        const SeriesResult r = d_side ? metzler_series(x, x + u, q, cfg, 0.0) : metzler_series(x + u, x, q, cfg, 0.0);
        flags |= r.flags & kSeriesNonconverged;
        return r.value;
    };
    const double p = d_side ? q.theta0 / q.alpha : (q.alpha - q.theta0) / q.alpha;
    SeriesResult r;
    // The joint density integrates to the one-sided first-passage density of
    // the exiting coordinate, which bounds the answer.
    const double start = d_side ? q.v1 : -q.x1;
    const double sig = d_side ? q.sigma_plus : q.sigma_minus;
    const double bound = start / (sig * std::sqrt(2.0 * pi * x * x * x)) *
                         std::exp(-start * start / (2.0 * sig * sig * x)) / p;
    if (bound < 1e-3 * cfg.abs_tol) {
        r.error = bound;
        r.flags = kBelowNoiseFloor;
        return r;
    }
    // Relative accuracy where the density is sizeable, abs_tol where it is not.
    const double tol = std::min(1e-3, std::max(cfg.rel_tol, cfg.abs_tol / bound));
    // The peak in u sits near the radius scale; split there and send the
    // heavy tail to exp-sinh.
    const double split = std::max(x, q.r0 * q.r0);
    double l1 = 0.0, e2 = 0.0;
    quad::tanh_sinh<double> ts(9);
    quad::exp_sinh<double> es;
    r.value = ts.integrate(f, 0.0, split, tol, &r.error, &l1);
    r.value += es.integrate([&](double u) { return f(u + split); }, 0.0, std::numeric_limits<double>::infinity(),
                            tol, &e2, &l1);
    r.error += e2;
    r.value /= p;
    r.error /= p;
    r.flags = flags;
    if (r.error > 10.0 * std::max(cfg.abs_tol, tol * std::fabs(r.value))) r.flags |= kQuadratureError;
    return r;
}

}  // namespace

SeriesResult conditional_fpt_density_D(double s, const QuadrantParams& q, const QuadratureConfig& cfg) {
    return conditional_density(s, q, cfg, true);
}

SeriesResult conditional_fpt_density_E(double t, const QuadrantParams& q, const QuadratureConfig& cfg) {
    return conditional_density(t, q, cfg, false);
}

SeriesResult metzler_mass(const QuadrantParams& q, bool d_first, const QuadratureConfig& cfg) {
    unsigned flags = 0;
    auto g = [&](double x) {
        if (!(x > 0.0)) return 0.0;
        const SeriesResult r = conditional_density(x, q, cfg, d_first);
        flags |= r.flags;
        return r.value;
    };
    const double split = q.r0 * q.r0;
    double e1 = 0.0, e2 = 0.0, l1 = 0.0;
    quad::tanh_sinh<double> ts;
    quad::exp_sinh<double> es;
    SeriesResult r;
    r.value = ts.integrate(g, 0.0, split, 1e-7, &e1, &l1);
    r.value += es.integrate([&](double x) { return g(x + split); }, 0.0, std::numeric_limits<double>::infinity(), 1e-7,
                            &e2, &l1);
    const double p = d_first ? q.theta0 / q.alpha : (q.alpha - q.theta0) / q.alpha;
    r.value *= p;
    r.error = (e1 + e2) * p;
    r.flags = flags;
    return r;
}

// ---------------------------------------------------------------- CDF table

TabulatedCdf::TabulatedCdf(std::function<double(double)> density, double x_max, int panels, double normalizer,
                           double x_min)
    : density_(std::move(density)), normalizer_(normalizer) {
    if (!(x_max > x_min) || !(x_min > 0.0) || panels < 1) throw DomainError("TabulatedCdf: bad range");
    x_.push_back(0.0);
    for (int k = 0; k <= panels; ++k) x_.push_back(x_min * std::pow(x_max / x_min, static_cast<double>(k) / panels));
    x_.back() = x_max;
    cum_.assign(x_.size(), 0.0);
    // Panels are short on the log scale. The refinement depth is capped because
    // nested densities carry their own quadrature noise, which an uncapped
    // rule would chase to the bottom.
    for (std::size_t i = 1; i < x_.size(); ++i) {
        double err = 0.0;
        const double piece = quad::gauss_kronrod<double, 15>::integrate(density_, x_[i - 1], x_[i], 3, 1e-9, &err);
        cum_[i] = cum_[i - 1] + piece;
    }
    dens_.reserve(x_.size());
    for (double x : x_) dens_.push_back(x > 0.0 ? density_(x) : 0.0);
    if (!(normalizer_ > 0.0)) normalizer_ = cum_.back();
    for (double& c : cum_) c /= normalizer_;
    for (double& d : dens_) d /= normalizer_;
}

double TabulatedCdf::operator()(double x) const {
    if (!(x > 0.0)) return 0.0;
    if (x >= x_.back()) {
        if (x == x_.back()) return std::min(1.0, cum_.back());
        double err = 0.0;
        const double extra =
            quad::gauss_kronrod<double, 15>::integrate(density_, x_.back(), x, 15, 1e-10, &err) / normalizer_;
        return std::min(1.0, cum_.back() + extra);
    }
    const std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
    // Cubic Hermite on the panel using the density as the exact slope.
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    const double v = h00 * cum_[i] + h10 * h * dens_[i] + h01 * cum_[i + 1] + h11 * h * dens_[i + 1];
    return std::clamp(v, cum_[i], cum_[i + 1]);
}

TabulatedCdf conditional_fpt_cdf_D(const QuadrantParams& q, const QuadratureConfig& cfg) {
    return TabulatedCdf([q, cfg](double s) { return conditional_density(s, q, cfg, true).value; }, 1e3, 140, 1.0);
}

TabulatedCdf conditional_fpt_cdf_E(const QuadrantParams& q, const QuadratureConfig& cfg) {
    return TabulatedCdf([q, cfg](double t) { return conditional_density(t, q, cfg, false).value; }, 1e3, 140, 1.0);
}

// ---------------------------------------------------------------- bracketing hits

SeriesResult p_vstar_density(double s, double ell, const DerivedConstants& dc, const QuadratureConfig& cfg) {
    return side_density(s, ell, v_side(dc), cfg);
}

SeriesResult p_ystar_density(double s, double ell, const DerivedConstants& dc, const QuadratureConfig& cfg) {
    return side_density(s, ell, y_side(dc), cfg);
}

SeriesResult p_vstar_total(double ell, const DerivedConstants& dc, const QuadratureConfig& cfg) {
    return side_total(ell, v_side(dc), cfg);
}

SeriesResult p_ystar_total(double ell, const DerivedConstants& dc, const QuadratureConfig& cfg) {
    return side_total(ell, y_side(dc), cfg);
}

TabulatedCdf p_vstar_hit_cdf(double ell, const DerivedConstants& dc, const QuadratureConfig& cfg) {
    const SideConst c = v_side(dc);
    const double x_min = std::min(1e-4, ell / 100.0);
    return TabulatedCdf([c, ell, cfg](double s) { return side_density_value(s, ell, c, cfg); }, ell, 120, 0.0, x_min);
}

// ---------------------------------------------------------------- renewal tables

namespace {
constexpr double kInnerStep = 1.0 / 12.0;

// Upper bound for the hit probability at lengths below ell_min: the C part
// must fall by kappa/2 or the excursion part must reach kappa/2.
double small_length_envelope(double ell, const SideConst& c) {
    const double var_c = (1.0 - c.rho * c.rho) * c.sigma * c.sigma * ell;
    const double pc = std::erfc(0.5 * c.kappa / std::sqrt(2.0 * var_c));
    const double x = 0.5 * c.kappa / (std::fabs(c.rho) * c.sigma);
    const double q = 2.0 * x * x / ell;
    const double pe = q > 2.0 ? 3.0 * 2.0 * (2.0 * q - 1.0) * std::exp(-q) : 1.0;
    return std::min(1.0, 2.0 * pc + pe);
}
}  // namespace

RenewalTables::RenewalTables(const DerivedConstants& dc, const QuadratureConfig& cfg) : dc_(dc), cfg_(cfg) {
    if (!(cfg.ell_min > 0.0) || !(cfg.ell_max > cfg.ell_min)) throw DomainError("RenewalTables: bad length range");
    build_side(v_, true);
    build_side(y_, false);
}

void RenewalTables::build_side(Side& side, bool v_side_flag) {
    const SideConst c = v_side_flag ? v_side(dc_) : y_side(dc_);
    side.inv_sigma = c.inv_sigma_weight;
    // Outer rule in u = sqrt(l), one 30-point panel per decade of l.
    std::vector<double> bounds{cfg_.ell_min};
    for (double d = std::pow(10.0, std::floor(std::log10(cfg_.ell_min)) + 1.0); d < cfg_.ell_max * (1 - 1e-12); d *= 10.0)
        if (d > cfg_.ell_min * (1 + 1e-12)) bounds.push_back(d);
    bounds.push_back(cfg_.ell_max);
    for (std::size_t p = 1; p < bounds.size(); ++p) {
        std::vector<double> u, wu;
        gl_rule(std::sqrt(bounds[p - 1]), std::sqrt(bounds[p]), u, wu);
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double ell = u[i] * u[i];
            side.ell.push_back(ell);
            side.w_ell.push_back(wu[i] * 2.0 * u[i] / (kSqrt2Pi * ell * std::sqrt(ell)));
        }
    }
    auto inner = [&](double ell, std::vector<double>& s, std::vector<double>& ws, double& total) {
        std::vector<double> w;
        inner_rule(ell, kInnerStep, s, w);
        ws.resize(s.size());
        total = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j) {
            const SeriesResult r = side_density(s[j], ell, c, cfg_);
            flags_ |= r.flags & kSeriesNonconverged;
            ws[j] = w[j] * r.value;
            total += ws[j];
        }
    };
    const std::size_t n = side.ell.size();
    side.s.resize(n);
    side.w_s.resize(n);
    side.total.resize(n);
    for (std::size_t i = 0; i < n; ++i) inner(side.ell[i], side.s[i], side.w_s[i], side.total[i]);
    inner(cfg_.ell_max, side.s_tail, side.w_tail, side.total_tail);

    side.lambda = numerator(side, 0.0).real();
    const double tail_mass = 2.0 / (kSqrt2Pi * std::sqrt(cfg_.ell_max));
    const double small = small_length_envelope(cfg_.ell_min, c) / (kSqrt2Pi * std::sqrt(cfg_.ell_min));
    side.error = side.inv_sigma * ((1.0 - side.total_tail) * tail_mass + small);
    if (side.error > cfg_.rel_tol * side.lambda) flags_ |= kTailUncertain;

    for (std::size_t i = 0; i < n; ++i) {
        side.log_ell.push_back(std::log(side.ell[i]));
        side.log_miss.push_back(std::log(std::max(1.0 - side.total[i], 1e-300)));
    }
}

std::complex<double> RenewalTables::numerator(const Side& side, double alpha) const {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < side.ell.size(); ++i) {
        cplx in = 0.0;
        for (std::size_t j = 0; j < side.s[i].size(); ++j) in += side.w_s[i][j] * std::polar(1.0, alpha * side.s[i][j]);
        acc += side.w_ell[i] * in;
    }
    // Beyond ell_max the inner integral is frozen at its ell_max value.
    cplx in = 0.0;
    for (std::size_t j = 0; j < side.s_tail.size(); ++j) in += side.w_tail[j] * std::polar(1.0, alpha * side.s_tail[j]);
    acc += in * (2.0 / (kSqrt2Pi * std::sqrt(cfg_.ell_max)));
    return side.inv_sigma * acc;
}

std::complex<double> RenewalTables::miss_integral(const Side& side, double alpha, double& err) const {
    err = 0.0;
    if (alpha == 0.0) return 0.0;
    // 1 - p(l) interpolated in log-log; quadrature on panels short enough to
    // resolve the oscillation.
    boost::math::barycentric_rational<double> miss(side.log_ell.data(), side.log_miss.data(),
                                                                  side.log_ell.size(), 3);
    const double lo = side.log_ell.front(), hi = side.log_ell.back();
    auto miss_at = [&](double ell) {
        const double y = std::log(ell);
        if (y <= lo) return 1.0;  // below the first node p is negligible
        if (y >= hi) return std::exp(side.log_miss.back());
        return std::min(1.0, std::exp(miss(y)));
    };
    auto re = [&](double ell) { return (1.0 - std::cos(alpha * ell)) * miss_at(ell) / (kSqrt2Pi * ell * std::sqrt(ell)); };
    auto im = [&](double ell) { return -std::sin(alpha * ell) * miss_at(ell) / (kSqrt2Pi * ell * std::sqrt(ell)); };
    cplx acc = small_length_miss(alpha, cfg_.ell_min) / kSqrt2Pi;
    const double max_len = 0.5 * pi / std::fabs(alpha);
    double a = cfg_.ell_min;
    while (a < cfg_.ell_max) {
        const double b = std::min({cfg_.ell_max, a + max_len, a * 2.0});
        double e1 = 0.0, e2 = 0.0;
        const double r = quad::gauss_kronrod<double, 15>::integrate(re, a, b, 3, 1e-12, &e1);
        const double i = quad::gauss_kronrod<double, 15>::integrate(im, a, b, 3, 1e-12, &e2);
        acc += cplx(r, i);
        err += e1 + e2;
        a = b;
    }
    const double m_tail = 1.0 - side.total_tail;
    double e_osc = 0.0;
    const cplx osc = oscillatory_tail(alpha, cfg_.ell_max, &e_osc);
    acc += m_tail * (2.0 / std::sqrt(cfg_.ell_max) - osc) / kSqrt2Pi;
    err += m_tail * 4.0 / (kSqrt2Pi * std::sqrt(cfg_.ell_max)) + e_osc;
    return acc;
}

RenewalTables::Cf RenewalTables::cf(double alpha) const {
    if (!std::isfinite(alpha)) throw DomainError("renewal_cf: alpha must be finite");
    Cf out;
    const double lam = v_.lambda + y_.lambda;
    const cplx nv = numerator(v_, alpha), ny = numerator(y_, alpha);
    double ev = 0.0, ey = 0.0;
    const cplx den = lam + v_.inv_sigma * miss_integral(v_, alpha, ev) + y_.inv_sigma * miss_integral(y_, alpha, ey);
    out.all = (nv + ny) / den;
    out.down = (lam * nv) / (v_.lambda * den);
    out.up = (lam * ny) / (y_.lambda * den);
    out.error = (v_.error + y_.error + v_.inv_sigma * ev + y_.inv_sigma * ey) / std::abs(den);
    out.flags = flags_;
    return out;
}

RenewalIntensities renewal_intensities(const DerivedConstants& dc, const QuadratureConfig& cfg) {
    const RenewalTables t(dc, cfg);
    return {t.lambda_minus(), t.lambda_plus(), t.error_minus(), t.error_plus(), t.flags()};
}

SeriesResult renewal_down_prob(const DerivedConstants& dc, const QuadratureConfig& cfg) {
    const RenewalIntensities r = renewal_intensities(dc, cfg);
    SeriesResult out;
    const double s = r.lambda_minus + r.lambda_plus;
    out.value = r.lambda_minus / s;
    out.error = (r.lambda_plus * r.error_minus + r.lambda_minus * r.error_plus) / (s * s);
    out.flags = r.flags;
    return out;
}

RenewalTables::Cf renewal_cf(double alpha, const DerivedConstants& dc, const QuadratureConfig& cfg) {
    return RenewalTables(dc, cfg).cf(alpha);
}

// ---------------------------------------------------------------- half-stable identity

std::complex<double> half_stable_closed_form(double alpha) {
    const double r = std::sqrt(std::fabs(alpha));
    return {r, alpha > 0 ? -r : (alpha < 0 ? r : 0.0)};
}

HalfStableIdentity half_stable_identity(double alpha) {
    if (!(alpha != 0.0) || !std::isfinite(alpha)) throw DomainError("half_stable_identity: alpha must be finite and nonzero");
    HalfStableIdentity out;
    out.closed_form = half_stable_closed_form(alpha);
    // Near part in u = sqrt(l) up to a whole number of periods, then the tail.
    const double L = 16.0 * pi / std::fabs(alpha);
    auto re = [alpha](double u) {
        const double sh = std::sin(0.5 * alpha * u * u);
        return 4.0 * sh * sh / (kSqrt2Pi * u * u);
    };
    auto im = [alpha](double u) {
        if (u == 0.0) return -2.0 * alpha / kSqrt2Pi;
        return -2.0 * std::sin(alpha * u * u) / (kSqrt2Pi * u * u);
    };
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
    const double ru = std::sqrt(L);
    const double r = quad::gauss_kronrod<double, 61>::integrate(re, 0.0, ru, 20, 1e-13, &e1);
    const double i = quad::gauss_kronrod<double, 61>::integrate(im, 0.0, ru, 20, 1e-13, &e2);
    const cplx osc = oscillatory_tail(alpha, L, &e3);
    out.numeric = cplx(r, i) + (2.0 / std::sqrt(L) - osc) / kSqrt2Pi;
    out.error = e1 + e2 + e3;
    return out;
}

// ---------------------------------------------------------------- kernels

double kernel_K(double t, double x) {
    if (!(t > 0.0)) throw DomainError("kernel_K: need t > 0");
    return std::sqrt(2.0 / (pi * t * t * t)) * std::fabs(x) * std::exp(-x * x / (2.0 * t));
}

double kernel_p0(double t, double x, double y) {
    if (!(t > 0.0)) throw DomainError("kernel_p0: need t > 0");
    return (std::exp(-(x - y) * (x - y) / (2.0 * t)) - std::exp(-(x + y) * (x + y) / (2.0 * t))) / std::sqrt(2.0 * pi * t);
}

double kernel_h(double ell, double s, double a, double t, double b) {
    if (s == 0.0) {
        if (a != 0.0 || !(t > 0.0) || !(t < ell) || b == 0.0)
            throw DomainError("kernel_h entrance case: need s = a = 0, 0 < t < ell, b != 0");
        return std::sqrt(0.5 * pi * ell * ell * ell) * kernel_K(t, b) * kernel_K(ell - t, b);
    }
    if (!(s > 0.0) || !(s < t) || !(t < ell)) throw DomainError("kernel_h: need 0 < s < t < ell");
    if (!((a > 0.0 && b > 0.0) || (a < 0.0 && b < 0.0))) throw DomainError("kernel_h: a and b must share a strict sign");
    return kernel_K(ell - t, b) / kernel_K(ell - s, a) * kernel_p0(t - s, a, b);
}

}  // namespace loblab
