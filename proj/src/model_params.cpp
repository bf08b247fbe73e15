#include "loblab/model_params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace loblab {

void validate(const ModelParams& p) {
    if (!(p.a > 1.0)) throw ParamError("parameter constraint violated: a > 1");
    if (!(p.b > 1.0)) throw ParamError("parameter constraint violated: b > 1");
    if (!(p.a + p.b > p.a * p.b))
        throw ParamError("parameter constraint violated: a + b > a*b (feasibility of the rate family)");
    if (!(p.lambda0 > 0.0)) throw ParamError("parameter constraint violated: lambda0 > 0");
    if (!(p.theta_b > 0.0)) throw ParamError("parameter constraint violated: theta_b > 0");
    if (!(p.theta_s > 0.0)) throw ParamError("parameter constraint violated: theta_s > 0");
    if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.lambda0) ||
        !std::isfinite(p.theta_b) || !std::isfinite(p.theta_s))
        throw ParamError("parameter constraint violated: all inputs finite");
}

DerivedConstants derive_constants(const ModelParams& p) {
    validate(p);
    DerivedConstants d;
    d.input = p;
    const double a = p.a, b = p.b, l0 = p.lambda0;
    const double slack = a + b - a * b;
    d.lambda0 = l0;
    d.lambda1 = (a - 1.0) * l0;
    d.mu0 = a * l0 / b;
    d.mu1 = (b - 1.0) * d.mu0;
    d.lambda2 = slack * l0;
    d.mu2 = slack * d.mu0;
    d.c = slack * l0 / b;
    d.kappa_L = d.lambda2 * d.mu1 / (p.theta_b * d.lambda1);
    d.kappa_R = -d.mu2 * d.lambda1 / (p.theta_s * d.mu1);
    const double sp2 = 2.0 * (l0 + b * d.lambda1);
    const double sm2 = 2.0 * (d.mu0 + a * d.mu1);
    d.sigma_plus = std::sqrt(sp2);
    d.sigma_minus = std::sqrt(sm2);
    const double cross = 2.0 * (d.lambda1 + d.mu1);
    d.rho = -cross / (d.sigma_plus * d.sigma_minus);
    d.alpha_minus = cross / sm2;
    d.alpha_plus = cross / sp2;
    d.frac_one_tick = 2.0 - (a + b) / (a * b);
    d.frac_two_tick = (a + b) / (a * b) - 1.0;
    return d;
}

const char* region_name(Region r) {
    switch (r) {
        case Region::NE: return "NE";
        case Region::E: return "E";
        case Region::SE_plus: return "SE_plus";
        case Region::SE: return "SE";
        case Region::SE_minus: return "SE_minus";
        case Region::S: return "S";
        case Region::SW: return "SW";
        case Region::O: return "O";
    }
    return "?";
}

Region region_of(double w, double x) {
    if (w < 0.0 && x > 0.0) throw DomainError("inadmissible interior state: w < 0 and x > 0");
    if (x > 0.0) return Region::NE;
    if (x == 0.0) {
        if (w > 0.0) return Region::E;
        if (w == 0.0) return Region::O;
        return Region::SW;
    }
    if (w > 0.0) {
        const double s = w + x;
        if (s > 0.0) return Region::SE_plus;
        if (s == 0.0) return Region::SE;
        return Region::SE_minus;
    }
    if (w == 0.0) return Region::S;
    return Region::SW;
}

GH gh_transform(const ModelParams& p, double w, double x) {
    switch (region_of(w, x)) {
        case Region::NE:
        case Region::E: return {w + p.b * x, x};
        case Region::SE_plus: return {w + x, x};
        case Region::SE:
        case Region::O: return {w + x, x};
        case Region::SE_minus: return {w + x, -w};
        case Region::S:
        case Region::SW: return {p.a * w + x, -w};
    }
    return {0.0, 0.0};
}

WX gh_inverse(const ModelParams& p, double g, double h) {
    // The image boundaries h = g/b and h = -g/a are reached by the axis
    // w = 0; allow a few ulps there so that forward-then-inverse round-trips.
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * (std::fabs(g) + std::fabs(h));
    if (g >= 0.0) {
        if (p.b * h - g > slack) throw DomainError("(g, h) outside the transform image: g >= 0 requires h <= g/b");
        if (h >= 0.0) return {std::max(0.0, g - p.b * h), h};
        return {g - h, h};
    }
    if (p.a * h + g > slack) throw DomainError("(g, h) outside the transform image: g < 0 requires h <= -g/a");
    if (h < 0.0) return {-h, g + h};
    return {-h, std::min(0.0, g + p.a * h)};
}

}  // namespace loblab
