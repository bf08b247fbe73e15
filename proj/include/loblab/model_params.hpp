#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace loblab {

// Input rates. The six arrival rates are always derived from these.
struct ModelParams {
    double a = 1.5;
    double b = 1.5;
    double lambda0 = 1.0;
    double theta_b = 1.0;
    double theta_s = 1.0;
};

struct DerivedConstants {
    ModelParams input;
    double lambda0 = 0, lambda1 = 0, lambda2 = 0;
    double mu0 = 0, mu1 = 0, mu2 = 0;
    double c = 0;
    double kappa_L = 0, kappa_R = 0;
    double sigma_plus = 0, sigma_minus = 0;
    double rho = 0;
    double alpha_plus = 0, alpha_minus = 0;
    double frac_one_tick = 0, frac_two_tick = 0;
};

class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised for (w, x) with w < 0 < x, and for (g, h) outside the transform image.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

void validate(const ModelParams& p);
DerivedConstants derive_constants(const ModelParams& p);

enum class Region { NE, E, SE_plus, SE, SE_minus, S, SW, O };
inline constexpr int kRegionCount = 8;
inline constexpr std::array<Region, kRegionCount> kAllRegions = {
    Region::NE, Region::E, Region::SE_plus, Region::SE,
    Region::SE_minus, Region::S, Region::SW, Region::O};

const char* region_name(Region r);
inline int region_index(Region r) { return static_cast<int>(r); }

// Exact comparisons: scaled integer queues land on boundaries exactly.
Region region_of(double w, double x);

struct GH {
    double g;
    double h;
};
struct WX {
    double w;
    double x;
};

GH gh_transform(const ModelParams& p, double w, double x);
WX gh_inverse(const ModelParams& p, double g, double h);

}  // namespace loblab
