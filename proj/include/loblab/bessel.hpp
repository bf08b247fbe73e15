#pragma once

#include <stdexcept>

namespace loblab {

class BesselOverflow : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

// Modified Bessel function of the first kind, nu >= 0, z >= 0.
// Power series in log-scaled form for z <= kBesselSeriesLimit, GSL's scaled
// evaluation beyond. bessel_i throws BesselOverflow when I_nu(z) is not
// representable; use the scaled or log forms there.
inline constexpr double kBesselSeriesLimit = 30.0;

double bessel_i(double nu, double z);
double bessel_i_scaled(double nu, double z);  // exp(-z) I_nu(z)
double log_bessel_i(double nu, double z);     // -inf when I_nu(z) == 0

}  // namespace loblab
