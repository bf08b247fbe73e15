#include "loblab/bessel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include "loblab/model_params.hpp"

namespace loblab {

namespace {

void check_args(double nu, double z) {
    if (!std::isfinite(nu) || !std::isfinite(z) || nu < 0.0 || z < 0.0)
        throw DomainError("bessel_i: need finite nu >= 0 and z >= 0");
}

// log I_nu(z) from the series sum_k (z/2)^(nu+2k) / (k! Gamma(nu+k+1)), terms
// taken relative to the k = 0 term so the running sum stays O(e^z).
double log_series(double nu, double z) {
    const double q = 0.25 * z * z;
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < 10000; ++k) {
        term *= q / ((k + 1.0) * (nu + k + 1.0));
        sum += term;
        if (k + 1.0 > 0.5 * z && term < std::numeric_limits<double>::epsilon() * sum) break;
    }
    return nu * std::log(0.5 * z) - std::lgamma(nu + 1.0) + std::log(sum);
}

double gsl_scaled(double nu, double z) {
    static const bool handler_off = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)handler_off;
    gsl_sf_result r;
    // The fractional-order routine returns NaN with a success status at nu = 0
    // and z >~ 300; the dedicated order-zero routine is exact there.
    const int status = nu == 0.0 ? gsl_sf_bessel_I0_scaled_e(z, &r) : gsl_sf_bessel_Inu_scaled_e(nu, z, &r);
    if (status != GSL_SUCCESS && status != GSL_EUNDRFLW)
        throw DomainError("gsl_sf_bessel_Inu_scaled failed: " + std::string(gsl_strerror(status)));
    if (!std::isfinite(r.val)) throw DomainError("gsl_sf_bessel_Inu_scaled returned a non-finite value");
    return status == GSL_EUNDRFLW ? 0.0 : r.val;
}

}  // namespace

double log_bessel_i(double nu, double z) {
    check_args(nu, z);
    if (z == 0.0) return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (z <= kBesselSeriesLimit) return log_series(nu, z);
    const double s = gsl_scaled(nu, z);
    return s > 0.0 ? std::log(s) + z : -std::numeric_limits<double>::infinity();
}

double bessel_i_scaled(double nu, double z) {
    check_args(nu, z);
    if (z == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    if (z <= kBesselSeriesLimit) return std::exp(log_series(nu, z) - z);
    return gsl_scaled(nu, z);
}

double bessel_i(double nu, double z) {
    const double l = log_bessel_i(nu, z);
    if (l > std::log(std::numeric_limits<double>::max()))
        throw BesselOverflow("bessel_i: I_nu(z) overflows; request the scaled or log form");
    return std::exp(l);
}

}  // namespace loblab
