#include "loblab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace loblab {

MeanSe mean_se(const std::vector<double>& x) {
    if (x.size() < 2) throw std::invalid_argument("mean_se needs at least two values");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(x.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(x.size())), x.size()};
}

MeanSe proportion(std::size_t hits, std::size_t n) {
    if (n == 0 || hits > n) throw std::invalid_argument("proportion: need 0 <= hits <= n, n > 0");
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n};
}

double ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_one_sample: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(i / na - j / nb));
    }
    return d;
}

double ks_critical_one(std::size_t n, double level) {
    return std::sqrt(-0.5 * std::log(0.5 * level)) / std::sqrt(static_cast<double>(n));
}

double ks_critical_two(std::size_t n, std::size_t m, double level) {
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    return std::sqrt(-0.5 * std::log(0.5 * level)) * std::sqrt((nn + mm) / (nn * mm));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace loblab
