#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace loblab {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    std::size_t count = 0;
};

MeanSe mean_se(const std::vector<double>& x);
// Bernoulli frequency with its binomial standard error.
MeanSe proportion(std::size_t hits, std::size_t n);

// Kolmogorov-Smirnov statistics (sup distance between distribution functions).
double ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf);
double ks_two_sample(std::vector<double> a, std::vector<double> b);
// Asymptotic critical values at the given level, c(level) = sqrt(-log(level/2)/2).
double ks_critical_one(std::size_t n, double level = 0.01);
double ks_critical_two(std::size_t n, std::size_t m, double level = 0.01);

double normal_cdf(double x);

}  // namespace loblab
