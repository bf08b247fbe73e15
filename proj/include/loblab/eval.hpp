#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "loblab/analytics.hpp"
#include "loblab/model_params.hpp"

namespace loblab {

class UnknownQuantity : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct EvalResult {
    std::string quantity;
    std::map<std::string, double> inputs;  // after defaults are filled in
    std::vector<double> value;
    std::vector<double> reference;  // empty when there is no closed form
    double error_estimate = 0.0;
    unsigned flags = 0;
};

std::vector<std::string> eval_quantities();

// Input names not used by the quantity raise std::invalid_argument; missing
// required inputs likewise. Complex values come out as [re, im].
EvalResult evaluate(const std::string& quantity, const std::map<std::string, double>& inputs,
                    const DerivedConstants& dc, const QuadratureConfig& cfg = {});

}  // namespace loblab
