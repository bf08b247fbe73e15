#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "loblab/analytics.hpp"
#include "loblab/model_params.hpp"

namespace loblab {

struct SimBlock {
    long n = 10000;
    double horizon = 1.0;
    std::size_t paths = 1;
    double grid_step = 0.01;
    std::uint64_t seed = 1;
    double limit_dt = 1e-4;  // grid step of the limit-system simulators
};

struct OutputBlock {
    std::string csv;   // empty: standard output
    std::string json;  // empty: standard output
};

struct RunConfig {
    std::string subcommand;
    ModelParams params;
    SimBlock sim;
    QuadratureConfig quadrature;
    OutputBlock output;
};

// line == 0 for errors that belong to the whole document (validation).
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Sections [params], [sim], [quadrature], [output]; `key = value` lines; '#'
// starts a comment. Unknown sections or keys and repeated keys are errors.
// Every block is validated after parsing; omitted keys keep their defaults.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

void validate(const SimBlock& s);
void validate(const QuadratureConfig& q);

}  // namespace loblab
