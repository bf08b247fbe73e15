#include "loblab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <system_error>
#include <type_traits>

#include <fmt/format.h>

namespace loblab {

ConfigError::ConfigError(std::size_t line, const std::string& what)
    : std::invalid_argument(line > 0 ? fmt::format("config line {}: {}", line, what) : "config: " + what),
      line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct BadValue {
    const char* why;
};

// Whole-token numeric parse; anything left over is an error.
template <class T>
T parse_number(std::string_view v) {
    T out{};
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec == std::errc::result_out_of_range) throw BadValue{"out of range"};
    if (ec != std::errc() || ptr != end) throw BadValue{"not a number"};
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(out)) throw BadValue{"not finite"};
    }
    return out;
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
    auto num = [](auto get) -> Setter {
        return [get](RunConfig& c, std::string_view v) {
            auto& slot = get(c);
            slot = parse_number<std::remove_reference_t<decltype(slot)>>(v);
        };
    };
    auto text = [](auto get) -> Setter {
        return [get](RunConfig& c, std::string_view v) { get(c) = std::string(v); };
    };
    static const std::map<std::string, std::map<std::string, Setter>> s{
        {"params",
         {{"a", num([](RunConfig& c) -> double& { return c.params.a; })},
          {"b", num([](RunConfig& c) -> double& { return c.params.b; })},
          {"lambda0", num([](RunConfig& c) -> double& { return c.params.lambda0; })},
          {"theta_b", num([](RunConfig& c) -> double& { return c.params.theta_b; })},
          {"theta_s", num([](RunConfig& c) -> double& { return c.params.theta_s; })}}},
        {"sim",
         {{"n", num([](RunConfig& c) -> long& { return c.sim.n; })},
          {"horizon", num([](RunConfig& c) -> double& { return c.sim.horizon; })},
          {"paths", num([](RunConfig& c) -> std::size_t& { return c.sim.paths; })},
          {"grid_step", num([](RunConfig& c) -> double& { return c.sim.grid_step; })},
          {"seed", num([](RunConfig& c) -> std::uint64_t& { return c.sim.seed; })},
          {"limit_dt", num([](RunConfig& c) -> double& { return c.sim.limit_dt; })}}},
        {"quadrature",
         {{"abs_tol", num([](RunConfig& c) -> double& { return c.quadrature.abs_tol; })},
          {"rel_tol", num([](RunConfig& c) -> double& { return c.quadrature.rel_tol; })},
          {"series_terms_max", num([](RunConfig& c) -> int& { return c.quadrature.series_terms_max; })},
          {"ell_min", num([](RunConfig& c) -> double& { return c.quadrature.ell_min; })},
          {"ell_max", num([](RunConfig& c) -> double& { return c.quadrature.ell_max; })}}},
        {"output",
         {{"csv", text([](RunConfig& c) -> std::string& { return c.output.csv; })},
          {"json", text([](RunConfig& c) -> std::string& { return c.output.json; })}}},
    };
    return s;
}

}  // namespace

void validate(const SimBlock& s) {
    if (s.n < 1) throw ParamError("sim constraint violated: n >= 1");
    if (!(s.horizon > 0.0)) throw ParamError("sim constraint violated: horizon > 0");
    if (s.paths < 1) throw ParamError("sim constraint violated: paths >= 1");
    if (!(s.grid_step > 0.0) || s.grid_step > s.horizon)
        throw ParamError("sim constraint violated: 0 < grid_step <= horizon");
    if (!(s.limit_dt > 0.0)) throw ParamError("sim constraint violated: limit_dt > 0");
}

void validate(const QuadratureConfig& q) {
    if (!(q.abs_tol > 0.0) || !(q.rel_tol > 0.0))
        throw ParamError("quadrature constraint violated: abs_tol > 0 and rel_tol > 0");
    if (q.series_terms_max < 1) throw ParamError("quadrature constraint violated: series_terms_max >= 1");
    if (!(q.ell_min > 0.0) || !(q.ell_min < q.ell_max))
        throw ParamError("quadrature constraint violated: 0 < ell_min < ell_max");
}

RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    const auto& sch = schema();
    const std::map<std::string, Setter>* section = nullptr;
    std::string section_name;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(line_no, "malformed section header");
            section_name = std::string(trim(line.substr(1, line.size() - 2)));
            const auto it = sch.find(section_name);
            if (it == sch.end()) throw ConfigError(line_no, fmt::format("unknown section [{}]", section_name));
            section = &it->second;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (section == nullptr) throw ConfigError(line_no, fmt::format("key '{}' outside any section", key));
        const auto it = section->find(key);
        if (it == section->end())
            throw ConfigError(line_no, fmt::format("unknown key '{}' in [{}]", key, section_name));
        if (!seen.insert(section_name + "." + key).second)
            throw ConfigError(line_no, fmt::format("duplicate key '{}' in [{}]", key, section_name));
        if (value.empty()) throw ConfigError(line_no, fmt::format("key '{}' has no value", key));
        try {
            it->second(cfg, value);
        } catch (const BadValue& e) {
            throw ConfigError(line_no, fmt::format("key '{}': '{}' is {}", key, value, e.why));
        }
    }
    try {
        validate(cfg.params);
        validate(cfg.sim);
        validate(cfg.quadrature);
    } catch (const ParamError& e) {
        throw ConfigError(0, e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(0, fmt::format("cannot open '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace loblab
