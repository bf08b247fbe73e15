// loblab command-line entry point. Exit status: 0 success, 1 a gating check
// failed (validate) or a run failed, 2 usage or input error.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "loblab/config.hpp"
#include "loblab/eval.hpp"
#include "loblab/io.hpp"
#include "loblab/limit_processes.hpp"
#include "loblab/lob_simulator.hpp"
#include "loblab/parallel.hpp"
#include "loblab/validation.hpp"

namespace {

using namespace loblab;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Raised for bad user input discovered after CLI11 parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_path, "structured-text config file");
    sub->add_option("--seed", c.seed, "master seed (overrides [sim] seed)");
    sub->add_option("--out", c.out, "output file (default: standard output)");
}

RunConfig load(const Common& c, const std::string& subcommand) {
    RunConfig cfg = c.config_path.empty() ? parse_config("") : load_config(c.config_path);
    cfg.subcommand = subcommand;
    if (c.seed) cfg.sim.seed = *c.seed;
    return cfg;
}

std::string csv_target(const Common& c, const RunConfig& cfg) { return c.out.empty() ? cfg.output.csv : c.out; }
std::string json_target(const Common& c, const RunConfig& cfg) { return c.out.empty() ? cfg.output.json : c.out; }

int cmd_constants(const Common& c) {
    const RunConfig cfg = load(c, "constants");
    write_output(json_target(c, cfg), to_json(derive_constants(cfg.params)).dump(2) + "\n");
    return kExitOk;
}

struct LobOptions {
    std::string mode = "paths";
    double renewal_horizon = 1e4;
};

int cmd_simulate_lob(const Common& c, const LobOptions& o) {
    const RunConfig cfg = load(c, "simulate-lob");
    const DerivedConstants dc = derive_constants(cfg.params);
    auto sim = [&](std::size_t i) {
        SimConfig s;
        s.n = cfg.sim.n;
        s.horizon = cfg.sim.horizon;
        s.grid_step = cfg.sim.grid_step;
        s.seed = cfg.sim.seed;
        s.path_index = i;
        return s;
    };
    std::ostringstream os;
    if (o.mode == "paths") {
        const auto paths = parallel_map<ScaledPathBundle>(cfg.sim.paths, [&](std::size_t i) {
            return run_scaled_path(sim(i), dc);
        });
        write_scaled_paths_csv(os, paths);
    } else {
        const auto recs = parallel_map<RenewalRecord>(cfg.sim.paths, [&](std::size_t i) {
            SimConfig s = sim(i);
            s.horizon = o.renewal_horizon;
            return run_until_renewal(s, dc);
        });
        write_renewals_csv(os, recs);
    }
    write_output(csv_target(c, cfg), os.str());
    return kExitOk;
}

int cmd_simulate_limit(const Common& c, const std::string& mode) {
    const RunConfig cfg = load(c, "simulate-limit");
    const DerivedConstants dc = derive_constants(cfg.params);
    const Rng base(cfg.sim.seed);
    std::ostringstream os;
    if (mode == "renewals") {
        LimitGridConfig lg;
        lg.dt = cfg.sim.limit_dt;
        const auto samples = parallel_map<LimitRenewalSample>(cfg.sim.paths, [&](std::size_t i) {
            Rng r = base.split(i);
            return simulate_renewal_limit(dc, lg, r);
        });
        write_limit_renewals_csv(os, samples);
    } else {
        // One G* path with its bracketing limits, on the [sim] grid.
        Rng r = base.split(0);
        const TimeGrid grid{cfg.sim.grid_step, cfg.sim.horizon};
        const GridPath g = sample_two_speed_skewflip(two_speed_params(dc), grid, r);
        const BracketingLimits bl = build_bracketing_limits(g, dc, base.split(1));
        if (mode == "path")
            write_grid_paths_csv(os, {"G", "V", "Y"}, {&g, &bl.v_star, &bl.y_star});
        else
            write_excursions_csv(os, bl.excursions);
    }
    write_output(csv_target(c, cfg), os.str());
    return kExitOk;
}

struct EvalOptions {
    std::string quantity;
    std::optional<double> alpha;
    std::vector<std::string> args;
};

int cmd_eval(const Common& c, const EvalOptions& o) {
    const RunConfig cfg = load(c, "eval");
    std::map<std::string, double> inputs;
    if (o.alpha) inputs["alpha"] = *o.alpha;
    for (const auto& kv : o.args) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError(fmt::format("--arg expects key=value, got '{}'", kv));
        const std::string key = kv.substr(0, eq);
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(kv.substr(eq + 1), &used);
            if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw UsageError(fmt::format("--arg {}: value is not a number", key));
        }
        if (!inputs.emplace(key, v).second) throw UsageError(fmt::format("input '{}' given twice", key));
    }
    const EvalResult r = evaluate(o.quantity, inputs, derive_constants(cfg.params), cfg.quadrature);
    write_output(json_target(c, cfg), to_json(r).dump(2) + "\n");
    return kExitOk;
}

int cmd_validate(const Common& c, const std::vector<std::string>& checks) {
    const RunConfig cfg = load(c, "validate");
    ValidationConfig vc;
    vc.params = cfg.params;
    vc.quadrature = cfg.quadrature;
    if (c.seed) vc.seed = *c.seed;
    const auto known = suite_names();
    for (const auto& name : checks)
        if (name != "all" && std::find(known.begin(), known.end(), name) == known.end())
            throw UsageError(fmt::format("unknown check suite '{}'", name));
    std::vector<CheckReport> reports;
    const bool all = checks.empty() || std::find(checks.begin(), checks.end(), "all") != checks.end();
    if (all) {
        reports = run_all(vc);
    } else {
        for (const auto& name : checks) {
            auto part = run_suite(name, vc);
            reports.insert(reports.end(), part.begin(), part.end());
        }
        std::stable_sort(reports.begin(), reports.end(),
                         [](const CheckReport& a, const CheckReport& b) { return a.name < b.name; });
    }
    const std::string target = json_target(c, cfg);
    if (!target.empty()) write_output(target, to_json(reports).dump(2) + "\n");
    std::cout << summary_table(reports);
    return gating_pass(reports) ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"limit order book simulators, limit processes and analytics"};
    app.require_subcommand(1);

    Common common;
    auto* constants = app.add_subcommand("constants", "print the derived constants as JSON");
    add_common(constants, common);

    LobOptions lob;
    auto* simulate_lob = app.add_subcommand("simulate-lob", "simulate scaled LOB paths or renewals to CSV");
    add_common(simulate_lob, common);
    simulate_lob->add_option("--mode", lob.mode, "paths or renewals")->check(CLI::IsMember({"paths", "renewals"}));
    simulate_lob->add_option("--renewal-horizon", lob.renewal_horizon, "scaled time cap per renewal")
        ->check(CLI::PositiveNumber);

    std::string limit_mode = "renewals";
    auto* simulate_limit = app.add_subcommand("simulate-limit", "simulate limit renewals, a limit path or its excursions");
    add_common(simulate_limit, common);
    simulate_limit->add_option("--mode", limit_mode, "renewals, path or excursions")
        ->check(CLI::IsMember({"renewals", "path", "excursions"}));

    EvalOptions ev;
    auto* eval = app.add_subcommand("eval", "evaluate an analytic quantity to JSON");
    add_common(eval, common);
    eval->add_option("--quantity", ev.quantity, "quantity name")->required();
    eval->add_option("--alpha", ev.alpha, "shorthand for --arg alpha=...");
    eval->add_option("--arg", ev.args, "input as key=value (repeatable)");

    std::vector<std::string> checks;
    auto* validate = app.add_subcommand("validate", "run check suites; JSON report and summary table");
    add_common(validate, common);
    validate->add_option("--check", checks, "suite name (repeatable; default all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*constants) return cmd_constants(common);
        if (*simulate_lob) return cmd_simulate_lob(common, lob);
        if (*simulate_limit) return cmd_simulate_limit(common, limit_mode);
        if (*eval) return cmd_eval(common, ev);
        if (*validate) return cmd_validate(common, checks);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
