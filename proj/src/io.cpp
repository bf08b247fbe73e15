#include "loblab/io.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <fmt/format.h>

namespace loblab {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", x);
}

void write_csv_row(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) os << ',';
        os << cells[i];
    }
    os << '\n';
}

void write_csv_row(std::ostream& os, const std::vector<double>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) os << ',';
        os << format_double(cells[i]);
    }
    os << '\n';
}

namespace {

const std::vector<std::string> kStateColumns{"U", "V", "W", "X", "Y", "Z"};

}  // namespace

void write_scaled_paths_csv(std::ostream& os, const std::vector<ScaledPathBundle>& paths) {
    std::vector<std::string> header{"path", "t"};
    header.insert(header.end(), kStateColumns.begin(), kStateColumns.end());
    header.push_back("G");
    header.push_back("H");
    for (Region r : kAllRegions) header.push_back(std::string("occ_") + region_name(r));
    write_csv_row(os, header);
    for (const auto& b : paths) {
        for (const auto& row : b.rows) {
            os << b.path_index << ',' << format_double(row.t);
            for (double v : row.values) os << ',' << format_double(v);
            for (double v : row.occupation) os << ',' << format_double(v);
            os << '\n';
        }
    }
}

void write_renewals_csv(std::ostream& os, const std::vector<RenewalRecord>& records) {
    std::vector<std::string> header{"direction", "s_hat"};
    header.insert(header.end(), kStateColumns.begin(), kStateColumns.end());
    write_csv_row(os, header);
    for (const auto& r : records) {
        os << direction_name(r.direction) << ',' << format_double(r.s_hat);
        for (double v : r.state_at_renewal) os << ',' << format_double(v);
        os << '\n';
    }
}

void write_limit_renewals_csv(std::ostream& os, const std::vector<LimitRenewalSample>& samples) {
    write_csv_row(os, std::vector<std::string>{"direction", "s_star", "g_at_renewal"});
    for (const auto& s : samples)
        os << direction_name(s.direction) << ',' << format_double(s.s_star) << ',' << format_double(s.g_at_renewal)
           << '\n';
}

void write_excursions_csv(std::ostream& os, const ExcursionList& list) {
    write_csv_row(os, std::vector<std::string>{"left", "right", "sign", "length"});
    for (const auto& e : list.entries)
        os << format_double(list.left_time(e)) << ',' << format_double(list.right_time(e)) << ',' << e.sign << ','
           << format_double(list.length(e)) << '\n';
}

void write_grid_paths_csv(std::ostream& os, const std::vector<std::string>& names,
                          const std::vector<const GridPath*>& paths) {
    if (names.size() != paths.size() || paths.empty())
        throw std::invalid_argument("write_grid_paths_csv: one name per path, at least one path");
    const std::size_t n = paths.front()->size();
    for (const GridPath* p : paths)
        if (p->size() != n) throw std::invalid_argument("write_grid_paths_csv: paths must share one grid");
    std::vector<std::string> header{"t"};
    header.insert(header.end(), names.begin(), names.end());
    write_csv_row(os, header);
    for (std::size_t k = 0; k < n; ++k) {
        os << format_double(paths.front()->time(k));
        for (const GridPath* p : paths) os << ',' << format_double(p->values[k]);
        os << '\n';
    }
}

nlohmann::json to_json(const ModelParams& p) {
    return {{"a", p.a}, {"b", p.b}, {"lambda0", p.lambda0}, {"theta_b", p.theta_b}, {"theta_s", p.theta_s}};
}

nlohmann::json to_json(const DerivedConstants& dc) {
    return {{"input", to_json(dc.input)},
            {"lambda0", dc.lambda0},
            {"lambda1", dc.lambda1},
            {"lambda2", dc.lambda2},
            {"mu0", dc.mu0},
            {"mu1", dc.mu1},
            {"mu2", dc.mu2},
            {"c", dc.c},
            {"kappa_L", dc.kappa_L},
            {"kappa_R", dc.kappa_R},
            {"sigma_plus", dc.sigma_plus},
            {"sigma_minus", dc.sigma_minus},
            {"rho", dc.rho},
            {"alpha_plus", dc.alpha_plus},
            {"alpha_minus", dc.alpha_minus},
            {"frac_one_tick", dc.frac_one_tick},
            {"frac_two_tick", dc.frac_two_tick}};
}

namespace {

// JSON has no NaN; non-finite numbers become null.
nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); }

nlohmann::json numbers(const std::vector<double>& v) {
    nlohmann::json out = nlohmann::json::array();
    for (double x : v) out.push_back(number_or_null(x));
    return out;
}

}  // namespace

nlohmann::json to_json(const CheckReport& r) {
    return {{"name", r.name},
            {"observed", numbers(r.observed)},
            {"reference", numbers(r.reference)},
            {"se", numbers(r.se)},
            {"rule", rule_name(r.rule)},
            {"tolerance", number_or_null(r.tolerance)},
            {"pass", r.pass},
            {"soft", r.soft},
            {"samples", r.samples},
            {"runtime", r.runtime},
            {"note", r.note}};
}

nlohmann::json to_json(const std::vector<CheckReport>& reports) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : reports) out.push_back(to_json(r));
    return out;
}

nlohmann::json to_json(const EvalResult& r) {
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& [k, v] : r.inputs) inputs[k] = number_or_null(v);
    nlohmann::json out{{"quantity", r.quantity},
                       {"inputs", inputs},
                       {"value", numbers(r.value)},
                       {"error_estimate", number_or_null(r.error_estimate)},
                       {"flags", flag_names(r.flags)}};
    if (!r.reference.empty()) out["reference"] = numbers(r.reference);
    return out;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        std::cout.flush();
        if (!std::cout) throw std::runtime_error("cannot write to standard output");
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
    out << content;
    out.close();
    if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path));
}

}  // namespace loblab
