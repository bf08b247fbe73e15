#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "loblab/eval.hpp"
#include "loblab/limit_processes.hpp"
#include "loblab/lob_simulator.hpp"
#include "loblab/model_params.hpp"
#include "loblab/validation.hpp"

namespace loblab {

// 17 significant digits: parses back to the same double.
std::string format_double(double x);

// Header row always; '.' decimal; '\n' after every row.
void write_csv_row(std::ostream& os, const std::vector<std::string>& cells);
void write_csv_row(std::ostream& os, const std::vector<double>& cells);

// Columns: path, t, U..Z, G, H, then the eight region occupations.
void write_scaled_paths_csv(std::ostream& os, const std::vector<ScaledPathBundle>& paths);
// Columns: direction, s_hat, U..Z at the renewal instant.
void write_renewals_csv(std::ostream& os, const std::vector<RenewalRecord>& records);
// Columns: direction, s_star, g_at_renewal.
void write_limit_renewals_csv(std::ostream& os, const std::vector<LimitRenewalSample>& samples);
// Columns: left, right, sign, length; times on the list's grid.
void write_excursions_csv(std::ostream& os, const ExcursionList& list);
// Columns: t, then one per path, all on the grid of the first path.
void write_grid_paths_csv(std::ostream& os, const std::vector<std::string>& names,
                          const std::vector<const GridPath*>& paths);

nlohmann::json to_json(const ModelParams& p);
nlohmann::json to_json(const DerivedConstants& dc);
nlohmann::json to_json(const CheckReport& r);
nlohmann::json to_json(const std::vector<CheckReport>& reports);
// {quantity, inputs, value, error_estimate, flags}, plus reference when known.
nlohmann::json to_json(const EvalResult& r);

// Writes to the named file, or to standard output when path is empty.
// Throws std::runtime_error when the file cannot be written.
void write_output(const std::string& path, const std::string& content);

}  // namespace loblab
