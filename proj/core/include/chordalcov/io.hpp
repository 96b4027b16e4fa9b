#pragma once

#include <string>

#include "chordalcov/model_select.hpp"
#include "chordalcov/predict.hpp"
#include "chordalcov/simulate.hpp"

namespace chordalcov {

// Graph specification (1-based vertices):
//   {"vertices": r, "edges": [[i,j],...]}
//   {"band": {"r": r, "k": k}}
//   {"diffband": {"r": r, "k1": k1, "k2": k2, "changepoint": c}}
// Accepts inline JSON text or (from the CLI) a path to a JSON file.
JunctionTree tree_from_spec_json(const std::string& json_text);

// Dense matrix CSV, no header.
Mat read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Mat& m);

// SimConfig JSON:
// { "graph": <graph spec>, "truth": {"template_csv": path} | {"ar1": {"rho": x}},
//   "estimators": [...], "sample_sizes": [...], "replications": N,
//   "seed": S, "record_eigenvalues": bool }
SimConfig sim_config_from_json(const std::string& json_text,
                               const std::string& base_dir);

std::string to_json(const RiskTable& table);
std::string to_text_table(const RiskTable& table);
std::string scree_csv(const RiskTable& table);

std::string to_json(const SelectionResult& result);

std::string to_json(const EstimateBundle& bundle,
                    const std::string& prior_label);
std::string eigenvalues_csv(const EstimateBundle& bundle);

std::string to_json(const ForecastReport& report);
std::string forecast_csv(const ForecastReport& report);

std::string theta_to_json(const GMatrix& theta, const ShapeParams& shape);

std::string error_json(const std::string& kind, const std::string& message);

}  // namespace chordalcov
