// Command-line front end: estimate, select, risk, predict, calibrate,
// oracle-check. Exit codes: 0 success, 1 usage error, 2 numerical or
// model error (machine-readable JSON on stderr).

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "chordalcov/io.hpp"

namespace cc = chordalcov;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cc::ParseError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Graph flags accept inline JSON or a path to a JSON file.
cc::TreePtr load_tree(const std::string& spec) {
  const std::string text =
      spec.find_first_of("{") == std::string::npos ? slurp(spec) : spec;
  return cc::share(cc::tree_from_spec_json(text));
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw cc::ParseError("cannot write " + path);
  out << content;
}

std::string base_dir_of(const std::string& path) {
  const auto pos = path.find_last_of('/');
  return pos == std::string::npos ? std::string(".") : path.substr(0, pos);
}

int run_estimate(const std::string& data_path, const std::string& graph_spec,
                 const std::string& prior_spec, bool center, bool sqrt_transform,
                 bool has_header, const std::string& out_path,
                 const std::string& eigen_csv) {
  cc::TreePtr tree = load_tree(graph_spec);
  cc::Dataset data = cc::ingest_csv_file(data_path, sqrt_transform, has_header);
  const int n = static_cast<int>(data.values.rows());

  cc::Mat S;
  if (center) {
    S = cc::sample_cov_centered(data.values).S;
  } else {
    S = cc::sample_cov(data.values);
  }

  const cc::PriorSpec prior = cc::parse_prior_spec(prior_spec);
  cc::EstimateBundle bundle =
      prior.is_reference() ? cc::reference_bundle(n, S, tree)
                           : cc::bayes_bundle(prior.instantiate(tree), n, S);
  bundle.prior_spec = prior_spec;
  write_file(out_path, cc::to_json(bundle, prior_spec));
  if (!eigen_csv.empty()) write_file(eigen_csv, cc::eigenvalues_csv(bundle));
  return 0;
}

int run_select(const std::string& data_path, const std::string& family,
               int kmax, const std::string& grid_path,
               const std::string& prior_spec, const std::string& criterion,
               int folds, bool sqrt_transform, bool has_header,
               const std::string& out_path) {
  cc::Dataset data = cc::ingest_csv_file(data_path, sqrt_transform, has_header);
  const cc::PriorSpec prior = cc::parse_prior_spec(prior_spec);
  const cc::Criterion crit = criterion == "cv" ? cc::Criterion::Cv
                                               : cc::Criterion::Marginal;
  cc::SelectionResult result = [&] {
    if (family == "band")
      return cc::select_banded(data.values, kmax, prior, crit, folds);
    if (family == "diffband") {
      if (grid_path.empty())
        throw cc::UsageError("--grid required for the diffband family");
      std::vector<std::array<int, 3>> grid;
      const auto j = nlohmann::json::parse(slurp(grid_path));
      for (const auto& row : j)
        grid.push_back({row.at(0).get<int>(), row.at(1).get<int>(),
                        row.at(2).get<int>() - 1});  // 1-based changepoint
      return cc::select_diff_banded(data.values, grid, prior, crit, folds);
    }
    throw cc::UsageError("unknown family '" + family + "'");
  }();
  const std::string text = cc::to_json(result);
  if (out_path.empty())
    std::cout << text << "\n";
  else
    write_file(out_path, text);
  return 0;
}

int run_risk(const std::string& config_path, std::uint64_t seed,
             const std::string& out_base) {
  cc::SimConfig cfg =
      cc::sim_config_from_json(slurp(config_path), base_dir_of(config_path));
  cfg.seed = seed;
  const cc::RiskTable table = cc::run_risk(cfg);
  const std::string base = out_base.empty() ? "risk" : out_base;
  write_file(base + ".json", cc::to_json(table));
  write_file(base + ".txt", cc::to_text_table(table));
  if (cfg.record_eigenvalues) write_file(base + "_scree.csv", cc::scree_csv(table));
  std::cout << cc::to_text_table(table);
  return 0;
}

int run_predict(const std::string& data_path, const std::string& graph_spec,
                const std::vector<std::string>& estimators, int train_size,
                int split, bool sqrt_transform, bool has_header,
                const std::string& out_base) {
  cc::TreePtr tree = load_tree(graph_spec);
  cc::Dataset data = cc::ingest_csv_file(data_path, sqrt_transform, has_header);
  const cc::ForecastReport rep =
      cc::forecast_report(data, train_size, estimators, tree, split);
  const std::string base = out_base.empty() ? "forecast" : out_base;
  write_file(base + ".json", cc::to_json(rep));
  write_file(base + ".csv", cc::forecast_csv(rep));
  return 0;
}

int run_calibrate(const std::string& graph_spec, const std::string& prior_spec,
                  const std::string& out_path) {
  cc::TreePtr tree = load_tree(graph_spec);
  const cc::PriorSpec prior = cc::parse_prior_spec(prior_spec);
  const cc::ShapeParams shape = prior.shape_for(*tree);
  const cc::GMatrix theta = cc::calibrate_theta(shape, tree);
  write_file(out_path, cc::theta_to_json(theta, shape));
  return 0;
}

int run_oracle_check(const std::string& graph_spec, double delta, int draws,
                     std::uint64_t seed, const std::string& out_path) {
  cc::TreePtr tree = load_tree(graph_spec);
  const cc::GMatrix theta = cc::identity_gmatrix(tree);
  const cc::WpgParams prior =
      cc::WpgParams::hiw(delta, tree, cc::identity_gmatrix(tree));

  const cc::GMatrix closed = cc::iwpg_mean(prior);

  // Monte Carlo leg with per-entry standard errors (Welford).
  const int r = tree->vertex_count();
  cc::Mat mc_mean = cc::Mat::Zero(r, r), mc_m2 = cc::Mat::Zero(r, r);
  cc::Rng rng(seed);
  for (int i = 0; i < draws; ++i) {
    const cc::GMatrix draw = cc::hiw_sample_one(delta, theta, rng);
    const cc::Mat& d = draw.dense_view();
    const cc::Mat delta_m = d - mc_mean;
    mc_mean += delta_m / (i + 1);
    mc_m2 += delta_m.cwiseProduct(d - mc_mean);
  }
  const cc::Mat mc_se = (mc_m2 / (double(draws) * (draws - 1))).cwiseSqrt();

  nlohmann::json out;
  out["delta"] = delta;
  out["draws"] = draws;
  double max_se_multiple = 0.0;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      if (i == j || tree->has_edge(i, j)) {
        const double se = std::max(mc_se(i, j), 1e-14);
        max_se_multiple = std::max(
            max_se_multiple,
            std::abs(mc_mean(i, j) - closed.dense_view()(i, j)) / se);
      }
  out["sampler_vs_mean_max_se_multiple"] = max_se_multiple;

  if (r <= 3) {
    const cc::GMatrix quad = cc::quadrature_mean(prior);
    double rel = 0.0;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        if (i == j || tree->has_edge(i, j)) {
          const double denom = std::max(1e-12, std::abs(quad.dense_view()(i, j)));
          rel = std::max(rel, std::abs(quad.dense_view()(i, j) -
                                       closed.dense_view()(i, j)) / denom);
        }
    out["quadrature_vs_mean_max_rel"] = rel;
    out["three_way"] = true;
  } else {
    out["three_way"] = false;
  }
  const std::string text = out.dump(2);
  if (out_path.empty())
    std::cout << text << "\n";
  else
    write_file(out_path, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian covariance and precision estimation on decomposable "
               "graphical Gaussian models"};
  app.require_subcommand(1);

  // estimate
  auto* est = app.add_subcommand("estimate", "Four Bayes estimators from data");
  std::string est_data, est_graph, est_prior, est_out = "estimate.json",
              est_eigen;
  bool est_center = false, est_sqrt = false;
  est->add_option("--data", est_data, "observation CSV")->required();
  est->add_option("--graph", est_graph, "graph spec JSON or file")->required();
  est->add_option("--prior", est_prior, "prior spec")->required();
  est->add_option("--out", est_out, "output JSON path");
  est->add_option("--eigen-csv", est_eigen, "eigenvalue CSV path");
  est->add_flag("--center", est_center, "center columns by their means");
  est->add_flag("--sqrt", est_sqrt, "apply x = sqrt(N + 1/4)");
  bool est_header = false;
  est->add_flag("--header", est_header, "first CSV row is a header");

  // select
  auto* sel = app.add_subcommand("select", "Graph selection over a family");
  std::string sel_data, sel_family = "band", sel_grid, sel_prior = "hiw:3",
              sel_criterion = "marginal", sel_out;
  int sel_kmax = 10, sel_folds = 10;
  bool sel_sqrt = false;
  sel->add_option("--data", sel_data)->required();
  sel->add_option("--family", sel_family, "band | diffband");
  sel->add_option("--kmax", sel_kmax, "largest band width");
  sel->add_option("--grid", sel_grid, "diffband grid JSON file");
  sel->add_option("--prior", sel_prior);
  sel->add_option("--criterion", sel_criterion, "marginal | cv");
  sel->add_option("--folds", sel_folds);
  sel->add_option("--out", sel_out);
  sel->add_flag("--sqrt", sel_sqrt);
  bool sel_header = false;
  sel->add_flag("--header", sel_header, "first CSV row is a header");

  // risk
  auto* risk = app.add_subcommand("risk", "Monte Carlo risk table");
  std::string risk_config, risk_out;
  std::uint64_t risk_seed = 0;
  risk->add_option("--config", risk_config, "SimConfig JSON")->required();
  risk->add_option("--seed", risk_seed, "master seed")->required();
  risk->add_option("--out", risk_out, "output base name");

  // predict
  auto* pred = app.add_subcommand("predict", "Half-split forecast report");
  std::string pred_data, pred_graph, pred_out;
  std::vector<std::string> pred_estimators;
  int pred_train = 0, pred_split = -1;
  bool pred_sqrt = false;
  pred->add_option("--data", pred_data)->required();
  pred->add_option("--graph", pred_graph)->required();
  pred->add_option("--estimator", pred_estimators, "estimator specs")
      ->required();
  pred->add_option("--train", pred_train, "training rows")->required();
  pred->add_option("--split", pred_split, "columns in the first block");
  pred->add_option("--out", pred_out);
  pred->add_flag("--sqrt", pred_sqrt);
  bool pred_header = false;
  pred->add_flag("--header", pred_header, "first CSV row is a header");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Diagonal theta with prior mean I");
  std::string cal_graph, cal_prior, cal_out = "theta.json";
  cal->add_option("--graph", cal_graph)->required();
  cal->add_option("--prior", cal_prior, "shape spec (scale ignored)")
      ->required();
  cal->add_option("--out", cal_out);

  // oracle-check
  auto* ora = app.add_subcommand("oracle-check",
                                 "Compare closed-form, sampler and quadrature "
                                 "moments");
  std::string ora_graph, ora_out;
  double ora_delta = 3.0;
  int ora_draws = 200000;
  std::uint64_t ora_seed = 0;
  ora->add_option("--graph", ora_graph)->required();
  ora->add_option("--delta", ora_delta);
  ora->add_option("--draws", ora_draws);
  ora->add_option("--seed", ora_seed)->required();
  ora->add_option("--out", ora_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << cc::error_json("UsageError", e.what()) << "\n";
    return 1;
  }

  try {
    if (est->parsed())
      return run_estimate(est_data, est_graph, est_prior, est_center, est_sqrt,
                          est_header, est_out, est_eigen);
    if (sel->parsed())
      return run_select(sel_data, sel_family, sel_kmax, sel_grid, sel_prior,
                        sel_criterion, sel_folds, sel_sqrt, sel_header,
                        sel_out);
    if (risk->parsed()) return run_risk(risk_config, risk_seed, risk_out);
    if (pred->parsed())
      return run_predict(pred_data, pred_graph, pred_estimators, pred_train,
                         pred_split, pred_sqrt, pred_header, pred_out);
    if (cal->parsed()) return run_calibrate(cal_graph, cal_prior, cal_out);
    if (ora->parsed())
      return run_oracle_check(ora_graph, ora_delta, ora_draws, ora_seed,
                              ora_out);
  } catch (const cc::UsageError& e) {
    std::cerr << cc::error_json("UsageError", e.what()) << "\n";
    return 1;
  } catch (const cc::Error& e) {
    std::string kind = e.what();
    const auto colon = kind.find(':');
    if (colon != std::string::npos) kind = kind.substr(0, colon);
    std::cerr << cc::error_json(kind, e.what()) << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << cc::error_json("InternalError", e.what()) << "\n";
    return 2;
  }
  return 1;
}
