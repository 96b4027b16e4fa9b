#include "chordalcov/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace chordalcov {

using nlohmann::json;

namespace {

json parse_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("invalid JSON");
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Vec sorted_eigs_desc(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  Vec v = es.eigenvalues();
  std::sort(v.data(), v.data() + v.size(), std::greater<double>());
  return v;
}

}  // namespace

JunctionTree tree_from_spec_json(const std::string& json_text) {
  const json j = parse_json(json_text);
  if (!j.is_object()) throw ParseError("graph spec must be a JSON object");
  if (j.contains("band")) {
    const auto& b = j.at("band");
    return banded_graph(b.at("r").get<int>(), b.at("k").get<int>());
  }
  if (j.contains("diffband")) {
    const auto& b = j.at("diffband");
    // changepoint is 1-based in the file format
    return diff_banded_graph(b.at("r").get<int>(), b.at("k1").get<int>(),
                             b.at("k2").get<int>(),
                             b.at("changepoint").get<int>() - 1);
  }
  if (j.contains("vertices")) {
    const int r = j.at("vertices").get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.value("edges", json::array())) {
      if (!e.is_array() || e.size() != 2)
        throw ParseError("edges must be [i, j] pairs");
      edges.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1);
    }
    return build_junction_tree(Graph::make(r, std::move(edges)));
  }
  throw ParseError("graph spec needs 'vertices', 'band' or 'diffband'");
}

Mat read_matrix_csv(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw ParseError("bad number at line " + std::to_string(lineno) +
                         " of " + path);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("ragged row at line " + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyData("empty matrix file " + path);
  Mat m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows.front().size(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_matrix_csv(const std::string& path, const Mat& m) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << fmt(m(i, j));
    }
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Spec strings

PriorSpec parse_prior_spec(const std::string& text) {
  PriorSpec spec;
  spec.label = text;
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.empty()) throw UsageError("empty prior spec");

  // Optional trailing scale token.
  if (parts.size() > 1 && (parts.back() == "calibrated" || parts.back() == "I")) {
    spec.scale = parts.back() == "calibrated" ? PriorSpec::Scale::Calibrated
                                              : PriorSpec::Scale::Identity;
    parts.pop_back();
  }

  const std::string& head = parts[0];
  auto need_arg = [&](const char* what) -> const std::string& {
    if (parts.size() < 2)
      throw UsageError(std::string(what) + " needs an argument in '" + text + "'");
    return parts[1];
  };
  if (head == "hiw") {
    spec.kind = PriorSpec::Kind::Hiw;
    spec.delta = std::stod(need_arg("hiw"));
  } else if (head == "iwpg-prop") {
    spec.kind = PriorSpec::Kind::Proportional;
    spec.factor = std::stod(need_arg("iwpg-prop"));
  } else if (head == "iwpg-affine") {
    if (parts.size() < 3) throw UsageError("iwpg-affine:<a>:<b>");
    spec.kind = PriorSpec::Kind::Affine;
    spec.a = std::stod(parts[1]);
    spec.b = std::stod(parts[2]);
  } else if (head == "reference") {
    spec.kind = PriorSpec::Kind::Reference;
  } else if (head == "iwpg") {
    spec.kind = PriorSpec::Kind::Explicit;
    const json j = parse_json(read_file(need_arg("iwpg")));
    ShapeParams shape;
    const auto& alpha = j.at("alpha");
    const auto& beta = j.at("beta");
    shape.alpha = Vec(alpha.size());
    for (size_t i = 0; i < alpha.size(); ++i) shape.alpha[i] = alpha[i].get<double>();
    shape.beta = Vec(beta.size());
    for (size_t i = 0; i < beta.size(); ++i) shape.beta[i] = beta[i].get<double>();
    spec.explicit_shape = std::move(shape);
    if (j.contains("theta")) {
      const auto& th = j.at("theta");
      if (th.is_array() && !th.empty() && th[0].is_array()) {
        Mat m(th.size(), th[0].size());
        for (size_t i = 0; i < th.size(); ++i)
          for (size_t c = 0; c < th[i].size(); ++c) m(i, c) = th[i][c].get<double>();
        spec.explicit_theta = std::move(m);
      } else if (th.is_array()) {
        Vec d(th.size());
        for (size_t i = 0; i < th.size(); ++i) d[i] = th[i].get<double>();
        spec.explicit_theta = Mat(d.asDiagonal());
      } else {
        throw ParseError("theta must be a matrix or a diagonal list");
      }
      spec.scale = PriorSpec::Scale::Explicit;
    }
  } else {
    throw UsageError("unknown prior spec '" + text + "'");
  }
  return spec;
}

ShapeParams PriorSpec::shape_for(const JunctionTree& t) const {
  switch (kind) {
    case Kind::Hiw:
      return hiw_shape(delta, t);
    case Kind::Proportional:
      return proportional_shape(factor, t);
    case Kind::Affine:
      return affine_shape(a, b, t);
    case Kind::Reference:
      return reference_shape(t);
    case Kind::Explicit: {
      if (!explicit_shape) throw DomainError("missing explicit shape");
      if (explicit_shape->alpha.size() != t.clique_count() ||
          explicit_shape->beta.size() != t.clique_count() - 1)
        throw DomainError("explicit shape sizes do not match the graph");
      return *explicit_shape;
    }
  }
  throw DomainError("unreachable");
}

WpgParams PriorSpec::instantiate(TreePtr tree) const {
  if (kind == Kind::Reference) return WpgParams::reference(std::move(tree));
  ShapeParams shape = shape_for(*tree);
  GMatrix theta = [&]() -> GMatrix {
    switch (scale) {
      case Scale::Identity:
        return identity_gmatrix(tree);
      case Scale::Calibrated:
        return calibrate_theta(shape, tree);
      case Scale::Explicit:
        if (!explicit_theta) throw DomainError("missing explicit theta");
        return project(*explicit_theta, tree);
    }
    throw DomainError("unreachable");
  }();
  return WpgParams::make(std::move(shape), std::move(tree), std::move(theta));
}

EstimatorSpec parse_estimator_spec(const std::string& text) {
  EstimatorSpec spec;
  spec.label = text;
  if (text == "truth") {
    spec.kind = EstimatorSpec::Kind::Truth;
  } else if (text == "mle") {
    spec.kind = EstimatorSpec::Kind::Mle;
  } else if (text == "mle_g") {
    spec.kind = EstimatorSpec::Kind::MleG;
  } else if (text == "reference") {
    spec.kind = EstimatorSpec::Kind::Reference;
  } else if (text.rfind("eb:", 0) == 0) {
    std::string rest = text.substr(3);
    PriorSpec::Scale scale = PriorSpec::Scale::Identity;
    const auto pos = rest.find(':');
    if (pos != std::string::npos) {
      const std::string tail = rest.substr(pos + 1);
      if (tail == "calibrated")
        scale = PriorSpec::Scale::Calibrated;
      else if (tail != "I")
        throw UsageError("unknown eb scale '" + tail + "'");
      rest = rest.substr(0, pos);
    }
    if (rest == "prop")
      spec.kind = EstimatorSpec::Kind::EbProportional;
    else if (rest == "affine")
      spec.kind = EstimatorSpec::Kind::EbAffine;
    else
      throw UsageError("unknown eb spec '" + text + "'");
    spec.eb_scale = scale;
  } else {
    spec.kind = EstimatorSpec::Kind::Bayes;
    spec.prior = parse_prior_spec(text);
  }
  return spec;
}

// ---------------------------------------------------------------------------
// SimConfig

SimConfig sim_config_from_json(const std::string& json_text,
                               const std::string& base_dir) {
  const json j = parse_json(json_text);
  SimConfig cfg;
  cfg.tree = share(tree_from_spec_json(j.at("graph").dump()));

  const auto& truth = j.at("truth");
  if (truth.contains("template_csv")) {
    std::string path = truth.at("template_csv").get<std::string>();
    if (!path.empty() && path[0] != '/' && !base_dir.empty())
      path = base_dir + "/" + path;
    cfg.truth_template = read_matrix_csv(path);
  } else if (truth.contains("ar1")) {
    cfg.truth_template =
        ar1_template(cfg.tree->vertex_count(),
                     truth.at("ar1").at("rho").get<double>());
  } else {
    throw ParseError("truth needs 'template_csv' or 'ar1'");
  }

  for (const auto& e : j.at("estimators"))
    cfg.estimators.push_back(e.get<std::string>());
  for (const auto& n : j.at("sample_sizes")) cfg.sample_sizes.push_back(n.get<int>());
  cfg.replications = j.value("replications", 1000);
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.record_eigenvalues = j.value("record_eigenvalues", false);
  if (j.contains("losses"))
    for (const auto& l : j.at("losses"))
      cfg.losses.push_back(l.get<std::string>());
  return cfg;
}

// ---------------------------------------------------------------------------
// Reports

std::string to_json(const RiskTable& table) {
  json out;
  out["losses"] = table.losses;
  out["sample_sizes"] = table.sample_sizes;
  json rows = json::array();
  for (size_t e = 0; e < table.estimators.size(); ++e) {
    json row;
    row["estimator"] = table.estimators[e];
    json cells = json::array();
    for (size_t ni = 0; ni < table.sample_sizes.size(); ++ni)
      for (size_t l = 0; l < table.losses.size(); ++l) {
        const RiskCell& c = table.cells[e][ni][l];
        json cell;
        cell["n"] = table.sample_sizes[ni];
        cell["loss"] = table.losses[l];
        if (c.missing) {
          cell["mean"] = nullptr;
          cell["std_error"] = nullptr;
        } else {
          cell["mean"] = c.mean;
          cell["std_error"] = c.std_error;
        }
        cell["count"] = c.count;
        cells.push_back(std::move(cell));
      }
    row["cells"] = std::move(cells);
    rows.push_back(std::move(row));
  }
  out["rows"] = std::move(rows);
  return out.dump(2);
}

std::string to_text_table(const RiskTable& table) {
  // Rows = estimators, columns = n x loss, "-" for infeasible cells.
  std::ostringstream os;
  const int name_w = 28, cell_w = 12;
  os << std::string(name_w, ' ');
  for (int n : table.sample_sizes)
    for (const auto& loss : table.losses) {
      std::string head = "n=" + std::to_string(n) + " " + loss;
      head.resize(cell_w - 1, ' ');
      os << " " << head;
    }
  os << "\n";
  for (size_t e = 0; e < table.estimators.size(); ++e) {
    std::string name = table.estimators[e];
    name.resize(name_w, ' ');
    os << name;
    for (size_t ni = 0; ni < table.sample_sizes.size(); ++ni)
      for (size_t l = 0; l < table.losses.size(); ++l) {
        const RiskCell& c = table.cells[e][ni][l];
        char buf[32];
        if (c.missing)
          std::snprintf(buf, sizeof(buf), "%*s", cell_w - 1, "-");
        else
          std::snprintf(buf, sizeof(buf), "%*.4g", cell_w - 1, c.mean);
        os << " " << buf;
      }
    os << "\n";
  }
  return os.str();
}

std::string scree_csv(const RiskTable& table) {
  std::ostringstream os;
  os << "index";
  for (const auto& label : table.eigen_labels)
    os << ",sigma:" << label << ",omega:" << label;
  os << "\n";
  if (table.sigma_eigenvalues.empty()) return os.str();
  const int r = static_cast<int>(table.sigma_eigenvalues.front().size());
  for (int i = 0; i < r; ++i) {
    os << (i + 1);
    for (size_t e = 0; e < table.eigen_labels.size(); ++e)
      os << "," << fmt(table.sigma_eigenvalues[e][i]) << ","
         << fmt(table.omega_eigenvalues[e][i]);
    os << "\n";
  }
  return os.str();
}

std::string to_json(const SelectionResult& result) {
  json out;
  out["criterion"] = result.criterion;
  out["best"] = result.best_id;
  json rows = json::array();
  for (const auto& m : result.ranked) {
    json row;
    row["id"] = m.id;
    row["score"] = m.score;
    row["edges"] = m.edge_count;
    if (result.criterion == "marginal") row["posterior"] = m.posterior;
    rows.push_back(std::move(row));
  }
  out["ranked"] = std::move(rows);
  return out.dump(2);
}

std::string to_json(const EstimateBundle& bundle,
                    const std::string& prior_label) {
  json out;
  out["prior"] = prior_label;
  out["n"] = bundle.n;
  json est = json::array();
  auto emit = [&](const char* name, const Mat& m) {
    json row;
    row["estimator"] = name;
    row["prior"] = prior_label;
    row["n"] = bundle.n;
    row["matrix"] = matrix_to_json(m);
    json eigs = json::array();
    for (double v : sorted_eigs_desc(m)) eigs.push_back(v);
    row["eigenvalues"] = std::move(eigs);
    est.push_back(std::move(row));
  };
  emit("sigma_l1", complete(bundle.sigma_l1));
  emit("sigma_l2", complete(bundle.sigma_l2));
  emit("omega_l1", bundle.omega_l1.dense());
  emit("omega_l2", bundle.omega_l2.dense());
  out["estimators"] = std::move(est);

  // Duality residuals, recomputed here so reports never carry stale values.
  const GMatrix dual_l1 = phi(bundle.omega_l2);
  const double res1 =
      max_abs(dual_l1.dense_view() - bundle.sigma_l1.dense_view());
  const Mat completed_l2 = complete(bundle.sigma_l2);
  const Mat omega_l1_from_sigma =
      spd_inverse<NotPositiveDefinite>(completed_l2, "completed sigma_l2");
  const double res2 = max_abs(omega_l1_from_sigma - bundle.omega_l1.dense());
  out["duality_residuals"] = {{"sigma_l1_vs_inv_omega_l2", res1},
                              {"omega_l1_vs_inv_completed_sigma_l2", res2}};
  return out.dump(2);
}

std::string eigenvalues_csv(const EstimateBundle& bundle) {
  std::ostringstream os;
  os << "index,sigma_l1,sigma_l2,omega_l1,omega_l2\n";
  const Vec s1 = sorted_eigs_desc(complete(bundle.sigma_l1));
  const Vec s2 = sorted_eigs_desc(complete(bundle.sigma_l2));
  const Vec o1 = sorted_eigs_desc(bundle.omega_l1.dense());
  const Vec o2 = sorted_eigs_desc(bundle.omega_l2.dense());
  for (int i = 0; i < s1.size(); ++i)
    os << (i + 1) << "," << fmt(s1[i]) << "," << fmt(s2[i]) << "," << fmt(o1[i])
       << "," << fmt(o2[i]) << "\n";
  return os.str();
}

std::string to_json(const ForecastReport& report) {
  json out;
  out["train_size"] = report.train_size;
  out["split"] = report.split;
  json rows = json::array();
  for (size_t e = 0; e < report.estimators.size(); ++e) {
    json row;
    row["estimator"] = report.estimators[e];
    row["mean_abs_error"] = report.mean_errors[e];
    if (std::isnan(report.pct_reduction_vs_mle[e]))
      row["pct_reduction_vs_mle"] = nullptr;
    else
      row["pct_reduction_vs_mle"] = report.pct_reduction_vs_mle[e];
    rows.push_back(std::move(row));
  }
  out["estimators"] = std::move(rows);
  return out.dump(2);
}

std::string forecast_csv(const ForecastReport& report) {
  std::ostringstream os;
  os << "time_point";
  for (const auto& e : report.estimators) os << "," << e;
  os << "\n";
  for (size_t i = 0; i < report.time_points.size(); ++i) {
    os << report.time_points[i];
    for (size_t e = 0; e < report.estimators.size(); ++e)
      os << "," << fmt(report.per_time_errors[e][i]);
    os << "\n";
  }
  return os.str();
}

std::string theta_to_json(const GMatrix& theta, const ShapeParams& shape) {
  json out;
  out["alpha"] = std::vector<double>(shape.alpha.data(),
                                     shape.alpha.data() + shape.alpha.size());
  out["beta"] = std::vector<double>(shape.beta.data(),
                                    shape.beta.data() + shape.beta.size());
  out["theta"] = matrix_to_json(theta.dense_view());
  json diag = json::array();
  for (int i = 0; i < theta.dim(); ++i) diag.push_back(theta.entry(i, i));
  out["theta_diagonal"] = std::move(diag);
  return out.dump(2);
}

std::string error_json(const std::string& kind, const std::string& message) {
  json out;
  out["error"] = kind;
  out["message"] = message;
  return out.dump();
}

}  // namespace chordalcov
