#include <doctest.h>

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "chordalcov/io.hpp"
#include "test_util.hpp"

using namespace chordalcov;
using namespace ccts;
using nlohmann::json;

namespace {

// Minimal structural validation against a bundled schema file: checks
// "type", "required" and "properties" recursively.
bool validate_against_schema(const json& schema, const json& value) {
  if (schema.contains("type")) {
    const std::string type = schema.at("type");
    if (type == "object" && !value.is_object()) return false;
    if (type == "array" && !value.is_array()) return false;
    if (type == "string" && !value.is_string()) return false;
    if (type == "integer" && !value.is_number_integer()) return false;
    if (type == "number" && !value.is_number()) return false;
    if (type == "boolean" && !value.is_boolean()) return false;
  }
  if (schema.contains("required"))
    for (const auto& key : schema.at("required"))
      if (!value.contains(key.get<std::string>())) return false;
  if (schema.contains("properties") && value.is_object())
    for (const auto& [key, sub] : schema.at("properties").items())
      if (value.contains(key) && !validate_against_schema(sub, value.at(key)))
        return false;
  if (schema.contains("items") && value.is_array())
    for (const auto& item : value)
      if (!validate_against_schema(schema.at("items"), item)) return false;
  return true;
}

json load_schema(const std::string& name) {
  std::ifstream in(std::string(CHORDALCOV_SOURCE_DIR) + "/schemas/" + name);
  REQUIRE(in.good());
  json j;
  in >> j;
  return j;
}

}  // namespace

TEST_CASE("graph specs") {
  SUBCASE("explicit edges, 1-based") {
    const JunctionTree t = tree_from_spec_json(
        R"({"vertices": 3, "edges": [[1,2],[2,3]]})");
    CHECK(t.clique_count() == 2);
    CHECK(t.clique(0) == std::vector<int>{0, 1});
  }
  SUBCASE("band form") {
    const JunctionTree t = tree_from_spec_json(R"({"band":{"r":10,"k":2}})");
    CHECK(t.clique_count() == 8);
  }
  SUBCASE("diffband form with 1-based changepoint") {
    const JunctionTree t = tree_from_spec_json(
        R"({"diffband":{"r":6,"k1":2,"k2":1,"changepoint":4}})");
    CHECK(t.clique_count() == 4);
    CHECK(t.clique(2) == std::vector<int>{3, 4});
  }
  SUBCASE("bad spec rejected") {
    CHECK_THROWS_AS(tree_from_spec_json("{}"), ParseError);
    CHECK_THROWS_AS(tree_from_spec_json("not json"), ParseError);
  }
}

TEST_CASE("prior spec strings") {
  SUBCASE("hiw with delta") {
    const PriorSpec p = parse_prior_spec("hiw:2.5");
    CHECK(p.kind == PriorSpec::Kind::Hiw);
    CHECK(p.delta == 2.5);
    CHECK(p.scale == PriorSpec::Scale::Identity);
  }
  SUBCASE("calibrated scale suffix") {
    const PriorSpec p = parse_prior_spec("iwpg-prop:0.25:calibrated");
    CHECK(p.kind == PriorSpec::Kind::Proportional);
    CHECK(p.factor == 0.25);
    CHECK(p.scale == PriorSpec::Scale::Calibrated);
  }
  SUBCASE("reference") {
    CHECK(parse_prior_spec("reference").is_reference());
  }
  SUBCASE("explicit file") {
    const char* path = "/tmp/chordalcov_test_prior.json";
    {
      std::ofstream out(path);
      out << R"({"alpha": [-5, -5], "beta": [-4.5], "theta": [1.0, 1.0, 1.0]})";
    }
    const PriorSpec p = parse_prior_spec(std::string("iwpg:") + path);
    REQUIRE(p.explicit_shape.has_value());
    CHECK(p.explicit_shape->alpha[0] == -5.0);
    CHECK(p.scale == PriorSpec::Scale::Explicit);
    const TreePtr t = path_tree(3);
    const WpgParams prior = p.instantiate(t);
    CHECK(prior.theta_ref().entry(1, 1) == 1.0);
    std::remove(path);
  }
  SUBCASE("unknown spec rejected") {
    CHECK_THROWS_AS(parse_prior_spec("what:3"), UsageError);
  }
}

TEST_CASE("estimator spec strings") {
  CHECK(parse_estimator_spec("mle").kind == EstimatorSpec::Kind::Mle);
  CHECK(parse_estimator_spec("mle_g").kind == EstimatorSpec::Kind::MleG);
  CHECK(parse_estimator_spec("truth").kind == EstimatorSpec::Kind::Truth);
  CHECK(parse_estimator_spec("reference").kind ==
        EstimatorSpec::Kind::Reference);
  CHECK(parse_estimator_spec("hiw:3").kind == EstimatorSpec::Kind::Bayes);
  const EstimatorSpec eb = parse_estimator_spec("eb:prop:calibrated");
  CHECK(eb.kind == EstimatorSpec::Kind::EbProportional);
  CHECK(eb.eb_scale == PriorSpec::Scale::Calibrated);
  CHECK(parse_estimator_spec("eb:affine").kind ==
        EstimatorSpec::Kind::EbAffine);
  CHECK_THROWS_AS(parse_estimator_spec("eb:what"), UsageError);
}

TEST_CASE("predictor spec variant suffix") {
  CHECK(parse_predictor_spec("hiw:3:L2").variant == Loss::L2);
  CHECK(parse_predictor_spec("hiw:3:L1").variant == Loss::L1);
  CHECK(parse_predictor_spec("hiw:3").variant == Loss::L1);
  CHECK(parse_predictor_spec("reference:L2").base.kind ==
        EstimatorSpec::Kind::Reference);
}

TEST_CASE("matrix CSV round trip") {
  const char* path = "/tmp/chordalcov_test_matrix.csv";
  Rng rng(99);
  const Mat m = random_spd(4, rng);
  write_matrix_csv(path, m);
  const Mat back = read_matrix_csv(path);
  CHECK(max_abs(m - back) == 0.0);  // full precision round trip
  std::remove(path);
}

TEST_CASE("sim config parsing") {
  const std::string text = R"({
    "graph": {"band": {"r": 6, "k": 2}},
    "truth": {"ar1": {"rho": 0.5}},
    "estimators": ["mle_g", "hiw:3"],
    "sample_sizes": [20, 40],
    "replications": 7,
    "seed": 11,
    "record_eigenvalues": true
  })";
  const SimConfig cfg = sim_config_from_json(text, ".");
  CHECK(cfg.tree->vertex_count() == 6);
  CHECK(cfg.estimators.size() == 2);
  CHECK(cfg.replications == 7);
  CHECK(cfg.seed == 11);
  CHECK(cfg.record_eigenvalues);
  CHECK(cfg.truth_template(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("emitted JSON validates against the bundled schemas") {
  SUBCASE("risk table") {
    const TreePtr t = path_tree(3);
    SimConfig cfg;
    cfg.tree = t;
    cfg.truth_template = ar1_template(3, 0.5);
    cfg.estimators = {"mle_g"};
    cfg.sample_sizes = {15};
    cfg.replications = 3;
    cfg.seed = 5;
    const RiskTable table = run_risk(cfg);
    const json out = json::parse(to_json(table));
    CHECK(validate_against_schema(load_schema("risk.schema.json"), out));
    CHECK(to_text_table(table).find("mle_g") != std::string::npos);
  }
  SUBCASE("selection result") {
    const Mat data = sample_data(ar1_template(4, 0.4), 30, 3);
    const SelectionResult res =
        select_banded(data, 2, parse_prior_spec("hiw:3"), Criterion::Marginal);
    const json out = json::parse(to_json(res));
    CHECK(validate_against_schema(load_schema("select.schema.json"), out));
  }
  SUBCASE("estimate bundle") {
    const TreePtr t = path_tree(3);
    const Mat data = sample_data(ar1_template(3, 0.5), 20, 7);
    const EstimateBundle b =
        bayes_bundle(WpgParams::hiw(3.0, t, identity_gmatrix(t)), 20,
                     sample_cov(data));
    const json out = json::parse(to_json(b, "hiw:3"));
    CHECK(validate_against_schema(load_schema("estimate.schema.json"), out));
    // duality residuals must be tiny
    CHECK(out.at("duality_residuals")
              .at("sigma_l1_vs_inv_omega_l2")
              .get<double>() < 1e-10);
  }
  SUBCASE("forecast report") {
    const TreePtr t = share(banded_graph(6, 1));
    Dataset d;
    d.values = sample_data(ar1_template(6, 0.5), 50, 9);
    const ForecastReport rep =
        forecast_report(d, 40, {"mle", "mle_g"}, t);
    const json out = json::parse(to_json(rep));
    CHECK(validate_against_schema(load_schema("predict.schema.json"), out));
    const std::string csv = forecast_csv(rep);
    CHECK(csv.find("time_point") == 0);
  }
  SUBCASE("calibration output") {
    const TreePtr t = two_clique_tree(4, 3, 1);
    const ShapeParams s = proportional_shape(1.0, *t);
    const GMatrix theta = calibrate_theta(s, t);
    const json out = json::parse(theta_to_json(theta, s));
    CHECK(validate_against_schema(load_schema("calibrate.schema.json"), out));
  }
  SUBCASE("error payload") {
    const json out = json::parse(error_json("DomainError", "boom"));
    CHECK(validate_against_schema(load_schema("error.schema.json"), out));
  }
}
