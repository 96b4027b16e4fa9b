#pragma once

#include <optional>
#include <string>

#include "chordalcov/priors.hpp"

namespace chordalcov {

// Prior specification strings:
//   "hiw:<delta>"        one-parameter shape
//   "iwpg-prop:<factor>" proportional rule delta_i = c_i * factor
//   "iwpg:<file.json>"   explicit alpha/beta (and optionally theta)
//   "reference"          the improper objective prior
// A ":calibrated" suffix replaces the default identity scale with the
// diagonal theta whose prior mean of Sigma is the identity.
struct PriorSpec {
  enum class Kind { Hiw, Proportional, Affine, Reference, Explicit };
  enum class Scale { Identity, Calibrated, Explicit };

  Kind kind = Kind::Hiw;
  double delta = 3.0;   // Hiw
  double factor = 0.25; // Proportional
  double a = 0.0, b = 0.0;  // Affine
  std::optional<ShapeParams> explicit_shape;
  std::optional<Mat> explicit_theta;
  Scale scale = Scale::Identity;
  std::string label;

  bool is_reference() const { return kind == Kind::Reference; }
  ShapeParams shape_for(const JunctionTree& t) const;
  WpgParams instantiate(TreePtr tree) const;
};

PriorSpec parse_prior_spec(const std::string& text);

// Estimator specification strings for the risk and prediction harnesses:
// "truth", "mle", "mle_g", "reference", any prior spec (Bayes bundle),
// "eb:prop[:calibrated]", "eb:affine[:calibrated]".
struct EstimatorSpec {
  enum class Kind {
    Truth,
    Mle,
    MleG,
    Reference,
    Bayes,
    EbProportional,
    EbAffine
  };
  Kind kind = Kind::MleG;
  PriorSpec prior;  // Bayes only
  PriorSpec::Scale eb_scale = PriorSpec::Scale::Identity;
  std::string label;
};

EstimatorSpec parse_estimator_spec(const std::string& text);

}  // namespace chordalcov
