#include "chordalcov/priors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chordalcov {

namespace {

constexpr double kEqualitySlack = 1e-12;

void check_shape_sizes(const ShapeParams& s, const JunctionTree& t) {
  if (s.alpha.size() != t.clique_count() ||
      s.beta.size() != t.clique_count() - 1)
    throw DomainError("shape parameter sizes do not match the tree");
}

// Occurrence indices j >= 1 whose separator equals S_2.
std::vector<int> j_of_s2(const JunctionTree& t) {
  std::vector<int> out;
  if (t.clique_count() < 2) return out;
  const int id2 = t.distinct_id(1);
  for (int j = 1; j < t.clique_count(); ++j)
    if (t.distinct_id(j) == id2) out.push_back(j);
  return out;
}

}  // namespace

ShapeParams ShapeParams::shifted(double d) const {
  ShapeParams out;
  out.alpha = alpha.array() - d;
  out.beta = beta.array() - d;
  return out;
}

const GMatrix& WpgParams::theta_ref() const {
  if (!theta)
    throw DomainError("improper prior has no scale; update with data first");
  return *theta;
}

WpgParams WpgParams::hiw(double delta, TreePtr tree, GMatrix theta) {
  ShapeParams shape = hiw_shape(delta, *tree);
  return make(std::move(shape), std::move(tree), std::move(theta));
}

WpgParams WpgParams::reference(TreePtr tree) {
  WpgParams p;
  p.shape = reference_shape(*tree);
  p.tree = std::move(tree);
  return p;
}

WpgParams WpgParams::make(ShapeParams shape, TreePtr tree, GMatrix theta) {
  if (!theta.tree()->same_structure(*tree))
    throw TreeMismatch("theta built on a different tree");
  theta.require_in_qg("prior scale theta");
  WpgParams p;
  p.tree = std::move(tree);
  p.shape = std::move(shape);
  p.theta = std::move(theta);
  return p;
}

ShapeParams hiw_shape(double delta, const JunctionTree& t) {
  const int k = t.clique_count();
  ShapeParams s;
  s.alpha = Vec(k);
  s.beta = Vec(k - 1);
  for (int j = 0; j < k; ++j)
    s.alpha[j] = -(delta + t.clique_size(j) - 1.0) / 2.0;
  for (int j = 1; j < k; ++j)
    s.beta[j - 1] = -(delta + t.separator_size(j) - 1.0) / 2.0;
  return s;
}

ShapeParams proportional_shape(double factor, const JunctionTree& t) {
  const int k = t.clique_count();
  ShapeParams s;
  s.alpha = Vec(k);
  s.beta = Vec(k - 1);
  for (int j = 0; j < k; ++j) {
    const double c = t.clique_size(j);
    s.alpha[j] = -(factor * c + c - 1.0) / 2.0;
  }
  for (int j = 1; j < k; ++j) {
    const double sz = t.separator_size(j);
    s.beta[j - 1] = -(factor * sz + sz - 1.0) / 2.0;
  }
  return s;
}

ShapeParams affine_shape(double a, double b, const JunctionTree& t) {
  const int k = t.clique_count();
  ShapeParams s;
  s.alpha = Vec(k);
  s.beta = Vec(k - 1);
  for (int j = 0; j < k; ++j) s.alpha[j] = a * t.clique_size(j) + b;
  for (int j = 1; j < k; ++j) s.beta[j - 1] = a * t.separator_size(j) + b;
  return s;
}

ShapeParams reference_shape(const JunctionTree& t) {
  const int k = t.clique_count();
  ShapeParams s;
  s.alpha = Vec::Zero(k);
  s.beta = Vec(k - 1);
  if (k > 1)
    s.beta[0] =
        (t.clique_size(0) + t.clique_size(1)) / 2.0 - t.separator_size(1);
  for (int j = 2; j < k; ++j)
    s.beta[j - 1] = (t.clique_size(j) - t.separator_size(j)) / 2.0;
  return s;
}

double gamma2(const ShapeParams& s, const JunctionTree& t) {
  check_shape_sizes(s, t);
  if (t.clique_count() < 2) return 0.0;
  const double beta2 = s.beta[0];
  const double s2 = t.s2();
  double g = 0.0;
  for (int j : j_of_s2(t))
    g += s.alpha[j] - beta2 + (t.clique_size(j) - s2) / 2.0;
  return g;
}

BpReport in_bp(const ShapeParams& s, const JunctionTree& t) {
  check_shape_sizes(s, t);
  const int k = t.clique_count();
  BpReport rep;
  rep.ok = true;

  // Betas of identical separators must agree.
  for (int i = 1; i < k && rep.ok; ++i)
    for (int j = i + 1; j < k && rep.ok; ++j)
      if (t.distinct_id(i) == t.distinct_id(j) &&
          std::abs(s.beta[i - 1] - s.beta[j - 1]) > kEqualitySlack) {
        rep.ok = false;
        rep.violation = "beta differs across occurrences of one separator";
      }

  // Condition 1 for every distinct separator other than S_2:
  // sum_{j in J(P,S)} (alpha_j + (c_j - s_j)/2) - nu(S) beta(S) = 0.
  const int id2 = k > 1 ? t.distinct_id(1) : -1;
  const auto& distinct = t.distinct_separators();
  for (size_t d = 0; d < distinct.size(); ++d) {
    if (static_cast<int>(d) == id2) continue;
    double lhs = 0.0;
    for (int j = 1; j < k; ++j)
      if (t.distinct_id(j) == static_cast<int>(d))
        lhs += s.alpha[j] + (t.clique_size(j) - t.separator_size(j)) / 2.0 -
               s.beta[j - 1];
    rep.equality_residual = std::max(rep.equality_residual, std::abs(lhs));
    if (std::abs(lhs) > kEqualitySlack && rep.ok) {
      rep.ok = false;
      rep.violation = "condition 1 fails for a separator other than S_2";
    }
  }

  // Condition 2 margins, all strictly positive.
  const double s2 = t.s2();
  {
    const double m = -s.alpha[0] - (t.clique_size(0) - s2 - 1.0) / 2.0;
    rep.inequality_margins.push_back(m);
    if (m <= 0.0 && rep.ok) {
      rep.ok = false;
      rep.violation = "condition 2 fails for clique 1";
    }
  }
  for (int q = 1; q < k; ++q) {
    const double m =
        -s.alpha[q] - (t.clique_size(q) - t.separator_size(q) - 1.0) / 2.0;
    rep.inequality_margins.push_back(m);
    if (m <= 0.0 && rep.ok) {
      rep.ok = false;
      rep.violation = "condition 2 fails for clique " + std::to_string(q + 1);
    }
  }

  // Condition 3: the Gamma_{s_2} argument in the normalizing factor must be
  // admissible, -alpha_1 - (c_1-s_2)/2 - gamma_2 > (s_2-1)/2. This is also
  // exactly what makes the normalizing integral converge. Vacuous when
  // s_2 = 0 since the Gamma_0 factor is 1.
  if (s2 > 0) {
    const double m = -s.alpha[0] - (t.clique_size(0) - s2) / 2.0 -
                     gamma2(s, t) - (s2 - 1.0) / 2.0;
    rep.inequality_margins.push_back(m);
    if (m <= 0.0 && rep.ok) {
      rep.ok = false;
      rep.violation = "condition 3 fails";
    }
  }
  return rep;
}

double log_multigamma(int d, double p) {
  if (d < 0) throw DomainError("negative dimension");
  if (d == 0) return 0.0;
  if (!(p > (d - 1) / 2.0))
    throw DomainError("log_multigamma needs p > (d-1)/2, got p=" +
                      std::to_string(p) + ", d=" + std::to_string(d));
  double acc = d * (d - 1) / 4.0 * std::log(std::numbers::pi);
  for (int i = 1; i <= d; ++i) acc += std::lgamma(p - (i - 1) / 2.0);
  return acc;
}

double log_gamma_ii(const ShapeParams& s, const JunctionTree& t) {
  check_shape_sizes(s, t);
  const int k = t.clique_count();
  const int c1 = t.clique_size(0);
  const int s2 = t.s2();

  double pi_power = (c1 - s2) * s2 / 2.0;
  for (int j = 1; j < k; ++j)
    pi_power += (t.clique_size(j) - t.separator_size(j)) *
                t.separator_size(j) / 2.0;

  double acc = pi_power * std::log(std::numbers::pi);
  acc += log_multigamma(s2, -s.alpha[0] - (c1 - s2) / 2.0 - gamma2(s, t));
  acc += log_multigamma(c1 - s2, -s.alpha[0]);
  for (int j = 1; j < k; ++j)
    acc += log_multigamma(t.clique_size(j) - t.separator_size(j), -s.alpha[j]);
  return acc;
}

double log_h_g(const ShapeParams& s, const GMatrix& x) {
  const auto& t = *x.tree();
  check_shape_sizes(s, t);
  x.require_in_qg("log_h_g");
  double acc = 0.0;
  for (int j = 0; j < t.clique_count(); ++j)
    acc += s.alpha[j] * spd_logdet<NotInQG>(x.block(j), "clique");
  for (int j = 1; j < t.clique_count(); ++j) {
    const auto& sep = t.separator(j);
    if (sep.empty()) continue;
    acc -= s.beta[j - 1] *
           spd_logdet<NotInQG>(x.clique_submatrix(sep), "separator");
  }
  return acc;
}

WpgParams posterior_update(const WpgParams& p, int n, const Mat& S) {
  if (n < 1) throw DomainError("need n >= 1 observations");
  GMatrix data_part = project(n * S, p.tree);
  if (!data_part.in_qg())
    throw SampleDeficient(
        "a clique block of the sample covariance is singular");
  WpgParams out;
  out.tree = p.tree;
  out.shape = p.shape.shifted(n / 2.0);
  out.on_two_sigma = p.on_two_sigma;
  out.theta = p.theta ? add(*p.theta, data_part) : std::move(data_part);
  return out;
}

GMatrix calibrate_theta(const ShapeParams& s, TreePtr tree) {
  const JunctionTree& t = *tree;
  check_shape_sizes(s, t);
  const int k = t.clique_count();
  const int r = t.vertex_count();
  const int c1 = t.clique_size(0);
  const int s2 = t.s2();
  const double g2 = gamma2(s, t);

  const double d2 = -(s.alpha[0] + (c1 + 1) / 2.0 + g2);
  const double dm = -(s.alpha[0] + (c1 - s2 + 1) / 2.0);
  if (d2 <= 0.0 || dm <= 0.0)
    throw MomentUndefined("first-layer denominator is not negative");

  Vec theta_diag = Vec::Zero(r);
  Vec mean_diag = Vec::Zero(r);  // layer expectations, assembled in order

  // Vertices of S_2 (the <2> block), then C_1 \ S_2 (the [1]. block).
  std::vector<int> sep2;
  if (k > 1) sep2 = t.separator(1);
  for (int v : sep2) {
    theta_diag[v] = -2.0 * (s.alpha[0] + (c1 - s2) / 2.0 + g2) - (s2 + 1.0);
    mean_diag[v] = theta_diag[v] / d2;
  }
  const double corr = 1.0 + s2 / (2.0 * d2);
  for (int v : t.clique(0)) {
    if (std::find(sep2.begin(), sep2.end(), v) != sep2.end()) continue;
    theta_diag[v] = -2.0 * (s.alpha[0] + (c1 - s2 + 1) / 2.0) / corr;
    mean_diag[v] = theta_diag[v] / dm * corr;
  }

  // Layers j >= 2: theta on R_j from the trace of already-computed
  // separator expectations (diagonal theta keeps every layer diagonal).
  for (int j = 1; j < k; ++j) {
    const double cj = t.clique_size(j);
    const double sj = t.separator_size(j);
    const double dj = -(s.alpha[j] + (cj - sj + 1) / 2.0);
    if (dj <= 0.0)
      throw MomentUndefined("layer " + std::to_string(j + 1) +
                            " denominator is not negative");
    double tr = 0.0;
    for (int v : t.separator(j)) tr += mean_diag[v] / theta_diag[v];
    const double factor = 1.0 + 0.5 * tr;
    for (int v : t.residual(j)) {
      theta_diag[v] = -2.0 * (s.alpha[j] + (cj - sj + 1) / 2.0) / factor;
      mean_diag[v] = theta_diag[v] / dj * factor;
    }
  }
  return project(Mat(theta_diag.asDiagonal()), tree);
}

}  // namespace chordalcov
