#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <tuple>

#include "chordalcov/simulate.hpp"

// Numeric mean of the inverse family over Q_G, r <= 3.
//
// The unnormalized density (per clique / separator, no perfect-order
// bookkeeping) is
//   prod_C det(x_C)^{alpha_C - (c+1)/2} / prod_S det(x_S)^{beta_S - (s+1)/2}
//   * exp( -sum_C <theta_C, x_C^{-1}> + sum_S nu(S) <theta_S, x_S^{-1}> ).
// In layered coordinates u = x_hh, T = x_{R,h}/u, W = x_RR - x_Rh x_hR / u
// the trace identity
//   <theta_C, x_C^{-1}> = theta_hh/u + theta_hh (T-M)' W^{-1} (T-M) + tr(W^{-1} theta_sc)
// (M = theta_{Rh}/theta_hh, theta_sc the Schur block of theta) splits the
// integrand into independent 1-D factors, so tensor grids collapse to
// products of 1-D composite Gauss-Legendre integrals plus the explicit
// tau-moment grids of the normalized cross block. The closed-form
// normalizing constant and the layered mean formulas are never used here.

namespace chordalcov {

namespace {

struct GlRule {
  std::vector<double> x, w;  // on [-1, 1], symmetric
};

GlRule gauss_legendre(int n) {
  GlRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Mirror exactly so that odd moments cancel to zero in floating point.
    rule.x[i] = -x;
    rule.x[n - 1 - i] = x;
    rule.w[i] = w;
    rule.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.x[n / 2] = 0.0;
  return rule;
}

struct Grid1D {
  std::vector<double> x, w;
};

Grid1D composite(double lo, double hi, double panel, int nodes) {
  const GlRule rule = gauss_legendre(nodes);
  Grid1D g;
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / panel)));
  const double h = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * h, b = a + h;
    for (int i = 0; i < nodes; ++i) {
      g.x.push_back((a + b) / 2.0 + rule.x[i] * h / 2.0);
      g.w.push_back(rule.w[i] * h / 2.0);
    }
  }
  return g;
}

// log of I(P, B, q) = int_0^inf u^{P+q} e^{-B/u} du, via u = e^y.
// Converges iff P + q + 1 < 0 (upper tail) and B > 0 (lower tail).
double log_tail_integral(double P, double B, double q, double refine) {
  const double A = P + q + 1.0;  // exponent of e^{A y}
  if (!(B > 0.0)) throw MomentUndefined("integral needs a positive rate");
  if (A >= -1e-3)
    throw MomentUndefined(
        "integral diverges (tail exponent " + std::to_string(A) + ")");
  const double peak = std::log(B / (-A));
  const double lo = peak - std::max(8.0, std::log1p(80.0 / (-A)) + 4.0);
  const double hi = peak + 2.0 + 60.0 / (-A);
  const double panel = std::min(1.0, 3.0 / std::sqrt(-A)) / refine;
  const Grid1D g = composite(lo, hi, panel, 12);
  const double gmax = A * peak - (-A);  // value of Ay - B e^{-y} at the peak
  double sum = 0.0;
  for (size_t i = 0; i < g.x.size(); ++i) {
    const double y = g.x[i];
    sum += g.w[i] * std::exp(A * y - B * std::exp(-y) - gmax);
  }
  return gmax + std::log(sum);
}

struct TailMoments {
  double log_z;   // log I(P, B, 0)
  double mean;    // I(P, B, 1) / I(P, B, 0)
};

TailMoments tail_moments(double P, double B, double refine) {
  TailMoments t;
  t.log_z = log_tail_integral(P, B, 0.0, refine);
  t.mean = std::exp(log_tail_integral(P, B, 1.0, refine) - t.log_z);
  return t;
}

// Moments of the cross-block kernel exp(-|tau|^2) on [-9,9], per axis.
struct TauMoments {
  double log_z1;  // log of the 1-D mass
  double second;  // E[tau^2] per axis (first moment is exactly zero)
};

TauMoments tau_moments(double refine) {
  const Grid1D g = composite(-9.0, 9.0, 0.75 / refine, 12);
  double z = 0.0, m2 = 0.0;
  for (size_t i = 0; i < g.x.size(); ++i) {
    const double f = g.w[i] * std::exp(-g.x[i] * g.x[i]);
    z += f;
    m2 += g.x[i] * g.x[i] * f;
  }
  return TauMoments{std::log(z), m2 / z};
}

// Moments of a 2x2 inverse-Wishart-type integral
//   int det(W)^{gamma} exp(-tr(W^{-1} Theta)) dW
// over the PD cone, by the same hub factorization (exact algebra).
struct Wishart2Moments {
  double log_z;
  Mat mean;  // 2x2
};

Wishart2Moments wishart2_moments(double gamma, const Mat& theta,
                                 double refine) {
  const double t22 = theta(1, 1);
  const double m = theta(1, 0) / t22;
  const double sc = theta(0, 0) - theta(1, 0) * theta(1, 0) / t22;
  const TauMoments tau = tau_moments(refine);
  const TailMoments u2 = tail_moments(gamma + 1.0, t22, refine);
  const TailMoments w2 = tail_moments(gamma + 0.5, sc, refine);
  Wishart2Moments out;
  out.log_z = u2.log_z + w2.log_z + tau.log_z1 - 0.5 * std::log(t22);
  out.mean = Mat(2, 2);
  out.mean(1, 1) = u2.mean;
  out.mean(1, 0) = out.mean(0, 1) = m * u2.mean;
  out.mean(0, 0) =
      w2.mean + u2.mean * (m * m + tau.second * w2.mean / t22);
  return out;
}

struct ComponentResult {
  double log_z = 0.0;
  // Mean entries keyed by (i, j) global vertex ids, upper triangle.
  std::vector<std::tuple<int, int, double>> mean_entries;
};

// Single clique of size c <= 3 with shape alpha, scale block theta_c over
// global vertex ids `verts` (sorted; hub is the last).
ComponentResult single_clique(const std::vector<int>& verts, double alpha,
                              const Mat& theta_c, double refine) {
  ComponentResult out;
  const int c = static_cast<int>(verts.size());
  if (c == 1) {
    const TailMoments u = tail_moments(alpha - 1.0, theta_c(0, 0), refine);
    out.log_z = u.log_z;
    out.mean_entries.emplace_back(verts[0], verts[0], u.mean);
    return out;
  }
  const int hub = c - 1;
  const double thh = theta_c(hub, hub);
  const TauMoments tau = tau_moments(refine);
  if (c == 2) {
    const double sc = theta_c(0, 0) - theta_c(0, 1) * theta_c(0, 1) / thh;
    const double m = theta_c(0, 1) / thh;
    const TailMoments u = tail_moments(alpha - 0.5, thh, refine);
    const TailMoments w = tail_moments(alpha - 1.0, sc, refine);
    out.log_z = u.log_z + w.log_z + tau.log_z1 - 0.5 * std::log(thh);
    out.mean_entries.emplace_back(verts[1], verts[1], u.mean);
    out.mean_entries.emplace_back(verts[0], verts[1], m * u.mean);
    out.mean_entries.emplace_back(
        verts[0], verts[0],
        w.mean + u.mean * (m * m + tau.second * w.mean / thh));
    return out;
  }
  // c == 3: R = {verts[0], verts[1]}, 2x2 Schur block by recursion.
  Eigen::Vector2d th_cross(theta_c(0, 2), theta_c(1, 2));
  Mat sc = theta_c.topLeftCorner(2, 2) - th_cross * th_cross.transpose() / thh;
  const Eigen::Vector2d m = th_cross / thh;
  const TailMoments u = tail_moments(alpha, thh, refine);
  const Wishart2Moments w = wishart2_moments(alpha - 1.5, sc, refine);
  out.log_z = u.log_z + w.log_z + 2.0 * tau.log_z1 - std::log(thh);
  out.mean_entries.emplace_back(verts[2], verts[2], u.mean);
  for (int a = 0; a < 2; ++a)
    out.mean_entries.emplace_back(verts[a], verts[2], m[a] * u.mean);
  Mat e_tt = m * m.transpose() + tau.second * w.mean / thh;
  Mat e_rr = w.mean + u.mean * e_tt;
  for (int a = 0; a < 2; ++a)
    for (int b = a; b < 2; ++b)
      out.mean_entries.emplace_back(verts[a], verts[b], e_rr(a, b));
  return out;
}

// Two 2-cliques sharing one hub vertex.
struct HubClique {
  int other;      // global id of the non-hub vertex
  double alpha;
  double t_oh;    // theta entries
  double t_oo;
};

ComponentResult two_clique_hub(int hub, double t_hh, double beta2,
                               const std::vector<HubClique>& cliques,
                               double refine) {
  ComponentResult out;
  const TauMoments tau = tau_moments(refine);
  double p_u = 1.0 - beta2;  // separator det power -(beta2 - (s+1)/2), s = 1
  for (const auto& c : cliques) p_u += c.alpha - 1.5 + 1.0;  // det + Jacobian
  const TailMoments u = tail_moments(p_u, t_hh, refine);
  out.log_z = u.log_z;
  out.mean_entries.emplace_back(hub, hub, u.mean);
  for (const auto& c : cliques) {
    const double m = c.t_oh / t_hh;
    const double sc = c.t_oo - c.t_oh * c.t_oh / t_hh;
    const TailMoments w = tail_moments(c.alpha - 1.0, sc, refine);
    out.log_z += w.log_z + tau.log_z1 - 0.5 * std::log(t_hh);
    out.mean_entries.emplace_back(std::min(c.other, hub),
                                  std::max(c.other, hub), m * u.mean);
    out.mean_entries.emplace_back(
        c.other, c.other,
        w.mean + u.mean * (m * m + tau.second * w.mean / t_hh));
  }
  return out;
}

struct QuadResult {
  double log_z;
  Mat mean;
};

QuadResult evaluate(const WpgParams& p, double refine) {
  const JunctionTree& t = *p.tree;
  const int r = t.vertex_count();
  if (r > 3) throw DimensionTooLarge("quadrature supports r <= 3");
  const GMatrix& theta = p.theta_ref();
  theta.require_in_qg("quadrature scale");
  const Mat& th = theta.dense_view();
  const int k = t.clique_count();

  // Connected components of the clique graph (cliques sharing vertices).
  std::vector<int> comp(k);
  std::iota(comp.begin(), comp.end(), 0);
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      std::vector<int> shared;
      std::set_intersection(t.clique(a).begin(), t.clique(a).end(),
                            t.clique(b).begin(), t.clique(b).end(),
                            std::back_inserter(shared));
      if (!shared.empty()) {
        const int ca = comp[a], cb = comp[b];
        for (int& c : comp)
          if (c == cb) c = ca;
      }
    }

  QuadResult out{0.0, Mat::Zero(r, r)};
  std::vector<char> done(k, 0);
  for (int a = 0; a < k; ++a) {
    if (done[a]) continue;
    std::vector<int> members;
    for (int b = 0; b < k; ++b)
      if (comp[b] == comp[a]) {
        members.push_back(b);
        done[b] = 1;
      }
    ComponentResult res = [&] {
      if (members.size() == 1) {
        const int j = members[0];
        return single_clique(t.clique(j), p.shape.alpha[j],
                             submatrix(th, t.clique(j)), refine);
      }
      if (members.size() == 2 && t.clique_size(members[0]) == 2 &&
          t.clique_size(members[1]) == 2) {
        const int j2 = std::max(members[0], members[1]);
        std::vector<int> shared;
        std::set_intersection(
            t.clique(members[0]).begin(), t.clique(members[0]).end(),
            t.clique(members[1]).begin(), t.clique(members[1]).end(),
            std::back_inserter(shared));
        if (shared.size() != 1)
          throw DomainError("unsupported component for quadrature");
        const int hub = shared[0];
        std::vector<HubClique> hc;
        for (int j : members) {
          int other = t.clique(j)[0] == hub ? t.clique(j)[1] : t.clique(j)[0];
          hc.push_back(HubClique{other, p.shape.alpha[j], th(other, hub),
                                 th(other, other)});
        }
        return two_clique_hub(hub, th(hub, hub), p.shape.beta[j2 - 1], hc,
                              refine);
      }
      throw DomainError("unsupported clique layout for quadrature");
    }();
    out.log_z += res.log_z;
    for (const auto& [i, j, v] : res.mean_entries) {
      out.mean(i, j) = v;
      out.mean(j, i) = v;
    }
  }
  return out;
}

}  // namespace

GMatrix quadrature_mean(const WpgParams& p) {
  const QuadResult base = evaluate(p, 1.0);
  const QuadResult fine = evaluate(p, 2.0);
  const double scale = std::max(1.0, max_abs(base.mean));
  if (max_abs(base.mean - fine.mean) > 1e-5 * scale)
    throw MomentUndefined("quadrature failed to converge under refinement");
  return project(fine.mean, p.tree);
}

double quadrature_log_normalizer(const WpgParams& p) {
  const QuadResult base = evaluate(p, 1.0);
  const QuadResult fine = evaluate(p, 2.0);
  if (std::abs(base.log_z - fine.log_z) >
      1e-6 * std::max(1.0, std::abs(fine.log_z)))
    throw MomentUndefined("quadrature failed to converge under refinement");
  return fine.log_z;
}

}  // namespace chordalcov
