// Response surface methodology: Box-Behnken designs, second-order
// least-squares models, coefficient t-tests and optimum recommendation.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>

#include "cfstune/errors.hpp"

namespace cfstune::rsm {

struct FactorSpec {
  std::string name;
  double low = -1.0;
  double mid = 0.0;
  double high = 1.0;

  double half_range() const { return (high - low) / 2.0; }
  double code(double natural) const { return (natural - mid) / half_range(); }
  double decode(double coded) const { return mid + coded * half_range(); }

  void validate() const {
    if (!(low < mid && mid < high)) {
      throw ConfigError("factor " + name + ": levels must satisfy low < mid < high");
    }
  }
};

struct DesignRow {
  std::vector<double> coded;
  std::vector<double> natural;
};

struct DesignMatrix {
  std::vector<FactorSpec> factors;
  std::vector<DesignRow> runs;

  std::vector<std::vector<double>> coded_rows() const {
    std::vector<std::vector<double>> out;
    out.reserve(runs.size());
    for (const auto& r : runs) out.push_back(r.coded);
    return out;
  }
};

/// Three-factor Box-Behnken design: the four (+/-1, +/-1) corners of each
/// factor pair with the third factor at its centre, pairs in order
/// (1,2), (1,3), (2,3), followed by `center_replicates` centre runs.
inline DesignMatrix box_behnken_design(std::span<const FactorSpec> factors,
                                       int center_replicates = 2) {
  if (factors.size() != 3) {
    throw ConfigError("box_behnken_design supports exactly 3 factors, got " +
                      std::to_string(factors.size()));
  }
  if (center_replicates < 0) throw ConfigError("center_replicates must be >= 0");
  for (const auto& f : factors) f.validate();

  DesignMatrix d;
  d.factors.assign(factors.begin(), factors.end());
  auto add = [&](std::vector<double> coded) {
    DesignRow row;
    row.natural.resize(coded.size());
    for (std::size_t j = 0; j < coded.size(); ++j) {
      row.natural[j] = factors[j].decode(coded[j]);
    }
    row.coded = std::move(coded);
    d.runs.push_back(std::move(row));
  };
  constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  constexpr double signs[4][2] = {{-1, -1}, {1, -1}, {-1, 1}, {1, 1}};
  for (const auto& pr : pairs) {
    for (const auto& sg : signs) {
      std::vector<double> x(3, 0.0);
      x[static_cast<std::size_t>(pr[0])] = sg[0];
      x[static_cast<std::size_t>(pr[1])] = sg[1];
      add(std::move(x));
    }
  }
  for (int c = 0; c < center_replicates; ++c) add(std::vector<double>(3, 0.0));
  return d;
}

/// Number of second-order coefficients for k factors.
inline std::size_t quadratic_term_count(std::size_t k) {
  return 1 + 2 * k + k * (k - 1) / 2;
}

/// Model row [1, x_i..., x_i^2..., x_i x_j (i<j)...].
inline std::vector<double> quadratic_terms(std::span<const double> x) {
  const std::size_t k = x.size();
  std::vector<double> t;
  t.reserve(quadratic_term_count(k));
  t.push_back(1.0);
  for (std::size_t i = 0; i < k; ++i) t.push_back(x[i]);
  for (std::size_t i = 0; i < k; ++i) t.push_back(x[i] * x[i]);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) t.push_back(x[i] * x[j]);
  }
  return t;
}

inline std::vector<std::string> quadratic_term_names(
    std::span<const std::string> factor_names) {
  const std::size_t k = factor_names.size();
  std::vector<std::string> n{"(Intercept)"};
  for (std::size_t i = 0; i < k; ++i) n.push_back(factor_names[i]);
  for (std::size_t i = 0; i < k; ++i) n.push_back(factor_names[i] + "^2");
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      n.push_back(factor_names[i] + ":" + factor_names[j]);
    }
  }
  return n;
}

/// Second-order model in coded units.
struct QuadraticModel {
  std::size_t num_factors = 0;
  std::vector<std::string> factor_names;
  std::vector<double> beta;  // intercept includes the centring offset
  double offset = 0.0;       // min(response) subtracted before solving
  double residual_variance = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> coef_std_errors;
  int dof = 0;
  std::vector<double> residuals;
  // Kept so the model can be refit on a subset of factors.
  std::vector<std::vector<double>> design;
  std::vector<double> responses;

  double predict(std::span<const double> x) const {
    const auto t = quadratic_terms(x);
    double y = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) y += beta[i] * t[i];
    return y;
  }

  std::vector<std::string> term_names() const {
    return quadratic_term_names(factor_names);
  }

  /// Linear coefficient vector b.
  Eigen::VectorXd linear() const {
    Eigen::VectorXd b(static_cast<Eigen::Index>(num_factors));
    for (std::size_t i = 0; i < num_factors; ++i) {
      b(static_cast<Eigen::Index>(i)) = beta[1 + i];
    }
    return b;
  }

  /// Symmetric B with y = beta0 + b'x + x'Bx.
  Eigen::MatrixXd quadratic() const {
    const auto k = static_cast<Eigen::Index>(num_factors);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(k, k);
    std::size_t idx = 1 + 2 * num_factors;
    for (Eigen::Index i = 0; i < k; ++i) {
      B(i, i) = beta[1 + num_factors + static_cast<std::size_t>(i)];
    }
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = i + 1; j < k; ++j) {
        B(i, j) = B(j, i) = beta[idx++] / 2.0;
      }
    }
    return B;
  }
};

/// Ordinary least squares on the full quadratic basis.
///
/// Responses are shifted by their minimum before the normal equations are
/// formed; the shift is folded back into the intercept.
inline QuadraticModel fit_quadratic(
    const std::vector<std::vector<double>>& design,
    std::span<const double> responses,
    std::vector<std::string> factor_names = {}) {
  if (design.empty()) throw ConfigError("fit_quadratic: empty design");
  const std::size_t n = design.size();
  const std::size_t k = design.front().size();
  const std::size_t p = quadratic_term_count(k);
  if (responses.size() != n) {
    throw ConfigError("fit_quadratic: " + std::to_string(responses.size()) +
                      " responses for " + std::to_string(n) + " runs");
  }
  if (n < p) {
    throw ConfigError("fit_quadratic: need at least " + std::to_string(p) +
                      " runs, got " + std::to_string(n));
  }
  if (factor_names.empty()) {
    for (std::size_t i = 0; i < k; ++i) factor_names.push_back("x" + std::to_string(i + 1));
  }

  QuadraticModel m;
  m.num_factors = k;
  m.factor_names = std::move(factor_names);
  m.design = design;
  m.responses.assign(responses.begin(), responses.end());
  m.offset = *std::min_element(responses.begin(), responses.end());

  const auto N = static_cast<Eigen::Index>(n);
  const auto P = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd X(N, P);
  Eigen::VectorXd y(N);
  for (Eigen::Index r = 0; r < N; ++r) {
    const auto& row = design[static_cast<std::size_t>(r)];
    if (row.size() != k) throw ConfigError("fit_quadratic: ragged design");
    const auto t = quadratic_terms(row);
    for (Eigen::Index c = 0; c < P; ++c) X(r, c) = t[static_cast<std::size_t>(c)];
    y(r) = responses[static_cast<std::size_t>(r)] - m.offset;
  }

  const Eigen::MatrixXd xtx = X.transpose() * X;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  if (lu.rank() < P) {
    throw SingularFitError("fit_quadratic: rank-deficient design (rank " +
                           std::to_string(lu.rank()) + " < " + std::to_string(p) + ")");
  }
  const Eigen::VectorXd bc = lu.solve(X.transpose() * y);
  const Eigen::VectorXd res = y - X * bc;

  m.beta.assign(bc.data(), bc.data() + P);
  m.beta[0] += m.offset;
  m.residuals.assign(res.data(), res.data() + N);
  m.dof = static_cast<int>(n) - static_cast<int>(p);
  m.coef_std_errors.assign(p, std::numeric_limits<double>::quiet_NaN());
  if (m.dof > 0) {
    m.residual_variance = res.squaredNorm() / m.dof;
    const Eigen::MatrixXd inv = lu.inverse();
    for (std::size_t i = 0; i < p; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      m.coef_std_errors[i] = std::sqrt(m.residual_variance * inv(ii, ii));
    }
  }
  return m;
}

struct CoefficientTest {
  std::string term;
  double estimate = 0.0;
  double std_error = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sided p-value of a Student t statistic, via the regularized
/// incomplete beta function I_{v/(v+t^2)}(v/2, 1/2).
inline double student_t_two_sided_p(double t, int dof) {
  if (std::isinf(t)) return 0.0;
  const double v = static_cast<double>(dof);
  return boost::math::ibeta(v / 2.0, 0.5, v / (v + t * t));
}

/// t = beta / se with the model's residual degrees of freedom.
///
/// An exact fit (residual variance numerically zero) reports t = +/-inf and
/// p = 0 for every non-zero coefficient and t = 0, p = 1 for coefficients
/// that are zero to rounding.
inline std::vector<CoefficientTest> coefficient_significance(
    const QuadraticModel& m) {
  if (m.dof < 1) {
    throw NoSignificanceError("no residual degrees of freedom for significance tests");
  }
  double y_scale = 1.0;
  for (double r : m.responses) y_scale = std::max(y_scale, std::abs(r - m.offset));
  double beta_scale = 1.0;
  for (std::size_t i = 1; i < m.beta.size(); ++i) {
    beta_scale = std::max(beta_scale, std::abs(m.beta[i]));
  }
  const bool exact = std::sqrt(m.residual_variance) <= 1e-10 * y_scale;

  const auto names = m.term_names();
  std::vector<CoefficientTest> out;
  for (std::size_t i = 0; i < m.beta.size(); ++i) {
    CoefficientTest c;
    c.term = names[i];
    c.estimate = m.beta[i];
    c.std_error = m.coef_std_errors[i];
    const double scale = i == 0 ? std::max(beta_scale, std::abs(m.offset)) : beta_scale;
    if (exact) {
      if (std::abs(c.estimate) <= 1e-9 * scale) {
        c.t_statistic = 0.0;
        c.p_value = 1.0;
      } else {
        c.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), c.estimate);
        c.p_value = 0.0;
      }
    } else if (c.estimate == 0.0) {
      c.t_statistic = 0.0;
      c.p_value = 1.0;
    } else {
      c.t_statistic = c.estimate / c.std_error;
      c.p_value = student_t_two_sided_p(c.t_statistic, m.dof);
    }
    out.push_back(std::move(c));
  }
  return out;
}

/// Indices (into the term list) of every term that involves factor `f`.
inline std::vector<std::size_t> terms_involving(std::size_t f, std::size_t k) {
  std::vector<std::size_t> idx{1 + f, 1 + k + f};
  std::size_t t = 1 + 2 * k;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j, ++t) {
      if (i == f || j == f) idx.push_back(t);
    }
  }
  return idx;
}

enum class RecommendationBranch {
  StationaryMinimum,  // B positive definite, stationary point inside the cube
  StationarySaddle,   // B indefinite, stationary point inside the cube
  DescentPath,        // followed the steepest-descent path from the centre
  Center,             // no factor survived screening
};

inline const char* to_string(RecommendationBranch b) {
  switch (b) {
    case RecommendationBranch::StationaryMinimum: return "stationary-minimum";
    case RecommendationBranch::StationarySaddle: return "stationary-saddle";
    case RecommendationBranch::DescentPath: return "descent-path";
    case RecommendationBranch::Center: return "center";
  }
  return "?";
}

struct RecommendOptions {
  // Factors with no term significant at this level are dropped and the
  // model is refit on the rest. Set <= 0 to keep every factor.
  double screen_alpha = 0.10;
  double step = 0.05;  // coded units per descent step
  int max_steps = 10'000;
};

struct Recommendation {
  RecommendationBranch branch = RecommendationBranch::Center;
  std::vector<double> coded;    // full dimension; dropped factors at 0
  std::vector<double> natural;
  std::vector<bool> active;     // factor survived screening
  // Stationary point of the (reduced) model in full coordinates, NaN for
  // dropped factors; empty when B is singular.
  std::vector<double> stationary_point;
  std::vector<double> eigenvalues;  // of the reduced B, ascending
  double predicted = 0.0;
  int path_steps = 0;
  QuadraticModel reduced_model;
};

namespace detail {

inline bool inside_cube(const Eigen::VectorXd& x) {
  return (x.array().abs() <= 1.0 + 1e-12).all();
}

inline double predict(const QuadraticModel& m, const Eigen::VectorXd& x) {
  std::vector<double> v(x.data(), x.data() + x.size());
  return m.predict(v);
}

}  // namespace detail

/// Locates the recommended operating point of a fitted model.
///
/// After screening, the reduced model's stationary point x_s = -B^{-1} b / 2
/// is used when it lies in the coded cube and is a minimum or a saddle (the
/// origin of the canonical path). Otherwise the steepest-descent path of the
/// fitted surface is followed from the centre in fixed coded steps until the
/// cube boundary or until the prediction stops improving.
inline Recommendation recommend_optimum(const QuadraticModel& model,
                                        std::span<const FactorSpec> factors,
                                        const RecommendOptions& opt = {}) {
  const std::size_t k = model.num_factors;
  if (factors.size() != k) throw ConfigError("recommend_optimum: factor count mismatch");
  Recommendation rec;
  rec.active.assign(k, true);

  if (opt.screen_alpha > 0.0 && model.dof >= 1) {
    const auto tests = coefficient_significance(model);
    for (std::size_t f = 0; f < k; ++f) {
      bool any = false;
      for (std::size_t t : terms_involving(f, k)) any = any || tests[t].p_value < opt.screen_alpha;
      rec.active[f] = any;
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t f = 0; f < k; ++f) {
    if (rec.active[f]) keep.push_back(f);
  }

  rec.coded.assign(k, 0.0);
  auto finish = [&] {
    rec.natural.resize(k);
    for (std::size_t f = 0; f < k; ++f) rec.natural[f] = factors[f].decode(rec.coded[f]);
    rec.predicted = model.predict(rec.coded);
    return rec;
  };
  if (keep.empty()) {
    rec.branch = RecommendationBranch::Center;
    rec.reduced_model = model;
    return finish();
  }

  if (keep.size() == k) {
    rec.reduced_model = model;
  } else {
    std::vector<std::vector<double>> sub;
    for (const auto& row : model.design) {
      std::vector<double> r;
      for (std::size_t f : keep) r.push_back(row[f]);
      sub.push_back(std::move(r));
    }
    std::vector<std::string> names;
    for (std::size_t f : keep) names.push_back(model.factor_names[f]);
    rec.reduced_model = fit_quadratic(sub, model.responses, names);
  }
  const QuadraticModel& m = rec.reduced_model;
  const Eigen::VectorXd b = m.linear();
  const Eigen::MatrixXd B = m.quadratic();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B);
  const Eigen::VectorXd ev = eig.eigenvalues();
  rec.eigenvalues.assign(ev.data(), ev.data() + ev.size());

  const double ev_scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  const bool singular = ev.cwiseAbs().minCoeff() <= 1e-8 * ev_scale;
  auto scatter = [&](const Eigen::VectorXd& x, double fill) {
    std::vector<double> full(k, fill);
    for (std::size_t i = 0; i < keep.size(); ++i) {
      full[keep[i]] = x(static_cast<Eigen::Index>(i));
    }
    return full;
  };

  if (!singular) {
    const Eigen::VectorXd xs = -0.5 * B.ldlt().solve(b);
    rec.stationary_point = scatter(xs, std::numeric_limits<double>::quiet_NaN());
    const bool has_positive = ev.maxCoeff() > 0.0;
    if (detail::inside_cube(xs) && has_positive) {
      rec.branch = ev.minCoeff() > 0.0 ? RecommendationBranch::StationaryMinimum
                                       : RecommendationBranch::StationarySaddle;
      rec.coded = scatter(xs, 0.0);
      return finish();
    }
  }

  rec.branch = RecommendationBranch::DescentPath;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  double fx = detail::predict(m, x);
  for (int s = 0; s < opt.max_steps; ++s) {
    const Eigen::VectorXd g = b + 2.0 * B * x;
    const double norm = g.norm();
    if (norm == 0.0) break;
    const Eigen::VectorXd dir = -g / norm;
    double len = opt.step;
    bool at_boundary = false;
    // Shorten the final step so the path ends exactly on the cube face.
    for (Eigen::Index i = 0; i < dir.size(); ++i) {
      if (dir(i) == 0.0) continue;
      const double face = dir(i) > 0.0 ? 1.0 : -1.0;
      const double reach = (face - x(i)) / dir(i);
      if (reach < len) {
        len = std::max(reach, 0.0);
        at_boundary = true;
      }
    }
    if (len <= 0.0) break;
    Eigen::VectorXd xn = x + len * dir;
    xn = xn.cwiseMax(-1.0).cwiseMin(1.0);
    const double fn = detail::predict(m, xn);
    if (!(fn < fx)) break;
    x = xn;
    fx = fn;
    ++rec.path_steps;
    if (at_boundary) break;
  }
  rec.coded = scatter(x, 0.0);
  return finish();
}

}  // namespace cfstune::rsm
