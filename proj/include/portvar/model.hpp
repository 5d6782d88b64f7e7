#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "portvar/common.hpp"
#include "portvar/cumulants.hpp"

namespace portvar {

/// Preference weights w_1..w_d, one per cumulant order.
struct WeightVector {
  std::vector<double> w;

  WeightVector() = default;
  explicit WeightVector(std::vector<double> weights) : w(std::move(weights)) {
    for (double v : w)
      if (!std::isfinite(v)) throw std::invalid_argument("WeightVector: non-finite weight");
  }

  int order() const { return int(w.size()); }
  double at(int j) const { return w[j - 1]; }  // 1-based order
  double leading() const { return w.back(); }
  bool leading_nonzero() const { return !w.empty() && w.back() != 0.0; }
};

/// The generalized utility L(x) = sum_j sum_i w_j k_ij x_i^j, bundled with the
/// data defining it.
class UtilityModel {
 public:
  UtilityModel(CumulantMatrix k, WeightVector w) : k_(std::move(k)), w_(std::move(w)) {
    if (w_.order() != k_.d())
      throw std::invalid_argument("UtilityModel: weight count does not match cumulant order");
  }

  int n() const { return k_.n(); }
  int d() const { return k_.d(); }
  const CumulantMatrix& k() const { return k_; }
  const WeightVector& weights() const { return w_; }
  bool valid() const { return k_.all_nonzero(); }

  UtilityModel truncated(int new_d) const {
    std::vector<double> w(w_.w.begin(), w_.w.begin() + new_d);
    return UtilityModel(k_.truncated(new_d), WeightVector(std::move(w)));
  }

  UtilityModel with_weights(WeightVector w) const { return UtilityModel(k_, std::move(w)); }

 private:
  CumulantMatrix k_;
  WeightVector w_;
};

/// Real univariate polynomial P_i(x) = sum_{j=1}^d j w_j k_ij x^{j-1},
/// stored dense in ascending order (exactly d coefficients).
class AssetPolynomial {
 public:
  explicit AssetPolynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) throw std::invalid_argument("AssetPolynomial: empty");
  }

  const std::vector<double>& coefficients() const { return c_; }

  int degree() const {
    for (int j = int(c_.size()) - 1; j >= 0; --j)
      if (c_[j] != 0.0) return j;
    return 0;
  }

  double operator()(double x) const {
    double acc = 0.0;
    for (int j = int(c_.size()) - 1; j >= 0; --j) acc = acc * x + c_[j];
    return acc;
  }

  Complex operator()(const Complex& x) const {
    Complex acc = 0.0;
    for (int j = int(c_.size()) - 1; j >= 0; --j) acc = acc * x + c_[j];
    return acc;
  }

  AssetPolynomial derivative() const {
    if (c_.size() == 1) return AssetPolynomial({0.0});
    std::vector<double> d(c_.size() - 1);
    for (std::size_t j = 1; j < c_.size(); ++j) d[j - 1] = double(j) * c_[j];
    return AssetPolynomial(std::move(d));
  }

 private:
  std::vector<double> c_;
};

/// Per-asset gradient polynomials of L: coefficient at degree j-1 is j w_j k_ij.
inline std::vector<AssetPolynomial> build_asset_polynomials(const UtilityModel& m) {
  std::vector<AssetPolynomial> out;
  out.reserve(m.n());
  for (int i = 0; i < m.n(); ++i) {
    std::vector<double> c(m.d(), 0.0);
    for (int j = 1; j <= m.d(); ++j) c[j - 1] = double(j) * m.weights().at(j) * m.k().entry(i, j);
    out.emplace_back(std::move(c));
  }
  return out;
}

inline double evaluate_utility(const UtilityModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.n()) throw std::invalid_argument("evaluate_utility: dimension mismatch");
  double acc = 0.0;
  for (int i = 0; i < m.n(); ++i) {
    double p = 1.0;
    for (int j = 1; j <= m.d(); ++j) {
      p *= x(i);
      acc += m.weights().at(j) * m.k().entry(i, j) * p;
    }
  }
  return acc;
}

/// Analytic gradient of L at a real point: component i is P_i(x_i).
inline Eigen::VectorXd utility_gradient(const UtilityModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.n()) throw std::invalid_argument("utility_gradient: dimension mismatch");
  const auto polys = build_asset_polynomials(m);
  Eigen::VectorXd g(m.n());
  for (int i = 0; i < m.n(); ++i) g(i) = polys[i](x(i));
  return g;
}

enum class GlobalMaxReason {
  has_max,              // d even, column-d cumulants one sign, w_d the opposite sign
  leading_weight_zero,  // w_d = 0: leading form vanishes, predicate false by convention
  odd_order,
  mixed_signs,
  weight_sign_matches,
};

struct GlobalMaxVerdict {
  bool has_max = false;
  GlobalMaxReason reason = GlobalMaxReason::odd_order;
};

inline const char* to_string(GlobalMaxReason r) {
  switch (r) {
    case GlobalMaxReason::has_max: return "has-global-max";
    case GlobalMaxReason::leading_weight_zero: return "leading-weight-zero";
    case GlobalMaxReason::odd_order: return "odd-order";
    case GlobalMaxReason::mixed_signs: return "mixed-signs";
    case GlobalMaxReason::weight_sign_matches: return "weight-sign-matches";
  }
  return "?";
}

/// L has a global maximum iff d is even, all order-d cumulants share a sign,
/// and w_d has the opposite sign.
inline GlobalMaxVerdict has_global_max(const UtilityModel& m) {
  if (!m.valid()) throw std::invalid_argument("has_global_max: model has zero cumulant entries");
  const double wd = m.weights().leading();
  if (wd == 0.0) return {false, GlobalMaxReason::leading_weight_zero};
  if (m.d() % 2 != 0) return {false, GlobalMaxReason::odd_order};
  const double first = m.k().entry(0, m.d());
  for (int i = 1; i < m.n(); ++i)
    if (m.k().entry(i, m.d()) * first < 0.0) return {false, GlobalMaxReason::mixed_signs};
  if (wd * first < 0.0) return {true, GlobalMaxReason::has_max};
  return {false, GlobalMaxReason::weight_sign_matches};
}

/// One critical point of the constrained system: portfolio coordinates plus
/// the Lagrange multiplier.
struct PortfolioPoint {
  Eigen::VectorXcd x;
  Complex lambda{0.0, 0.0};
};

enum class PointClass { complex_pt, real_pt, real_feasible, degenerate };

inline const char* to_string(PointClass c) {
  switch (c) {
    case PointClass::complex_pt: return "complex";
    case PointClass::real_pt: return "real";
    case PointClass::real_feasible: return "real-feasible";
    case PointClass::degenerate: return "degenerate";
  }
  return "?";
}

/// Degenerate when any coordinate vanishes (the excluded portfolios); real
/// when imaginary parts are below the relative tolerance; real-feasible when
/// additionally every coordinate lies strictly inside (0,1).
inline PointClass classify_point(const PortfolioPoint& p, double tol_real = 1e-8,
                                 double tol_feasible = 1e-10) {
  double max_abs = 0.0, max_im = 0.0, max_re = 0.0, min_abs = std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.x.size(); ++i) {
    max_abs = std::max(max_abs, std::abs(p.x(i)));
    min_abs = std::min(min_abs, std::abs(p.x(i)));
    max_im = std::max(max_im, std::abs(p.x(i).imag()));
    max_re = std::max(max_re, std::abs(p.x(i).real()));
  }
  (void)max_abs;
  if (min_abs < tol_feasible) return PointClass::degenerate;
  if (max_im >= tol_real * (1.0 + max_re)) return PointClass::complex_pt;
  for (int i = 0; i < p.x.size(); ++i) {
    const double r = p.x(i).real();
    if (!(r > tol_feasible && r < 1.0 - tol_feasible)) return PointClass::real_pt;
  }
  return PointClass::real_feasible;
}

}  // namespace portvar
