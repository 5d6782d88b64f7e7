#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "portvar/common.hpp"
#include "portvar/model.hpp"

namespace portvar {

/// One monomial: coefficient times x^e over all variables.
struct Term {
  Complex coeff;
  std::vector<int> exponents;

  int total_degree() const {
    int s = 0;
    for (int e : exponents) s += e;
    return s;
  }
};

/// Sparse multivariate polynomial over C as a normalized term list
/// (no duplicate exponent vectors, cached total degree).
class MultiPoly {
 public:
  explicit MultiPoly(int n_vars) : n_vars_(n_vars) {
    if (n_vars < 1) throw std::invalid_argument("MultiPoly: need at least one variable");
  }

  int n_vars() const { return n_vars_; }
  int degree() const { return degree_; }
  const std::vector<Term>& terms() const { return terms_; }

  void add_term(Complex coeff, std::vector<int> exponents) {
    if (int(exponents.size()) != n_vars_)
      throw std::invalid_argument("MultiPoly::add_term: exponent vector size mismatch");
    for (int e : exponents)
      if (e < 0) throw std::invalid_argument("MultiPoly::add_term: negative exponent");
    if (coeff == Complex(0.0, 0.0)) return;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (terms_[i].exponents == exponents) {
        terms_[i].coeff += coeff;
        if (terms_[i].coeff == Complex(0.0, 0.0)) {
          terms_.erase(terms_.begin() + long(i));
          recompute_degree();
        }
        return;
      }
    }
    terms_.push_back(Term{coeff, std::move(exponents)});
    degree_ = std::max(degree_, terms_.back().total_degree());
  }

  Complex evaluate(const Eigen::VectorXcd& x) const {
    if (x.size() != n_vars_) throw std::invalid_argument("MultiPoly::evaluate: dimension mismatch");
    Complex acc = 0.0;
    for (const auto& t : terms_) {
      Complex prod = t.coeff;
      for (int v = 0; v < n_vars_; ++v)
        for (int e = 0; e < t.exponents[v]; ++e) prod *= x(v);
      acc += prod;
    }
    return acc;
  }

  MultiPoly derivative(int var) const {
    MultiPoly out(n_vars_);
    for (const auto& t : terms_) {
      if (t.exponents[var] == 0) continue;
      std::vector<int> e = t.exponents;
      const int p = e[var]--;
      out.add_term(t.coeff * double(p), std::move(e));
    }
    return out;
  }

  /// a*p + b*q over a shared variable set.
  static MultiPoly axpby(Complex a, const MultiPoly& p, Complex b, const MultiPoly& q) {
    if (p.n_vars() != q.n_vars()) throw std::invalid_argument("MultiPoly::axpby: variable mismatch");
    MultiPoly out(p.n_vars());
    for (const auto& t : p.terms_) out.add_term(a * t.coeff, t.exponents);
    for (const auto& t : q.terms_) out.add_term(b * t.coeff, t.exponents);
    return out;
  }

 private:
  void recompute_degree() {
    degree_ = 0;
    for (const auto& t : terms_) degree_ = std::max(degree_, t.total_degree());
  }

  int n_vars_;
  std::vector<Term> terms_;
  int degree_ = 0;
};

/// Square polynomial system with precomputed analytic Jacobian polynomials.
class PolySystem {
 public:
  explicit PolySystem(std::vector<MultiPoly> equations) : eqs_(std::move(equations)) {
    if (eqs_.empty()) throw std::invalid_argument("PolySystem: empty");
    n_vars_ = eqs_.front().n_vars();
    for (const auto& e : eqs_)
      if (e.n_vars() != n_vars_) throw std::invalid_argument("PolySystem: mixed variable counts");
    if (int(eqs_.size()) != n_vars_)
      throw std::invalid_argument("PolySystem: system must be square");
    jac_.reserve(eqs_.size());
    for (const auto& e : eqs_) {
      std::vector<MultiPoly> row;
      row.reserve(n_vars_);
      for (int v = 0; v < n_vars_; ++v) row.push_back(e.derivative(v));
      jac_.push_back(std::move(row));
    }
  }

  int n_vars() const { return n_vars_; }
  int size() const { return int(eqs_.size()); }
  const MultiPoly& equation(int i) const { return eqs_[i]; }

  Eigen::VectorXcd evaluate(const Eigen::VectorXcd& x) const {
    if (x.size() != n_vars_) throw std::invalid_argument("PolySystem::evaluate: dimension mismatch");
    Eigen::VectorXcd r(size());
    for (int i = 0; i < size(); ++i) r(i) = eqs_[i].evaluate(x);
    return r;
  }

  /// Entry (r, c) is d(eq_r)/d(x_c) at x.
  Eigen::MatrixXcd jacobian(const Eigen::VectorXcd& x) const {
    if (x.size() != n_vars_) throw std::invalid_argument("PolySystem::jacobian: dimension mismatch");
    Eigen::MatrixXcd J(size(), n_vars_);
    for (int r = 0; r < size(); ++r)
      for (int c = 0; c < n_vars_; ++c) J(r, c) = jac_[r][c].evaluate(x);
    return J;
  }

  std::vector<int> degrees() const {
    std::vector<int> d;
    d.reserve(eqs_.size());
    for (const auto& e : eqs_) d.push_back(e.degree());
    return d;
  }

  double bezout_number() const {
    double b = 1.0;
    for (const auto& e : eqs_) b *= std::max(1, e.degree());
    return b;
  }

 private:
  int n_vars_;
  std::vector<MultiPoly> eqs_;
  std::vector<std::vector<MultiPoly>> jac_;
};

/// Convex homotopy family H(x,t) = gamma*t*start(x) + (1-t)*target(x).
/// t runs from 1 (start) down to 0 (target).
struct ParamFamily {
  PolySystem start;
  PolySystem target;
  Complex gamma;

  ParamFamily(PolySystem s, PolySystem t, Complex g)
      : start(std::move(s)), target(std::move(t)), gamma(g) {
    if (start.n_vars() != target.n_vars() || start.size() != target.size())
      throw std::invalid_argument("ParamFamily: endpoint systems must match in shape");
  }

  Eigen::VectorXcd evaluate(const Eigen::VectorXcd& x, double t) const {
    return gamma * t * start.evaluate(x) + (1.0 - t) * target.evaluate(x);
  }

  Eigen::MatrixXcd jacobian_x(const Eigen::VectorXcd& x, double t) const {
    return gamma * t * start.jacobian(x) + (1.0 - t) * target.jacobian(x);
  }

  /// dH/dt, used by the Euler predictor.
  Eigen::VectorXcd dt_derivative(const Eigen::VectorXcd& x) const {
    return gamma * start.evaluate(x) - target.evaluate(x);
  }
};

inline ParamFamily make_param_family(PolySystem start, PolySystem target, std::mt19937_64& rng) {
  return ParamFamily(std::move(start), std::move(target), random_unit_complex(rng));
}

struct InfinityReport {
  bool clean = false;
  std::vector<std::string> reasons;  // e.g. "w_d zero", "k_2d zero"
};

/// The homogenized critical system drops solutions at infinity exactly when
/// w_d and every k_id are nonzero (its y=0 slice then forces x = 0).
inline InfinityReport solutions_at_infinity_check(const UtilityModel& m) {
  InfinityReport rep;
  if (m.weights().leading() == 0.0) rep.reasons.push_back("w_d zero");
  for (int i = 0; i < m.n(); ++i)
    if (m.k().entry(i, m.d()) == 0.0)
      rep.reasons.push_back("k_" + std::to_string(i + 1) + "d zero");
  rep.clean = rep.reasons.empty();
  return rep;
}

}  // namespace portvar
