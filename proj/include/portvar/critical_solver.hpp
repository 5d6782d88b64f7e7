#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <optional>
#include <vector>

#include "portvar/common.hpp"
#include "portvar/model.hpp"
#include "portvar/polysys.hpp"
#include "portvar/tracker.hpp"

namespace portvar {

/// Number of complex non-degenerate critical points for generic data:
/// (d-1)^(n-1).
inline long expected_critical_count(int n, int d) {
  long e = 1;
  for (int i = 1; i < n; ++i) e *= long(d - 1);
  return e;
}

/// The reduced Lagrange system in (x_1..x_n):
///   P_1(x_1) - P_i(x_i) = 0 for i = 2..n,  sum x_i - 1 = 0.
/// lambda is recovered per solution as P_1(x_1).
struct CriticalSystem {
  PolySystem system;
  int n = 0;
  int d = 0;
};

inline CriticalSystem build_critical_system(const UtilityModel& m) {
  if (!m.valid())
    throw std::invalid_argument("build_critical_system: cumulant matrix has zero entries");
  if (!m.weights().leading_nonzero())
    throw std::invalid_argument(
        "build_critical_system: w_d = 0; the full-degree solve is undefined, use solve_strata");
  const int n = m.n(), d = m.d();
  std::vector<MultiPoly> eqs;
  eqs.reserve(n);
  for (int i = 1; i < n; ++i) {
    MultiPoly eq(n);
    for (int j = 1; j <= d; ++j) {
      std::vector<int> e1(n, 0), ei(n, 0);
      e1[0] = j - 1;
      ei[i] = j - 1;
      const double wj = double(j) * m.weights().at(j);
      eq.add_term(Complex(wj * m.k().entry(0, j), 0.0), std::move(e1));
      eq.add_term(Complex(-wj * m.k().entry(i, j), 0.0), std::move(ei));
    }
    eqs.push_back(std::move(eq));
  }
  {
    MultiPoly constraint(n);
    for (int i = 0; i < n; ++i) {
      std::vector<int> e(n, 0);
      e[i] = 1;
      constraint.add_term(Complex(1.0, 0.0), std::move(e));
    }
    constraint.add_term(Complex(-1.0, 0.0), std::vector<int>(n, 0));
    eqs.push_back(std::move(constraint));
  }
  return CriticalSystem{PolySystem(std::move(eqs)), n, d};
}

/// Roots-of-unity start system for the weight-space homotopy:
///   a_1 x_1^{d-1} - a_i x_i^{d-1} = 0 (i = 2..n),  sum x_i = 1,
/// with a_i = k_id normally, or fresh random complex coefficients when a
/// tuple's constraint denominator vanishes (the solutions stay closed-form).
struct StartSystem {
  PolySystem system;
  std::vector<Eigen::VectorXcd> starts;
  bool used_fallback = false;
  int degenerate_tuples = 0;          // tuples rejected under the data-derived coefficients
  std::vector<Complex> leading_coeffs;  // the a_i actually used
};

namespace detail {

inline PolySystem start_system_equations(int n, int d, const std::vector<Complex>& a) {
  std::vector<MultiPoly> eqs;
  eqs.reserve(n);
  for (int i = 1; i < n; ++i) {
    MultiPoly eq(n);
    std::vector<int> e1(n, 0), ei(n, 0);
    e1[0] = d - 1;
    ei[i] = d - 1;
    eq.add_term(a[0], std::move(e1));
    eq.add_term(-a[i], std::move(ei));
    eqs.push_back(std::move(eq));
  }
  MultiPoly constraint(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> e(n, 0);
    e[i] = 1;
    constraint.add_term(Complex(1.0, 0.0), std::move(e));
  }
  constraint.add_term(Complex(-1.0, 0.0), std::vector<int>(n, 0));
  eqs.push_back(std::move(constraint));
  return PolySystem(std::move(eqs));
}

/// Enumerate the (d-1)^(n-1) root-of-unity tuples; returns the start points
/// and counts tuples whose denominator 1 + sum zeta_i rho_i vanishes.
inline std::vector<Eigen::VectorXcd> start_points(int n, int d, const std::vector<Complex>& a,
                                                  int& degenerate) {
  degenerate = 0;
  const int r = d - 1;
  std::vector<Complex> rho(n, Complex(1.0, 0.0));
  for (int i = 1; i < n; ++i) rho[i] = std::pow(a[0] / a[i], 1.0 / double(r));

  std::vector<Eigen::VectorXcd> pts;
  std::vector<int> idx(std::max(0, n - 1), 0);
  while (true) {
    Complex denom(1.0, 0.0);
    std::vector<Complex> factor(n, Complex(1.0, 0.0));
    for (int i = 1; i < n; ++i) {
      const double ang = 2.0 * std::numbers::pi * double(idx[i - 1]) / double(r);
      const Complex zeta(std::cos(ang), std::sin(ang));
      factor[i] = zeta * rho[i];
      denom += factor[i];
    }
    if (std::abs(denom) < 1e-12) {
      ++degenerate;
    } else {
      Eigen::VectorXcd x(n);
      x(0) = Complex(1.0, 0.0) / denom;
      for (int i = 1; i < n; ++i) x(i) = factor[i] * x(0);
      pts.push_back(std::move(x));
    }
    int pos = int(idx.size()) - 1;
    while (pos >= 0 && ++idx[pos] == r) idx[pos--] = 0;
    if (pos < 0) break;
  }
  return pts;
}

}  // namespace detail

inline StartSystem build_start_system(const UtilityModel& m, std::uint64_t seed) {
  if (!m.weights().leading_nonzero())
    throw std::invalid_argument("build_start_system: w_d = 0");
  const int n = m.n(), d = m.d();
  std::vector<Complex> a(n);
  for (int i = 0; i < n; ++i) {
    const double kid = m.k().entry(i, d);
    if (kid == 0.0)
      throw std::invalid_argument("build_start_system: k_" + std::to_string(i + 1) + "d zero");
    a[i] = Complex(kid, 0.0);
  }

  StartSystem out{detail::start_system_equations(n, d, a), {}, false, 0, a};
  out.starts = detail::start_points(n, d, a, out.degenerate_tuples);
  if (out.degenerate_tuples == 0) return out;

  // Measure-zero data made some tuple denominators vanish; switch to random
  // complex coefficients of the same degree shape.
  std::mt19937_64 rng(mix_seed(seed, 0x5741u));
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::vector<Complex> b(n);
    for (int i = 0; i < n; ++i) b[i] = mag(rng) * random_unit_complex(rng);
    int degen = 0;
    auto starts = detail::start_points(n, d, b, degen);
    if (degen == 0) {
      StartSystem fb{detail::start_system_equations(n, d, b), std::move(starts), true,
                     out.degenerate_tuples, b};
      return fb;
    }
  }
  throw NumericalError("build_start_system: could not find non-degenerate start coefficients");
}

struct SolveSummary {
  int expected_count = 0;
  int distinct_count = 0;
  bool count_match = false;
  double nearest_pair_distance = std::numeric_limits<double>::infinity();
  double min_jacobian_sv = std::numeric_limits<double>::infinity();
  bool start_fallback = false;
  int degenerate_tuples = 0;
  InfinityReport infinity;
  BatchSummary tracking;
};

struct CriticalSolveResult {
  std::vector<PortfolioPoint> points;  // deduplicated endpoints with lambda attached
  std::vector<int> multiplicities;
  std::vector<TrackedSolution> paths;  // raw per-path results
  SolveSummary summary;
};

/// Solve the critical system by the weight-space homotopy: interpolate the
/// weights from (0,..,0,w_d) to w, seeded by the closed-form start solutions.
inline CriticalSolveResult solve_critical(const UtilityModel& m, const TrackerConfig& cfg) {
  cfg.validate();
  if (!m.valid())
    throw std::invalid_argument("solve_critical: cumulant matrix has zero entries");
  if (!m.weights().leading_nonzero())
    throw std::invalid_argument("solve_critical: w_d = 0; use solve_strata");

  const CriticalSystem target = build_critical_system(m);
  const StartSystem start = build_start_system(m, cfg.seed);
  const InfinityReport infinity = solutions_at_infinity_check(m);

  std::mt19937_64 rng(cfg.seed);
  const Complex gamma = random_unit_complex(rng);

  TrackerConfig run_cfg = cfg;
  run_cfg.retry_diverged = cfg.retry_diverged && infinity.clean;

  const ParamFamily fam(start.system, target.system, gamma);
  BatchResult batch = track_all(fam, start.starts, run_cfg);

  CriticalSolveResult out;
  out.paths = std::move(batch.solutions);
  out.summary.tracking = std::move(batch.summary);
  out.summary.expected_count = int(expected_critical_count(m.n(), m.d()));
  out.summary.start_fallback = start.used_fallback;
  out.summary.degenerate_tuples = start.degenerate_tuples;
  out.summary.infinity = infinity;

  std::vector<Eigen::VectorXcd> endpoints;
  for (const auto& p : out.paths)
    if (p.status == PathStatus::success) endpoints.push_back(p.x);

  const auto polys = build_asset_polynomials(m);
  const auto clusters = dedup(endpoints, cfg.dedup_radius);
  for (const auto& c : clusters) {
    PortfolioPoint pt;
    pt.x = c.representative;
    pt.lambda = polys[0](c.representative(0));
    out.points.push_back(std::move(pt));
    out.multiplicities.push_back(c.multiplicity);
  }
  out.summary.distinct_count = int(out.points.size());
  out.summary.count_match = out.summary.distinct_count == out.summary.expected_count;

  // Mismatch diagnostics: nearest pair among distinct points and the worst
  // conditioning seen at any endpoint.
  for (std::size_t i = 0; i < out.points.size(); ++i)
    for (std::size_t j = i + 1; j < out.points.size(); ++j)
      out.summary.nearest_pair_distance =
          std::min(out.summary.nearest_pair_distance,
                   (out.points[i].x - out.points[j].x).cwiseAbs().maxCoeff());
  for (const auto& p : out.paths) {
    if (p.status != PathStatus::success) continue;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(target.system.jacobian(p.x));
    out.summary.min_jacobian_sv =
        std::min(out.summary.min_jacobian_sv, double(svd.singularValues().minCoeff()));
  }
  return out;
}

struct StratumResult {
  int order = 0;  // the d' of this stratum
  bool skipped = false;
  std::optional<CriticalSolveResult> result;
};

struct StrataResult {
  std::vector<StratumResult> strata;  // orders d down to 2
  int total_distinct = 0;
};

/// Enumerate the w_{d'}-leading strata: for d' = d..2, solve the truncated
/// model when w_{d'} != 0, skip the stratum otherwise.
inline StrataResult solve_strata(const UtilityModel& m, const TrackerConfig& cfg) {
  if (!m.valid())
    throw std::invalid_argument("solve_strata: cumulant matrix has zero entries");
  StrataResult out;
  for (int dp = m.d(); dp >= 2; --dp) {
    StratumResult s;
    s.order = dp;
    if (m.weights().at(dp) == 0.0) {
      s.skipped = true;
    } else {
      s.result = solve_critical(m.truncated(dp), cfg);
      out.total_distinct += s.result->summary.distinct_count;
    }
    out.strata.push_back(std::move(s));
  }
  return out;
}

/// Two-asset closed-form solver: substitute x_2 = 1 - x_1, reduce to one
/// degree-(d-1) polynomial, and read its roots off the companion matrix.
inline std::vector<PortfolioPoint> oracle_n2(const UtilityModel& m) {
  if (m.n() != 2) throw std::invalid_argument("oracle_n2: needs exactly two assets");
  const auto polys = build_asset_polynomials(m);
  const auto& p1 = polys[0].coefficients();
  const auto& p2 = polys[1].coefficients();
  const int d = m.d();

  // q(x) = P_1(x) - P_2(1-x), ascending coefficients.
  std::vector<double> q(d, 0.0);
  for (int j = 0; j < d; ++j) q[j] = p1[j];
  for (int mdeg = 0; mdeg < d; ++mdeg)
    for (int r = 0; r <= mdeg; ++r)
      q[r] -= p2[mdeg] * binomial(mdeg, r) * ((r % 2) ? -1.0 : 1.0);

  const double lead = q[d - 1];
  if (std::abs(lead) < 1e-14)
    throw NumericalError("oracle_n2: leading coefficient vanished (degree drop)");

  std::vector<PortfolioPoint> out;
  if (d == 1) return out;  // unreachable: CumulantMatrix enforces d >= 2

  const int deg = d - 1;
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -q[i] / lead;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, /*computeEigenvectors=*/false);

  auto q_eval = [&](Complex x) {
    Complex acc = 0.0;
    for (int j = d - 1; j >= 0; --j) acc = acc * x + q[j];
    return acc;
  };
  auto q_deriv = [&](Complex x) {
    Complex acc = 0.0;
    for (int j = d - 1; j >= 1; --j) acc = acc * x + double(j) * q[j];
    return acc;
  };

  for (int r = 0; r < deg; ++r) {
    Complex root = es.eigenvalues()(r);
    for (int it = 0; it < 3; ++it) {  // cheap polish
      const Complex dq = q_deriv(root);
      if (std::abs(dq) == 0.0) break;
      root -= q_eval(root) / dq;
    }
    PortfolioPoint pt;
    pt.x = Eigen::VectorXcd(2);
    pt.x(0) = root;
    pt.x(1) = Complex(1.0, 0.0) - root;
    pt.lambda = polys[0](root);
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace portvar
