#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <atomic>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "portvar/common.hpp"
#include "portvar/polysys.hpp"

namespace portvar {

struct TrackerConfig {
  double newton_tol = 1e-12;
  int max_newton_iters = 8;
  double initial_step = 0.05;
  double min_step = 1e-7;
  double step_expand = 2.0;
  double step_shrink = 0.5;
  int max_steps = 10000;
  int endpoint_polish_iters = 20;
  double dedup_radius = 1e-6;
  std::uint64_t seed = 0;
  double divergence_threshold = 1e10;
  bool retry_diverged = true;  // one retry with a fresh gamma per diverged path
  int threads = 1;             // 0 = hardware auto

  void validate() const {
    if (!(newton_tol > 0 && initial_step > 0 && min_step > 0 && step_expand > 0 &&
          step_shrink > 0 && dedup_radius > 0 && divergence_threshold > 0))
      throw std::invalid_argument("TrackerConfig: all tolerances and steps must be positive");
    if (!(max_newton_iters > 0 && max_steps > 0 && endpoint_polish_iters >= 0))
      throw std::invalid_argument("TrackerConfig: iteration counts must be positive");
    if (!(min_step < initial_step))
      throw std::invalid_argument("TrackerConfig: min_step must be below initial_step");
    if (threads < 0) throw std::invalid_argument("TrackerConfig: threads must be >= 0");
  }
};

enum class PathStatus { success, diverged, stalled, truncated };

inline const char* to_string(PathStatus s) {
  switch (s) {
    case PathStatus::success: return "success";
    case PathStatus::diverged: return "diverged";
    case PathStatus::stalled: return "stalled";
    case PathStatus::truncated: return "truncated";
  }
  return "?";
}

struct TrackedSolution {
  Eigen::VectorXcd x;
  double residual = std::numeric_limits<double>::infinity();
  PathStatus status = PathStatus::truncated;
  double condition_estimate = std::numeric_limits<double>::infinity();
  int path_id = 0;
  Complex gamma_used{1.0, 0.0};
  bool retried = false;
  double t_stop = 1.0;  // t value where stepping ended (0 on a completed path)
};

namespace detail {

// Stalls this close to t=0 still get an endpoint polish; a polish that lands
// on the target root within tolerance upgrades the path to success.
inline constexpr double kEndZone = 1e-2;

inline bool newton_correct(const ParamFamily& fam, Eigen::VectorXcd& x, double t,
                           const TrackerConfig& cfg) {
  for (int it = 0; it < cfg.max_newton_iters; ++it) {
    const Eigen::VectorXcd r = fam.evaluate(x, t);
    if (!r.allFinite()) return false;
    if (r.norm() <= cfg.newton_tol) return true;
    const Eigen::MatrixXcd J = fam.jacobian_x(x, t);
    const Eigen::VectorXcd dx = J.partialPivLu().solve(-r);
    if (!dx.allFinite()) return false;
    x += dx;
    if (x.norm() > cfg.divergence_threshold) return false;
  }
  return fam.evaluate(x, t).norm() <= cfg.newton_tol;
}

}  // namespace detail

/// Track one solution of the start system from t=1 to t=0 with an Euler
/// predictor on the Davidenko flow and a full Newton corrector, adapting the
/// step on corrector failures.
inline TrackedSolution track_path(const ParamFamily& fam, const Eigen::VectorXcd& start,
                                  const TrackerConfig& cfg) {
  cfg.validate();
  TrackedSolution out;
  Eigen::VectorXcd x = start;
  double t = 1.0;
  double step = cfg.initial_step;
  int easy = 0;
  bool diverged = false, stalled = false;

  for (int steps = 0; t > 0.0 && steps < cfg.max_steps; ++steps) {
    const double dt = std::min(step, t);
    const double t_new = t - dt;

    Eigen::VectorXcd xp = x;
    {
      const Eigen::MatrixXcd J = fam.jacobian_x(x, t);
      const Eigen::VectorXcd v = J.partialPivLu().solve(fam.dt_derivative(x));
      if (v.allFinite()) xp = x + v * dt;  // singular predictor: fall back to corrector-only
    }

    Eigen::VectorXcd xc = xp;
    const bool ok = detail::newton_correct(fam, xc, t_new, cfg);
    if (ok && xc.allFinite() && xc.norm() <= cfg.divergence_threshold) {
      x = xc;
      t = t_new;
      if (++easy >= 3) {
        step = std::min(step * cfg.step_expand, cfg.initial_step);
        easy = 0;
      }
    } else {
      if ((xc.allFinite() && xc.norm() > cfg.divergence_threshold) ||
          (xp.allFinite() && xp.norm() > cfg.divergence_threshold)) {
        x = xc.allFinite() ? xc : xp;
        diverged = true;
        break;
      }
      easy = 0;
      step *= cfg.step_shrink;
      if (step < cfg.min_step) {
        stalled = true;
        break;
      }
    }
  }

  double residual = std::numeric_limits<double>::infinity();
  if (!diverged && (t <= 0.0 || t < detail::kEndZone)) {
    for (int it = 0; it < cfg.endpoint_polish_iters; ++it) {
      const Eigen::VectorXcd r = fam.target.evaluate(x);
      if (!r.allFinite()) break;
      if (r.norm() <= cfg.newton_tol) break;
      const Eigen::VectorXcd dx = fam.target.jacobian(x).partialPivLu().solve(-r);
      if (!dx.allFinite()) break;
      x += dx;
      if (x.norm() > cfg.divergence_threshold) {
        diverged = true;
        break;
      }
    }
    if (!diverged) {
      const Eigen::VectorXcd r = fam.target.evaluate(x);
      residual = r.allFinite() ? r.norm() : std::numeric_limits<double>::infinity();
    }
  }

  out.x = x;
  out.residual = residual;
  out.t_stop = t;
  if (diverged)
    out.status = PathStatus::diverged;
  else if (residual < 10.0 * cfg.newton_tol)
    out.status = PathStatus::success;
  else if (stalled)
    out.status = PathStatus::stalled;
  else
    out.status = PathStatus::truncated;

  if (!diverged && x.allFinite()) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(fam.target.jacobian(x));
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    out.condition_estimate = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  }
  return out;
}

struct BatchSummary {
  int n_paths = 0;
  int n_success = 0;
  int n_diverged = 0;
  int n_stalled = 0;
  int n_truncated = 0;
  int n_retried = 0;
  std::vector<Complex> gammas_used;  // family gamma first, then retry gammas in path order
};

struct BatchResult {
  std::vector<TrackedSolution> solutions;  // one per start, in start order
  BatchSummary summary;
};

/// Track every start. Paths are independent; results are merged in start
/// order so the batch output does not depend on scheduling. A diverged path
/// is retried once with a fresh gamma derived from (seed, path index).
inline BatchResult track_all(const ParamFamily& fam, const std::vector<Eigen::VectorXcd>& starts,
                             const TrackerConfig& cfg) {
  cfg.validate();
  BatchResult out;
  out.solutions.resize(starts.size());

  auto run_one = [&](std::size_t i) {
    TrackedSolution s = track_path(fam, starts[i], cfg);
    s.path_id = int(i);
    s.gamma_used = fam.gamma;
    if (s.status == PathStatus::diverged && cfg.retry_diverged) {
      std::mt19937_64 rng(mix_seed(cfg.seed, i));
      const ParamFamily retry_fam(fam.start, fam.target, random_unit_complex(rng));
      TrackedSolution r = track_path(retry_fam, starts[i], cfg);
      r.path_id = int(i);
      r.gamma_used = retry_fam.gamma;
      r.retried = true;
      s = std::move(r);
    }
    out.solutions[i] = std::move(s);
  };

  int n_threads = cfg.threads == 0 ? int(std::thread::hardware_concurrency()) : cfg.threads;
  n_threads = std::max(1, std::min<int>(n_threads, int(starts.size())));
  if (n_threads <= 1 || starts.size() <= 1) {
    for (std::size_t i = 0; i < starts.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < starts.size(); i = next.fetch_add(1)) run_one(i);
      });
    for (auto& th : pool) th.join();
  }

  out.summary.n_paths = int(starts.size());
  out.summary.gammas_used.push_back(fam.gamma);
  for (const auto& s : out.solutions) {
    switch (s.status) {
      case PathStatus::success: ++out.summary.n_success; break;
      case PathStatus::diverged: ++out.summary.n_diverged; break;
      case PathStatus::stalled: ++out.summary.n_stalled; break;
      case PathStatus::truncated: ++out.summary.n_truncated; break;
    }
    if (s.retried) {
      ++out.summary.n_retried;
      out.summary.gammas_used.push_back(s.gamma_used);
    }
  }
  return out;
}

struct SolutionCluster {
  Eigen::VectorXcd representative;  // cluster mean
  int multiplicity = 1;
  std::vector<int> members;  // indices into the input list
};

/// Single-linkage clustering under the max-norm; clusters are reported in
/// order of their smallest member index.
inline std::vector<SolutionCluster> dedup(const std::vector<Eigen::VectorXcd>& points,
                                          double radius) {
  const int n = int(points.size());
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dist = (points[i] - points[j]).cwiseAbs().maxCoeff();
      if (dist < radius) parent[find(i)] = find(j);
    }

  std::vector<SolutionCluster> clusters;
  std::vector<int> cluster_of(n, -1);
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (cluster_of[root] < 0) {
      cluster_of[root] = int(clusters.size());
      clusters.push_back(SolutionCluster{});
    }
    clusters[cluster_of[root]].members.push_back(i);
  }
  for (auto& c : clusters) {
    Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(points[c.members.front()].size());
    for (int idx : c.members) mean += points[idx];
    c.representative = mean / double(c.members.size());
    c.multiplicity = int(c.members.size());
  }
  return clusters;
}

}  // namespace portvar
