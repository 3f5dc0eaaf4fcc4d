#pragma once

// Test-only reference implementations, kept independent of the library's solve
// paths so they can serve as oracles.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "ecoplatoon/reachability.hpp"
#include "ecoplatoon/signal.hpp"

namespace ecoplatoon::testing {

/// Exhaustive active-set solution of
///   min 1/2 z^T H z + b^T z  s.t.  G z <= h, E z = d
/// for strictly convex H: enumerate every subset of active inequalities, solve
/// the equality-constrained KKT system, and accept the candidate that is primal
/// feasible with nonnegative multipliers on its active rows.
inline std::optional<Eigen::VectorXd> active_set_solve(const Eigen::MatrixXd& H,
                                                       const Eigen::VectorXd& b,
                                                       const Eigen::MatrixXd& G,
                                                       const Eigen::VectorXd& h,
                                                       const Eigen::MatrixXd& E,
                                                       const Eigen::VectorXd& d,
                                                       double tol = 1e-8) {
  const Eigen::Index n = H.rows();
  const Eigen::Index m = G.rows();
  const Eigen::Index p = E.rows();
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < m; ++i)
      if (mask & (1u << i)) active.push_back(i);
    const Eigen::Index na = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd A(p + na, n);
    Eigen::VectorXd rhs(p + na);
    A.topRows(p) = E;
    rhs.head(p) = d;
    for (Eigen::Index i = 0; i < na; ++i) {
      A.row(p + i) = G.row(active[static_cast<size_t>(i)]);
      rhs(p + i) = h(active[static_cast<size_t>(i)]);
    }
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + p + na, n + p + na);
    kkt.topLeftCorner(n, n) = H;
    if (p + na > 0) {
      kkt.topRightCorner(n, p + na) = A.transpose();
      kkt.bottomLeftCorner(p + na, n) = A;
    }
    Eigen::VectorXd full_rhs(n + p + na);
    full_rhs.head(n) = -b;
    full_rhs.tail(p + na) = rhs;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(full_rhs);
    const Eigen::VectorXd z = sol.head(n);
    bool ok = true;
    for (Eigen::Index i = 0; i < m && ok; ++i)
      if (G.row(i).dot(z) > h(i) + tol) ok = false;
    for (Eigen::Index i = 0; i < na && ok; ++i)
      if (sol(n + p + i) < -tol) ok = false;
    if (ok) return z;
  }
  return std::nullopt;
}

/// Continuous arrival time at distance ell for the accelerate-then-cruise
/// profile from v1 toward cruise speed v at |accel|, or nullopt when the
/// profile never covers the distance (decelerating to a standstill short of it).
inline std::optional<double> profile_arrival_time(double v1, double v, double accel_mag,
                                                  double ell) {
  const double a = v > v1 ? accel_mag : (v < v1 ? -accel_mag : 0.0);
  if (a == 0.0) {
    if (v1 <= 0.0) return std::nullopt;
    return ell / v1;
  }
  const double t_adj = (v - v1) / a;
  const double d_adj = v1 * t_adj + 0.5 * a * t_adj * t_adj;
  if (d_adj >= ell) {
    // Reaches the light during the adjustment phase.
    const double disc = v1 * v1 + 2.0 * a * ell;
    if (disc < 0.0) return std::nullopt;
    return (-v1 + std::sqrt(disc)) / a;
  }
  if (v <= 0.0) return std::nullopt;
  return t_adj + (ell - d_adj) / v;
}

struct OracleWindows {
  double first_start = 0.0, first_end = 0.0;
  double second_start = 0.0, second_end = 0.0;
};

/// Feasible green windows derived by literally stepping the clock: a run of
/// green ticks [g, e] maps to the continuous window [g-1, e+1-pass_time],
/// clipped at now.
inline OracleWindows windows_by_simulation(int tau, int red, int green, double pass_time) {
  const int cycle = red + green;
  auto is_green = [&](int ticks_ahead) {
    const int clock = (tau + ticks_ahead) % cycle;
    return clock > red;  // the cycle endpoint wraps to 0, which is red
  };
  OracleWindows w;
  int t = 0;
  for (int run = 0; run < 2; ++run) {
    while (!is_green(t)) ++t;
    const int g = t;
    while (is_green(t)) ++t;
    const int e = t - 1;
    const double start = std::max(g - 1, 0);
    const double end = e + 1 - pass_time;
    if (run == 0) {
      w.first_start = start;
      w.first_end = end;
    } else {
      w.second_start = start;
      w.second_end = end;
    }
  }
  return w;
}

struct OracleOutcome {
  bool can_cross = false;
  bool used_first = false;
  double best_edge_distance = 0.0;  // arrival-time distance to the nearest edge
                                    // of the selected window, over the sweep
};

/// Brute-force reachability: select the priority window whose admissible speed
/// range meets the road limits, then sweep a fine cruise-speed grid and test
/// closed-interval arrival inside that window.
inline OracleOutcome reachability_oracle(double ell, double v1, int tau, int red, int green,
                                         double pass_time, double v_min, double v_max,
                                         double accel_mag, int grid = 4001) {
  const OracleWindows w = windows_by_simulation(tau, red, green, pass_time);
  auto band_of = [&](double start, double end) {
    double lo = end > 0.0 ? ell / end : std::numeric_limits<double>::infinity();
    double hi = start > 0.0 ? ell / start : std::numeric_limits<double>::infinity();
    return std::pair<double, double>{std::max(lo, v_min), std::min(hi, v_max)};
  };
  const auto band1 = band_of(w.first_start, w.first_end);
  const auto band2 = band_of(w.second_start, w.second_end);
  OracleOutcome out;
  double start, end;
  if (band1.first <= band1.second) {
    out.used_first = true;
    start = w.first_start;
    end = w.first_end;
  } else if (band2.first <= band2.second) {
    start = w.second_start;
    end = w.second_end;
  } else {
    out.best_edge_distance = std::numeric_limits<double>::infinity();
    return out;  // no window admissible under the limits
  }

  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double v = v_min + (v_max - v_min) * i / (grid - 1);
    const auto arrival = profile_arrival_time(v1, v, accel_mag, ell);
    if (!arrival) continue;
    if (*arrival >= start && *arrival <= end) {
      out.can_cross = true;
      out.best_edge_distance = 0.0;
      return out;
    }
    best = std::min(best, std::min(std::abs(*arrival - start), std::abs(*arrival - end)));
  }
  out.best_edge_distance = best;
  return out;
}

}  // namespace ecoplatoon::testing
