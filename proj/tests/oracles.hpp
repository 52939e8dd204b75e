#ifndef GAMEOPT_TESTS_ORACLES_HPP
#define GAMEOPT_TESTS_ORACLES_HPP

// Reference computations used only by the tests. Each one is written
// independently of the library routine it checks.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Central differences.
inline Vec finite_difference(const std::function<double(const Vec&)>& f, const Vec& x,
                             double h = 1e-6) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

// Simplex projection threshold by bisection on sum_i max(y_i - a, 0) = 1.
inline Vec simplex_projection_bisection(const Vec& y) {
  double lo = y.minCoeff() - 1.0;
  double hi = y.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = (y.array() - mid).max(0.0).sum();
    (s > 1.0 ? lo : hi) = mid;
  }
  return (y.array() - 0.5 * (lo + hi)).max(0.0).matrix();
}

// Minimizer of ||x - y||^2 over the lattice {k / N : k_i >= 0 integer,
// sum k_i = N}. The objective is separable and convex in each k_i, so
// allocating units one at a time to the cheapest coordinate is exact.
inline Vec simplex_lattice_argmin(const Vec& y, int N) {
  const auto n = y.size();
  const double h = 1.0 / N;
  std::vector<int> k(static_cast<std::size_t>(n), 0);
  for (int u = 0; u < N; ++u) {
    Eigen::Index best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double now = k[i] * h - y(i);
      const double next = (k[i] + 1) * h - y(i);
      const double cost = next * next - now * now;
      if (cost < best_cost) {
        best_cost = cost;
        best = i;
      }
    }
    ++k[best];
  }
  Vec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = k[i] * h;
  return x;
}

// Exhaustive lattice search for n = 2.
inline Vec simplex2_lattice_argmin(const std::function<double(const Vec&)>& f, int N,
                                   double* best_value = nullptr) {
  Vec best(2), x(2);
  double bv = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= N; ++k) {
    x << static_cast<double>(k) / N, static_cast<double>(N - k) / N;
    const double v = f(x);
    if (v < bv) {
      bv = v;
      best = x;
    }
  }
  if (best_value != nullptr) *best_value = bv;
  return best;
}

// Exhaustive lattice minimum over Simplex(3).
inline double simplex3_lattice_min(const std::function<double(const Vec&)>& f, int N) {
  double bv = std::numeric_limits<double>::infinity();
  Vec x(3);
  for (int a = 0; a <= N; ++a) {
    for (int b = 0; a + b <= N; ++b) {
      x << static_cast<double>(a) / N, static_cast<double>(b) / N,
          static_cast<double>(N - a - b) / N;
      bv = std::min(bv, f(x));
    }
  }
  return bv;
}

// Smallest T0 such that bound(T) <= eps T for every T in [T0, limit].
inline long threshold_by_scan(const std::function<double(long)>& bound, double eps, long limit) {
  long last_fail = 0;
  for (long T = 1; T <= limit; ++T) {
    if (!(bound(T) <= eps * static_cast<double>(T))) last_fail = T;
  }
  return last_fail + 1;
}

inline double min_eigenvalue(const Mat& A) {
  return Eigen::SelfAdjointEigenSolver<Mat>(A, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

// Uniform point on Simplex(n) via normalized exponentials.
inline Vec random_simplex_point(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> E(1.0);
  Vec x(n);
  for (int i = 0; i < n; ++i) x(i) = E(rng);
  return x / x.sum();
}

inline Vec random_gaussian(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> N(0.0, scale);
  Vec x(n);
  for (int i = 0; i < n; ++i) x(i) = N(rng);
  return x;
}

}  // namespace oracle

#endif  // GAMEOPT_TESTS_ORACLES_HPP
