#include "gameopt/projections.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>

#include "gameopt/minimize.hpp"

namespace gameopt {

double simplex_threshold(const Vector& y, double mass) {
  if (y.size() < 1) throw Error(ErrorCode::kInvalidArgument, "empty vector");
  if (!y.allFinite()) throw Error(ErrorCode::kInvalidArgument, "vector not finite");
  std::vector<double> u(y.data(), y.data() + y.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  // The support is the longest prefix of the sorted values that stays above
  // the threshold it induces.
  double prefix = 0.0;
  double a = u[0] - mass;
  for (std::size_t k = 0; k < u.size(); ++k) {
    prefix += u[k];
    const double cand = (prefix - mass) / static_cast<double>(k + 1);
    if (u[k] - cand > 0.0) a = cand;
    else break;
  }
  return a;
}

Vector project_simplex(const Vector& y) {
  const double a = simplex_threshold(y, 1.0);
  return (y.array() - a).max(0.0).matrix();
}

Vector project_simplex(const Vector& y, double floor) {
  if (floor == 0.0) return project_simplex(y);
  const auto n = static_cast<double>(y.size());
  const double mass = 1.0 - n * floor;
  const Vector shifted = y.array() - floor;
  const double a = simplex_threshold(shifted, mass);
  return ((shifted.array() - a).max(0.0) + floor).matrix();
}

Vector project_ball(const Vector& y, double radius, const Vector& center) {
  const Vector d = y - center;
  const double nrm = d.norm();
  if (nrm <= radius) return y;
  return center + (radius / nrm) * d;
}

Vector project_box(const Vector& y, const Vector& lo, const Vector& hi) {
  return y.cwiseMax(lo).cwiseMin(hi);
}

Vector project(const Vector& y, const Domain& domain) {
  if (y.size() != domain.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "projection: dimension mismatch");
  }
  return std::visit(
      [&](const auto& s) -> Vector {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimplexDomain>) {
          return project_simplex(y, s.floor);
        } else if constexpr (std::is_same_v<T, BallDomain>) {
          return project_ball(y, s.radius, s.center);
        } else {
          return project_box(y, s.lo, s.hi);
        }
      },
      domain.shape());
}

namespace {

bool is_scaled_identity(const Matrix& A) {
  const double d = A(0, 0);
  if (!(d > 0.0)) return false;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (A(i, j) != (i == j ? d : 0.0)) return false;
    }
  }
  return true;
}


// Frank-Wolfe gap of (x - y)'A(x - y) at x: an upper bound on the distance of
// the objective to its minimum.
double d_obj(const Vector& x, const Vector& y, const Matrix& A) {
  const Vector d = x - y;
  return d.dot(A * d);
}

double projection_gap(const Vector& x, const Vector& y, const Matrix& A, const Domain& domain) {
  const Vector g = 2.0 * (A * (x - y));
  return g.dot(x - domain.linear_minimizer(g));
}

// Solves the KKT system of the quadratic restricted to a guessed active set
// and refines the guess. First-order iterates stall around sqrt(machine eps)
// in x, which leaves the gap far above tight tolerances; an exact solve on
// the right face does not. Returns nullopt for balls.
std::optional<Vector> polish_active_set(const Vector& x0, const Vector& y, const Matrix& A,
                                        const Domain& domain) {
  const auto n = x0.size();
  const Vector Ay = A * y;
  if (const auto* s = std::get_if<SimplexDomain>(&domain.shape())) {
    const double fl = s->floor;
    std::vector<bool> free(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) free[i] = x0(i) > fl + 1e-12;
    Vector x = x0;
    for (Eigen::Index round = 0; round <= n; ++round) {
      std::vector<Eigen::Index> S;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (free[i]) S.push_back(i);
      }
      if (S.empty()) return std::nullopt;
      const auto k = static_cast<Eigen::Index>(S.size());
      Matrix K = Matrix::Zero(k + 1, k + 1);
      Vector rhs(k + 1);
      Vector fixed = Vector::Constant(n, fl);
      for (Eigen::Index a = 0; a < k; ++a) fixed(S[a]) = 0.0;
      const Vector Afixed = A * fixed;
      for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) K(a, b) = A(S[a], S[b]);
        K(a, k) = -1.0;
        K(k, a) = 1.0;
        rhs(a) = Ay(S[a]) - Afixed(S[a]);
      }
      rhs(k) = 1.0 - static_cast<double>(n - k) * fl;
      const Vector sol = K.completeOrthogonalDecomposition().solve(rhs);
      x = fixed;
      for (Eigen::Index a = 0; a < k; ++a) x(S[a]) = sol(a);
      // Drop the most negative free coordinate, or free the fixed coordinate
      // whose gradient undercuts the multiplier the most.
      Eigen::Index drop = -1;
      double worst = 0.0;
      for (Eigen::Index a = 0; a < k; ++a) {
        if (x(S[a]) - fl < worst) {
          worst = x(S[a]) - fl;
          drop = S[a];
        }
      }
      if (drop >= 0) {
        free[drop] = false;
        continue;
      }
      const Vector g = A * (x - y);
      const double lambda = sol(k);
      Eigen::Index add = -1;
      double under = -1e-14 * (1.0 + std::abs(lambda));
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!free[i] && g(i) - lambda < under) {
          under = g(i) - lambda;
          add = i;
        }
      }
      if (add < 0) break;
      free[add] = true;
    }
    return project(x, domain);
  }
  if (const auto* b = std::get_if<BoxDomain>(&domain.shape())) {
    Vector x = x0;
    for (Eigen::Index round = 0; round <= n; ++round) {
      std::vector<Eigen::Index> F;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (x(i) > b->lo(i) + 1e-12 && x(i) < b->hi(i) - 1e-12) F.push_back(i);
      }
      Vector next = x;
      if (!F.empty()) {
        const auto k = static_cast<Eigen::Index>(F.size());
        Vector pinned = x;
        for (Eigen::Index a = 0; a < k; ++a) pinned(F[a]) = y(F[a]);
        const Vector r = A * (pinned - y);
        Matrix K(k, k);
        Vector rhs(k);
        for (Eigen::Index a = 0; a < k; ++a) {
          for (Eigen::Index c = 0; c < k; ++c) K(a, c) = A(F[a], F[c]);
          rhs(a) = -r(F[a]);
        }
        const Vector d = K.completeOrthogonalDecomposition().solve(rhs);
        for (Eigen::Index a = 0; a < k; ++a) next(F[a]) = y(F[a]) + d(a);
      }
      next = project_box(next, b->lo, b->hi);
      if (next == x) break;
      x = next;
    }
    return x;
  }
  return std::nullopt;
}

}  // namespace

Vector generalized_project(const Vector& y, const Matrix& A,
                           const Domain& domain, double tol,
                           const Vector& warm_start) {
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "projection tol must be positive");
  if (A.rows() != y.size() || A.cols() != y.size() || y.size() != domain.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "generalized projection: dimension mismatch");
  }
  // Isotropic metric: the Euclidean projection is exact.
  if (is_scaled_identity(A)) return project(y, domain);

  const Vector start = project(y, domain);
  if ((start - y).squaredNorm() == 0.0) return start;

  // Gershgorin bound on lambda_max(A); the objective's gradient 2A(x - y) is
  // 2*lambda_max Lipschitz.
  const double lip = 2.0 * A.cwiseAbs().rowwise().sum().maxCoeff();
  MinimizeOptions opts;
  opts.gap_tol = tol;
  opts.max_iters = kProjectionIterationCap;
  opts.lipschitz = lip > 0.0 ? lip : 1.0;
  const Objective obj = [&](const Vector& x, Vector* grad) {
    const Vector d = x - y;
    const Vector Ad = A * d;
    if (grad != nullptr) *grad = 2.0 * Ad;
    return d.dot(Ad);
  };
  Vector x = warm_start.size() == y.size() ? warm_start : start;
  // Short accelerated runs interleaved with exact active-set solves.
  int used = 0;
  int chunk = 200;
  double gap = 0.0;
  while (true) {
    opts.max_iters = std::min(chunk, kProjectionIterationCap - used);
    const MinimizeResult r = minimize_over_domain(obj, domain, x, opts);
    used += r.iterations;
    x = r.x;
    gap = r.gap;
    if (r.status == MinimizeStatus::kConverged) return x;
    if (const auto p = polish_active_set(x, y, A, domain)) {
      const double pg = projection_gap(*p, y, A, domain);
      if (pg <= tol && domain.contains(*p)) return *p;
      if (d_obj(*p, y, A) < d_obj(x, y, A)) x = *p;
    }
    if (used >= kProjectionIterationCap || r.iterations == 0) break;
    chunk *= 2;
  }
  std::ostringstream os;
  os << "generalized projection did not converge in " << used << " iterations (gap " << gap << ")";
  throw Error(ErrorCode::kNonConvergence, os.str());
}

Vector generalized_project(const Vector& y, const Matrix& A,
                           const Domain& domain, double tol) {
  if (A.rows() != A.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "generalized projection: A must be square");
  }
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::kInvalidArgument, "generalized projection: A is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw Error(ErrorCode::kInvalidArgument, "generalized projection: A is not PSD");
  }
  return generalized_project(y, A, domain, tol, Vector());
}

}  // namespace gameopt
