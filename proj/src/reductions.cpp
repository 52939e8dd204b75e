#include "gameopt/reductions.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace gameopt {

Problem strictify(const Problem& problem, double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::kInvalidArgument, "strictify needs delta >= 0");
  }
  if (problem.domain.kind() != DomainKind::kSimplex) {
    throw Error(ErrorCode::kInvalidArgument, "strictify needs a simplex domain");
  }
  if (delta == 0.0) return problem;

  const int n = problem.n();
  const Matrix dI = delta * Matrix::Identity(n, n);
  std::vector<ConstraintFn> out;
  out.reserve(problem.constraints.size());
  for (const auto& f : problem.constraints) {
    const auto& v = f.variant();
    if (const auto* af = std::get_if<Affine>(&v)) {
      out.emplace_back(Quadratic{dI, af->a, af->b - delta});
    } else if (const auto* q = std::get_if<Quadratic>(&v)) {
      out.emplace_back(Quadratic{q->A + dI, q->b, q->c - delta});
    } else {
      Combination c;
      c.terms.push_back({1.0, share(f)});
      c.terms.push_back({delta, share(ConstraintFn(NormDistSq{Vector::Zero(n), 0.0}))});
      c.constant = -delta;
      out.emplace_back(std::move(c));
    }
  }

  ProblemParams p = problem.params;
  p.H += 2.0 * delta;
  p.G += 2.0 * delta;
  p.omega += delta;
  p.G_inf = p.omega;
  p.alpha = p.H / (p.G * p.G);
  return make_problem(std::move(out), problem.domain, p);
}

StrictifyPlan strictify_guarantee(double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  return {eps, 2.0 * eps};
}

namespace {

ConstraintPtr negated(const ConstraintFn& f) {
  if (const auto* af = std::get_if<Affine>(&f.variant())) {
    return share(ConstraintFn(Affine{-af->a, -af->b}));
  }
  Combination c;
  c.terms.push_back({-1.0, share(f)});
  return share(ConstraintFn(std::move(c)));
}

void check_width(const Problem& problem, double omega) {
  std::mt19937_64 rng(0x5eedULL);
  const int n = problem.n();
  std::vector<Vector> pts;
  pts.push_back(problem.domain.start_point());
  for (int i = 0; i < n; ++i) {
    Vector e = Vector::Zero(n);
    e(i) = 1.0;
    pts.push_back(problem.domain.linear_minimizer(e));
    pts.push_back(problem.domain.linear_minimizer(-e));
  }
  for (int k = 0; k < 1000; ++k) pts.push_back(problem.domain.sample(rng));
  for (const auto& x : pts) {
    for (int j = 0; j < problem.m(); ++j) {
      const double v = std::abs(evaluate(problem.constraints[j], x));
      if (v > omega * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "omega = " << omega << " is below |f_" << j << "(x)| = " << v
           << " at a sampled domain point";
        throw Error(ErrorCode::kInvalidArgument, os.str());
      }
    }
  }
}

}  // namespace

Problem log_transform(const Problem& problem, std::optional<double> omega) {
  const double w = omega.value_or(problem.params.omega);
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw Error(ErrorCode::kInvalidArgument, "log transform needs omega > 0");
  }
  check_width(problem, w);

  std::vector<ConstraintFn> out;
  out.reserve(problem.constraints.size());
  for (const auto& f : problem.constraints) {
    Combination c;
    c.terms.push_back({-1.0, share(ConstraintFn(LogAffineComposite{negated(f), w}))});
    c.constant = 1.0;
    out.emplace_back(std::move(c));
  }

  constexpr double e = std::numbers::e;
  ProblemParams p = problem.params;
  p.G = problem.params.G / w;
  // Hessian is at least H / (omega (e + 1)) when every f_j is H-strongly convex.
  p.H = problem.params.H / (w * (e + 1.0));
  // Values lie in [1 - log(e + 1), 1 - log(e - 1)].
  p.omega = std::max(std::abs(1.0 - std::log(e + 1.0)), std::abs(1.0 - std::log(e - 1.0)));
  p.G_inf = p.omega;
  p.alpha = 1.0;
  return make_problem(std::move(out), problem.domain, p);
}

double log_game_value(double rho, double omega) {
  if (!(omega > 0.0)) throw Error(ErrorCode::kInvalidArgument, "omega must be positive");
  return std::log(std::numbers::e + rho / omega);
}

double approx_translate(double eps_log, double omega) {
  if (!(eps_log >= 0.0) || !(omega > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "approx_translate needs eps_log >= 0, omega > 0");
  }
  return 3.0 * omega * eps_log;
}

double log_eps_for_target(double eps, double omega) {
  if (!(eps > 0.0) || !(omega > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "log_eps_for_target needs eps, omega > 0");
  }
  return eps / (3.0 * omega);
}

}  // namespace gameopt
