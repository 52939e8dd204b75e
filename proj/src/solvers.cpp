#include "gameopt/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "gameopt/grid.hpp"
#include "gameopt/minimize.hpp"

namespace gameopt {

const char* outcome_name(const Outcome& outcome) {
  switch (outcome.index()) {
    case 0: return "feasible";
    case 1: return "infeasible";
    case 2: return "epsilon_infeasible";
    default: return "exhausted";
  }
}

const char* algo_name(Algo algo) {
  switch (algo) {
    case Algo::kPrimal: return "primal";
    case Algo::kDual: return "dual";
    case Algo::kPrimalDual: return "primal-dual";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Stopping rule

long stopping_threshold(const std::function<double(long)>& bound, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  constexpr long kLimit = 1L << 62;
  auto pred = [&](long T) { return bound(T) <= eps * static_cast<double>(T); };
  auto ratio = [&](long T) { return bound(T) / static_cast<double>(T); };

  long lo = 0;  // largest checked power with the predicate false
  long P = 1;
  for (;;) {
    const bool ok = pred(P);
    if (ok && ratio(P) >= ratio(2 * P)) break;
    if (!ok) lo = P;
    if (P >= kLimit / 2) {
      throw Error(ErrorCode::kNoThreshold, "no stopping threshold below 2^62");
    }
    P *= 2;
  }
  // First T in (lo, P] with the predicate true.
  long hi = P;
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (pred(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

long stopping_threshold(const RegretBoundSpec& spec, double eps) {
  return stopping_threshold([&](long T) { return regret_bound(spec, T); }, eps);
}

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
}

void check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw Error(ErrorCode::kInvalidArgument, "eps must be positive and finite");
  }
}

RegretBoundSpec primal_spec(const Problem& problem, LearnerKind kind) {
  const ProblemParams& p = problem.params;
  RegretBoundSpec spec;
  spec.kind = kind;
  spec.n = problem.n();
  spec.D = p.D;
  switch (kind) {
    case LearnerKind::kOgd:
      if (!(p.H > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "OGD needs strongly convex constraints (H > 0); strictify the problem "
                    "or choose another learner");
      }
      spec.G = p.G;
      spec.H = p.H;
      break;
    case LearnerKind::kOns:
      if (!(p.alpha > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "ONS needs exp-concave constraints (alpha > 0); apply the log transform "
                    "or choose another learner");
      }
      spec.G = p.G;
      spec.alpha = p.alpha;
      break;
    case LearnerKind::kMw: {
      const auto* s = std::get_if<SimplexDomain>(&problem.domain.shape());
      if (s == nullptr || s->floor != 0.0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "multiplicative weights plays on the unit simplex only");
      }
      // The l2 bound also bounds the l_inf norm of every gradient.
      spec.G = p.G;
      break;
    }
  }
  return spec;
}

OnlineLearner primal_learner(const Problem& problem, const RegretBoundSpec& spec,
                             long horizon) {
  switch (spec.kind) {
    case LearnerKind::kOgd:
      return OnlineLearner::ogd(problem.domain, spec.H, spec.G);
    case LearnerKind::kOns:
      return OnlineLearner::ons(problem.domain, spec.G, spec.D, spec.alpha, Sense::kMinimize);
    case LearnerKind::kMw:
      return OnlineLearner::mw(problem.n(), spec.G, horizon, Sense::kMinimize);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown learner");
}

RegretBoundSpec dual_spec(const Problem& problem) {
  RegretBoundSpec spec;
  spec.kind = LearnerKind::kMw;
  spec.G = problem.params.G_inf;
  spec.n = problem.m();
  return spec;
}

long run_length(long threshold, const SolveOptions& options) {
  if (options.max_iters) {
    if (*options.max_iters < 1) throw Error(ErrorCode::kInvalidArgument, "max_iters must be >= 1");
    return std::min(threshold, *options.max_iters);
  }
  return threshold;
}

void check_problem(const Problem& problem) {
  if (problem.m() < 1) throw Error(ErrorCode::kInvalidArgument, "problem has no constraints");
}

// Better of the last and the averaged iterate.
Exhausted exhausted(const Problem& problem, const Vector& last, const Vector& avg) {
  const double v_last = max_violation(problem, last);
  const double v_avg = max_violation(problem, avg);
  if (v_avg <= v_last) return Exhausted{avg, v_avg};
  return Exhausted{last, v_last};
}

}  // namespace

// ---------------------------------------------------------------------------
// PrimalGameOpt: learner on x, separation oracle for the dual.

SolveResult primal_game_opt(const Problem& problem, const SolveOptions& options) {
  check_eps(options.eps);
  check_problem(problem);
  const RegretBoundSpec spec = primal_spec(problem, options.learner);
  const long T = stopping_threshold(spec, options.eps);
  const long cap = run_length(T, options);
  OnlineLearner learner = primal_learner(problem, spec, T);

  const int m = problem.m();
  std::vector<long> counts(m, 0);
  Vector x_sum = Vector::Zero(problem.n());
  const auto start = Clock::now();

  SolveResult result;
  result.threshold = T;
  result.guarantee = options.eps;
  for (long t = 1; t <= cap; ++t) {
    const Vector x = learner.point();
    const ViolationReport rep = separation_oracle(problem, x, options.eps);
    if (options.trace) {
      options.trace({t, rep.index, rep.value, rep.value, regret_bound(spec, t), since(start)});
    }
    result.iterations = t;
    if (rep.failed()) {
      result.outcome = Feasible{x, constraint_values(problem, x)};
      return result;
    }
    const int j = *rep.index;
    ++counts[j];
    x_sum += x;
    learner.update(gradient(problem.constraints[j], x));
  }

  if (cap < T) {
    result.outcome = exhausted(problem, learner.point(), x_sum / static_cast<double>(cap));
    return result;
  }
  Vector p_bar(m);
  for (int j = 0; j < m; ++j) p_bar(j) = static_cast<double>(counts[j]) / static_cast<double>(T);
  result.outcome = Infeasible{p_bar};
  return result;
}

// ---------------------------------------------------------------------------
// DualGameOpt: multiplicative weights on p, optimization oracle for x.

SolveResult dual_game_opt(const Problem& problem, const SolveOptions& options) {
  check_eps(options.eps);
  check_problem(problem);
  bool affine = true;
  for (const auto& f : problem.constraints) affine = affine && f.is_affine();
  const double tol = options.oracle_tol.value_or(affine ? 0.0 : options.eps / 2.0);
  if (!(tol >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "oracle tolerance must be >= 0");

  const RegretBoundSpec spec = dual_spec(problem);
  const long T = stopping_threshold(spec, options.eps);
  const long cap = run_length(T, options);
  OnlineLearner dual = OnlineLearner::mw(problem.m(), spec.G, T, Sense::kMaximize);

  Vector x_sum = Vector::Zero(problem.n());
  Vector last;
  const auto start = Clock::now();

  SolveResult result;
  result.threshold = T;
  result.guarantee = options.eps + tol;
  for (long t = 1; t <= cap; ++t) {
    const Vector p = dual.point();
    const std::optional<Vector> x = optimization_oracle(problem, p, tol);
    result.iterations = t;
    if (!x) {
      if (options.trace) {
        options.trace({t, std::nullopt, 0.0, 0.0, regret_bound(dual.bound_spec(), t), since(start)});
      }
      result.outcome = Infeasible{p};
      result.guarantee = 0.0;
      return result;
    }
    const Vector values = constraint_values(problem, *x);
    if (options.trace) {
      Eigen::Index jmax = 0;
      const double vmax = values.maxCoeff(&jmax);
      options.trace({t, vmax > options.eps ? std::optional<int>(static_cast<int>(jmax)) : std::nullopt,
                     vmax, p.dot(values), regret_bound(dual.bound_spec(), t), since(start)});
    }
    x_sum += *x;
    last = *x;
    dual.update(values);
  }

  const Vector x_bar = x_sum / static_cast<double>(cap);
  if (cap < T) {
    result.outcome = exhausted(problem, last, x_bar);
    return result;
  }
  result.outcome = Feasible{x_bar, constraint_values(problem, x_bar)};
  return result;
}

// ---------------------------------------------------------------------------
// PrimalDualGameOpt: two learners, each with regret budget eps/2.

SolveResult primal_dual_game_opt(const Problem& problem, const SolveOptions& options) {
  check_eps(options.eps);
  check_problem(problem);
  const RegretBoundSpec pspec = primal_spec(problem, options.learner);
  const RegretBoundSpec dspec = dual_spec(problem);
  const double half = options.eps / 2.0;
  const long T = std::max(stopping_threshold(pspec, half), stopping_threshold(dspec, half));
  const long cap = run_length(T, options);
  OnlineLearner primal = primal_learner(problem, pspec, T);
  OnlineLearner dual = OnlineLearner::mw(problem.m(), dspec.G, T, Sense::kMaximize);

  const int n = problem.n();
  const int m = problem.m();
  Vector x_sum = Vector::Zero(n);
  Vector p_sum = Vector::Zero(m);
  const auto start = Clock::now();

  SolveResult result;
  result.threshold = T;
  result.guarantee = options.eps;
  for (long t = 1; t <= cap; ++t) {
    const Vector x = primal.point();
    const Vector p = dual.point();
    const Vector values = constraint_values(problem, x);
    if (options.trace) {
      Eigen::Index jmax = 0;
      const double vmax = values.maxCoeff(&jmax);
      const double bound = regret_bound(primal.bound_spec(), t) + regret_bound(dual.bound_spec(), t);
      options.trace({t, vmax > options.eps ? std::optional<int>(static_cast<int>(jmax)) : std::nullopt,
                     vmax, p.dot(values), bound, since(start)});
    }
    Vector grad = Vector::Zero(n);
    for (int j = 0; j < m; ++j) {
      if (p(j) != 0.0) grad += p(j) * gradient(problem.constraints[j], x);
    }
    x_sum += x;
    p_sum += p;
    result.iterations = t;
    primal.update(grad);
    dual.update(values);
  }

  const double inv = 1.0 / static_cast<double>(cap);
  const Vector x_bar = x_sum * inv;
  if (cap < T) {
    result.outcome = exhausted(problem, primal.point(), x_bar);
    return result;
  }
  const Vector residuals = constraint_values(problem, x_bar);
  if (residuals.maxCoeff() <= options.eps) {
    result.outcome = Feasible{x_bar, residuals};
  } else {
    result.outcome = EpsilonInfeasible{p_sum * inv};
  }
  return result;
}

SolveResult solve(const Problem& problem, Algo algo, const SolveOptions& options) {
  switch (algo) {
    case Algo::kPrimal: return primal_game_opt(problem, options);
    case Algo::kDual: return dual_game_opt(problem, options);
    case Algo::kPrimalDual: return primal_dual_game_opt(problem, options);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown algorithm");
}

// ---------------------------------------------------------------------------
// Verification

namespace {

VerifyReport verify_point(const Problem& problem, const Vector& x, double eps) {
  VerifyReport rep;
  rep.method = "evaluation";
  if (x.size() != problem.n()) {
    rep.detail = "point has the wrong dimension";
    return rep;
  }
  if (!problem.domain.contains(x)) {
    rep.detail = "point lies outside the domain";
    return rep;
  }
  const Vector values = constraint_values(problem, x);
  rep.value = values.maxCoeff();
  for (int j = 0; j < values.size(); ++j) {
    if (values(j) > eps + kZeroTol) {
      rep.violating_index = j;
      std::ostringstream os;
      os << "constraint " << j << " has value " << values(j) << " > " << eps;
      rep.detail = os.str();
      return rep;
    }
  }
  rep.ok = true;
  rep.detail = "all constraints within eps";
  return rep;
}

VerifyReport verify_distribution(const Problem& problem, const Vector& p_bar,
                                 double threshold, VerifyMethod method,
                                 double resolution) {
  VerifyReport rep;
  check_distribution(p_bar, problem.m());
  const ConstraintFn g = combine(problem, p_bar);
  const Domain& domain = problem.domain;

  if (method == VerifyMethod::kAuto) {
    if (g.is_affine()) {
      // Exact: a linear function attains its minimum at the linear oracle's
      // point.
      rep.method = "exact";
      const Vector zero = Vector::Zero(problem.n());
      const Vector a = gradient(g, zero);
      rep.value = evaluate(g, domain.linear_minimizer(a));
    } else if (problem.n() <= kGridMaxDim) {
      method = VerifyMethod::kGrid;
    } else {
      method = VerifyMethod::kInner;
    }
  }
  if (method == VerifyMethod::kGrid) {
    if (problem.n() > kGridMaxDim) {
      std::ostringstream os;
      os << "grid verification needs n <= " << kGridMaxDim << ", got " << problem.n();
      throw Error(ErrorCode::kInvalidArgument, os.str());
    }
    rep.method = "grid";
    const bool vertices_exact = g.is_affine() && domain.kind() != DomainKind::kBall;
    const GridMinimum gm = grid_minimum(
        [&](const Vector& x) { return evaluate(g, x); },
        [&](const Vector& x) { return gradient(g, x).norm(); }, domain, resolution);
    rep.value = gm.value;
    rep.slack = vertices_exact ? 0.0 : gm.slack;
  } else if (method == VerifyMethod::kInner) {
    rep.method = "inner";
    MinimizeOptions opts;
    opts.gap_tol = 1e-10;
    opts.max_iters = kOracleIterationCap;
    opts.stop_at_lower_bound = threshold;
    const MinimizeResult r = minimize_over_domain(objective_of(g), domain, domain.start_point(), opts);
    rep.value = r.value;
    rep.slack = r.gap;
  }

  rep.ok = rep.value - rep.slack > threshold;
  std::ostringstream os;
  os << "min g(x, p_bar) " << (rep.ok ? ">" : "not certified >") << " " << threshold
     << " (value " << rep.value << ", slack " << rep.slack << ", " << rep.method << ")";
  rep.detail = os.str();
  return rep;
}

}  // namespace

VerifyReport verify_certificate(const Problem& problem, const Outcome& outcome,
                                double eps, VerifyMethod method, double resolution) {
  if (!(eps >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be >= 0");
  if (method == VerifyMethod::kGrid && problem.n() > kGridMaxDim) {
    std::ostringstream os;
    os << "grid verification needs n <= " << kGridMaxDim << ", got " << problem.n();
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  if (const auto* f = std::get_if<Feasible>(&outcome)) return verify_point(problem, f->x, eps);
  if (const auto* c = std::get_if<Infeasible>(&outcome)) {
    return verify_distribution(problem, c->p_bar, 0.0, method, resolution);
  }
  if (const auto* c = std::get_if<EpsilonInfeasible>(&outcome)) {
    return verify_distribution(problem, c->p_bar, -eps, method, resolution);
  }
  VerifyReport rep;
  rep.method = "none";
  rep.detail = "exhausted outcome carries no certificate";
  rep.value = std::get<Exhausted>(outcome).best_violation;
  return rep;
}

// ---------------------------------------------------------------------------
// Duality monitor

bool DualityMonitor::record(const Outcome& outcome, double eps) {
  const std::size_t before = events_.size();
  auto check = [&](const Vector& x, const Claim& c) {
    const double g = game_loss(problem_, x, c.p_bar);
    if (g <= c.threshold) {
      std::ostringstream os;
      os << "point reported feasible has g(x, p_bar) = " << g
         << " <= " << c.threshold << ", refuting a certificate";
      events_.push_back(os.str());
    }
  };
  if (const auto* f = std::get_if<Feasible>(&outcome)) {
    // Any domain point with g(x, p_bar) at or below the claimed bound refutes
    // the claim, feasible or not.
    for (const auto& c : claims_) check(f->x, c);
    points_.push_back(f->x);
  } else if (const auto* c = std::get_if<Infeasible>(&outcome)) {
    claims_.push_back({c->p_bar, 0.0});
    for (const auto& x : points_) check(x, claims_.back());
  } else if (const auto* c = std::get_if<EpsilonInfeasible>(&outcome)) {
    claims_.push_back({c->p_bar, -eps});
    for (const auto& x : points_) check(x, claims_.back());
  }
  return events_.size() == before;
}

}  // namespace gameopt
