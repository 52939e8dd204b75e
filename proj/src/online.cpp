#include "gameopt/online.hpp"

#include <cmath>
#include <sstream>

#include "gameopt/minimize.hpp"
#include "gameopt/projections.hpp"

namespace gameopt {

const char* learner_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kOgd: return "ogd";
    case LearnerKind::kOns: return "ons";
    case LearnerKind::kMw: return "mw";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// OGD

OgdState make_ogd(const Domain& domain, double H) {
  if (!(H > 0.0)) throw Error(ErrorCode::kInvalidArgument, "OGD needs H > 0");
  return OgdState{domain.start_point(), 1, H};
}

OgdState ogd_step(OgdState state, const Vector& grad, const Domain& domain) {
  if (!(state.H > 0.0)) throw Error(ErrorCode::kInvalidArgument, "OGD needs H > 0");
  if (grad.size() != state.x.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "OGD: gradient dimension");
  }
  if (!grad.allFinite()) throw Error(ErrorCode::kInvalidArgument, "OGD: gradient not finite");
  const double step = 1.0 / (state.H * static_cast<double>(state.t));
  state.x = project(state.x - step * grad, domain);
  ++state.t;
  return state;
}

// ---------------------------------------------------------------------------
// ONS

OnsState make_ons(const Domain& domain, double G, double D, double alpha) {
  if (!(G > 0.0) || !(D > 0.0) || !(alpha > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ONS needs G, D, alpha > 0");
  }
  const int n = domain.dim();
  OnsState s;
  s.x = domain.start_point();
  s.beta = 0.5 * std::min(alpha, 1.0 / (4.0 * G * D));
  const double d2b2 = D * D * s.beta * s.beta;
  s.A = Matrix::Identity(n, n) / d2b2;
  s.A_inv = Matrix::Identity(n, n) * d2b2;
  s.D = D;
  s.G = G;
  return s;
}

OnsState ons_step(OnsState state, const Vector& grad, const Domain& domain,
                  Sense sense) {
  if (grad.size() != state.x.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "ONS: gradient dimension");
  }
  if (!grad.allFinite()) throw Error(ErrorCode::kInvalidArgument, "ONS: gradient not finite");

  // Step and projection use the matrix from before this round's update.
  const Vector dir = state.A_inv * grad;
  const double sign = sense == Sense::kMaximize ? 1.0 : -1.0;
  const Vector y = state.x + (sign / state.beta) * dir;
  const double scale = std::max(1.0, state.A.diagonal().maxCoeff()) *
                       std::max(1e-12, (y - state.x).squaredNorm());
  state.x = generalized_project(y, state.A, domain, 1e-9 * scale, state.x);

  // Sherman-Morrison: (A + g g')^-1 = A^-1 - A^-1 g g' A^-1 / (1 + g' A^-1 g).
  const double denom = 1.0 + grad.dot(dir);
  state.A.noalias() += grad * grad.transpose();
  state.A_inv.noalias() -= (dir * dir.transpose()) / denom;

  // Cheap consistency probe along the gradient.
  const Vector probe = state.A * (state.A_inv * grad) - grad;
  if (probe.lpNorm<Eigen::Infinity>() > kOnsDriftTol * std::max(1.0, grad.lpNorm<Eigen::Infinity>())) {
    state.A_inv = state.A.ldlt().solve(Matrix::Identity(state.A.rows(), state.A.cols()));
    ++state.rebuilds;
  }
  ++state.t;
  return state;
}

// ---------------------------------------------------------------------------
// MW

MwState make_mw(int n, double eta, double G_inf, Sense direction) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "MW needs n >= 1");
  if (!(eta >= 0.0) || !(eta <= 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "MW needs 0 <= eta <= 1/2");
  }
  if (!(G_inf > 0.0)) throw Error(ErrorCode::kInvalidArgument, "MW needs G_inf > 0");
  MwState s;
  s.w = Vector::Ones(n);
  s.x = Vector::Constant(n, 1.0 / n);
  s.eta = eta;
  s.G_inf = G_inf;
  s.direction = direction;
  return s;
}

MwState mw_step(MwState state, const Vector& grad) {
  if (!(state.eta >= 0.0) || !(state.eta <= 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "MW needs 0 <= eta <= 1/2");
  }
  if (grad.size() != state.w.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "MW: gradient dimension");
  }
  if (!grad.allFinite()) throw Error(ErrorCode::kInvalidArgument, "MW: gradient not finite");
  // Unknown scale: use the largest l_inf norm seen so far.
  state.G_inf = std::max(state.G_inf, grad.lpNorm<Eigen::Infinity>());
  const double sign = state.direction == Sense::kMaximize ? 1.0 : -1.0;
  state.w.array() *= 1.0 + sign * (state.eta / state.G_inf) * grad.array();
  const double total = state.w.sum();
  if (total < 1e-200 || total > 1e200) {
    state.w /= total;
    state.x = state.w;
  } else {
    state.x = state.w / total;
  }
  ++state.t;
  return state;
}

double mw_eta_for_horizon(int n, long horizon) {
  if (horizon < 1) horizon = 1;
  const double eta = std::sqrt(std::log(static_cast<double>(n)) / static_cast<double>(horizon));
  return std::min(eta, 0.49);
}

// ---------------------------------------------------------------------------
// Bounds

double regret_bound(const RegretBoundSpec& spec, long T) {
  if (T < 1) throw Error(ErrorCode::kInvalidArgument, "regret bound needs T >= 1");
  const double t = static_cast<double>(T);
  switch (spec.kind) {
    case LearnerKind::kOgd:
      return spec.G * spec.G / spec.H * std::log(t + 1.0);
    case LearnerKind::kOns:
      return 5.0 * (1.0 / spec.alpha + spec.G * spec.D) * spec.n * std::log(t + 1.0);
    case LearnerKind::kMw:
      return 2.0 * spec.G * std::sqrt(t * std::log(static_cast<double>(spec.n)));
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// OnlineLearner

OnlineLearner OnlineLearner::ogd(const Domain& domain, double H, double G) {
  RegretBoundSpec spec{LearnerKind::kOgd, G, H, domain.diameter(), 0.0, domain.dim()};
  return OnlineLearner(make_ogd(domain, H), domain, Sense::kMinimize, spec);
}

OnlineLearner OnlineLearner::ons(const Domain& domain, double G, double D,
                                 double alpha, Sense sense) {
  RegretBoundSpec spec{LearnerKind::kOns, G, 0.0, D, alpha, domain.dim()};
  return OnlineLearner(make_ons(domain, G, D, alpha), domain, sense, spec);
}

OnlineLearner OnlineLearner::mw(int n, double G_inf, long horizon, Sense sense) {
  RegretBoundSpec spec{LearnerKind::kMw, G_inf, 0.0, 0.0, 0.0, n};
  return OnlineLearner(make_mw(n, mw_eta_for_horizon(n, horizon), G_inf, sense),
                       Domain::simplex(n), sense, spec);
}

const Vector& OnlineLearner::point() const {
  return std::visit([](const auto& s) -> const Vector& { return s.x; }, state_);
}

void OnlineLearner::update(const Vector& grad) {
  if (auto* s = std::get_if<OgdState>(&state_)) {
    *s = ogd_step(std::move(*s), grad, domain_);
  } else if (auto* s = std::get_if<OnsState>(&state_)) {
    *s = ons_step(std::move(*s), grad, domain_, sense_);
  } else {
    auto& mw = std::get<MwState>(state_);
    mw = mw_step(std::move(mw), grad);
    spec_.G = mw.G_inf;
  }
}

RegretBoundSpec OnlineLearner::bound_spec() const { return spec_; }

void OnlineLearner::set_horizon(long horizon) {
  if (auto* s = std::get_if<MwState>(&state_)) {
    s->eta = mw_eta_for_horizon(static_cast<int>(s->w.size()), horizon);
  }
}

// ---------------------------------------------------------------------------
// Regret measurement

RegretTracker::RegretTracker(Domain domain)
    : domain_(std::move(domain)),
      A_(Matrix::Zero(domain_.dim(), domain_.dim())),
      b_(Vector::Zero(domain_.dim())) {}

void RegretTracker::add(const ConstraintFn& cost, const Vector& play) {
  if (cost.dim() != domain_.dim() || play.size() != domain_.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "regret: cost/play dimension");
  }
  online_ += evaluate(cost, play);
  ++rounds_;
  const auto& v = cost.variant();
  if (const auto* af = std::get_if<Affine>(&v)) {
    b_ += af->a;
    c_ += af->b;
  } else if (const auto* q = std::get_if<Quadratic>(&v)) {
    A_ += q->A;
    b_ += q->b;
    c_ += q->c;
    quadratic_ = true;
  } else if (const auto* nd = std::get_if<NormDistSq>(&v)) {
    A_.diagonal().array() += 1.0;
    b_ -= 2.0 * nd->center;
    c_ += nd->center.squaredNorm() - nd->c;
    quadratic_ = true;
  } else {
    other_.push_back(cost);
  }
}

void RegretTracker::add_linear(const Vector& c, const Vector& play) {
  if (c.size() != domain_.dim() || play.size() != domain_.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "regret: cost/play dimension");
  }
  online_ += c.dot(play);
  b_ += c;
  ++rounds_;
}

double RegretTracker::hindsight_cost() const {
  if (rounds_ == 0) return 0.0;
  if (!quadratic_ && other_.empty()) {
    const Vector x = domain_.linear_minimizer(b_);
    return b_.dot(x) + c_;
  }
  // Minimize the average cost, then scale back up.
  const double inv = 1.0 / static_cast<double>(rounds_);
  const Matrix A = A_ * inv;
  const Vector b = b_ * inv;
  const double c = c_ * inv;
  const Objective obj = [&](const Vector& x, Vector* grad) {
    double val = x.dot(A * x) + b.dot(x) + c;
    if (grad != nullptr) *grad = 2.0 * (A * x) + b;
    for (const auto& f : other_) {
      val += inv * evaluate(f, x);
      if (grad != nullptr) *grad += inv * gradient(f, x);
    }
    return val;
  };
  MinimizeOptions opts;
  opts.gap_tol = 1e-12;
  opts.max_iters = 200000;
  const MinimizeResult r = minimize_over_domain(obj, domain_, domain_.start_point(), opts);
  if (r.status != MinimizeStatus::kConverged && r.gap > 1e-8) {
    std::ostringstream os;
    os << "hindsight minimization stalled with gap " << r.gap;
    throw Error(ErrorCode::kNonConvergence, os.str());
  }
  return r.value * static_cast<double>(rounds_);
}

double measured_regret(const std::vector<ConstraintFn>& costs,
                       const std::vector<Vector>& plays, const Domain& domain) {
  if (costs.size() != plays.size()) {
    throw Error(ErrorCode::kInvalidArgument, "regret: histories differ in length");
  }
  if (costs.empty()) return 0.0;
  RegretTracker tracker(domain);
  for (std::size_t t = 0; t < costs.size(); ++t) tracker.add(costs[t], plays[t]);
  return tracker.regret();
}

}  // namespace gameopt
