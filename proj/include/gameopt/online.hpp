#ifndef GAMEOPT_ONLINE_HPP
#define GAMEOPT_ONLINE_HPP

// Online convex optimization players. Each learner exposes the point it plays
// and consumes the gradient of the cost (or payoff) revealed at that point.

#include <variant>
#include <vector>

#include "gameopt/core.hpp"

namespace gameopt {

enum class Sense { kMinimize, kMaximize };
enum class LearnerKind { kOgd, kOns, kMw };

const char* learner_name(LearnerKind kind);

// ---------------------------------------------------------------------------
// Online gradient descent with step 1/(H t).

struct OgdState {
  Vector x;
  long t = 1;
  double H = 1.0;
};

OgdState make_ogd(const Domain& domain, double H);
OgdState ogd_step(OgdState state, const Vector& grad, const Domain& domain);

// ---------------------------------------------------------------------------
// Online Newton step. A and A_inv are kept in sync with Sherman-Morrison
// updates; the iterate is projected in the norm induced by A.

struct OnsState {
  Vector x;
  long t = 1;
  double beta = 0.5;
  Matrix A;
  Matrix A_inv;
  double D = 1.0;
  double G = 1.0;
  // Times A_inv was rebuilt from A after Sherman-Morrison drift.
  int rebuilds = 0;
};

// beta = 1/2 min{alpha, 1/(4GD)}, A_0 = I/(D^2 beta^2).
OnsState make_ons(const Domain& domain, double G, double D, double alpha = 1.0);
OnsState ons_step(OnsState state, const Vector& grad, const Domain& domain,
                  Sense sense);

// Relative residual above which A_inv is recomputed from A.
inline constexpr double kOnsDriftTol = 1e-6;

// ---------------------------------------------------------------------------
// Multiplicative weights over the simplex.

struct MwState {
  Vector w;
  Vector x;  // w / ||w||_1
  double eta = 0.1;
  double G_inf = 1.0;
  Sense direction = Sense::kMinimize;
  long t = 1;
};

MwState make_mw(int n, double eta, double G_inf, Sense direction);
MwState mw_step(MwState state, const Vector& grad);

// sqrt(log n / T), kept strictly below 1/2.
double mw_eta_for_horizon(int n, long horizon);

// ---------------------------------------------------------------------------
// Regret bounds with fixed leading constants:
//   OGD  (G^2/H) log(T+1)
//   ONS  5 (1/alpha + G D) n log(T+1)
//   MW   2 G_inf sqrt(T log n)

struct RegretBoundSpec {
  LearnerKind kind = LearnerKind::kOgd;
  double G = 1.0;  // l2 bound for OGD/ONS, l_inf bound for MW
  double H = 1.0;
  double D = 1.0;
  double alpha = 1.0;
  int n = 1;
};

double regret_bound(const RegretBoundSpec& spec, long T);

// ---------------------------------------------------------------------------
// Uniform handle over the three learners for the solver loops.

class OnlineLearner {
 public:
  static OnlineLearner ogd(const Domain& domain, double H, double G);
  static OnlineLearner ons(const Domain& domain, double G, double D,
                           double alpha, Sense sense);
  static OnlineLearner mw(int n, double G_inf, long horizon, Sense sense);

  LearnerKind kind() const { return static_cast<LearnerKind>(state_.index()); }
  const Vector& point() const;
  // Feeds the gradient of the round's cost at point().
  void update(const Vector& grad);
  RegretBoundSpec bound_spec() const;
  // Re-tunes the multiplicative-weights rate for a new horizon; no-op for the
  // gradient learners.
  void set_horizon(long horizon);

  const std::variant<OgdState, OnsState, MwState>& state() const { return state_; }

 private:
  OnlineLearner(std::variant<OgdState, OnsState, MwState> s, Domain d,
                Sense sense, RegretBoundSpec spec)
      : state_(std::move(s)), domain_(std::move(d)), sense_(sense), spec_(spec) {}

  std::variant<OgdState, OnsState, MwState> state_;
  Domain domain_;
  Sense sense_;
  RegretBoundSpec spec_;
};

// ---------------------------------------------------------------------------
// Regret measurement.

// Accumulates a cost stream and the plays made against it. Affine and
// quadratic costs are folded into one running quadratic, so long streams
// need O(n^2) memory.
class RegretTracker {
 public:
  RegretTracker(Domain domain);  // NOLINT(google-explicit-constructor)

  void add(const ConstraintFn& cost, const Vector& play);
  // Linear cost c'x; avoids building a ConstraintFn per round.
  void add_linear(const Vector& c, const Vector& play);

  long rounds() const { return rounds_; }
  double online_cost() const { return online_; }
  // min over the domain of the summed cost.
  double hindsight_cost() const;
  double regret() const { return online_ - hindsight_cost(); }

 private:
  Domain domain_;
  long rounds_ = 0;
  double online_ = 0.0;
  Matrix A_;
  Vector b_;
  double c_ = 0.0;
  bool quadratic_ = false;
  std::vector<ConstraintFn> other_;
};

// sum_t f_t(x_t) - min_x sum_t f_t(x). Empty history gives 0.
double measured_regret(const std::vector<ConstraintFn>& costs,
                       const std::vector<Vector>& plays, const Domain& domain);

}  // namespace gameopt

#endif  // GAMEOPT_ONLINE_HPP
