#ifndef GAMEOPT_SOLVERS_HPP
#define GAMEOPT_SOLVERS_HPP

// The three game-playing meta-solvers. Each returns either a point that is
// eps-feasible or a distribution over constraints certifying infeasibility.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gameopt/core.hpp"
#include "gameopt/online.hpp"

namespace gameopt {

struct Feasible {
  Vector x;
  Vector residuals;  // f_j(x)
};

// min_x g(x, p_bar) > 0
struct Infeasible {
  Vector p_bar;
};

// min_x g(x, p_bar) > -eps
struct EpsilonInfeasible {
  Vector p_bar;
};

// Iteration cap hit before the theoretical threshold.
struct Exhausted {
  Vector best_x;
  double best_violation = 0.0;
};

using Outcome = std::variant<Feasible, Infeasible, EpsilonInfeasible, Exhausted>;

// "feasible", "infeasible", "epsilon_infeasible" or "exhausted".
const char* outcome_name(const Outcome& outcome);

struct TraceRecord {
  long iter = 0;
  std::optional<int> violated_index;
  double violation = 0.0;
  double game_loss = 0.0;
  double regret_bound = 0.0;
  std::int64_t elapsed_ns = 0;
};

using TraceSink = std::function<void(const TraceRecord&)>;

enum class Algo { kPrimal, kDual, kPrimalDual };

const char* algo_name(Algo algo);

struct SolveOptions {
  double eps = 0.1;
  // Primal player for the primal and primal-dual solvers. The dual solver
  // always plays multiplicative weights.
  LearnerKind learner = LearnerKind::kOgd;
  // Stops early with Exhausted when below the theoretical threshold.
  std::optional<long> max_iters;
  // Optimization-oracle tolerance for the dual solver. Defaults to 0 (exact)
  // for affine problems and eps/2 otherwise.
  std::optional<double> oracle_tol;
  TraceSink trace;
};

struct SolveResult {
  Outcome outcome;
  long iterations = 0;
  long threshold = 0;
  // Accuracy at which the outcome certifies: Feasible has residuals at most
  // this, EpsilonInfeasible has min_x g(x, p_bar) > -guarantee.
  double guarantee = 0.0;
};

// Start of the final run of T >= 1 with bound(T) <= eps T. Doubling until the
// predicate holds and bound(T)/T is non-increasing, then bisection.
long stopping_threshold(const std::function<double(long)>& bound, double eps);
long stopping_threshold(const RegretBoundSpec& spec, double eps);

SolveResult primal_game_opt(const Problem& problem, const SolveOptions& options);
SolveResult dual_game_opt(const Problem& problem, const SolveOptions& options);
SolveResult primal_dual_game_opt(const Problem& problem, const SolveOptions& options);
SolveResult solve(const Problem& problem, Algo algo, const SolveOptions& options);

// ---------------------------------------------------------------------------
// Certificate checks

enum class VerifyMethod { kAuto, kGrid, kInner };

struct VerifyReport {
  bool ok = false;
  // "evaluation", "exact", "grid" or "inner".
  std::string method;
  std::string detail;
  // Feasible: the first constraint above eps, if any.
  std::optional<int> violating_index;
  // Feasible: max_j f_j(x). Certificates: the computed min_x g(x, p_bar).
  double value = 0.0;
  // Amount subtracted from value before comparing with the threshold.
  double slack = 0.0;
};

inline constexpr double kGridVerifyResolution = 1e-3;

// Feasible: max_j f_j(x) <= eps by evaluation. Infeasible: min_x g(x, p_bar)
// > 0; EpsilonInfeasible: > -eps. kAuto picks the exact linear oracle for
// affine g, the grid for n <= 3 and the inner minimizer's certified lower
// bound otherwise. kGrid with n > 3 throws.
VerifyReport verify_certificate(const Problem& problem, const Outcome& outcome,
                                double eps, VerifyMethod method = VerifyMethod::kAuto,
                                double resolution = kGridVerifyResolution);

// Records outcomes produced for one problem and flags pairs that contradict
// weak duality: a point x reported feasible with g(x, p_bar) at or below the
// bound a certificate claims to exceed.
class DualityMonitor {
 public:
  explicit DualityMonitor(Problem problem) : problem_(std::move(problem)) {}

  // Returns false if this outcome contradicts an earlier one.
  bool record(const Outcome& outcome, double eps);
  const std::vector<std::string>& events() const { return events_; }
  int contradictions() const { return static_cast<int>(events_.size()); }

 private:
  struct Claim {
    Vector p_bar;
    double threshold;
  };
  Problem problem_;
  std::vector<Vector> points_;
  std::vector<Claim> claims_;
  std::vector<std::string> events_;
};

}  // namespace gameopt

#endif  // GAMEOPT_SOLVERS_HPP
