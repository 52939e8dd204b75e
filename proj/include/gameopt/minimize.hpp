#ifndef GAMEOPT_MINIMIZE_HPP
#define GAMEOPT_MINIMIZE_HPP

#include <functional>
#include <optional>

#include "gameopt/core.hpp"

namespace gameopt {

// Smooth convex objective: returns f(x) and writes grad f(x) when requested.
using Objective = std::function<double(const Vector& x, Vector* grad)>;

struct MinimizeOptions {
  // Stop once the Frank-Wolfe gap drops to this value. The gap upper-bounds
  // f(x) - min f for convex f, so it doubles as an optimality certificate.
  double gap_tol = 1e-9;
  int max_iters = 100000;
  // Initial Lipschitz estimate for the gradient; doubled by backtracking.
  double lipschitz = 1.0;
  // Early exits used by the optimization oracle.
  std::optional<double> stop_at_value;        // f(x) <= this
  std::optional<double> stop_at_lower_bound;  // f(x) - gap > this
};

enum class MinimizeStatus {
  kConverged,
  kReachedValue,
  kCertifiedLowerBound,
  kIterationCap,
};

struct MinimizeResult {
  Vector x;
  double value = 0.0;
  double gap = 0.0;
  // value - gap: a certified lower bound on min f over the domain.
  double lower_bound = 0.0;
  int iterations = 0;
  MinimizeStatus status = MinimizeStatus::kIterationCap;
};

// Accelerated projected gradient (FISTA with backtracking and monotone
// restart) over a domain.
MinimizeResult minimize_over_domain(const Objective& f, const Domain& domain,
                                    const Vector& x0,
                                    const MinimizeOptions& options);

// Objective wrapper for a constraint function.
Objective objective_of(const ConstraintFn& f);

}  // namespace gameopt

#endif  // GAMEOPT_MINIMIZE_HPP
