#ifndef GAMEOPT_REDUCTIONS_HPP
#define GAMEOPT_REDUCTIONS_HPP

// Transformations that give a problem the curvature a learner needs.

#include <optional>
#include <utility>

#include "gameopt/core.hpp"

namespace gameopt {

// Replaces every f_j by f_j(x) + delta ||x||^2 - delta. Requires a simplex
// domain, where ||x||^2 <= 1 keeps feasible points feasible.
// Params: H' = H + 2 delta, G' = G + 2 delta, omega' = omega + delta.
Problem strictify(const Problem& problem, double delta);

struct StrictifyPlan {
  double delta = 0.0;
  // Accuracy on the original problem of an eps-solution of the strictified one.
  double final_eps = 0.0;
};

// delta = eps; final accuracy 2 eps.
StrictifyPlan strictify_guarantee(double eps);

// Maps each f_j <= 0 to 1 - log(e - f_j / omega) <= 0, the minimization form
// of log(e + h_j / omega) >= 1 with h_j = -f_j. With |f_j| <= omega the new
// constraints are 1-exp-concave: exp(-(1 - log(e - f/omega))) = (e - f/omega)/e
// is concave whenever f is convex. Params: G' = G / omega, alpha = 1.
// Without omega the width estimate is used. An omega below the sampled |f_j|
// throws kInvalidArgument.
Problem log_transform(const Problem& problem, std::optional<double> omega = std::nullopt);

// Game value of the transformed problem in the concave convention,
// log(e + rho / omega), where rho = max_x min_j (-f_j(x)).
double log_game_value(double rho, double omega);

// Accuracy on the original problem of an eps_log-solution: 3 omega eps_log.
double approx_translate(double eps_log, double omega);
// eps_log needed for original accuracy eps: eps / (3 omega).
double log_eps_for_target(double eps, double omega);

}  // namespace gameopt

#endif  // GAMEOPT_REDUCTIONS_HPP
