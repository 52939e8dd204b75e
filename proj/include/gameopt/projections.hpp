#ifndef GAMEOPT_PROJECTIONS_HPP
#define GAMEOPT_PROJECTIONS_HPP

#include "gameopt/core.hpp"

namespace gameopt {

// Threshold a with sum_i max(y_i - a, 0) = mass. Sort plus prefix scan.
double simplex_threshold(const Vector& y, double mass = 1.0);

// Euclidean projection onto the unit simplex: x_i = max(y_i - a, 0).
Vector project_simplex(const Vector& y);

// Euclidean projection onto {x >= floor, sum x = 1}.
Vector project_simplex(const Vector& y, double floor);

Vector project_ball(const Vector& y, double radius, const Vector& center);

Vector project_box(const Vector& y, const Vector& lo, const Vector& hi);

// Euclidean projection onto any supported domain.
Vector project(const Vector& y, const Domain& domain);

inline constexpr int kProjectionIterationCap = 100000;

// argmin_{x in domain} (x - y)' A (x - y) for PSD A, to within tol of the
// optimal objective. When A has zero eigenvalues the minimizer need not be
// unique and any one of them is returned. Throws kNonConvergence past the
// iteration cap and kInvalidArgument when A is not symmetric PSD.
Vector generalized_project(const Vector& y, const Matrix& A,
                           const Domain& domain, double tol);

// Same, with a warm start and without the PSD check (the caller owns the
// invariant). Used on the hot path of the Newton-step learner.
Vector generalized_project(const Vector& y, const Matrix& A,
                           const Domain& domain, double tol,
                           const Vector& warm_start);

}  // namespace gameopt

#endif  // GAMEOPT_PROJECTIONS_HPP
