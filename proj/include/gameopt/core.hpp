#ifndef GAMEOPT_CORE_HPP
#define GAMEOPT_CORE_HPP

// Problem model for convex feasibility over simple domains:
//
//   find x in P such that f_j(x) <= 0 for all j in [m]
//
// where P is a simplex, a Euclidean ball or a box and every f_j belongs to a
// closed set of analytic families. All constraints are stored in this
// minimization form; transforms that need the concave ">= 0" form convert
// internally.

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "gameopt/error.hpp"

namespace gameopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Comparisons against zero use this absolute tolerance unless an operation
// states otherwise.
inline constexpr double kZeroTol = 1e-12;

// ---------------------------------------------------------------------------
// Domains

// {x : x_i >= floor, sum x = 1}. floor = 0 is the unit simplex; a positive
// floor keeps entropy and log-barrier constraints away from the boundary.
struct SimplexDomain {
  int n = 1;
  double floor = 0.0;
};

struct BallDomain {
  Vector center;
  double radius = 1.0;
};

struct BoxDomain {
  Vector lo;
  Vector hi;
};

enum class DomainKind { kSimplex, kBall, kBox };

class Domain {
 public:
  using Shape = std::variant<SimplexDomain, BallDomain, BoxDomain>;

  static Domain simplex(int n, double floor = 0.0);
  static Domain ball(int n, double radius, const Vector& center);
  static Domain ball(int n, double radius);
  static Domain box(const Vector& lo, const Vector& hi);

  DomainKind kind() const;
  int dim() const;
  const Shape& shape() const { return shape_; }

  // The uniform point for simplices, the center for balls and boxes. Every
  // learner starts here.
  Vector start_point() const;

  // Upper bound on the l2 diameter.
  double diameter() const;

  // Componentwise bounding box.
  Vector lower_corner() const;
  Vector upper_corner() const;

  bool contains(const Vector& x, double tol = 1e-9) const;

  // Minimizer of <c, x> over the domain (linear minimization oracle).
  Vector linear_minimizer(const Vector& c) const;

  // Uniform sample from the domain.
  Vector sample(std::mt19937_64& rng) const;

  bool operator==(const Domain& other) const;

 private:
  explicit Domain(Shape shape) : shape_(std::move(shape)) {}
  Shape shape_;
};

// ---------------------------------------------------------------------------
// Constraint families

class ConstraintFn;
using ConstraintPtr = std::shared_ptr<const ConstraintFn>;

// a'x + b
struct Affine {
  Vector a;
  double b = 0.0;
};

// x'Ax + b'x + c with A symmetric.
struct Quadratic {
  Matrix A;
  Vector b;
  double c = 0.0;
};

// log(e + inner(x) / omega)
struct LogAffineComposite {
  ConstraintPtr inner;
  double omega = 1.0;
};

// sum_i x_i log x_i over an n-vector.
struct NegEntropy {
  int n = 1;
};

// ||x - center||^2 - c
struct NormDistSq {
  Vector center;
  double c = 0.0;
};

// sum_k weight_k * fn_k(x) + constant. Used to express shifted and scaled
// families (strictified constraints, log-transformed constraints, sums of
// logarithms) without widening the set of primitive families.
struct Combination {
  struct Term {
    double weight = 1.0;
    ConstraintPtr fn;
  };
  std::vector<Term> terms;
  double constant = 0.0;
};

enum class Family {
  kAffine,
  kQuadratic,
  kLogAffineComposite,
  kNegEntropy,
  kNormDistSq,
  kCombination,
};

class ConstraintFn {
 public:
  using Variant = std::variant<Affine, Quadratic, LogAffineComposite,
                               NegEntropy, NormDistSq, Combination>;

  // Validates shapes (symmetry of A, omega > 0, matching term dimensions).
  ConstraintFn(Variant v);  // NOLINT(google-explicit-constructor)

  // f(x) = value for every x in R^n.
  static ConstraintFn constant(int n, double value);

  const Variant& variant() const { return v_; }
  Family family() const { return static_cast<Family>(v_.index()); }
  int dim() const { return dim_; }

  // True when the function is affine in x (Affine, or a Combination of
  // affine terms).
  bool is_affine() const;

 private:
  Variant v_;
  int dim_;
};

ConstraintPtr share(ConstraintFn f);

double evaluate(const ConstraintFn& f, const Vector& x);
Vector gradient(const ConstraintFn& f, const Vector& x);

// ---------------------------------------------------------------------------
// Problems

struct ProblemParams {
  double G = 1.0;      // l2 gradient bound over the domain
  double H = 0.0;      // lower bound on the smallest Hessian eigenvalue
  double omega = 1.0;  // width: max_j max_x |f_j(x)|
  double D = 1.0;      // l2 diameter of the domain
  double G_inf = 1.0;  // l_inf bound on dual payoff gradients (f_1..f_m)
  double alpha = 0.0;  // exp-concavity modulus, 0 when none is known
};

struct Problem {
  std::vector<ConstraintFn> constraints;
  Domain domain = Domain::simplex(1);
  ProblemParams params;

  int m() const { return static_cast<int>(constraints.size()); }
  int n() const { return domain.dim(); }
};

// Validates dimensions and fills params from estimate_parameters.
Problem make_problem(std::vector<ConstraintFn> constraints, Domain domain);
// Validates dimensions; takes params as given.
Problem make_problem(std::vector<ConstraintFn> constraints, Domain domain,
                     const ProblemParams& params);

// (f_1(x), ..., f_m(x))
Vector constraint_values(const Problem& problem, const Vector& x);
double max_violation(const Problem& problem, const Vector& x);

// Throws kInvalidDistribution unless p >= 0 and |sum p - 1| <= 1e-9.
void check_distribution(const Vector& p, int m);

// g(x, p) = sum_j p_j f_j(x)
double game_loss(const Problem& problem, const Vector& x, const Vector& p);

// The single function sum_j p_j f_j, with affine and quadratic members folded
// into one quadratic.
ConstraintFn combine(const Problem& problem, const Vector& p);

struct ViolationReport {
  // Lowest index j with f_j(x) > eps, or nullopt for FAIL.
  std::optional<int> index;
  // f_index(x) when an index is reported; max_j f_j(x) on FAIL.
  double value = 0.0;

  bool failed() const { return !index.has_value(); }
};

ViolationReport separation_oracle(const Problem& problem, const Vector& x,
                                  double eps);

inline constexpr int kOracleIterationCap = 100000;

// Returns x with g(x, p) <= tol, or nullopt when min_x g(x, p) > 0 is
// certified. Exact for affine games, where tol = 0 is allowed; otherwise an
// accelerated projected-gradient inner solve whose FAIL verdict is backed by
// the Frank-Wolfe lower bound and tol must be positive. Throws
// kNonConvergence past the iteration cap.
std::optional<Vector> optimization_oracle(const Problem& problem,
                                          const Vector& p, double tol);

// Conservative bounds per family: interval arithmetic over the domain's
// bounding box, tightened with exact ranges where they are cheap (affine
// functions over any of the domains, quadratics through the operator norm).
ProblemParams estimate_parameters(const Problem& problem);

// Per-constraint pieces of the estimate. Exposed for tests and transforms.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
Interval value_range(const ConstraintFn& f, const Domain& domain);
double gradient_bound(const ConstraintFn& f, const Domain& domain);
Interval curvature_range(const ConstraintFn& f, const Domain& domain);

}  // namespace gameopt

#endif  // GAMEOPT_CORE_HPP
