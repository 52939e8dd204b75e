#include "gameopt/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "gameopt/minimize.hpp"
#include "gameopt/projections.hpp"

namespace gameopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTinyParam = 1e-12;

[[noreturn]] void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

bool all_finite(const Vector& v) { return v.allFinite(); }

void check_dim(const ConstraintFn& f, const Vector& x) {
  if (x.size() != f.dim()) {
    std::ostringstream os;
    os << "dimension mismatch: constraint has n=" << f.dim()
       << ", point has n=" << x.size();
    fail(ErrorCode::kDimensionMismatch, os.str());
  }
}

// max_x ||x - start_point||
double radius_from_start(const Domain& d) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimplexDomain>) {
          const double scale = 1.0 - s.n * s.floor;
          return scale * std::sqrt(1.0 - 1.0 / s.n);
        } else if constexpr (std::is_same_v<T, BallDomain>) {
          return s.radius;
        } else {
          return 0.5 * (s.hi - s.lo).norm();
        }
      },
      d.shape());
}

// ---- interval arithmetic --------------------------------------------------

Interval point(double v) { return {v, v}; }

Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }

Interval scale(Interval a, double w) {
  if (w == 0.0) return {0.0, 0.0};
  return w > 0 ? Interval{w * a.lo, w * a.hi} : Interval{w * a.hi, w * a.lo};
}

Interval mul(Interval a, Interval b) {
  const double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

Interval square(Interval a) {
  if (a.lo >= 0) return {a.lo * a.lo, a.hi * a.hi};
  if (a.hi <= 0) return {a.hi * a.hi, a.lo * a.lo};
  return {0.0, std::max(a.lo * a.lo, a.hi * a.hi)};
}

Interval intersect(Interval a, Interval b) {
  Interval r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
  if (r.lo > r.hi) return a;  // rounding; keep the first bound
  return r;
}

double abs_max(Interval a) { return std::max(std::abs(a.lo), std::abs(a.hi)); }

// Division by an interval with s.lo > 0. Infinite endpoints stay infinite.
Interval div_positive(Interval a, Interval s) {
  auto q = [](double x, double y) {
    if (x == 0.0) return 0.0;
    return x / y;
  };
  const double c[4] = {q(a.lo, s.lo), q(a.lo, s.hi), q(a.hi, s.lo),
                       q(a.hi, s.hi)};
  return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

// range of t log t on [lo, hi], lo >= 0.
Interval xlogx_range(double lo, double hi) {
  auto h = [](double t) { return t > 0 ? t * std::log(t) : 0.0; };
  const double inv_e = std::exp(-1.0);
  double mn = std::min(h(lo), h(hi));
  if (lo <= inv_e && inv_e <= hi) mn = -inv_e;
  return {mn, std::max(h(lo), h(hi))};
}

struct AffineParts {
  Vector a;
  double b;
};

// Extracts (a, b) from a function known to be affine.
AffineParts affine_parts(const ConstraintFn& f) {
  return std::visit(
      [&](const auto& fam) -> AffineParts {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, Affine>) {
          return {fam.a, fam.b};
        } else if constexpr (std::is_same_v<T, Quadratic>) {
          return {fam.b, fam.c};
        } else if constexpr (std::is_same_v<T, Combination>) {
          AffineParts out{Vector::Zero(f.dim()), fam.constant};
          for (const auto& t : fam.terms) {
            AffineParts p = affine_parts(*t.fn);
            out.a += t.weight * p.a;
            out.b += t.weight * p.b;
          }
          return out;
        } else {
          fail(ErrorCode::kInvalidArgument, "constraint is not affine");
        }
      },
      f.variant());
}

std::pair<double, double> eigen_range(const Matrix& A) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kDomainError: return "domain_error";
    case ErrorCode::kInvalidDistribution: return "invalid_distribution";
    case ErrorCode::kNonConvergence: return "non_convergence";
    case ErrorCode::kUnbounded: return "unbounded";
    case ErrorCode::kNoThreshold: return "no_threshold";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kVerification: return "verification";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Domain

Domain Domain::simplex(int n, double floor) {
  if (n < 1) fail(ErrorCode::kInvalidArgument, "simplex needs n >= 1");
  if (!(floor >= 0.0) || !(n * floor < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "simplex floor must satisfy 0 <= n*floor < 1");
  }
  return Domain(SimplexDomain{n, floor});
}

Domain Domain::ball(int n, double radius, const Vector& center) {
  if (n < 1) fail(ErrorCode::kInvalidArgument, "ball needs n >= 1");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    fail(ErrorCode::kInvalidArgument, "ball radius must be positive");
  }
  if (center.size() != n) {
    fail(ErrorCode::kDimensionMismatch, "ball center has wrong dimension");
  }
  if (!all_finite(center)) fail(ErrorCode::kInvalidArgument, "ball center not finite");
  return Domain(BallDomain{center, radius});
}

Domain Domain::ball(int n, double radius) {
  return ball(n, radius, Vector::Zero(n));
}

Domain Domain::box(const Vector& lo, const Vector& hi) {
  if (lo.size() < 1 || lo.size() != hi.size()) {
    fail(ErrorCode::kDimensionMismatch, "box bounds must have equal positive length");
  }
  if (!all_finite(lo) || !all_finite(hi)) {
    fail(ErrorCode::kInvalidArgument, "box bounds not finite");
  }
  if ((lo.array() > hi.array()).any()) {
    fail(ErrorCode::kInvalidArgument, "box needs lo <= hi componentwise");
  }
  return Domain(BoxDomain{lo, hi});
}

DomainKind Domain::kind() const { return static_cast<DomainKind>(shape_.index()); }

int Domain::dim() const {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimplexDomain>) {
          return s.n;
        } else if constexpr (std::is_same_v<T, BallDomain>) {
          return static_cast<int>(s.center.size());
        } else {
          return static_cast<int>(s.lo.size());
        }
      },
      shape_);
}

Vector Domain::start_point() const {
  return std::visit(
      [](const auto& s) -> Vector {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimplexDomain>) {
          return Vector::Constant(s.n, 1.0 / s.n);
        } else if constexpr (std::is_same_v<T, BallDomain>) {
          return s.center;
        } else {
          return 0.5 * (s.lo + s.hi);
        }
      },
      shape_);
}

double Domain::diameter() const {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimplexDomain>) {
          return std::sqrt(2.0) * (1.0 - s.n * s.floor);
        } else if constexpr (std::is_same_v<T, BallDomain>) {
          return 2.0 * s.radius;
        } else {
          return std::max((s.hi - s.lo).norm(), kTinyParam);
        }
      },
      shape_);
}

Vector Domain::lower_corner() const {
  return std::visit(
      [](const auto& s) -> Vector {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimplexDomain>) {
          return Vector::Constant(s.n, s.floor);
        } else if constexpr (std::is_same_v<T, BallDomain>) {
          return s.center.array() - s.radius;
        } else {
          return s.lo;
        }
      },
      shape_);
}

Vector Domain::upper_corner() const {
  return std::visit(
      [](const auto& s) -> Vector {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimplexDomain>) {
          return Vector::Constant(s.n, 1.0 - (s.n - 1) * s.floor);
        } else if constexpr (std::is_same_v<T, BallDomain>) {
          return s.center.array() + s.radius;
        } else {
          return s.hi;
        }
      },
      shape_);
}

bool Domain::contains(const Vector& x, double tol) const {
  if (x.size() != dim() || !all_finite(x)) return false;
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimplexDomain>) {
          return x.minCoeff() >= s.floor - tol && std::abs(x.sum() - 1.0) <= tol;
        } else if constexpr (std::is_same_v<T, BallDomain>) {
          return (x - s.center).norm() <= s.radius + tol;
        } else {
          return ((x - s.lo).array() >= -tol).all() &&
                 ((s.hi - x).array() >= -tol).all();
        }
      },
      shape_);
}

Vector Domain::linear_minimizer(const Vector& c) const {
  return std::visit(
      [&](const auto& s) -> Vector {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimplexDomain>) {
          Eigen::Index i;
          c.minCoeff(&i);
          Vector x = Vector::Constant(s.n, s.floor);
          x(i) += 1.0 - s.n * s.floor;
          return x;
        } else if constexpr (std::is_same_v<T, BallDomain>) {
          const double nc = c.norm();
          if (nc == 0.0) return s.center;
          return s.center - (s.radius / nc) * c;
        } else {
          Vector x(s.lo.size());
          for (Eigen::Index i = 0; i < x.size(); ++i) {
            x(i) = c(i) > 0 ? s.lo(i) : (c(i) < 0 ? s.hi(i) : 0.5 * (s.lo(i) + s.hi(i)));
          }
          return x;
        }
      },
      shape_);
}

Vector Domain::sample(std::mt19937_64& rng) const {
  return std::visit(
      [&](const auto& s) -> Vector {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimplexDomain>) {
          std::exponential_distribution<double> ex(1.0);
          Vector z(s.n);
          for (int i = 0; i < s.n; ++i) z(i) = ex(rng);
          z /= z.sum();
          return (Vector::Constant(s.n, s.floor) + (1.0 - s.n * s.floor) * z).eval();
        } else if constexpr (std::is_same_v<T, BallDomain>) {
          const auto n = s.center.size();
          std::normal_distribution<double> nd(0.0, 1.0);
          std::uniform_real_distribution<double> ud(0.0, 1.0);
          Vector d(n);
          for (Eigen::Index i = 0; i < n; ++i) d(i) = nd(rng);
          const double nrm = d.norm();
          if (nrm == 0.0) return s.center;
          const double r = s.radius * std::pow(ud(rng), 1.0 / static_cast<double>(n));
          return (s.center + (r / nrm) * d).eval();
        } else {
          std::uniform_real_distribution<double> ud(0.0, 1.0);
          Vector x(s.lo.size());
          for (Eigen::Index i = 0; i < x.size(); ++i) {
            x(i) = s.lo(i) + ud(rng) * (s.hi(i) - s.lo(i));
          }
          return x;
        }
      },
      shape_);
}

bool Domain::operator==(const Domain& other) const {
  if (kind() != other.kind() || dim() != other.dim()) return false;
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        const auto& o = std::get<T>(other.shape_);
        if constexpr (std::is_same_v<T, SimplexDomain>) {
          return s.floor == o.floor;
        } else if constexpr (std::is_same_v<T, BallDomain>) {
          return s.radius == o.radius && s.center == o.center;
        } else {
          return s.lo == o.lo && s.hi == o.hi;
        }
      },
      shape_);
}

// ---------------------------------------------------------------------------
// ConstraintFn

ConstraintFn::ConstraintFn(Variant v) : v_(std::move(v)), dim_(0) {
  dim_ = std::visit(
      [](const auto& fam) -> int {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, Affine>) {
          if (fam.a.size() < 1) fail(ErrorCode::kInvalidArgument, "affine: empty a");
          if (!all_finite(fam.a) || !std::isfinite(fam.b)) {
            fail(ErrorCode::kInvalidArgument, "affine: coefficients not finite");
          }
          return static_cast<int>(fam.a.size());
        } else if constexpr (std::is_same_v<T, Quadratic>) {
          const auto n = fam.A.rows();
          if (n < 1 || fam.A.cols() != n || fam.b.size() != n) {
            fail(ErrorCode::kDimensionMismatch, "quadratic: A must be n x n and b length n");
          }
          if (!fam.A.allFinite() || !all_finite(fam.b) || !std::isfinite(fam.c)) {
            fail(ErrorCode::kInvalidArgument, "quadratic: coefficients not finite");
          }
          const double scale = std::max(1.0, fam.A.cwiseAbs().maxCoeff());
          if ((fam.A - fam.A.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
            fail(ErrorCode::kInvalidArgument, "quadratic: A is not symmetric");
          }
          return static_cast<int>(n);
        } else if constexpr (std::is_same_v<T, LogAffineComposite>) {
          if (!fam.inner) fail(ErrorCode::kInvalidArgument, "log composite: missing inner");
          if (!(fam.omega > 0.0) || !std::isfinite(fam.omega)) {
            fail(ErrorCode::kInvalidArgument, "log composite: omega must be positive");
          }
          return fam.inner->dim();
        } else if constexpr (std::is_same_v<T, NegEntropy>) {
          if (fam.n < 1) fail(ErrorCode::kInvalidArgument, "neg entropy: n >= 1");
          return fam.n;
        } else if constexpr (std::is_same_v<T, NormDistSq>) {
          if (fam.center.size() < 1) fail(ErrorCode::kInvalidArgument, "norm dist: empty center");
          if (!all_finite(fam.center) || !std::isfinite(fam.c)) {
            fail(ErrorCode::kInvalidArgument, "norm dist: coefficients not finite");
          }
          return static_cast<int>(fam.center.size());
        } else {
          if (fam.terms.empty()) fail(ErrorCode::kInvalidArgument, "combination: no terms");
          if (!std::isfinite(fam.constant)) {
            fail(ErrorCode::kInvalidArgument, "combination: constant not finite");
          }
          int n = -1;
          for (const auto& t : fam.terms) {
            if (!t.fn) fail(ErrorCode::kInvalidArgument, "combination: missing term");
            if (!std::isfinite(t.weight)) {
              fail(ErrorCode::kInvalidArgument, "combination: weight not finite");
            }
            if (n >= 0 && t.fn->dim() != n) {
              fail(ErrorCode::kDimensionMismatch, "combination: term dimensions differ");
            }
            n = t.fn->dim();
          }
          return n;
        }
      },
      v_);
}

ConstraintFn ConstraintFn::constant(int n, double value) {
  return ConstraintFn(Affine{Vector::Zero(n), value});
}

bool ConstraintFn::is_affine() const {
  return std::visit(
      [](const auto& fam) -> bool {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, Affine>) {
          return true;
        } else if constexpr (std::is_same_v<T, Quadratic>) {
          return fam.A.isZero(0.0);
        } else if constexpr (std::is_same_v<T, Combination>) {
          return std::all_of(fam.terms.begin(), fam.terms.end(),
                             [](const auto& t) { return t.fn->is_affine(); });
        } else {
          return false;
        }
      },
      v_);
}

ConstraintPtr share(ConstraintFn f) {
  return std::make_shared<const ConstraintFn>(std::move(f));
}

double evaluate(const ConstraintFn& f, const Vector& x) {
  check_dim(f, x);
  return std::visit(
      [&](const auto& fam) -> double {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, Affine>) {
          return fam.a.dot(x) + fam.b;
        } else if constexpr (std::is_same_v<T, Quadratic>) {
          return x.dot(fam.A * x) + fam.b.dot(x) + fam.c;
        } else if constexpr (std::is_same_v<T, LogAffineComposite>) {
          const double s = std::exp(1.0) + evaluate(*fam.inner, x) / fam.omega;
          if (!(s > 0.0)) {
            fail(ErrorCode::kDomainError, "log composite: argument e + inner/omega <= 0");
          }
          return std::log(s);
        } else if constexpr (std::is_same_v<T, NegEntropy>) {
          double acc = 0.0;
          for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (!(x(i) > 0.0)) fail(ErrorCode::kDomainError, "neg entropy: x_i <= 0");
            acc += x(i) * std::log(x(i));
          }
          return acc;
        } else if constexpr (std::is_same_v<T, NormDistSq>) {
          return (x - fam.center).squaredNorm() - fam.c;
        } else {
          double acc = fam.constant;
          for (const auto& t : fam.terms) acc += t.weight * evaluate(*t.fn, x);
          return acc;
        }
      },
      f.variant());
}

Vector gradient(const ConstraintFn& f, const Vector& x) {
  check_dim(f, x);
  return std::visit(
      [&](const auto& fam) -> Vector {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, Affine>) {
          return fam.a;
        } else if constexpr (std::is_same_v<T, Quadratic>) {
          return 2.0 * (fam.A * x) + fam.b;
        } else if constexpr (std::is_same_v<T, LogAffineComposite>) {
          const double s = std::exp(1.0) + evaluate(*fam.inner, x) / fam.omega;
          if (!(s > 0.0)) {
            fail(ErrorCode::kDomainError, "log composite: argument e + inner/omega <= 0");
          }
          return gradient(*fam.inner, x) / (fam.omega * s);
        } else if constexpr (std::is_same_v<T, NegEntropy>) {
          Vector g(x.size());
          for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (!(x(i) > 0.0)) fail(ErrorCode::kDomainError, "neg entropy: x_i <= 0");
            g(i) = std::log(x(i)) + 1.0;
          }
          return g;
        } else if constexpr (std::is_same_v<T, NormDistSq>) {
          return 2.0 * (x - fam.center);
        } else {
          Vector g = Vector::Zero(x.size());
          for (const auto& t : fam.terms) g += t.weight * gradient(*t.fn, x);
          return g;
        }
      },
      f.variant());
}

// ---------------------------------------------------------------------------
// Problems

Problem make_problem(std::vector<ConstraintFn> constraints, Domain domain,
                     const ProblemParams& params) {
  if (constraints.empty()) fail(ErrorCode::kInvalidArgument, "problem needs m >= 1");
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    if (constraints[j].dim() != domain.dim()) {
      std::ostringstream os;
      os << "constraint " << j << " has n=" << constraints[j].dim()
         << " but the domain has n=" << domain.dim();
      fail(ErrorCode::kDimensionMismatch, os.str());
    }
  }
  const bool ok = params.G > 0 && params.H >= 0 && params.omega > 0 &&
                  params.D > 0 && params.G_inf > 0 && params.alpha >= 0 &&
                  std::isfinite(params.G) && std::isfinite(params.omega) &&
                  std::isfinite(params.D) && std::isfinite(params.G_inf) &&
                  std::isfinite(params.H) && std::isfinite(params.alpha);
  if (!ok) fail(ErrorCode::kInvalidArgument, "problem params out of range");
  Problem p;
  p.constraints = std::move(constraints);
  p.domain = std::move(domain);
  p.params = params;
  return p;
}

Problem make_problem(std::vector<ConstraintFn> constraints, Domain domain) {
  Problem p;
  p.constraints = std::move(constraints);
  p.domain = std::move(domain);
  const ProblemParams params = estimate_parameters(p);
  return make_problem(std::move(p.constraints), std::move(p.domain), params);
}

Vector constraint_values(const Problem& problem, const Vector& x) {
  Vector v(problem.m());
  for (int j = 0; j < problem.m(); ++j) v(j) = evaluate(problem.constraints[j], x);
  return v;
}

double max_violation(const Problem& problem, const Vector& x) {
  return constraint_values(problem, x).maxCoeff();
}

void check_distribution(const Vector& p, int m) {
  if (p.size() != m) {
    std::ostringstream os;
    os << "distribution has length " << p.size() << ", expected " << m;
    fail(ErrorCode::kInvalidDistribution, os.str());
  }
  if (!all_finite(p) || p.minCoeff() < -kZeroTol || std::abs(p.sum() - 1.0) > 1e-9) {
    fail(ErrorCode::kInvalidDistribution,
         "p must be nonnegative and sum to 1 within 1e-9");
  }
}

double game_loss(const Problem& problem, const Vector& x, const Vector& p) {
  check_distribution(p, problem.m());
  double acc = 0.0;
  for (int j = 0; j < problem.m(); ++j) {
    if (p(j) != 0.0) acc += p(j) * evaluate(problem.constraints[j], x);
  }
  return acc;
}

ConstraintFn combine(const Problem& problem, const Vector& p) {
  const int n = problem.n();
  Matrix A = Matrix::Zero(n, n);
  Vector b = Vector::Zero(n);
  double c = 0.0;
  bool quadratic = false;
  Combination rest;
  for (int j = 0; j < problem.m(); ++j) {
    const double w = p(j);
    if (w == 0.0) continue;
    const auto& v = problem.constraints[j].variant();
    if (const auto* af = std::get_if<Affine>(&v)) {
      b += w * af->a;
      c += w * af->b;
    } else if (const auto* q = std::get_if<Quadratic>(&v)) {
      A += w * q->A;
      b += w * q->b;
      c += w * q->c;
      quadratic = true;
    } else if (const auto* nd = std::get_if<NormDistSq>(&v)) {
      A.diagonal().array() += w;
      b -= 2.0 * w * nd->center;
      c += w * (nd->center.squaredNorm() - nd->c);
      quadratic = true;
    } else {
      rest.terms.push_back({w, share(problem.constraints[j])});
    }
  }
  ConstraintFn folded = quadratic ? ConstraintFn(Quadratic{A, b, c})
                                  : ConstraintFn(Affine{b, c});
  if (rest.terms.empty()) return folded;
  rest.terms.push_back({1.0, share(std::move(folded))});
  return ConstraintFn(std::move(rest));
}

ViolationReport separation_oracle(const Problem& problem, const Vector& x,
                                  double eps) {
  if (!(eps >= 0.0)) fail(ErrorCode::kInvalidArgument, "separation oracle needs eps >= 0");
  double worst = -kInf;
  for (int j = 0; j < problem.m(); ++j) {
    const double v = evaluate(problem.constraints[j], x);
    if (v > eps) return {j, v};
    worst = std::max(worst, v);
  }
  return {std::nullopt, worst};
}

std::optional<Vector> optimization_oracle(const Problem& problem,
                                          const Vector& p, double tol) {
  check_distribution(p, problem.m());
  if (!(tol >= 0.0)) fail(ErrorCode::kInvalidArgument, "optimization oracle needs tol >= 0");
  const ConstraintFn g = combine(problem, p);

  if (g.is_affine()) {
    const AffineParts ab = affine_parts(g);
    Vector x = ab.a.isZero(0.0) ? problem.domain.start_point()
                                : problem.domain.linear_minimizer(ab.a);
    const double value = ab.a.dot(x) + ab.b;
    if (value <= kZeroTol) return x;
    return std::nullopt;
  }
  if (tol == 0.0) {
    fail(ErrorCode::kInvalidArgument, "optimization oracle needs tol > 0 for non-affine games");
  }

  MinimizeOptions opts;
  opts.gap_tol = -1.0;  // only the two early exits end the search
  opts.max_iters = kOracleIterationCap;
  opts.stop_at_value = tol;
  opts.stop_at_lower_bound = 0.0;
  const MinimizeResult r = minimize_over_domain(
      objective_of(g), problem.domain, problem.domain.start_point(), opts);
  switch (r.status) {
    case MinimizeStatus::kReachedValue:
      return r.x;
    case MinimizeStatus::kCertifiedLowerBound:
      return std::nullopt;
    default:
      break;
  }
  std::ostringstream os;
  os << "optimization oracle: no verdict after " << r.iterations
     << " iterations (value " << r.value << ", lower bound " << r.lower_bound << ")";
  fail(ErrorCode::kNonConvergence, os.str());
}

// ---------------------------------------------------------------------------
// Parameter estimation

Interval value_range(const ConstraintFn& f, const Domain& domain) {
  const Vector lo = domain.lower_corner();
  const Vector hi = domain.upper_corner();
  const Vector x0 = domain.start_point();
  const double R = radius_from_start(domain);
  return std::visit(
      [&](const auto& fam) -> Interval {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, Affine>) {
          const Vector xmin = domain.linear_minimizer(fam.a);
          const Vector xmax = domain.linear_minimizer(-fam.a);
          return {fam.a.dot(xmin) + fam.b, fam.a.dot(xmax) + fam.b};
        } else if constexpr (std::is_same_v<T, Quadratic>) {
          const auto n = fam.A.rows();
          Interval acc = point(fam.c);
          for (Eigen::Index i = 0; i < n; ++i) {
            const Interval xi{lo(i), hi(i)};
            acc = acc + scale(square(xi), fam.A(i, i)) + scale(xi, fam.b(i));
            for (Eigen::Index k = i + 1; k < n; ++k) {
              acc = acc + scale(mul(xi, Interval{lo(k), hi(k)}), 2.0 * fam.A(i, k));
            }
          }
          // Expansion around the start point over a ball of radius R.
          const auto [lmin, lmax] = eigen_range(fam.A);
          const double f0 = x0.dot(fam.A * x0) + fam.b.dot(x0) + fam.c;
          const double g0 = (2.0 * (fam.A * x0) + fam.b).norm();
          const Interval local{f0 - g0 * R + std::min(0.0, lmin) * R * R,
                               f0 + g0 * R + std::max(0.0, lmax) * R * R};
          return intersect(acc, local);
        } else if constexpr (std::is_same_v<T, LogAffineComposite>) {
          const Interval in = value_range(*fam.inner, domain);
          const Interval s{std::exp(1.0) + in.lo / fam.omega,
                           std::exp(1.0) + in.hi / fam.omega};
          if (!(s.lo > 0.0)) {
            fail(ErrorCode::kUnbounded,
                 "log composite: e + inner/omega can reach 0 on the domain");
          }
          return {std::log(s.lo), std::log(s.hi)};
        } else if constexpr (std::is_same_v<T, NegEntropy>) {
          if (lo.minCoeff() < 0.0) {
            fail(ErrorCode::kUnbounded, "neg entropy: domain reaches negative coordinates");
          }
          Interval acc = point(0.0);
          for (Eigen::Index i = 0; i < lo.size(); ++i) acc = acc + xlogx_range(lo(i), hi(i));
          if (domain.kind() == DomainKind::kSimplex) {
            acc = intersect(acc, Interval{-std::log(static_cast<double>(lo.size())), 0.0});
          }
          return acc;
        } else if constexpr (std::is_same_v<T, NormDistSq>) {
          Interval acc = point(-fam.c);
          for (Eigen::Index i = 0; i < lo.size(); ++i) {
            acc = acc + square(Interval{lo(i) - fam.center(i), hi(i) - fam.center(i)});
          }
          const double dmax = (x0 - fam.center).norm() + R;
          return intersect(acc, Interval{-fam.c, dmax * dmax - fam.c});
        } else {
          Interval acc = point(fam.constant);
          for (const auto& t : fam.terms) acc = acc + scale(value_range(*t.fn, domain), t.weight);
          return acc;
        }
      },
      f.variant());
}

double gradient_bound(const ConstraintFn& f, const Domain& domain) {
  const Vector lo = domain.lower_corner();
  const Vector hi = domain.upper_corner();
  const Vector x0 = domain.start_point();
  const double R = radius_from_start(domain);
  return std::visit(
      [&](const auto& fam) -> double {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, Affine>) {
          return fam.a.norm();
        } else if constexpr (std::is_same_v<T, Quadratic>) {
          const auto n = fam.A.rows();
          Vector comp(n);
          for (Eigen::Index k = 0; k < n; ++k) {
            Interval acc = point(fam.b(k));
            for (Eigen::Index i = 0; i < n; ++i) {
              acc = acc + scale(Interval{lo(i), hi(i)}, 2.0 * fam.A(k, i));
            }
            comp(k) = abs_max(acc);
          }
          const auto [lmin, lmax] = eigen_range(fam.A);
          const double op = std::max(std::abs(lmin), std::abs(lmax));
          const double local = (2.0 * (fam.A * x0) + fam.b).norm() + 2.0 * op * R;
          return std::min(comp.norm(), local);
        } else if constexpr (std::is_same_v<T, LogAffineComposite>) {
          const Interval in = value_range(*fam.inner, domain);
          const double s_lo = std::exp(1.0) + in.lo / fam.omega;
          if (!(s_lo > 0.0)) {
            fail(ErrorCode::kUnbounded,
                 "log composite: e + inner/omega can reach 0 on the domain");
          }
          return gradient_bound(*fam.inner, domain) / (fam.omega * s_lo);
        } else if constexpr (std::is_same_v<T, NegEntropy>) {
          if (!(lo.minCoeff() > 0.0)) {
            fail(ErrorCode::kUnbounded,
                 "neg entropy: gradient unbounded unless the domain stays away "
                 "from x_i = 0 (use a simplex floor)");
          }
          double acc = 0.0;
          for (Eigen::Index i = 0; i < lo.size(); ++i) {
            const double g = std::max(std::abs(std::log(lo(i)) + 1.0),
                                      std::abs(std::log(hi(i)) + 1.0));
            acc += g * g;
          }
          return std::sqrt(acc);
        } else if constexpr (std::is_same_v<T, NormDistSq>) {
          double acc = 0.0;
          for (Eigen::Index i = 0; i < lo.size(); ++i) {
            const double g = 2.0 * std::max(std::abs(lo(i) - fam.center(i)),
                                            std::abs(hi(i) - fam.center(i)));
            acc += g * g;
          }
          return std::min(std::sqrt(acc), 2.0 * ((x0 - fam.center).norm() + R));
        } else {
          double acc = 0.0;
          for (const auto& t : fam.terms) acc += std::abs(t.weight) * gradient_bound(*t.fn, domain);
          return acc;
        }
      },
      f.variant());
}

Interval curvature_range(const ConstraintFn& f, const Domain& domain) {
  return std::visit(
      [&](const auto& fam) -> Interval {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, Affine>) {
          return {0.0, 0.0};
        } else if constexpr (std::is_same_v<T, Quadratic>) {
          const auto [lmin, lmax] = eigen_range(fam.A);
          return {2.0 * lmin, 2.0 * lmax};
        } else if constexpr (std::is_same_v<T, LogAffineComposite>) {
          // Hessian = H_in / (omega s) - g g' / (omega s)^2, s = e + inner/omega.
          const Interval in = value_range(*fam.inner, domain);
          const Interval s{fam.omega * (std::exp(1.0) + in.lo / fam.omega),
                           fam.omega * (std::exp(1.0) + in.hi / fam.omega)};
          if (!(s.lo > 0.0)) {
            fail(ErrorCode::kUnbounded,
                 "log composite: e + inner/omega can reach 0 on the domain");
          }
          const Interval h = div_positive(curvature_range(*fam.inner, domain), s);
          const double g = gradient_bound(*fam.inner, domain) / s.lo;
          return {h.lo - g * g, h.hi};
        } else if constexpr (std::is_same_v<T, NegEntropy>) {
          const Vector lo = domain.lower_corner();
          const Vector hi = domain.upper_corner();
          const double upper = lo.minCoeff() > 0.0 ? 1.0 / lo.minCoeff() : kInf;
          return {1.0 / hi.maxCoeff(), upper};
        } else if constexpr (std::is_same_v<T, NormDistSq>) {
          return {2.0, 2.0};
        } else {
          Interval acc = point(0.0);
          for (const auto& t : fam.terms) {
            const Interval c = curvature_range(*t.fn, domain);
            if (t.weight == 0.0) continue;
            acc = acc + scale(c, t.weight);
          }
          return acc;
        }
      },
      f.variant());
}

namespace {

// Exp-concavity modulus of one constraint. For c - w log(affine) the exact
// value 1/w is known; otherwise fall back to H/G^2, valid for any convex f
// with Hessian >= H and gradient norm <= G.
double exp_concavity(const ConstraintFn& f, const Domain& domain) {
  if (const auto* comb = std::get_if<Combination>(&f.variant())) {
    if (comb->terms.size() == 1 && comb->terms[0].weight < 0.0) {
      const auto* lac = std::get_if<LogAffineComposite>(&comb->terms[0].fn->variant());
      if (lac != nullptr && lac->inner->is_affine()) return -1.0 / comb->terms[0].weight;
    }
  }
  const double h = curvature_range(f, domain).lo;
  const double g = gradient_bound(f, domain);
  if (!(h > 0.0) || !(g > 0.0) || !std::isfinite(g)) return 0.0;
  return h / (g * g);
}

}  // namespace

ProblemParams estimate_parameters(const Problem& problem) {
  if (problem.constraints.empty()) fail(ErrorCode::kInvalidArgument, "problem needs m >= 1");
  ProblemParams p;
  double G = 0.0, width = 0.0, H = kInf, alpha = kInf;
  for (const auto& f : problem.constraints) {
    if (f.dim() != problem.n()) fail(ErrorCode::kDimensionMismatch, "constraint dimension");
    const Interval v = value_range(f, problem.domain);
    G = std::max(G, gradient_bound(f, problem.domain));
    width = std::max(width, abs_max(v));
    H = std::min(H, curvature_range(f, problem.domain).lo);
    alpha = std::min(alpha, exp_concavity(f, problem.domain));
  }
  if (!std::isfinite(G) || !std::isfinite(width)) {
    fail(ErrorCode::kUnbounded, "unbounded family/domain combination");
  }
  p.G = std::max(G, kTinyParam);
  p.H = std::max(0.0, H);
  p.omega = std::max(width, kTinyParam);
  p.D = problem.domain.diameter();
  p.G_inf = p.omega;
  p.alpha = std::isfinite(alpha) ? alpha : 0.0;
  return p;
}

}  // namespace gameopt
