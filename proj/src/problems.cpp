#include "gameopt/problems.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace gameopt {

const char* generator_family_name(GeneratorFamily family) {
  switch (family) {
    case GeneratorFamily::kQp: return "qp";
    case GeneratorFamily::kLp: return "lp";
    case GeneratorFamily::kPortfolio: return "portfolio";
    case GeneratorFamily::kEntropy: return "entropy";
    case GeneratorFamily::kCrp: return "crp";
  }
  return "unknown";
}

GeneratorFamily parse_generator_family(const std::string& name) {
  for (auto f : {GeneratorFamily::kQp, GeneratorFamily::kLp, GeneratorFamily::kPortfolio,
                 GeneratorFamily::kEntropy, GeneratorFamily::kCrp}) {
    if (name == generator_family_name(f)) return f;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown generator family '" + name + "'");
}

namespace {

void check_dims(int n, int m) {
  if (n < 1 || m < 1) throw Error(ErrorCode::kInvalidArgument, "generator needs n, m >= 1");
}

Vector gaussian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = N(rng);
  return v;
}

Vector uniform(int n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = U(rng);
  return v;
}

// Half uniform, half Dirichlet(1): interior with every coordinate >= 1/(2n).
Vector interior_simplex_point(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> E(1.0);
  Vector d(n);
  for (int i = 0; i < n; ++i) d(i) = E(rng);
  d /= d.sum();
  return 0.5 * Vector::Constant(n, 1.0 / n) + 0.5 * d;
}

Matrix sym(const Matrix& A) { return 0.5 * (A + A.transpose()); }

// (x - center)' A (x - center) - r as a Quadratic.
Quadratic bowl(const Matrix& A, const Vector& center, double r) {
  return Quadratic{A, -2.0 * (A * center), center.dot(A * center) - r};
}

}  // namespace

Matrix random_spd(const Vector& spectrum, std::mt19937_64& rng) {
  const auto n = spectrum.size();
  Matrix G(n, n);
  for (Eigen::Index j = 0; j < n; ++j) G.col(j) = gaussian(static_cast<int>(n), rng);
  const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ();
  return sym(Q * spectrum.asDiagonal() * Q.transpose());
}

// ---------------------------------------------------------------------------

Problem make_strict_qp(int n, int m, double H_target, bool feasible,
                       std::uint64_t seed, Vector* witness) {
  check_dims(n, m);
  if (!(H_target > 0.0)) throw Error(ErrorCode::kInvalidArgument, "strict QP needs H > 0");
  if (!feasible && (n < 2 || m < 2)) {
    throw Error(ErrorCode::kInvalidArgument, "infeasible strict QP needs n, m >= 2");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);

  // Spectra in [1.05 H, 2 H] keep lambda_min safely above H after rounding.
  auto matrix = [&] { return random_spd(uniform(n, 1.05 * H_target, 2.0 * H_target, rng), rng); };

  std::vector<ConstraintFn> cons;
  const Vector x_star = interior_simplex_point(n, rng);
  int j0 = 0;
  if (!feasible) {
    Vector e1 = Vector::Zero(n), e2 = Vector::Zero(n);
    e1(0) = 1.0;
    e2(1) = 1.0;
    const Matrix A1 = matrix();
    const Matrix A2 = matrix();
    // Unconstrained minimum of the average of the two bowls before shifting.
    const Vector xh = (A1 + A2).ldlt().solve(A1 * e1 + A2 * e2);
    const double q = 0.5 * ((xh - e1).dot(A1 * (xh - e1)) + (xh - e2).dot(A2 * (xh - e2)));
    const double r = q - 0.5;
    cons.emplace_back(bowl(A1, e1, r));
    cons.emplace_back(bowl(A2, e2, r));
    j0 = 2;
  }
  for (int j = j0; j < m; ++j) {
    const Matrix A = matrix();
    const Vector center = interior_simplex_point(n, rng) + 0.2 * gaussian(n, rng);
    const double r = (x_star - center).dot(A * (x_star - center)) + 0.1 + 0.3 * U(rng);
    cons.emplace_back(bowl(A, center, r));
  }
  if (witness != nullptr && feasible) *witness = x_star;
  return make_problem(std::move(cons), Domain::simplex(n));
}

Problem make_perceptron_lp(int n, int m, double margin, bool feasible,
                           std::uint64_t seed, Vector* witness) {
  check_dims(n, m);
  if (!feasible && m < 2) throw Error(ErrorCode::kInvalidArgument, "infeasible LP needs m >= 2");
  std::mt19937_64 rng(seed);
  std::vector<ConstraintFn> cons;
  auto push_row = [&](const Vector& row) { cons.emplace_back(Affine{-row / row.norm(), 0.0}); };

  if (!feasible) {
    const Vector d = uniform(n, 0.5, 1.0, rng);
    push_row(d);
    push_row(-d);
    for (int j = 2; j < m; ++j) push_row(gaussian(n, rng));
    return make_problem(std::move(cons), Domain::simplex(n));
  }

  if (!(margin >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "LP margin must be >= 0");
  const Vector x_star = interior_simplex_point(n, rng);
  const double reach = x_star.norm();
  if (margin >= reach * (1.0 - 1e-9)) {
    std::ostringstream os;
    os << "margin " << margin << " cannot be planted: the witness allows at most " << reach;
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  for (int j = 0; j < m; ++j) {
    const Vector g = gaussian(n, rng);
    auto slack = [&](double s) {
      const Vector u = g + s * x_star;
      return u.dot(x_star) / u.norm();
    };
    // Tilt the random row toward x* until the planted slack is reached.
    double lo = 0.0;
    double hi = 1.0;
    if (slack(0.0) < margin) {
      while (slack(hi) < margin) hi *= 2.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (slack(mid) >= margin ? hi : lo) = mid;
      }
    } else {
      hi = 0.0;
    }
    push_row(g + hi * x_star);
  }
  if (witness != nullptr) *witness = x_star;
  return make_problem(std::move(cons), Domain::simplex(n));
}

Problem make_portfolio_risk(int n, int m, std::uint64_t seed) {
  check_dims(n, m);
  std::mt19937_64 rng(seed);
  constexpr double beta = 1.0;
  const Vector u = Vector::Constant(n, 1.0 / n);
  std::vector<Matrix> sigmas;
  std::vector<Vector> returns;
  double min_eig = std::numeric_limits<double>::infinity();
  double alpha = std::numeric_limits<double>::infinity();
  for (int j = 0; j < m; ++j) {
    const Vector spectrum = uniform(n, 0.1, 1.0, rng);
    sigmas.push_back(random_spd(spectrum, rng));
    returns.push_back(uniform(n, 1.0, 1.2, rng));
    min_eig = std::min(min_eig, spectrum.minCoeff());
    alpha = std::min(alpha, returns.back().dot(u) - beta * u.dot(sigmas.back() * u));
  }
  alpha -= 0.05;
  std::vector<ConstraintFn> cons;
  for (int j = 0; j < m; ++j) cons.emplace_back(Quadratic{beta * sigmas[j], -returns[j], alpha});
  Problem p = make_problem(std::move(cons), Domain::simplex(n));
  p.params.H = 2.0 * beta * min_eig;
  return p;
}

Problem make_entropy_problem(int n, int m, double c, std::uint64_t seed,
                             std::optional<double> tau) {
  check_dims(n, m);
  if (!(c > 0.0)) throw Error(ErrorCode::kInvalidArgument, "entropy problem needs c > 0");
  std::mt19937_64 rng(seed);
  const Vector p_ref = interior_simplex_point(n, rng);
  double min_eig = std::numeric_limits<double>::infinity();

  std::vector<ConstraintFn> cons;
  const double level = tau.value_or((p_ref.array() * p_ref.array().log()).sum());
  Combination ent;
  ent.terms.push_back({1.0, share(ConstraintFn(NegEntropy{n}))});
  ent.constant = -level;
  cons.emplace_back(std::move(ent));

  for (int i = 0; i < m; ++i) {
    // A = U S V' with singular values in [0.5, 1.5]; A'A = V S^2 V'.
    const Vector s = uniform(n, 0.5, 1.5, rng);
    const Matrix AtA = random_spd(s.array().square().matrix(), rng);
    min_eig = std::min(min_eig, s.array().square().minCoeff());
    cons.emplace_back(bowl(AtA, p_ref, c));
  }
  Problem p = make_problem(std::move(cons), Domain::simplex(n, 0.01 / n));
  p.params.H = std::min(1.0, 2.0 * min_eig);
  return p;
}

Problem make_crp_problem(int n, int T_days, double c, std::uint64_t seed,
                         std::optional<double> tau) {
  if (n < 2 || T_days < 1) throw Error(ErrorCode::kInvalidArgument, "CRP needs n >= 2, T >= 1");
  if (!(c > 0.0)) throw Error(ErrorCode::kInvalidArgument, "CRP needs c > 0");
  std::mt19937_64 rng(seed);
  constexpr double e = std::numbers::e;
  const Vector p_ref = interior_simplex_point(n, rng);

  // log(y) = log(e + (y - e) / 1) as a log-affine composite.
  auto log_of = [&](const Vector& a) {
    return share(ConstraintFn(LogAffineComposite{share(ConstraintFn(Affine{a, -e})), 1.0}));
  };
  Combination obj;
  double value = 0.0;
  for (int t = 0; t < T_days; ++t) {
    const Vector r = uniform(n, 0.9, 1.1, rng);
    obj.terms.push_back({-1.0, log_of(r)});
    value += std::log(r.dot(p_ref));
  }
  for (int i = 0; i < n; ++i) {
    obj.terms.push_back({-1.0, log_of(Vector::Unit(n, i))});
    value += std::log(p_ref(i));
  }
  obj.constant = tau.value_or(value);

  std::vector<ConstraintFn> cons;
  cons.emplace_back(std::move(obj));
  cons.emplace_back(NormDistSq{p_ref, c});
  Problem p = make_problem(std::move(cons), Domain::simplex(n, 0.01 / n));
  p.params.H = 1.0;
  return p;
}

Problem generate(const GeneratorSpec& spec) {
  switch (spec.family) {
    case GeneratorFamily::kQp:
      return make_strict_qp(spec.n, spec.m, spec.H, spec.feasible, spec.seed);
    case GeneratorFamily::kLp:
      return make_perceptron_lp(spec.n, spec.m, spec.margin, spec.feasible, spec.seed);
    case GeneratorFamily::kPortfolio:
      return make_portfolio_risk(spec.n, spec.m, spec.seed);
    case GeneratorFamily::kEntropy:
      return make_entropy_problem(spec.n, spec.m, spec.c, spec.seed, spec.tau);
    case GeneratorFamily::kCrp:
      return make_crp_problem(spec.n, spec.T_days, spec.c, spec.seed, spec.tau);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown generator family");
}

}  // namespace gameopt
