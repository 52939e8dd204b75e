#include <cmath>
#include <random>

#include "doctest.h"
#include "gameopt/grid.hpp"
#include "gameopt/problems.hpp"
#include "oracles.hpp"

using namespace gameopt;

namespace {

bool same_problem(const Problem& a, const Problem& b, std::mt19937_64& rng) {
  if (a.m() != b.m() || !(a.domain == b.domain)) return false;
  for (int k = 0; k < 20; ++k) {
    const Vector x = a.domain.sample(rng);
    if (constraint_values(a, x) != constraint_values(b, x)) return false;
    for (int j = 0; j < a.m(); ++j) {
      if (gradient(a.constraints[j], x) != gradient(b.constraints[j], x)) return false;
    }
  }
  return true;
}

void check_sampled_bounds(const Problem& p, std::mt19937_64& rng, int samples = 10000) {
  int bad = 0;
  for (int k = 0; k < samples; ++k) {
    const Vector x = p.domain.sample(rng);
    for (const auto& f : p.constraints) {
      if (gradient(f, x).norm() > p.params.G * (1 + 1e-12)) ++bad;
      if (std::abs(evaluate(f, x)) > p.params.omega * (1 + 1e-12)) ++bad;
    }
  }
  CHECK(bad == 0);
}

double grid_lambda(const Problem& p) {
  return oracle::simplex3_lattice_min([&](const Vector& x) { return constraint_values(p, x).maxCoeff(); }, 300);
}

}  // namespace

TEST_CASE("random spd matrices have the requested spectrum") {
  std::mt19937_64 rng(1);
  const Vector spec = Vector::LinSpaced(5, 0.3, 2.0);
  const Matrix A = random_spd(spec, rng);
  CHECK((A - A.transpose()).norm() <= 1e-12);
  CHECK(oracle::min_eigenvalue(A) == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(oracle::min_eigenvalue(-A) == doctest::Approx(-2.0).epsilon(1e-10));
}

TEST_CASE("strict qp") {
  Vector witness;
  const Problem p = make_strict_qp(4, 5, 1.5, true, 42, &witness);
  CHECK(p.m() == 5);
  for (const auto& f : p.constraints) {
    const auto& q = std::get<Quadratic>(f.variant());
    CHECK(oracle::min_eigenvalue(q.A) >= 1.5 - 1e-10);
  }
  CHECK(separation_oracle(p, witness, 0.0).failed());
  CHECK(max_violation(p, witness) <= -0.1 + 1e-12);
  CHECK(p.params.H >= 2 * 1.5 - 1e-9);

  std::mt19937_64 rng(2);
  CHECK(same_problem(p, make_strict_qp(4, 5, 1.5, true, 42), rng));
  CHECK_FALSE(same_problem(p, make_strict_qp(4, 5, 1.5, true, 43), rng));
  check_sampled_bounds(p, rng);
}

TEST_CASE("infeasible strict qp has a positive grid value") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Problem p = make_strict_qp(3, 4, 1.0, false, seed);
    CHECK(grid_lambda(p) > 0.0);
  }
  CHECK_THROWS_AS((void)make_strict_qp(1, 2, 1.0, false, 1), Error);
}

TEST_CASE("perceptron lp") {
  Vector witness;
  const Problem p = make_perceptron_lp(5, 30, 0.05, true, 9, &witness);
  for (const auto& f : p.constraints) {
    const auto& a = std::get<Affine>(f.variant());
    CHECK(std::abs(a.a.norm() - 1.0) <= 1e-12);
  }
  CHECK(Domain::simplex(5).contains(witness));
  CHECK(max_violation(p, witness) <= -0.05 + 1e-12);
  std::mt19937_64 rng(3);
  CHECK(same_problem(p, make_perceptron_lp(5, 30, 0.05, true, 9), rng));
  check_sampled_bounds(p, rng);
  CHECK_THROWS_AS((void)make_perceptron_lp(5, 30, 2.0, true, 9), Error);
}

TEST_CASE("infeasible perceptron lp") {
  const Problem p = make_perceptron_lp(2, 6, 0.05, false, 4);
  // In the ">= 0" form, max_x min_j A_j x < 0; here min_x max_j f_j(x) > 0.
  double best = 0.0;
  oracle::simplex2_lattice_argmin([&](const Vector& x) { return constraint_values(p, x).maxCoeff(); }, 1000, &best);
  CHECK(best > 0.0);
  const Problem q = make_perceptron_lp(3, 6, 0.05, false, 5);
  CHECK(grid_lambda(q) > 0.0);
}

TEST_CASE("portfolio risk") {
  const Problem p = make_portfolio_risk(4, 3, 11);
  double lam = 1e300;
  for (const auto& f : p.constraints) {
    const auto& q = std::get<Quadratic>(f.variant());
    // beta = 1, so A is Sigma itself; the Hessian is 2 Sigma.
    const double e = oracle::min_eigenvalue(q.A);
    CHECK(e >= 0.1 - 1e-10);
    lam = std::min(lam, e);
    const Vector fd = oracle::finite_difference([&](const Vector& x) { return evaluate(f, x); }, Vector::Constant(4, 0.25));
    const Vector fd2 = oracle::finite_difference([&](const Vector& x) { return evaluate(f, x); }, Vector::Constant(4, 0.25) + 1e-3 * Vector::Unit(4, 0));
    CHECK((fd2 - fd)(0) / 1e-3 == doctest::Approx(2 * q.A(0, 0)).epsilon(1e-4));
  }
  CHECK(p.params.H == doctest::Approx(2 * lam).epsilon(1e-9));
  CHECK(max_violation(p, Vector::Constant(4, 0.25)) <= -0.05 + 1e-12);
  std::mt19937_64 rng(12);
  CHECK(same_problem(p, make_portfolio_risk(4, 3, 11), rng));
  check_sampled_bounds(p, rng);
}

TEST_CASE("entropy problem") {
  const Problem p = make_entropy_problem(4, 2, 0.1, 21);
  CHECK(evaluate(ConstraintFn(NegEntropy{4}), Vector::Constant(4, 0.25)) == doctest::Approx(-std::log(4.0)));
  // Hessian diag(1/p) at the uniform point is n I.
  const auto ent = [](const Vector& x) { return evaluate(ConstraintFn(NegEntropy{4}), x); };
  const Vector u = Vector::Constant(4, 0.25);
  const double h = 1e-4;
  const double second = (ent(u + h * Vector::Unit(4, 1)) + ent(u - h * Vector::Unit(4, 1)) - 2 * ent(u)) / (h * h);
  CHECK(second == doctest::Approx(4.0).epsilon(1e-5));

  // The ball constraints evaluate to -c at their center.
  for (int j = 1; j < p.m(); ++j) {
    const auto& q = std::get<Quadratic>(p.constraints[j].variant());
    // ||A(p - r)||^2 - c has its minimum -c where the gradient vanishes.
    const Vector center = q.A.ldlt().solve(-0.5 * q.b);
    CHECK(evaluate(p.constraints[j], center) == doctest::Approx(-0.1).epsilon(1e-9));
  }
  CHECK(p.params.H <= 1.0);
  std::mt19937_64 rng(22);
  CHECK(same_problem(p, make_entropy_problem(4, 2, 0.1, 21), rng));
  check_sampled_bounds(p, rng);
}

TEST_CASE("crp problem") {
  const Problem p = make_crp_problem(3, 10, 0.1, 31);
  CHECK(p.m() == 2);
  CHECK(p.params.H == doctest::Approx(1.0));
  const auto& ball = std::get<NormDistSq>(p.constraints[1].variant());
  CHECK(evaluate(p.constraints[1], ball.center) == doctest::Approx(-0.1));
  // Second difference of ||x - r||^2 - c is 2 along any unit direction.
  const auto f = [&](const Vector& x) { return evaluate(p.constraints[1], x); };
  const Vector x = Vector::Constant(3, 1.0 / 3);
  const Vector d = Vector::Unit(3, 0) - Vector::Unit(3, 1);
  CHECK((f(x + 0.01 * d) + f(x - 0.01 * d) - 2 * f(x)) / (0.0001 * d.squaredNorm()) == doctest::Approx(2.0));
  // The log barrier dominates curvature I on the simplex.
  const auto g = [&](const Vector& z) { return evaluate(p.constraints[0], z); };
  std::mt19937_64 rng(32);
  for (int k = 0; k < 200; ++k) {
    const Vector z = p.domain.sample(rng);
    const Vector dir = oracle::random_gaussian(3, rng);
    const Vector v = (dir.array() - dir.mean()).matrix().normalized();
    const double t = 1e-4;
    if (!p.domain.contains(z + t * v) || !p.domain.contains(z - t * v)) continue;
    CHECK((g(z + t * v) + g(z - t * v) - 2 * g(z)) / (t * t) >= 1.0 - 1e-3);
  }
  CHECK(same_problem(p, make_crp_problem(3, 10, 0.1, 31), rng));
  check_sampled_bounds(p, rng);
}

TEST_CASE("generate dispatches by family") {
  GeneratorSpec s;
  s.family = GeneratorFamily::kLp;
  s.n = 3;
  s.m = 4;
  s.seed = 5;
  std::mt19937_64 rng(1);
  CHECK(same_problem(generate(s), make_perceptron_lp(3, 4, 0.05, true, 5), rng));
  for (const char* name : {"qp", "lp", "portfolio", "entropy", "crp"}) {
    CHECK(std::string(generator_family_name(parse_generator_family(name))) == name);
  }
  CHECK_THROWS_AS((void)parse_generator_family("simplex"), Error);
}

TEST_CASE("grid visits the simplex lattice") {
  long count = 0;
  bool inside = true;
  const Domain d = Domain::simplex(3);
  for_each_grid_point(d, 0.1, [&](const Vector& x) {
    ++count;
    inside = inside && d.contains(x);
  });
  CHECK(count == 66);
  CHECK(inside);
  CHECK_THROWS_AS(for_each_grid_point(Domain::simplex(4), 0.1, [](const Vector&) {}), Error);
}
