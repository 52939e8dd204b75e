// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gameopt/cli.hpp"
#include "gameopt/harness.hpp"
#include "gameopt/online.hpp"
#include "gameopt/problems.hpp"
#include "gameopt/projections.hpp"
#include "gameopt/reductions.hpp"
#include "gameopt/solvers.hpp"
#include "oracles.hpp"

#ifndef GAMEOPT_TEST_DATA_DIR
#error "GAMEOPT_TEST_DATA_DIR must point at tests/data"
#endif

using namespace gameopt;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

// 1. Simplex projection vs a brute-force lattice minimizer.
Verdict projection_oracle() {
  std::mt19937_64 rng(101);
  std::vector<Vector> ys;
  for (int k = 0; k < 1000; ++k) ys.push_back(oracle::random_gaussian(2 + k % 5, rng));
  std::vector<Vector> xs(ys.size());
  const auto t0 = Clock::now();
  for (std::size_t k = 0; k < ys.size(); ++k) xs[k] = project_simplex(ys[k]);
  const double elapsed = seconds_since(t0);
  double worst_dist = 0.0;
  double worst_gap = -1e300;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    const Vector g = oracle::simplex_lattice_argmin(ys[k], 1000);
    worst_dist = std::max(worst_dist, (xs[k] - g).norm());
    worst_gap = std::max(worst_gap, (xs[k] - ys[k]).squaredNorm() - (g - ys[k]).squaredNorm());
  }
  const bool ok = worst_dist <= 2e-3 && worst_gap <= 0.0 && elapsed < 1.0;
  return {ok, fmt("max dist to grid %.2e (<= 2e-3), objective minus grid best %.2e (<= 0), %.4f s (< 1 s)",
                  worst_dist, worst_gap, elapsed)};
}

// 2. Finite-difference gradient checks over every family.
Verdict gradient_check() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  long checks = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + trial % 4;
    const Vector a = oracle::random_gaussian(n, rng);
    const Matrix M = oracle::random_gaussian(n * n, rng).reshaped(n, n);
    std::vector<ConstraintFn> fams;
    fams.push_back(ConstraintFn(Affine{a, 0.3}));
    fams.push_back(ConstraintFn(Quadratic{0.5 * (M + M.transpose()), oracle::random_gaussian(n, rng), -0.2}));
    fams.push_back(ConstraintFn(LogAffineComposite{share(ConstraintFn(Affine{a, 0.1})), 1.0 + a.cwiseAbs().maxCoeff()}));
    fams.push_back(ConstraintFn(NegEntropy{n}));
    fams.push_back(ConstraintFn(NormDistSq{oracle::random_gaussian(n, rng), 0.4}));
    Combination c;
    c.terms.push_back({0.7, share(fams[1])});
    c.terms.push_back({-1.3, share(fams[2])});
    c.terms.push_back({2.0, share(fams[3])});
    fams.push_back(ConstraintFn(std::move(c)));
    const Vector x = 0.5 * oracle::random_simplex_point(n, rng) + 0.5 * Vector::Constant(n, 1.0 / n);
    for (const auto& f : fams) {
      const Vector g = gradient(f, x);
      const Vector fd = oracle::finite_difference([&](const Vector& z) { return evaluate(f, z); }, x, 1e-6);
      worst = std::max(worst, (g - fd).norm() / (1.0 + g.norm()));
      ++checks;
    }
  }
  return {worst <= 1e-5, fmt("%.0f checks over 6 families, worst relative error %.2e (<= 1e-5)",
                             static_cast<double>(checks), worst)};
}

// 3. OGD regret on strongly convex streams.
Verdict ogd_regret() {
  const auto t0 = Clock::now();
  RegretExperimentOptions o;
  o.learner = LearnerKind::kOgd;
  o.adversary = Adversary::kStronglyConvex;
  o.horizons = {100, 1000, 10000, 100000};
  o.seeds = 5;
  o.n = 5;
  o.H = 1.0;
  const ExperimentReport r = regret_experiment(o);
  // The stream's gradients are H (x - z) with x, z on the simplex: G = sqrt(2).
  const double G2 = 2.0;
  double worst_ratio = 0.0;
  for (const auto& row : r.rows) worst_ratio = std::max(worst_ratio, row.max / std::log(row.x));
  const bool ok = worst_ratio <= 10.0 * G2 / o.H && r.fit.slope < 0.3;
  return {ok, fmt("max regret/log T %.3f (<= %.0f), fitted exponent %.3f (< 0.3), ", worst_ratio, 10.0 * G2,
                  r.fit.slope) +
                  fmt("%.1f s", seconds_since(t0))};
}

// 4. MW regret upper bound and the adversarial lower bound.
Verdict mw_regret() {
  const auto t0 = Clock::now();
  double worst_excess = -1e300;
  for (long T : {100L, 1000L, 10000L, 100000L}) {
    for (int s = 0; s < 20; ++s) {
      const double reg = regret_run(LearnerKind::kMw, Adversary::kRandomSigns, T, 5000 + 7919 * s + T);
      worst_excess = std::max(worst_excess, reg - 2.0 * std::sqrt(T * std::log(2.0)));
    }
  }
  const long T = 10000;
  double mean = 0.0;
  for (int s = 0; s < 100; ++s) mean += regret_run(LearnerKind::kMw, Adversary::kRandomSigns, T, 90000 + s);
  mean /= 100.0;
  const double floor = 0.3 * std::sqrt(static_cast<double>(T));
  const bool ok = worst_excess <= 0.0 && mean >= floor;
  return {ok, fmt("max regret minus 2 sqrt(T log 2) %.2f (<= 0) over 80 runs; mean regret at T=1e4 %.2f (>= %.0f), ",
                  worst_excess, mean, floor) +
                  fmt("%.1f s", seconds_since(t0))};
}

Verdict scaling(GeneratorFamily family, bool feasible, Algo algo, LearnerKind learner, double lo, double hi) {
  const auto t0 = Clock::now();
  ScalingExperimentOptions o;
  o.generator.family = family;
  o.generator.n = 10;
  o.generator.m = 20;
  o.generator.H = 1.0;
  o.generator.feasible = feasible;
  o.generator.seed = 1;
  o.algo = algo;
  o.learner = learner;
  o.eps_ladder = {0.1, 0.05, 0.025};
  const ExperimentReport r = scaling_experiment(o);
  const double wall = seconds_since(t0);
  std::ostringstream its;
  for (const auto& row : r.rows) its << (its.tellp() > 0 ? "/" : "") << row.iterations << " (" << row.status << ")";
  const bool ok = r.complete && r.fit.slope >= lo && r.fit.slope <= hi && wall < 60.0;
  return {ok, fmt("fitted exponent %.3f in [%.1f, ", r.fit.slope, lo) + fmt("%.1f], ", hi) + "iterations " + its.str() +
                  fmt(", %.2f s (< 60 s)", wall)};
}

// 5. PrimalGameOpt + OGD on strict QPs: iterations grow like 1/eps.
Verdict scaling_primal() {
  return scaling(GeneratorFamily::kQp, false, Algo::kPrimal, LearnerKind::kOgd, 0.8, 1.3);
}

// 6. DualGameOpt + MW on affine instances: iterations grow like 1/eps^2.
Verdict scaling_dual() {
  return scaling(GeneratorFamily::kLp, true, Algo::kDual, LearnerKind::kMw, 1.7, 2.3);
}

// 7. Certificate soundness on 50 small instances.
Verdict certificates() {
  const auto t0 = Clock::now();
  const double eps = 0.1;
  int instances = 0, runs = 0, verified = 0, wrong_kind = 0, contradictions = 0;
  std::string first_failure;
  auto run = [&](const Problem& p, bool feasible, Algo algo, LearnerKind learner, DualityMonitor& mon) {
    SolveOptions o;
    o.eps = eps;
    o.learner = learner;
    const SolveResult r = solve(p, algo, o);
    ++runs;
    const VerifyReport rep = verify_certificate(p, r.outcome, r.guarantee, VerifyMethod::kGrid);
    if (rep.ok) {
      ++verified;
    } else if (first_failure.empty()) {
      first_failure = std::string(algo_name(algo)) + " " + outcome_name(r.outcome) + ": " + rep.detail;
    }
    const bool says_feasible = std::holds_alternative<Feasible>(r.outcome);
    if (says_feasible != feasible) ++wrong_kind;
    if (!mon.record(r.outcome, eps)) ++contradictions;
  };
  for (int k = 0; k < 25; ++k) {
    for (bool feas : {true, false}) {
      const std::uint64_t seed = 700 + static_cast<std::uint64_t>(k);
      const int n = 2 + k % 2;
      ++instances;
      if (k % 2 == 0) {
        const Problem p = make_strict_qp(n, 3, 1.0, feas, seed);
        DualityMonitor mon(p);
        run(p, feas, Algo::kPrimal, LearnerKind::kOgd, mon);
        run(p, feas, Algo::kPrimalDual, LearnerKind::kOgd, mon);
      } else {
        const Problem p = make_perceptron_lp(n, 4, 0.15, feas, seed);
        DualityMonitor mon(p);
        run(p, feas, Algo::kDual, LearnerKind::kMw, mon);
        run(p, feas, Algo::kPrimalDual, LearnerKind::kMw, mon);
        run(p, feas, Algo::kPrimal, LearnerKind::kMw, mon);
      }
    }
  }
  const bool ok = verified == runs && wrong_kind == 0 && contradictions == 0;
  std::string d = fmt("%.0f instances, %.0f/%.0f outcomes grid-verified", instances, verified, runs) +
                  fmt(", %.0f misclassified, %.0f contradiction events", wrong_kind, contradictions) +
                  fmt(", %.1f s", seconds_since(t0));
  if (!first_failure.empty()) d += "; first failure: " + first_failure;
  return {ok, d};
}

// 8. Strictified affine instances solved at eps are 2 eps-feasible.
Verdict strictify_transfer() {
  const double eps = 0.05;
  const StrictifyPlan plan = strictify_guarantee(eps);
  double worst = -1e300;
  int feasible = 0;
  for (int k = 0; k < 20; ++k) {
    const Problem p = make_perceptron_lp(3 + k % 3, 6, 0.02, true, 900 + static_cast<std::uint64_t>(k));
    const Problem s = strictify(p, plan.delta);
    SolveOptions o;
    o.eps = eps;
    const SolveResult r = primal_game_opt(s, o);
    if (!std::holds_alternative<Feasible>(r.outcome)) continue;
    ++feasible;
    worst = std::max(worst, max_violation(p, std::get<Feasible>(r.outcome).x));
  }
  const bool ok = feasible == 20 && worst <= plan.final_eps;
  return {ok, fmt("%.0f/20 feasible, worst original residual %.4f (<= %.2f)", feasible, worst, plan.final_eps)};
}

// 9. Game value of the log transform on small affine instances.
Verdict log_identity() {
  std::mt19937_64 rng(909);
  double worst_excess = -1e300;
  double worst_err = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Problem p = make_problem({ConstraintFn(Affine{oracle::random_gaussian(2, rng), 0.3 * oracle::random_gaussian(1, rng)(0)}),
                                    ConstraintFn(Affine{oracle::random_gaussian(2, rng), 0.3 * oracle::random_gaussian(1, rng)(0)})},
                                   Domain::simplex(2));
    const double omega = p.params.omega;
    const Problem t = log_transform(p, omega);
    const LambdaStar lp = brute_force_lambda_star(p, 1e-3);
    const LambdaStar lt = brute_force_lambda_star(t, 1e-3);
    const double rho = -lp.value;
    const double lambda_log = 1.0 - lt.value;
    // d/d rho log(e + rho/omega) <= 1 / (omega (e - 1)) on the width range.
    const double slack = lt.slack + lp.slack / (omega * (std::numbers::e - 1.0));
    const double err = std::abs(lambda_log - log_game_value(rho, omega));
    worst_err = std::max(worst_err, err);
    worst_excess = std::max(worst_excess, err - slack);
  }
  return {worst_excess <= 0.0, fmt("20 instances, worst |lambda_log - log(e + rho/omega)| %.2e, worst excess over slack %.2e (<= 0)",
                                   worst_err, worst_excess)};
}

// 10. Saddle value of the symmetric affine game.
Verdict saddle_value() {
  const Problem p = make_problem({ConstraintFn(Affine{vec({1, -1}), 0.0}), ConstraintFn(Affine{vec({-1, 1}), 0.0})},
                                 Domain::simplex(2));
  SolveOptions o;
  o.eps = 0.05;
  o.learner = LearnerKind::kMw;
  const SolveResult r = primal_dual_game_opt(p, o);
  if (!std::holds_alternative<Feasible>(r.outcome)) return {false, std::string("outcome ") + outcome_name(r.outcome)};
  const Feasible& f = std::get<Feasible>(r.outcome);
  const double value = f.residuals.maxCoeff();
  return {std::abs(value) <= 0.05, fmt("recovered value %.2e (|.| <= 0.05) at x = (%.4f, %.4f)", value, f.x(0), f.x(1))};
}

// 11. ONS inverse consistency and initialization.
Verdict ons_stability() {
  const int n = 10;
  const Domain d = Domain::simplex(n);
  OnsState st = make_ons(d, 1.0, d.diameter(), 1.0);
  std::mt19937_64 rng(1111);
  for (int t = 0; t < 10000; ++t) {
    st = ons_step(std::move(st), oracle::random_gaussian(n, rng) / std::sqrt(static_cast<double>(n)), d, Sense::kMinimize);
  }
  const double drift = (st.A * st.A_inv - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  const OnsState init = make_ons(Domain::simplex(2), 1.0, 1.0, 1.0);
  const bool exact = init.beta == 0.125 && init.A == 64.0 * Matrix::Identity(2, 2);
  return {drift <= 1e-6 && exact,
          fmt("max |A A_inv - I| %.2e (<= 1e-6) after 1e4 updates (%.0f rebuilds); beta %.6g", drift, st.rebuilds, init.beta) +
              (exact ? ", A0 = 64 I" : ", A0 != 64 I")};
}

// 12. CLI exit codes on the toy files and standalone re-verification.
Verdict cli_end_to_end() {
  const fs::path data(GAMEOPT_TEST_DATA_DIR);
  const fs::path tmp = fs::temp_directory_path() / ("gameopt_accept_" + std::to_string(std::random_device{}()));
  fs::create_directories(tmp);
  auto call = [](std::vector<std::string> args) {
    args.insert(args.begin(), "gameopt");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  };
  struct Case {
    const char* file;
    std::vector<std::string> extra;
    int expect;
    int verify_expect;
  };
  const Case cases[] = {
      {"toy_feasible.json", {"--algo", "primal", "--learner", "ogd", "--eps", "0.1"}, kExitFeasible, 0},
      {"toy_infeasible.json", {"--algo", "primal", "--learner", "ogd", "--eps", "0.1"}, kExitInfeasible, 0},
      {"toy_hard.json", {"--max-iters", "1"}, kExitExhausted, kExitUnverified},
  };
  std::string detail;
  bool ok = true;
  for (const auto& c : cases) {
    const std::string out = (tmp / (std::string(c.file) + ".outcome")).string();
    std::vector<std::string> args = {"solve", "--problem", (data / c.file).string(), "--out", out};
    args.insert(args.end(), c.extra.begin(), c.extra.end());
    const int code = call(args);
    const int vcode = call({"verify", "--outcome", out});
    std::ifstream in(out);
    std::stringstream text;
    text << in.rdbuf();
    const bool standalone = verify_outcome_document(text.str()).ok == (c.verify_expect == 0);
    ok = ok && code == c.expect && vcode == c.verify_expect && standalone;
    detail += std::string(detail.empty() ? "" : ", ") + c.file + " exit " + std::to_string(code) + " (want " +
              std::to_string(c.expect) + "), verify " + std::to_string(vcode);
  }
  fs::remove_all(tmp);
  return {ok, detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Verdict (*check)();
  };
  const Criterion criteria[] = {
      {"projection oracle equivalence", projection_oracle},
      {"gradient correctness", gradient_check},
      {"OGD log-regret", ogd_regret},
      {"MW sqrt(T) regret upper and lower", mw_regret},
      {"iteration scaling, strictly convex path", scaling_primal},
      {"iteration scaling, MW dual path", scaling_dual},
      {"certificate soundness", certificates},
      {"strictify guarantee", strictify_transfer},
      {"log-transform identity", log_identity},
      {"saddle-value recovery", saddle_value},
      {"ONS numerical stability", ons_stability},
      {"end-to-end CLI", cli_end_to_end},
  };
  int failed = 0;
  int id = 0;
  for (const auto& c : criteria) {
    ++id;
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::cout << (v.pass ? "PASS" : "FAIL") << " C" << id << " " << c.name << ": " << v.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
