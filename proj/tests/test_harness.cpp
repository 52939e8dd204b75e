#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gameopt/cli.hpp"
#include "gameopt/harness.hpp"
#include "gameopt/reductions.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace gameopt;
namespace fs = std::filesystem;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

std::string parse_error(const std::string& text, ErrorCode expected = ErrorCode::kParse) {
  try {
    (void)parse_problem_file(text);
  } catch (const Error& e) {
    CHECK(e.code() == expected);
    return e.what();
  }
  FAIL("document was accepted: " << text);
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

const char* kMinimal = R"({"version": 1, "domain": {"kind": "simplex", "n": 2},
  "constraints": [{"family": "affine", "a": [1, 0], "b": -0.5}]})";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("gameopt_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& body) const {
    const fs::path p = path / name;
    std::ofstream(p) << body;
    return p.string();
  }
  std::string name(const std::string& n) const { return (path / n).string(); }
};

int cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  args.insert(args.begin(), "gameopt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out != nullptr) *out = o.str();
  if (err != nullptr) *err = e.str();
  return code;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("minimal problem file") {
  const Problem p = parse_problem_file(kMinimal);
  CHECK(p.m() == 1);
  CHECK(p.n() == 2);
  CHECK(evaluate(p.constraints[0], vec({0.5, 0.5})) == doctest::Approx(0.0));
}

TEST_CASE("emit and parse round trip byte for byte") {
  std::mt19937_64 rng(1);
  std::vector<Problem> problems = {parse_problem_file(kMinimal), make_strict_qp(3, 4, 1.0, true, 3),
                                   make_perceptron_lp(4, 5, 0.05, false, 4), make_portfolio_risk(3, 2, 5),
                                   make_entropy_problem(3, 2, 0.1, 6), make_crp_problem(3, 4, 0.1, 7),
                                   strictify(make_strict_qp(2, 2, 1.0, true, 8), 0.1),
                                   log_transform(make_strict_qp(2, 2, 1.0, true, 9)),
                                   make_problem({ConstraintFn(NormDistSq{vec({1, 2}), 0.5})}, Domain::ball(2, 2.0, vec({0.5, 0.5}))),
                                   make_problem({ConstraintFn(Affine{vec({1, 2}), 0.5})}, Domain::box(vec({-1, 0}), vec({1, 3})))};
  for (const Problem& p : problems) {
    const std::string text = emit_problem(p);
    const Problem q = parse_problem_file(text);
    CHECK(emit_problem(q) == text);
    CHECK(q.domain == p.domain);
    for (int k = 0; k < 20; ++k) {
      const Vector x = p.domain.sample(rng);
      CHECK(constraint_values(q, x) == constraint_values(p, x));
    }
    CHECK(q.params.G == p.params.G);
    CHECK(q.params.H == p.params.H);
    CHECK(q.params.omega == p.params.omega);
    CHECK(q.params.alpha == p.params.alpha);
  }
}

TEST_CASE("generator documents keep their generator settings") {
  const std::string text = R"({"version": 1, "generator": {"family": "lp", "n": 3, "m": 4, "seed": 7}})";
  const ProblemDocument doc = parse_problem_document(text);
  REQUIRE(doc.generator.has_value());
  CHECK(doc.generator->family == GeneratorFamily::kLp);
  CHECK(doc.generator->seed == 7);
  CHECK(doc.problem.m() == 4);
  const ProblemDocument again = parse_problem_document(emit_problem_document(doc));
  CHECK(again.generator == doc.generator);
  CHECK(emit_problem_document(again) == emit_problem_document(doc));
}

TEST_CASE("partial parameter overrides") {
  const std::string text = R"({"version": 1, "domain": {"kind": "simplex", "n": 2},
    "constraints": [{"family": "affine", "a": [3, 4], "b": 0}], "params": {"H": 0.5}})";
  const Problem p = parse_problem_file(text);
  CHECK(p.params.H == 0.5);
  CHECK(p.params.G == doctest::Approx(5.0));
}

TEST_CASE("strict parsing rejects bad documents") {
  CHECK(contains(parse_error(R"({"version": 1, "domain": {"kind": "simplex", "n": 2},
    "constraints": [{"family": "affine", "a": [1, 0], "b": 0, "extra": 1}]})"),
                 "constraints[0].extra"));
  CHECK(contains(parse_error(R"({"version": 1, "domain": {"kind": "simplex", "n": 2}, "constrains": []})"),
                 "constrains"));
  // Both and neither of constraints and generator.
  parse_error(R"({"version": 1, "domain": {"kind": "simplex", "n": 2}})");
  parse_error(R"({"version": 1, "domain": {"kind": "simplex", "n": 2},
    "constraints": [{"family": "affine", "a": [1, 0], "b": 0}], "generator": {"family": "qp"}})");
  // Dimension mismatch.
  CHECK(contains(parse_error(R"({"version": 1, "domain": {"kind": "simplex", "n": 3},
    "constraints": [{"family": "affine", "a": [1, 0], "b": 0}]})",
                             ErrorCode::kDimensionMismatch),
                 "constraints[0]"));
  parse_error(R"({"version": 2, "domain": {"kind": "simplex", "n": 2},
    "constraints": [{"family": "affine", "a": [1, 0], "b": 0}]})");
  parse_error(R"({"version": 1, "domain": {"kind": "pyramid", "n": 2},
    "constraints": [{"family": "affine", "a": [1, 0], "b": 0}]})");
  parse_error(R"({"version": 1, "domain": {"kind": "simplex", "n": 2},
    "constraints": [{"family": "cubic", "a": [1, 0], "b": 0}]})");
}

TEST_CASE("non-symmetric matrices are named") {
  const std::string msg = parse_error(R"({"version": 1, "domain": {"kind": "simplex", "n": 2},
    "constraints": [{"family": "affine", "a": [1, 0], "b": 0},
                    {"family": "quadratic", "A": [[1, 0.001], [0, 1]], "b": [0, 0], "c": 0}]})",
                                      ErrorCode::kInvalidArgument);
  CHECK(contains(msg, "constraints[1].A"));
  CHECK(contains(msg, "symmetric"));
}

TEST_CASE("syntax errors report line and column") {
  const std::string msg = parse_error("{\n  \"version\": 1,\n  \"domain\": {\"kind\": \"simplex\" \"n\": 2}\n}");
  CHECK(contains(msg, "line 3"));
}

TEST_CASE("trace rows") {
  TraceRecord r;
  r.iter = 3;
  r.violated_index = 1;
  r.violation = 0.1;
  r.game_loss = -2.5;
  r.regret_bound = std::log(4.0);
  r.elapsed_ns = 1234;
  const std::string row = format_trace_row(r);
  CHECK(row == "3,1,0.10000000000000001,-2.5,1.3862943611198906,1234");
  // 17 significant digits recover the double exactly.
  CHECK(std::stod("1.3862943611198906") == std::log(4.0));
  r.violated_index.reset();
  CHECK(format_trace_row(r).rfind("3,,", 0) == 0);

  std::ostringstream os;
  TraceWriter w(os);
  w(r);
  r.iter = 4;
  w(r);
  CHECK(os.str().rfind(std::string(kTraceHeader) + "\n", 0) == 0);
  CHECK_THROWS_AS(w(r), Error);
}

TEST_CASE("trace regret column matches the bound formula bit for bit") {
  const Problem p = make_problem({ConstraintFn(NormDistSq{Vector::Zero(2), 0.0})}, Domain::simplex(2));
  std::ostringstream os;
  TraceWriter w(os);
  SolveOptions o;
  o.eps = 0.2;
  o.trace = [&](const TraceRecord& r) { w(r); };
  (void)primal_game_opt(p, o);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  const RegretBoundSpec spec{LearnerKind::kOgd, p.params.G, p.params.H, p.params.D, 1.0, 2};
  long rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    REQUIRE(cols.size() == 6);
    const long t = std::stol(cols[0]);
    CHECK(t == ++rows);
    CHECK(std::stod(cols[4]) == regret_bound(spec, t));
  }
  CHECK(rows > 1);
}

TEST_CASE("lambda star examples") {
  const Problem bowl = make_problem({ConstraintFn(NormDistSq{Vector::Zero(2), 0.0})}, Domain::simplex(2));
  const LambdaStar a = brute_force_lambda_star(bowl, 1e-3);
  CHECK(std::abs(a.value - 0.5) <= a.slack + 1e-12);
  CHECK(a.argmin.isApprox(vec({0.5, 0.5})));

  const Problem neg = make_problem({ConstraintFn::constant(2, -1.0)}, Domain::simplex(2));
  CHECK(brute_force_lambda_star(neg, 1e-3).value == -1.0);

  const Problem sym = make_problem({ConstraintFn(Affine{vec({1, -1}), 0}), ConstraintFn(Affine{vec({-1, 1}), 0})},
                                   Domain::simplex(2));
  const LambdaStar s = brute_force_lambda_star(sym, 1e-3);
  CHECK(s.value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.argmin.isApprox(vec({0.5, 0.5})));

  CHECK_THROWS_AS((void)brute_force_lambda_star(make_strict_qp(4, 2, 1.0, true, 1), 1e-2), Error);
}

TEST_CASE("lambda star agrees with an independent lattice scan") {
  for (std::uint64_t seed : {1u, 2u}) {
    const Problem p = make_strict_qp(3, 3, 1.0, seed == 1, seed);
    const LambdaStar l = brute_force_lambda_star(p, 0.01);
    const double ref = oracle::simplex3_lattice_min([&](const Vector& x) { return constraint_values(p, x).maxCoeff(); }, 100);
    CHECK(l.value == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("log-log fit") {
  const LogLogFit f = fit_loglog({1, 10, 100}, {3, 30, 300});
  CHECK(f.slope == doctest::Approx(1.0));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)));
  CHECK(f.residual == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fit_loglog({1, 4, 16}, {1, 2, 4}).slope == doctest::Approx(0.5));
  CHECK_THROWS_AS((void)fit_loglog({1}, {1}), Error);
  CHECK_THROWS_AS((void)fit_loglog({1, 2}, {1, -1}), Error);
}

TEST_CASE("sign stream regret tracks the hindsight advantage") {
  // Independent Monte Carlo of E|sum r_t| for T = 10^4.
  std::mt19937_64 rng(99);
  std::bernoulli_distribution coin(0.5);
  const long T = 10000;
  double mc = 0.0;
  for (int s = 0; s < 1000; ++s) {
    long sum = 0;
    for (long t = 0; t < T; ++t) sum += coin(rng) ? 1 : -1;
    mc += std::abs(static_cast<double>(sum));
  }
  mc /= 1000.0;
  CHECK(mc == doctest::Approx(std::sqrt(2.0 * T / std::numbers::pi)).epsilon(0.06));

  double mean = 0.0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) mean += regret_run(LearnerKind::kMw, Adversary::kRandomSigns, T, 1000 + s);
  mean /= seeds;
  // MW's own cost is a zero-mean walk, so its regret averages near E|sum r_t|.
  CHECK(mean >= 0.3 * std::sqrt(static_cast<double>(T)));
  CHECK(mean == doctest::Approx(mc).epsilon(0.2));
}

TEST_CASE("regret experiment reports per horizon") {
  RegretExperimentOptions o;
  o.learner = LearnerKind::kOgd;
  o.adversary = Adversary::kStronglyConvex;
  o.horizons = {100, 1000};
  o.seeds = 3;
  o.workers = 2;
  const ExperimentReport r = regret_experiment(o);
  CHECK(r.kind == "regret");
  REQUIRE(r.rows.size() == 2);
  for (const auto& row : r.rows) {
    CHECK(row.mean <= row.max);
    CHECK(row.max <= row.bound);
  }
  CHECK(r.fit.slope < 0.5);
  const auto doc = nlohmann::json::parse(emit_report(r));
  CHECK(doc.at("rows").size() == 2);

  // Same options, same numbers regardless of worker count.
  o.workers = 1;
  const ExperimentReport again = regret_experiment(o);
  CHECK(again.rows[1].mean == r.rows[1].mean);
  CHECK_THROWS_AS((void)regret_run(LearnerKind::kOgd, Adversary::kRandomSigns, 100, 1), Error);
}

TEST_CASE("scaling experiment") {
  ScalingExperimentOptions o;
  o.generator.family = GeneratorFamily::kQp;
  o.generator.n = 3;
  o.generator.m = 4;
  o.generator.feasible = false;
  o.eps_ladder = {0.4, 0.2, 0.1};
  const ExperimentReport r = scaling_experiment(o);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.complete);
  for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].iterations >= r.rows[i - 1].iterations);
  CHECK(r.fit.slope > 0.5);

  o.max_iters = 10;
  CHECK_FALSE(scaling_experiment(o).complete);
  o.eps_ladder = {0.4, 0.3, 0.1};
  CHECK_THROWS_AS((void)scaling_experiment(o), Error);
  o.eps_ladder = {0.4, 0.2};
  CHECK_THROWS_AS((void)scaling_experiment(o), Error);
}

TEST_CASE("outcome documents verify on their own") {
  const Problem bowl = make_problem({ConstraintFn(NormDistSq{Vector::Zero(2), 0.0})}, Domain::simplex(2));
  OutcomeDocument doc;
  doc.eps = 0.1;
  doc.problem = bowl;
  doc.result = primal_game_opt(bowl, SolveOptions{});
  const std::string text = emit_outcome(doc);
  const DocumentVerdict v = verify_outcome_document(text);
  CHECK(v.ok);
  CHECK(emit_outcome(parse_outcome(text)) == text);

  // Tampering with the certificate breaks verification.
  auto j = nlohmann::json::parse(text);
  j["problem"]["constraints"][0]["c"] = 0.6;
  CHECK_FALSE(verify_outcome_document(j.dump()).ok);
}

TEST_CASE("command line end to end") {
  TempDir dir;
  const std::string feasible = dir.file("feasible.json", R"({"version": 1, "domain": {"kind": "simplex", "n": 2},
    "constraints": [{"family": "norm_dist_sq", "center": [0.5, 0.5], "c": 0.1}]})");
  const std::string infeasible = dir.file("infeasible.json", R"({"version": 1, "domain": {"kind": "simplex", "n": 2},
    "constraints": [{"family": "norm_dist_sq", "center": [0, 0], "c": 0}]})");

  std::string out, err;
  CHECK(cli({"solve", "--problem", feasible, "--algo", "primal", "--learner", "ogd", "--eps", "0.1", "--out",
             dir.name("o1.json")}) == kExitFeasible);
  const auto o1 = nlohmann::json::parse(slurp(dir.name("o1.json")));
  CHECK(o1.at("status") == "feasible");
  CHECK(o1.contains("residuals"));
  CHECK(cli({"verify", "--outcome", dir.name("o1.json")}) == 0);

  CHECK(cli({"solve", "--problem", infeasible, "--eps", "0.1", "--trace", dir.name("t.csv"), "--out",
             dir.name("o2.json")}) == kExitInfeasible);
  const auto o2 = nlohmann::json::parse(slurp(dir.name("o2.json")));
  CHECK(o2.at("p_bar").size() == 1);
  CHECK(cli({"verify", "--outcome", dir.name("o2.json")}) == 0);
  CHECK(slurp(dir.name("t.csv")).rfind(kTraceHeader, 0) == 0);

  CHECK(cli({"solve", "--problem", infeasible, "--max-iters", "1", "--out", dir.name("o3.json")}) == kExitExhausted);
  CHECK(nlohmann::json::parse(slurp(dir.name("o3.json"))).at("status") == "exhausted");
  CHECK(cli({"verify", "--outcome", dir.name("o3.json")}) == kExitUnverified);

  // Stdout is the default sink.
  CHECK(cli({"solve", "--problem", feasible}, &out) == kExitFeasible);
  CHECK(nlohmann::json::parse(out).at("status") == "feasible");
}

TEST_CASE("command line errors") {
  TempDir dir;
  const std::string lin = dir.file("lin.json", R"({"version": 1, "domain": {"kind": "simplex", "n": 2},
    "constraints": [{"family": "affine", "a": [1, -1], "b": 0.2}]})");
  std::string out, err;
  // OGD needs curvature the affine problem lacks.
  CHECK(cli({"solve", "--problem", lin, "--learner", "ogd"}, &out, &err) == kExitError);
  CHECK_FALSE(err.empty());
  // With strictify it runs.
  CHECK(cli({"solve", "--problem", lin, "--learner", "ogd", "--strictify", "auto"}, &out, &err) != kExitError);
  CHECK(cli({"solve", "--problem", dir.name("missing.json")}, &out, &err) == kExitError);
  CHECK(cli({"solve", "--problem", lin, "--algo", "dual", "--learner", "ogd"}, &out, &err) == kExitError);
  CHECK(cli({"solve", "--problem", lin, "--eps", "-1"}, &out, &err) == kExitError);
  CHECK(cli({"solve"}, &out, &err) == kExitError);
  CHECK(cli({"bogus"}, &out, &err) == kExitError);
  const std::string bad = dir.file("bad.json", "{\"version\": 1,\n \"domain\": }");
  CHECK(cli({"solve", "--problem", bad}, &out, &err) == kExitError);
  CHECK(contains(err, "line 2"));
}

TEST_CASE("command line generate and experiment") {
  TempDir dir;
  std::string out, err;
  CHECK(cli({"gen", "--family", "lp", "--n", "3", "--m", "5", "--seed", "4", "--out", dir.name("lp.json")}) == 0);
  const Problem p = load_problem_file(dir.name("lp.json"));
  CHECK(p.m() == 5);
  CHECK(cli({"gen", "--family", "qp", "--spec-only", "--infeasible"}, &out) == 0);
  CHECK(parse_problem_document(out).generator.has_value());
  CHECK(cli({"solve", "--problem", dir.name("lp.json"), "--algo", "dual", "--eps", "0.2"}, &out) == kExitFeasible);
  CHECK(cli({"experiment", "--kind", "regret", "--learner", "mw", "--adversary", "signs", "--T", "100,1000", "--seeds",
             "2"},
            &out, &err) == 0);
  CHECK(nlohmann::json::parse(out).at("kind") == "regret");
}

TEST_CASE("log transform and strictify flow through the command line") {
  TempDir dir;
  const std::string lin = dir.file("lin.json", R"({"version": 1, "domain": {"kind": "simplex", "n": 2},
    "constraints": [{"family": "affine", "a": [1, -1], "b": -0.2}, {"family": "affine", "a": [-1, 1], "b": -0.2}]})");
  std::string out, err;
  CHECK(cli({"solve", "--problem", lin, "--learner", "ons", "--log-transform", "--eps", "0.3", "--out",
             dir.name("o.json")},
            &out, &err) == kExitFeasible);
  const auto doc = nlohmann::json::parse(slurp(dir.name("o.json")));
  CHECK(doc.contains("original_problem"));
  CHECK(doc.at("transform").contains("log_omega"));
  CHECK(cli({"verify", "--outcome", dir.name("o.json")}) == 0);
}
